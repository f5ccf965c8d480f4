#include <cmath>
#include <optional>
#include <vector>

#include "internal.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

namespace {

struct SimpleFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};

std::optional<SimpleFit> fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n < 4) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 1e-12) return std::nullopt;
    SimpleFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double ssr = syy - fit.slope * sxy;  // residual sum of squares
    fit.r2 = syy <= 1e-12 ? (std::abs(ssr) <= 1e-12 ? 1.0 : 0.0) : 1.0 - ssr / syy;
    return fit;
}

}  // namespace

// Demand regression on own price only: the four combinations of log
// transforms on price and demand compete on R^2, the winner's implied
// revenue is optimized by line search, and occasional random prices keep the
// data varied. The "competitive disruption" branch posts price 0 outright.
class OlsStrategy final : public Strategy {
public:
    OlsStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {}

    std::string_view id() const override { return "ols"; }

    double next_price(const StrategyObservation& obs) override {
        if (obs.t < hp_.ols_explore_periods) return explore();
        if (stream_.uniform01() < hp_.ols_disrupt_prob) return 0.0;
        if (stream_.uniform01() < hp_.ols_explore_prob) return explore();

        // model_id bit 0: log price, bit 1: log demand
        std::optional<SimpleFit> best;
        int best_model = -1;
        for (int model = 0; model < 4; ++model) {
            const bool log_p = model & 1;
            const bool log_d = model & 2;
            std::vector<double> xs, ys;
            xs.reserve(obs.t);
            ys.reserve(obs.t);
            for (int p = 0; p < obs.t; ++p) {
                const double price = obs.own_price_at(p);
                const double demand = obs.own_sales_at(p);
                if (log_p && price <= 0.0) continue;
                if (log_d && demand <= 0.0) continue;
                xs.push_back(log_p ? std::log(price) : price);
                ys.push_back(log_d ? std::log(demand) : demand);
            }
            const auto fit = fit_line(xs, ys);
            if (fit && (!best || fit->r2 > best->r2)) {
                best = fit;
                best_model = model;
            }
        }
        if (!best) return explore();

        const bool log_p = best_model & 1;
        const bool log_d = best_model & 2;
        const auto predicted = [&](double p) {
            const double x = log_p ? std::log(p) : p;
            const double y = best->intercept + best->slope * x;
            return log_d ? std::exp(y) : y;
        };
        const auto point = detail::grid_argmax(0.0, 100.0, hp_.line_step, true,
                                               [&](double p) { return p * predicted(p); });
        const double perturbed = point.x + stream_.uniform(-hp_.ols_perturb, hp_.ols_perturb);
        return std::max(0.0, perturbed);
    }

private:
    double explore() { return stream_.uniform(0.0, 100.0); }

    Hyperparams hp_;
    RngStream stream_;
};

StrategyPtr make_ols(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<OlsStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
