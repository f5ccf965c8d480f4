#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "internal.hpp"
#include "pricesim/bmodel_demand.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

struct Quadrature {
    std::vector<double> wtp;
    std::vector<double> mass;  // node width * normal pdf
};

Quadrature make_quadrature(double mean, double stdev, int nodes) {
    Quadrature q;
    const double lo = std::max(0.0, mean - 4.0 * stdev);
    const double hi = mean + 4.0 * stdev;
    if (hi <= lo) return q;
    const double h = (hi - lo) / nodes;
    q.wtp.resize(nodes);
    q.mass.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        const double w = lo + (i + 0.5) * h;
        const double z = (w - mean) / stdev;
        q.wtp[i] = w;
        q.mass[i] = h * kInvSqrt2Pi / stdev * std::exp(-0.5 * z * z);
    }
    return q;
}

double preference_weight(int model_id, double price, double wtp, double b, double c) {
    if (price >= wtp || wtp <= 0.0) return 0.0;
    const double r = (wtp - price) / wtp;
    return model_id == 1 ? std::pow(r, b) : std::pow(1.0 - r, c);
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v = v * (n - k + i) / i;
    return v;
}

// P(own price is chosen) when the arrival sees a uniform-size random subset
// of all n prices and picks the cheapest visible; cheaper_count is the number
// of strictly cheaper competitor prices.
double subset_share(int cheaper_count, int n, int d, int e) {
    double total = 0.0;
    for (int s = d; s <= e; ++s) {
        const double p_in = static_cast<double>(s) / n;
        const double p_clean = binom(n - 1 - cheaper_count, s - 1) / binom(n - 1, s - 1);
        total += p_in * p_clean;
    }
    return total / (e - d + 1);
}

}  // namespace

double bmodel_share(int model_id, double own_price, std::span<const double> others,
                    const BModelParams& params, int quad_nodes) {
    const int n = static_cast<int>(others.size()) + 1;
    if (model_id == 3) {
        int cheaper = 0;
        for (double p : others)
            if (p < own_price) ++cheaper;
        const int d = std::clamp(params.d, 1, n);
        const int e = std::clamp(params.e, d, n);
        return subset_share(cheaper, n, d, e);
    }

    const Quadrature quad = make_quadrature(params.wtp_mean, params.wtp_std, quad_nodes);
    double share = 0.0;
    for (std::size_t i = 0; i < quad.wtp.size(); ++i) {
        const double wtp = quad.wtp[i];
        const double own = preference_weight(model_id, own_price, wtp, params.b, params.c);
        if (own <= 0.0) continue;
        double denom = own;
        for (double p : others) denom += preference_weight(model_id, p, wtp, params.b, params.c);
        share += quad.mass[i] * own / denom;
    }
    return share;
}

double bmodel_eval_demand(int model_id, double own_price, std::span<const double> others,
                          const BModelParams& params, int quad_nodes) {
    return own_price * bmodel_share(model_id, own_price, others, params, quad_nodes);
}

namespace {

struct AnnealState {
    // squared prediction error with the per-model scale profiled out:
    // min_s sum (s*q - d)^2 = sum d^2 - (sum q d)^2 / sum q^2
    static double profiled_error(std::span<const double> shares, std::span<const double> sales,
                                 double& scale_out) {
        double qq = 0.0, qd = 0.0, dd = 0.0;
        for (std::size_t i = 0; i < shares.size(); ++i) {
            qq += shares[i] * shares[i];
            qd += shares[i] * sales[i];
            dd += sales[i] * sales[i];
        }
        if (qq <= 1e-30 || qd <= 0.0) {
            scale_out = 0.0;
            return dd;
        }
        scale_out = qd / qq;
        return dd - qd * qd / qq;
    }
};

struct ModelErrors {
    std::array<double, 3> error{};
    std::array<double, 3> scale{};
    double total() const { return error[0] + error[1] + error[2]; }
};

ModelErrors evaluate(const std::vector<BModelObservation>& obs, const BModelParams& params,
                     int quad_nodes, const ModelErrors* cached, unsigned recompute_mask) {
    ModelErrors out = cached ? *cached : ModelErrors{};
    std::vector<double> shares(obs.size());
    std::vector<double> sales(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) sales[i] = obs[i].own_sales;
    for (int m = 1; m <= 3; ++m) {
        if (cached && !(recompute_mask & (1u << (m - 1)))) continue;
        for (std::size_t i = 0; i < obs.size(); ++i)
            shares[i] = bmodel_share(m, obs[i].own_price, obs[i].others, params, quad_nodes);
        out.error[m - 1] = AnnealState::profiled_error(shares, sales, out.scale[m - 1]);
    }
    return out;
}

}  // namespace

BModelFit bmodel_fit_annealing(const std::vector<BModelObservation>& observations, int n_competitors,
                               const Hyperparams& hp, RngStream& stream) {
    BModelFit fit;
    if (observations.empty() || n_competitors < 1) return fit;
    const int n = n_competitors;

    BModelParams current;
    current.wtp_mean = 50.0;
    current.wtp_std = 20.0;
    current.b = 1.0;
    current.c = 1.0;
    current.d = 1;
    current.e = n;

    ModelErrors cur_err = evaluate(observations, current, hp.bmodel_quad_nodes, nullptr, 0);
    if (!std::isfinite(cur_err.total())) return fit;

    BModelParams best = current;
    ModelErrors best_err = cur_err;

    double temperature = 0.1 * cur_err.total() + 1e-12;
    for (int step = 0; step < hp.bmodel_anneal_proposals; ++step) {
        if (step > 0 && step % hp.bmodel_anneal_cool_every == 0)
            temperature *= hp.bmodel_anneal_cooling;

        BModelParams prop = current;
        unsigned mask = 0;
        switch (stream.uniform_below(6)) {
            case 0:
                prop.wtp_mean = std::clamp(prop.wtp_mean + 5.0 * stream.normal(), 0.1, 200.0);
                mask = 0b011;
                break;
            case 1:
                prop.wtp_std = std::clamp(prop.wtp_std * std::exp(0.25 * stream.normal()), 0.5, 100.0);
                mask = 0b011;
                break;
            case 2:
                prop.b = std::clamp(prop.b * std::exp(0.3 * stream.normal()), 0.05, 50.0);
                mask = 0b001;
                break;
            case 3:
                prop.c = std::clamp(prop.c * std::exp(0.3 * stream.normal()), 0.05, 50.0);
                mask = 0b010;
                break;
            case 4:
                prop.d = std::clamp(prop.d + (stream.uniform01() < 0.5 ? -1 : 1), 1, prop.e);
                mask = 0b100;
                break;
            case 5:
                prop.e = std::clamp(prop.e + (stream.uniform01() < 0.5 ? -1 : 1), prop.d, n);
                mask = 0b100;
                break;
        }

        const ModelErrors prop_err =
            evaluate(observations, prop, hp.bmodel_quad_nodes, &cur_err, mask);
        if (!std::isfinite(prop_err.total())) continue;
        const double delta = prop_err.total() - cur_err.total();
        if (delta <= 0.0 || stream.uniform01() < std::exp(-delta / temperature)) {
            current = prop;
            cur_err = prop_err;
            if (cur_err.total() < best_err.total()) {
                best = current;
                best_err = cur_err;
            }
        }
    }

    best.scale1 = best_err.scale[0];
    best.scale2 = best_err.scale[1];
    best.scale3 = best_err.scale[2];
    fit.params = best;
    fit.objective = best_err.total();
    fit.ok = true;
    return fit;
}

// Four-armed bandit over three learned demand models plus a nested grid
// bandit. The first hundred periods price uniformly at random to feed the
// annealing fit, after which arm values restart from scratch.
class BModelStrategy final : public Strategy {
public:
    BModelStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {}

    std::string_view id() const override { return "b-model"; }

    double next_price(const StrategyObservation& obs) override {
        if (obs.t >= 1) ingest(obs);

        if (obs.t < hp_.bmodel_explore_periods) return stream_.uniform(0.0, 100.0);

        if (!fitted_) {
            auto fit = bmodel_fit_annealing(rows_, obs.n, hp_, stream_);
            if (fit.ok) {
                params_ = fit.params;
            } else {
                note("b-model: annealing failed, keeping default parameters");
            }
            arm_means_.fill(0.0);
            arm_counts_.fill(0.0);
            inner_means_.fill(0.0);
            inner_counts_.fill(0.0);
            fitted_ = true;
        }

        // forecast the competitor price profile (sorted) one period ahead
        std::vector<double> profile(smoothers_.size());
        for (std::size_t i = 0; i < smoothers_.size(); ++i)
            profile[i] = std::max(0.0, smoothers_[i].forecast());
        std::sort(profile.begin(), profile.end());

        std::array<double, 4> predicted{};
        std::array<double, 3> best_prices{};
        for (int m = 1; m <= 3; ++m) {
            const auto point =
                detail::grid_argmax(0.0, 100.0, hp_.line_step, true, [&](double p) {
                    return params_.scale_for(m) *
                           bmodel_eval_demand(m, p, profile, params_, hp_.bmodel_quad_nodes);
                });
            predicted[m - 1] = point.value;
            best_prices[m - 1] = point.x;
        }
        predicted[3] = *std::max_element(inner_means_.begin(), inner_means_.end());

        int arm;
        if (stream_.uniform01() < hp_.epsilon) {
            arm = static_cast<int>(stream_.uniform_below(4));
        } else {
            arm = 0;
            for (int a = 1; a < 4; ++a)
                if (predicted[a] > predicted[arm]) arm = a;
        }
        last_arm_ = arm;

        if (arm < 3) {
            last_inner_arm_ = -1;
            return best_prices[arm];
        }
        int inner;
        if (stream_.uniform01() < hp_.epsilon) {
            inner = static_cast<int>(stream_.uniform_below(10));
        } else {
            inner = 0;
            for (int a = 1; a < 10; ++a)
                if (inner_means_[a] > inner_means_[inner]) inner = a;
        }
        last_inner_arm_ = inner;
        return 10.0 * (inner + 1);
    }

private:
    void ingest(const StrategyObservation& obs) {
        std::vector<double> others = detail::others_prices(obs, obs.t - 1);
        std::sort(others.begin(), others.end());

        if (smoothers_.empty())
            smoothers_.assign(others.size(),
                              detail::HoltSmoother{hp_.smooth_level, hp_.smooth_trend});
        for (std::size_t i = 0; i < others.size(); ++i) smoothers_[i].update(others[i]);

        if (static_cast<int>(rows_.size()) < hp_.bmodel_explore_periods)
            rows_.push_back({obs.own_price_at(obs.t - 1), others, obs.own_sales_at(obs.t - 1)});

        if (fitted_ && last_arm_ >= 0) {
            const double revenue = detail::own_revenue_at(obs, obs.t - 1);
            auto update = [&](double& mean, double& count) {
                mean = (mean * count + revenue) / (count + 1.0);
                count += 1.0;
            };
            update(arm_means_[last_arm_], arm_counts_[last_arm_]);
            if (last_arm_ == 3 && last_inner_arm_ >= 0)
                update(inner_means_[last_inner_arm_], inner_counts_[last_inner_arm_]);
        }
    }

    Hyperparams hp_;
    RngStream stream_;
    std::vector<BModelObservation> rows_;
    std::vector<detail::HoltSmoother> smoothers_;
    BModelParams params_;
    bool fitted_ = false;
    std::array<double, 4> arm_means_{};
    std::array<double, 4> arm_counts_{};
    std::array<double, 10> inner_means_{};
    std::array<double, 10> inner_counts_{};
    int last_arm_ = -1;
    int last_inner_arm_ = -1;
};

StrategyPtr make_bmodel(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<BModelStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
