#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "internal.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/stats.hpp"
#include "pricesim/strategy.hpp"
#include "pricesim/wls_model.hpp"

namespace pricesim {

namespace {

// Solve the symmetric 3x3 system via Gaussian elimination with partial
// pivoting; returns false on a (near-)singular matrix.
bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> rhs,
            std::array<double, 3>& out) {
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, 1.0);

    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) <= tol) return false;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double s = rhs[r];
        for (int c = r + 1; c < 3; ++c) s -= a[r][c] * out[c];
        out[r] = s / a[r][r];
    }
    return true;
}

double scheme_weight(WlsScheme scheme, std::size_t i, std::size_t n, const Hyperparams& hp) {
    const double age = static_cast<double>(n - 1 - i);
    switch (scheme) {
        case WlsScheme::Uniform: return 1.0;
        case WlsScheme::HalfLifeShort: return std::exp2(-age / hp.wls_halflife_short);
        case WlsScheme::HalfLifeLong: return std::exp2(-age / hp.wls_halflife_long);
        case WlsScheme::RecentWindow: return age < hp.wls_recent_window ? 1.0 : 0.0;
    }
    return 1.0;
}

}  // namespace

WlsModel wls_fit(std::span<const double> own_price, std::span<const double> comp_sum,
                 std::span<const double> demand, WlsScheme scheme, const Hyperparams& hp) {
    const std::size_t n = own_price.size();
    if (comp_sum.size() != n || demand.size() != n)
        throw std::invalid_argument("wls_fit: misaligned histories");
    if (n < 4) throw std::invalid_argument("wls_fit: needs at least 4 observations");

    std::array<std::array<double, 3>, 3> ata{};
    std::array<double, 3> atb{};
    for (std::size_t i = 0; i < n; ++i) {
        const double w = scheme_weight(scheme, i, n, hp);
        if (w <= 0.0) continue;
        const double row[3] = {1.0, own_price[i], comp_sum[i]};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) ata[r][c] += w * row[r] * row[c];
            atb[r] += w * row[r] * demand[i];
        }
    }

    WlsModel model;
    std::array<double, 3> beta{};
    if (!solve3(ata, atb, beta)) {
        for (int r = 0; r < 3; ++r) ata[r][r] += 1e-8;
        if (!solve3(ata, atb, beta)) return model;  // still singular: report invalid
        model.ridged = true;
    }
    model.a = beta[0];
    model.b = beta[1];
    model.c = beta[2];
    model.valid = true;
    return model;
}

// Relative-revenue optimizer: fits d = a + b*x + c*sum(y) under several
// weighting schemes scored by one-step-ahead Median Absolute Error, predicts
// competitor prices by windowed medians, and maximizes own revenue minus the
// best competitor's revenue.
class WlsStrategy final : public Strategy {
public:
    WlsStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {
        for (int w : hp_.wls_price_windows) price_errors_[w] = {};
    }

    std::string_view id() const override { return "wls"; }

    double next_price(const StrategyObservation& obs) override {
        if (obs.t >= 1) ingest(obs);

        if (obs.t < hp_.wls_explore_periods) return explore();

        if (constant_run(obs)) {
            const double p = obs.own_price_at(obs.t - 1);
            if (p > 0.0) return stream_.uniform(0.5 * p, 1.5 * p);
            return explore();
        }

        const WlsModel model = best_model();
        if (!model.valid) return explore();

        const std::vector<double> predicted = predict_competitor_prices(obs);
        double pred_sum = 0.0;
        for (double p : predicted) pred_sum += p;

        const auto objective = [&](double p1) {
            const double own = p1 * model.predict(p1, pred_sum);
            double best_rival = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < predicted.size(); ++k) {
                const double rival_comp_sum = p1 + pred_sum - predicted[k];
                const double rev = predicted[k] * model.predict(predicted[k], rival_comp_sum);
                best_rival = std::max(best_rival, rev);
            }
            return own - best_rival;
        };
        return detail::grid_argmax(0.0, 100.0, hp_.line_step, true, objective).x;
    }

private:
    double explore() { return stream_.uniform(0.0, 100.0); }

    bool constant_run(const StrategyObservation& obs) const {
        if (obs.t < hp_.wls_constant_run) return false;
        const double p = obs.own_price_at(obs.t - 1);
        for (int i = 2; i <= hp_.wls_constant_run; ++i)
            if (obs.own_price_at(obs.t - i) != p) return false;
        return true;
    }

    void ingest(const StrategyObservation& obs) {
        const int period = obs.t - 1;  // newest completed period
        const double x = obs.own_price_at(period);
        const double sy = detail::sum_others(obs, period);
        const double d = obs.own_sales_at(period);

        // one-step-ahead demand errors for each scheme's previous fit
        for (std::size_t s = 0; s < kSchemeCount; ++s)
            if (models_[s].valid)
                demand_errors_[s].push_back(std::abs(models_[s].predict(x, sy) - d));

        // price-prediction errors per candidate window, pooled over competitors
        if (period >= 1) {
            const auto& actual = obs.prices_at(period);
            for (int w : hp_.wls_price_windows) {
                auto& pool = price_errors_[w];
                for (int k = 0; k < obs.n; ++k) {
                    if (k == obs.own_index) continue;
                    std::vector<double> window;
                    for (int p = std::max(0, period - w); p < period; ++p)
                        window.push_back(obs.prices_at(p)[k]);
                    pool.push_back(std::abs(median_of(std::move(window)) - actual[k]));
                }
            }
        }

        xs_.push_back(x);
        sys_.push_back(sy);
        ds_.push_back(d);

        if (xs_.size() >= 4) {
            for (std::size_t s = 0; s < kSchemeCount; ++s) {
                models_[s] = wls_fit(xs_, sys_, ds_, kWlsSchemes[s], hp_);
                if (models_[s].ridged) note("wls: singular normal equations, ridge applied");
            }
        }
    }

    WlsModel best_model() const {
        std::size_t best = 0;
        double best_mae = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < kSchemeCount; ++s) {
            if (!models_[s].valid) continue;
            const double mae =
                demand_errors_[s].empty() ? std::numeric_limits<double>::infinity()
                                          : median_of(demand_errors_[s]);
            if (models_[best].valid && mae >= best_mae) continue;
            best = s;
            best_mae = mae;
        }
        return models_[best];
    }

    std::vector<double> predict_competitor_prices(const StrategyObservation& obs) const {
        int best_w = hp_.wls_price_windows.front();
        double best_mae = std::numeric_limits<double>::infinity();
        for (int w : hp_.wls_price_windows) {
            const auto& pool = price_errors_.at(w);
            if (pool.empty()) continue;
            const double mae = median_of(pool);
            if (mae < best_mae) {
                best_mae = mae;
                best_w = w;
            }
        }
        std::vector<double> predicted;
        predicted.reserve(obs.n - 1);
        for (int k = 0; k < obs.n; ++k) {
            if (k == obs.own_index) continue;
            std::vector<double> window;
            for (int p = std::max(0, obs.t - best_w); p < obs.t; ++p)
                window.push_back(obs.prices_at(p)[k]);
            predicted.push_back(median_of(std::move(window)));
        }
        return predicted;
    }

    static constexpr std::size_t kSchemeCount = 4;
    Hyperparams hp_;
    RngStream stream_;
    std::vector<double> xs_, sys_, ds_;
    std::array<WlsModel, kSchemeCount> models_{};
    std::array<std::vector<double>, kSchemeCount> demand_errors_{};
    std::map<int, std::vector<double>> price_errors_;
};

StrategyPtr make_wls(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<WlsStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
