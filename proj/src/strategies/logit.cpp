#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "internal.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/mixture_logit.hpp"
#include "pricesim/mvn.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

namespace {

constexpr double kExpClamp = 60.0;  // keeps float exp well inside finite range

inline double clamped_exp(double x) { return std::exp(std::clamp(x, -kExpClamp, kExpClamp)); }

// own-purchase probability of one component for one price row
double component_prob(const MixtureComponent& c, std::span<const double> prices, int own_index) {
    double denom = 1.0;
    double own = 0.0;
    for (std::size_t j = 0; j < prices.size(); ++j) {
        const double e = clamped_exp(c.a - c.b * prices[j]);
        denom += e;
        if (static_cast<int>(j) == own_index) own = e;
    }
    return std::clamp(own / denom, 1e-12, 1.0 - 1e-12);
}

// weighted binomial log-likelihood of one component and its gradient /
// Gauss-Newton curvature in (a, b)
struct ComponentObjective {
    double ll = 0.0;
    double ga = 0.0, gb = 0.0;
    double haa = 0.0, hab = 0.0, hbb = 0.0;
};

ComponentObjective component_objective(const MixtureComponent& c,
                                       const std::vector<std::vector<double>>& rows,
                                       std::span<const double> sales, int own_index,
                                       std::span<const double> resp, bool with_derivs) {
    ComponentObjective out;
    const double n_arr = c.arrivals;
    for (std::size_t t = 0; t < rows.size(); ++t) {
        const double w = resp[t];
        if (w <= 1e-14) continue;
        const double d = sales[t];
        if (d > n_arr) {
            out.ll += w * -1e30;
            continue;
        }
        double denom = 1.0, own = 0.0, sp = 0.0;
        for (std::size_t j = 0; j < rows[t].size(); ++j) {
            const double e = clamped_exp(c.a - c.b * rows[t][j]);
            denom += e;
            sp += rows[t][j] * e;
            if (static_cast<int>(j) == own_index) own = e;
        }
        const double q = std::clamp(own / denom, 1e-12, 1.0 - 1e-12);
        out.ll += w * (d * std::log(q) + (n_arr - d) * std::log1p(-q));
        if (!with_derivs) continue;
        const double qa = own / (denom * denom);
        const double qb = own * (sp - rows[t][own_index] * denom) / (denom * denom);
        const double dldq = d / q - (n_arr - d) / (1.0 - q);
        const double d2 = -d / (q * q) - (n_arr - d) / ((1.0 - q) * (1.0 - q));
        out.ga += w * dldq * qa;
        out.gb += w * dldq * qb;
        out.haa += w * d2 * qa * qa;
        out.hab += w * d2 * qa * qb;
        out.hbb += w * d2 * qb * qb;
    }
    return out;
}

void maximize_component(MixtureComponent& c, const std::vector<std::vector<double>>& rows,
                        std::span<const double> sales, int own_index,
                        std::span<const double> resp) {
    if (c.arrivals <= 0.0) return;  // zero-arrival component has no demand parameters
    double current = component_objective(c, rows, sales, own_index, resp, false).ll;
    for (int iter = 0; iter < 6; ++iter) {
        const auto obj = component_objective(c, rows, sales, own_index, resp, true);
        const double det = obj.haa * obj.hbb - obj.hab * obj.hab;
        double da, db;
        if (std::abs(det) > 1e-30 && obj.haa < 0.0) {
            da = -(obj.hbb * obj.ga - obj.hab * obj.gb) / det;
            db = -(-obj.hab * obj.ga + obj.haa * obj.gb) / det;
        } else {
            const double norm = std::sqrt(obj.ga * obj.ga + obj.gb * obj.gb) + 1e-12;
            da = obj.ga / norm;
            db = obj.gb / norm;
        }
        double step = 1.0;
        bool improved = false;
        for (int bt = 0; bt < 6; ++bt, step *= 0.5) {
            MixtureComponent trial = c;
            trial.a = c.a + step * da;
            trial.b = c.b + step * db;
            const double ll = component_objective(trial, rows, sales, own_index, resp, false).ll;
            if (ll > current) {
                c = trial;
                current = ll;
                improved = true;
                break;
            }
        }
        if (!improved) return;
    }
}

std::vector<double> component_arrival_grid(long bound, int max_components) {
    std::vector<double> out;
    if (bound + 1 <= max_components) {
        for (long g = 0; g <= bound; ++g) out.push_back(static_cast<double>(g));
    } else {
        for (int g = 0; g < max_components; ++g)
            out.push_back(std::round((g + 0.5) * static_cast<double>(bound) / max_components));
    }
    return out;
}

}  // namespace

double MixtureLogitModel::expected_demand(std::span<const double> prices, int own_index) const {
    double d = 0.0;
    for (const auto& c : components) {
        if (c.weight <= 0.0 || c.arrivals <= 0.0) continue;
        d += c.weight * c.arrivals * component_prob(c, prices, own_index);
    }
    return d;
}

MixtureLogitModel fit_mixture_em(const std::vector<std::vector<double>>& price_rows,
                                 std::span<const double> own_sales, int own_index, long arrival_bound,
                                 int max_components, int max_iters, double tol,
                                 const MixtureLogitModel* previous) {
    MixtureLogitModel model;
    model.arrival_bound = arrival_bound;
    const std::size_t T = price_rows.size();
    if (T == 0 || arrival_bound < 1) return model;

    const auto grid = component_arrival_grid(arrival_bound, max_components);
    const std::size_t G = grid.size();

    const bool warm = previous && previous->valid && previous->components.size() == G &&
                      previous->arrival_bound == arrival_bound;
    if (warm) {
        model.components = previous->components;
    } else {
        model.components.resize(G);
        for (std::size_t g = 0; g < G; ++g)
            model.components[g] = {grid[g], 1.0 / static_cast<double>(G), 0.0, 0.05};
    }

    // log factorial table; sales are integer counts in live play, non-integer
    // synthetic data falls back to lgamma directly
    const long table_max = arrival_bound + 2;
    std::vector<double> lfact(table_max + 1, 0.0);
    for (long i = 2; i <= table_max; ++i) lfact[i] = lfact[i - 1] + std::log(static_cast<double>(i));
    const auto log_choose = [&](double n, double k) {
        if (k < 0.0 || k > n) return -1e30;
        const long ni = static_cast<long>(n);
        const long ki = static_cast<long>(k);
        if (static_cast<double>(ni) == n && static_cast<double>(ki) == k)
            return lfact[ni] - lfact[ki] - lfact[ni - ki];
        return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    };

    std::vector<double> resp(T * G, 0.0);
    double prev_ll = -1e300;
    model.converged = false;

    for (int iter = 0; iter < max_iters; ++iter) {
        // E-step
        double ll = 0.0;
        std::vector<double> logp(G);
        for (std::size_t t = 0; t < T; ++t) {
            const double d = own_sales[t];
            double best = -1e300;
            for (std::size_t g = 0; g < G; ++g) {
                const auto& c = model.components[g];
                double v = c.weight > 0.0 ? std::log(c.weight) : -1e30;
                if (d > c.arrivals) {
                    v += -1e30;
                } else if (c.arrivals <= 0.0) {
                    v += d > 0.0 ? -1e30 : 0.0;
                } else {
                    const double q = component_prob(c, price_rows[t], own_index);
                    v += log_choose(c.arrivals, d) + d * std::log(q) +
                         (c.arrivals - d) * std::log1p(-q);
                }
                logp[g] = v;
                best = std::max(best, v);
            }
            double z = 0.0;
            for (std::size_t g = 0; g < G; ++g) z += std::exp(std::max(logp[g] - best, -700.0));
            for (std::size_t g = 0; g < G; ++g)
                resp[t * G + g] = std::exp(std::max(logp[g] - best, -700.0)) / z;
            ll += best + std::log(z);
        }

        if (!std::isfinite(ll)) return previous && previous->valid ? *previous : model;

        // M-step
        std::vector<double> col(T);
        for (std::size_t g = 0; g < G; ++g) {
            double wsum = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                col[t] = resp[t * G + g];
                wsum += col[t];
            }
            model.components[g].weight = wsum / static_cast<double>(T);
            if (wsum > 1e-10)
                maximize_component(model.components[g], price_rows, own_sales, own_index, col);
        }

        if (std::abs(ll - prev_ll) <= tol * (1.0 + std::abs(ll))) {
            model.converged = true;
            break;
        }
        prev_ll = ll;
    }

    model.valid = true;
    return model;
}

// Finite-mixture-logit learner: opens at price 0, shadows the market minimum
// for 99 periods to size the arrival distribution, then prices against
// MVN-sampled competitor profiles via a coarse line search.
class LogitStrategy final : public Strategy {
public:
    LogitStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {}

    std::string_view id() const override { return "logit"; }

    double next_price(const StrategyObservation& obs) override {
        if (obs.t >= 1) ingest_profile(obs);
        if (obs.t == 0) return 0.0;
        if (obs.t < hp_.logit_explore_periods) return detail::min_others(obs, obs.t - 1);

        maybe_refit(obs);
        return optimize_price(obs);
    }

private:
    void ingest_profile(const StrategyObservation& obs) {
        const int dim = obs.n - 1;
        if (moment_count_ == 0) {
            moment_sum_.assign(dim, 0.0);
            moment_outer_.assign(dim * dim, 0.0);
        }
        std::vector<double> profile = detail::others_prices(obs, obs.t - 1);
        std::sort(profile.begin(), profile.end());
        for (int i = 0; i < dim; ++i) {
            moment_sum_[i] += profile[i];
            for (int j = 0; j < dim; ++j) moment_outer_[i * dim + j] += profile[i] * profile[j];
        }
        ++moment_count_;
    }

    void maybe_refit(const StrategyObservation& obs) {
        const bool due = !mixture_.valid ||
                         (obs.t - hp_.logit_explore_periods) % hp_.logit_refit_every == 0;
        if (!due || obs.t == last_fit_t_) return;
        last_fit_t_ = obs.t;

        double max_demand = 0.0;
        for (int p = 0; p < obs.t; ++p) max_demand = std::max(max_demand, obs.own_sales_at(p));
        const long bound =
            std::max<long>(1, static_cast<long>(std::ceil(max_demand * (obs.n + 1))));

        const int iters = mixture_.valid ? warm_refit_iters() : hp_.logit_em_iters;
        MixtureLogitModel fitted =
            fit_mixture_em(*obs.price_history, {obs.own_sales_history->data(),
                                                obs.own_sales_history->size()},
                           obs.own_index, bound, hp_.logit_max_components, iters, hp_.logit_em_tol,
                           mixture_.valid ? &mixture_ : nullptr);
        if (!fitted.valid) {
            note("logit: EM produced no usable fit, keeping previous parameters");
            return;
        }
        if (!fitted.converged) note("logit: EM hit the iteration cap");
        mixture_ = std::move(fitted);
    }

    int warm_refit_iters() const { return std::max(2, hp_.logit_em_iters / 4); }

    MvnModel profile_model(int dim) const {
        MvnModel model;
        const double n = static_cast<double>(moment_count_);
        model.mean.resize(dim);
        for (int i = 0; i < dim; ++i) model.mean[i] = moment_sum_[i] / n;
        model.cov.assign(dim * dim, 0.0);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                model.cov[i * dim + j] =
                    (moment_outer_[i * dim + j] - n * model.mean[i] * model.mean[j]) / (n - 1.0);
        double diag = 0.0;
        for (int i = 0; i < dim; ++i) diag += model.cov[i * dim + i];
        model.ridge = 1e-6 * std::max(diag / dim, 0.0);
        for (int i = 0; i < dim; ++i) model.cov[i * dim + i] += model.ridge;
        cholesky_psd(model.cov, dim, model.chol);
        return model;
    }

    double optimize_price(const StrategyObservation& obs) {
        const int dim = obs.n - 1;
        const int samples = hp_.logit_mvn_samples;
        const MvnModel mvn = profile_model(dim);

        // flat sample buffer, then per component the log-odds offsets
        // L = log(1 + sum_j exp(a - b*y_j)), so q(p) = sigmoid(a - b*p - L)
        sample_buf_.resize(static_cast<std::size_t>(samples) * dim);
        std::vector<double> z(dim);
        for (int s = 0; s < samples; ++s) {
            for (auto& v : z) v = stream_.normal();
            for (int i = 0; i < dim; ++i) {
                double x = mvn.mean[i];
                for (int j = 0; j <= i; ++j) x += mvn.chol[i * dim + j] * z[j];
                sample_buf_[static_cast<std::size_t>(s) * dim + i] = x;
            }
        }

        struct ActiveComponent {
            float scale;  // weight * arrivals
            float a, b;
            std::vector<float> offsets;  // sorted L values
        };
        std::vector<ActiveComponent> active;
        for (const auto& c : mixture_.components) {
            if (c.weight * c.arrivals <= 1e-12) continue;
            ActiveComponent ac;
            ac.scale = static_cast<float>(c.weight * c.arrivals);
            ac.a = static_cast<float>(c.a);
            ac.b = static_cast<float>(c.b);
            ac.offsets.resize(samples);
            for (int s = 0; s < samples; ++s) {
                float acc = 0.0f;
                for (int i = 0; i < dim; ++i) {
                    const float arg = std::clamp(
                        c.a - c.b * sample_buf_[static_cast<std::size_t>(s) * dim + i], -kExpClamp,
                        kExpClamp);
                    acc += std::exp(static_cast<float>(arg));
                }
                ac.offsets[s] = std::log1p(acc);
            }
            std::sort(ac.offsets.begin(), ac.offsets.end());
            active.push_back(std::move(ac));
        }

        double best_price = hp_.logit_line_step;
        double best_rev = -1.0;
        const int count = static_cast<int>(std::floor(100.0 / hp_.logit_line_step + 1e-9)) - 1;
        const float inv_samples = 1.0f / static_cast<float>(samples);
        for (int i = 1; i <= count; ++i) {
            const double p = i * hp_.logit_line_step;
            double demand = 0.0;
            for (const auto& ac : active) {
                const float u =
                    std::clamp(ac.a - ac.b * static_cast<float>(p),
                               -static_cast<float>(kExpClamp), static_cast<float>(kExpClamp));
                // sigmoid saturates outside +/-18: below counts as 1, above as 0
                const auto lo = std::lower_bound(ac.offsets.begin(), ac.offsets.end(), u - 18.0f);
                const auto hi = std::lower_bound(lo, ac.offsets.end(), u + 18.0f);
                float acc = static_cast<float>(lo - ac.offsets.begin());
                for (auto it = lo; it != hi; ++it) acc += 1.0f / (1.0f + std::exp(*it - u));
                demand += static_cast<double>(ac.scale) * static_cast<double>(acc) * inv_samples;
            }
            const double rev = p * demand;
            if (rev > best_rev) {
                best_rev = rev;
                best_price = p;
            }
        }
        return best_price;
    }

    Hyperparams hp_;
    RngStream stream_;
    MixtureLogitModel mixture_;
    int last_fit_t_ = -1;
    long moment_count_ = 0;
    std::vector<double> moment_sum_;
    std::vector<double> moment_outer_;
    std::vector<double> sample_buf_;
};

StrategyPtr make_logit(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<LogitStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
