#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "internal.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

namespace {

// ---- dense linear algebra just big enough for (intercept + n features) ----

bool solve_dense(std::vector<double> a, std::vector<double> rhs, std::size_t dim,
                 std::vector<double>& out) {
    double scale = 0.0;
    for (double v : a) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, 1.0);
    std::vector<std::size_t> perm(dim);
    std::iota(perm.begin(), perm.end(), 0);

    for (std::size_t col = 0; col < dim; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < dim; ++r)
            if (std::abs(a[r * dim + col]) > std::abs(a[pivot * dim + col])) pivot = r;
        if (std::abs(a[pivot * dim + col]) <= tol) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < dim; ++c) std::swap(a[col * dim + c], a[pivot * dim + c]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (std::size_t r = col + 1; r < dim; ++r) {
            const double f = a[r * dim + col] / a[col * dim + col];
            for (std::size_t c = col; c < dim; ++c) a[r * dim + c] -= f * a[col * dim + c];
            rhs[r] -= f * rhs[col];
        }
    }
    out.assign(dim, 0.0);
    for (std::size_t r = dim; r-- > 0;) {
        double s = rhs[r];
        for (std::size_t c = r + 1; c < dim; ++c) s -= a[r * dim + c] * out[c];
        out[r] = s / a[r * dim + r];
    }
    return true;
}

struct Standardizer {
    std::vector<double> mean, stdev;

    void fit(const std::vector<std::vector<double>>& rows) {
        const std::size_t f = rows.front().size();
        mean.assign(f, 0.0);
        stdev.assign(f, 0.0);
        for (const auto& r : rows)
            for (std::size_t j = 0; j < f; ++j) mean[j] += r[j];
        for (auto& m : mean) m /= rows.size();
        for (const auto& r : rows)
            for (std::size_t j = 0; j < f; ++j) stdev[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
        for (auto& s : stdev) s = std::sqrt(s / rows.size());
        for (auto& s : stdev)
            if (s < 1e-9) s = 1.0;
    }
    double scaled(const std::vector<double>& row, std::size_t j) const {
        return (row[j] - mean[j]) / stdev[j];
    }
};

struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coefs;
    bool valid = false;

    double predict(const std::vector<double>& x) const {
        double y = intercept;
        for (std::size_t j = 0; j < coefs.size(); ++j) y += coefs[j] * x[j];
        return y;
    }
};

LinearModel fit_ols(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                    double ridge) {
    const std::size_t f = x.front().size();
    const std::size_t dim = f + 1;
    std::vector<double> ata(dim * dim, 0.0), atb(dim, 0.0), row(dim, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < f; ++j) row[j + 1] = x[i][j];
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) ata[r * dim + c] += row[r] * row[c];
            atb[r] += row[r] * y[i];
        }
    }
    LinearModel model;
    std::vector<double> beta;
    if (!solve_dense(ata, atb, dim, beta)) {
        for (std::size_t d = 0; d < dim; ++d) ata[d * dim + d] += ridge <= 0.0 ? 1e-8 : ridge;
        if (!solve_dense(ata, atb, dim, beta)) return model;
    }
    model.intercept = beta[0];
    model.coefs.assign(beta.begin() + 1, beta.end());
    model.valid = true;
    return model;
}

double mean_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
}

// Ridge and lasso fit on standardized features (intercept unpenalized),
// coefficients mapped back to the raw scale.
LinearModel fit_penalized(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                          double lambda, bool l1) {
    const std::size_t n = x.size();
    const std::size_t f = x.front().size();
    Standardizer st;
    st.fit(x);
    const double ymean = mean_sum(y);

    std::vector<double> beta(f, 0.0);
    if (!l1) {
        std::vector<double> ata(f * f, 0.0), atb(f, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t r = 0; r < f; ++r) {
                const double xr = st.scaled(x[i], r);
                for (std::size_t c = 0; c < f; ++c) ata[r * f + c] += xr * st.scaled(x[i], c);
                atb[r] += xr * (y[i] - ymean);
            }
        for (std::size_t d = 0; d < f; ++d) ata[d * f + d] += lambda * n;
        if (!solve_dense(ata, atb, f, beta)) return {};
    } else {
        // cyclic coordinate descent
        std::vector<std::vector<double>> xs(n, std::vector<double>(f));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) xs[i][j] = st.scaled(x[i], j);
        std::vector<double> resid(n);
        for (std::size_t i = 0; i < n; ++i) resid[i] = y[i] - ymean;
        std::vector<double> norms(f, 0.0);
        for (std::size_t j = 0; j < f; ++j)
            for (std::size_t i = 0; i < n; ++i) norms[j] += xs[i][j] * xs[i][j];
        for (int pass = 0; pass < 200; ++pass) {
            for (std::size_t j = 0; j < f; ++j) {
                if (norms[j] <= 0.0) continue;
                double rho = 0.0;
                for (std::size_t i = 0; i < n; ++i) rho += xs[i][j] * (resid[i] + beta[j] * xs[i][j]);
                const double thresh = lambda * n;
                double nb = 0.0;
                if (rho > thresh) nb = (rho - thresh) / norms[j];
                else if (rho < -thresh) nb = (rho + thresh) / norms[j];
                const double delta = nb - beta[j];
                if (delta != 0.0)
                    for (std::size_t i = 0; i < n; ++i) resid[i] -= delta * xs[i][j];
                beta[j] = nb;
            }
        }
    }

    LinearModel model;
    model.coefs.assign(f, 0.0);
    model.intercept = ymean;
    for (std::size_t j = 0; j < f; ++j) {
        model.coefs[j] = beta[j] / st.stdev[j];
        model.intercept -= model.coefs[j] * st.mean[j];
    }
    model.valid = true;
    return model;
}

// Full-batch gradient descent on standardized features.
LinearModel fit_gd(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const std::size_t f = x.front().size();
    Standardizer st;
    st.fit(x);
    const double ymean = mean_sum(y);
    std::vector<std::vector<double>> xs(n, std::vector<double>(f));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j) xs[i][j] = st.scaled(x[i], j);

    std::vector<double> beta(f, 0.0);
    double b0 = 0.0;
    const double lr = 0.1;
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<double> grad(f, 0.0);
        double g0 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double pred = b0;
            for (std::size_t j = 0; j < f; ++j) pred += beta[j] * xs[i][j];
            const double err = pred - (y[i] - ymean);
            g0 += err;
            for (std::size_t j = 0; j < f; ++j) grad[j] += err * xs[i][j];
        }
        b0 -= lr * g0 / n;
        for (std::size_t j = 0; j < f; ++j) beta[j] -= lr * grad[j] / n;
    }

    LinearModel model;
    model.coefs.assign(f, 0.0);
    model.intercept = ymean + b0;
    for (std::size_t j = 0; j < f; ++j) {
        model.coefs[j] = beta[j] / st.stdev[j];
        model.intercept -= model.coefs[j] * st.mean[j];
    }
    model.valid = true;
    return model;
}

// ---- small regression forest ----

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const std::vector<double>& x) const {
        int idx = 0;
        while (nodes[idx].feature >= 0)
            idx = x[nodes[idx].feature] <= nodes[idx].threshold ? nodes[idx].left : nodes[idx].right;
        return nodes[idx].value;
    }
};

struct Forest {
    std::vector<Tree> trees;
    bool valid = false;

    double predict(const std::vector<double>& x) const {
        double s = 0.0;
        for (const auto& t : trees) s += t.predict(x);
        return trees.empty() ? 0.0 : s / trees.size();
    }
};

int grow_node(Tree& tree, const std::vector<std::vector<double>>& x, const std::vector<double>& y,
              std::vector<std::size_t> idx, int depth, int max_depth, RngStream& stream) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    double sum = 0.0;
    for (auto i : idx) sum += y[i];
    const double mean = sum / idx.size();
    tree.nodes[node_id].value = mean;
    if (depth >= max_depth || idx.size() < 4) return node_id;

    const std::size_t f = x.front().size();
    const std::size_t tries = std::max<std::size_t>(1, (f + 2) / 3);
    std::vector<std::size_t> feats(f);
    std::iota(feats.begin(), feats.end(), 0);
    for (std::size_t j = 0; j < tries; ++j)  // partial Fisher-Yates
        std::swap(feats[j], feats[j + stream.uniform_below(f - j)]);

    double best_gain = 1e-12;
    int best_feat = -1;
    double best_thresh = 0.0;
    double total_sse = 0.0;
    for (auto i : idx) total_sse += (y[i] - mean) * (y[i] - mean);

    for (std::size_t j = 0; j < tries; ++j) {
        const std::size_t feat = feats[j];
        auto order = idx;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return x[a][feat] < x[b][feat]; });
        double left_sum = 0.0, left_sq = 0.0;
        double right_sum = 0.0, right_sq = 0.0;
        for (auto i : order) {
            right_sum += y[i];
            right_sq += y[i] * y[i];
        }
        for (std::size_t split = 0; split + 1 < order.size(); ++split) {
            const double yi = y[order[split]];
            left_sum += yi;
            left_sq += yi * yi;
            right_sum -= yi;
            right_sq -= yi * yi;
            if (x[order[split]][feat] == x[order[split + 1]][feat]) continue;
            const std::size_t nl = split + 1;
            const std::size_t nr = order.size() - nl;
            if (nl < 2 || nr < 2) continue;
            const double sse = (left_sq - left_sum * left_sum / nl) +
                               (right_sq - right_sum * right_sum / nr);
            const double gain = total_sse - sse;
            if (gain > best_gain) {
                best_gain = gain;
                best_feat = static_cast<int>(feat);
                best_thresh = 0.5 * (x[order[split]][feat] + x[order[split + 1]][feat]);
            }
        }
    }
    if (best_feat < 0) return node_id;

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx)
        (x[i][best_feat] <= best_thresh ? left_idx : right_idx).push_back(i);
    tree.nodes[node_id].feature = best_feat;
    tree.nodes[node_id].threshold = best_thresh;
    tree.nodes[node_id].left = grow_node(tree, x, y, std::move(left_idx), depth + 1, max_depth, stream);
    tree.nodes[node_id].right =
        grow_node(tree, x, y, std::move(right_idx), depth + 1, max_depth, stream);
    return node_id;
}

Forest fit_forest(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                  int trees, int max_depth, RngStream& stream) {
    Forest forest;
    for (int t = 0; t < trees; ++t) {
        std::vector<std::size_t> sample(x.size());
        for (auto& s : sample) s = stream.uniform_below(x.size());
        Tree tree;
        grow_node(tree, x, y, std::move(sample), 0, max_depth, stream);
        forest.trees.push_back(std::move(tree));
    }
    forest.valid = true;
    return forest;
}

struct FittedModel {
    LinearModel linear;
    Forest forest;
    bool use_forest = false;
    bool valid = false;

    double predict(const std::vector<double>& x) const {
        return use_forest ? forest.predict(x) : linear.predict(x);
    }
};

}  // namespace

// Alternates cosine-priced exploration cycles with model-driven exploitation
// cycles. Demand is regressed on own and competitor prices with the model
// family selected by k-fold cross-validation, and a fresh exploration cycle
// wipes all accumulated history.
class MlStrategy final : public Strategy {
public:
    MlStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {}

    std::string_view id() const override { return "ml"; }

    double next_price(const StrategyObservation& obs) override {
        if (!started_) {
            started_ = true;
            pbar_ = stream_.uniform(hp_.ml_init_lo, hp_.ml_init_hi);
            smoothers_.assign(obs.n, detail::LevelSmoother{hp_.smooth_level});
        }

        if (obs.t >= 1 && obs.t - 1 >= floor_) {
            const auto& row = obs.prices_at(obs.t - 1);
            for (int k = 0; k < obs.n; ++k)
                if (k != obs.own_index) smoothers_[k].update(row[k]);
            if (exploiting_ && exploit_step_ >= 1)
                cycle_revenues_.push_back(detail::own_revenue_at(obs, obs.t - 1));
        }

        if (exploiting_) {
            if (should_abort() || exploit_step_ >= exploit_len_) start_exploration(obs);
        }

        if (!exploiting_) {
            if (explore_step_ < hp_.ml_explore_len) {
                const double angle = 6.283185307179586 * explore_step_ / hp_.ml_cos_period;
                ++explore_step_;
                return pbar_ * (1.0 + hp_.ml_cos_amplitude * std::cos(angle));
            }
            fit_models(obs);
        }

        // exploitation pricing
        std::vector<double> features(obs.n, 0.0);
        std::size_t pos = 1;
        for (int k = 0; k < obs.n; ++k) {
            if (k == obs.own_index) continue;
            features[pos++] = smoothers_[k].primed ? smoothers_[k].forecast()
                                                   : obs.prices_at(obs.t - 1)[k];
        }
        const auto point = detail::grid_argmax(0.0, 100.0, hp_.line_step, true, [&](double p) {
            features[0] = p;
            return p * model_.predict(features);
        });
        ++exploit_step_;
        return point.x;
    }

private:
    bool should_abort() const {
        const int w = hp_.ml_abort_window;
        if (static_cast<int>(cycle_revenues_.size()) < w) return false;
        double opening = 0.0, rolling = 0.0;
        for (int i = 0; i < w; ++i) {
            opening += cycle_revenues_[i];
            rolling += cycle_revenues_[cycle_revenues_.size() - 1 - i];
        }
        return rolling < hp_.ml_abort_frac * opening;
    }

    void start_exploration(const StrategyObservation& obs) {
        // reference window read before the history discard
        double sum = 0.0;
        int count = 0;
        for (int p = std::max(floor_, obs.t - hp_.ml_explore_len); p < obs.t; ++p) {
            sum += obs.own_price_at(p);
            ++count;
        }
        if (count > 0) pbar_ = sum / count;
        if (pbar_ <= 0.0) pbar_ = stream_.uniform(hp_.ml_init_lo, hp_.ml_init_hi);

        floor_ = obs.t;
        explore_step_ = 0;
        exploiting_ = false;
        cycle_revenues_.clear();
        for (auto& s : smoothers_) s.reset();
    }

    void fit_models(const StrategyObservation& obs) {
        std::vector<std::vector<double>> x;
        std::vector<double> y;
        for (int p = floor_; p < obs.t; ++p) {
            std::vector<double> row(obs.n, 0.0);
            row[0] = obs.own_price_at(p);
            std::size_t pos = 1;
            const auto& prices = obs.prices_at(p);
            for (int k = 0; k < obs.n; ++k)
                if (k != obs.own_index) row[pos++] = prices[k];
            x.push_back(std::move(row));
            y.push_back(obs.own_sales_at(p));
        }

        model_ = FittedModel{};
        if (x.size() >= 4) {
            const int candidates = 5;
            const int folds = std::min<int>(hp_.ml_cv_folds, static_cast<int>(x.size()));
            std::vector<double> cv_error(candidates, 0.0);
            for (int fold = 0; fold < folds; ++fold) {
                std::vector<std::vector<double>> train_x, test_x;
                std::vector<double> train_y, test_y;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (static_cast<int>(i % folds) == fold) {
                        test_x.push_back(x[i]);
                        test_y.push_back(y[i]);
                    } else {
                        train_x.push_back(x[i]);
                        train_y.push_back(y[i]);
                    }
                }
                if (train_x.size() < 2 || test_x.empty()) continue;
                for (int c = 0; c < candidates; ++c) {
                    const auto candidate = fit_candidate(c, train_x, train_y);
                    for (std::size_t i = 0; i < test_x.size(); ++i) {
                        const double err = candidate.predict(test_x[i]) - test_y[i];
                        cv_error[c] += err * err;
                    }
                }
            }
            int best = 0;
            for (int c = 1; c < candidates; ++c)
                if (cv_error[c] < cv_error[best]) best = c;
            model_ = fit_candidate(best, x, y);
        }
        if (!model_.valid) {
            // degenerate data: hold the observed mean-price level instead
            model_.linear.intercept = 1.0;
            model_.linear.coefs.assign(obs.n, 0.0);
            model_.linear.valid = true;
            model_.valid = true;
        }

        exploiting_ = true;
        exploit_len_ = hp_.ml_exploit_lo +
                       static_cast<int>(stream_.uniform_below(hp_.ml_exploit_hi - hp_.ml_exploit_lo + 1));
        exploit_step_ = 0;
        cycle_revenues_.clear();
    }

    FittedModel fit_candidate(int which, const std::vector<std::vector<double>>& x,
                              const std::vector<double>& y) {
        FittedModel m;
        switch (which) {
            case 0: m.linear = fit_ols(x, y, 1e-8); break;
            case 1: m.linear = fit_penalized(x, y, 1.0, false); break;   // ridge
            case 2: m.linear = fit_penalized(x, y, 0.1, true); break;    // lasso
            case 3: m.linear = fit_gd(x, y); break;
            case 4:
                m.forest = fit_forest(x, y, hp_.ml_forest_trees, hp_.ml_forest_depth, stream_);
                m.use_forest = true;
                break;
        }
        m.valid = m.use_forest ? m.forest.valid : m.linear.valid;
        return m;
    }

    Hyperparams hp_;
    RngStream stream_;
    bool started_ = false;
    bool exploiting_ = false;
    int explore_step_ = 0;
    int exploit_step_ = 0;
    int exploit_len_ = 0;
    int floor_ = 0;
    double pbar_ = 0.0;
    std::vector<double> cycle_revenues_;
    std::vector<detail::LevelSmoother> smoothers_;
    FittedModel model_;
};

StrategyPtr make_ml(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<MlStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
