#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pricesim/strategy.hpp"

namespace pricesim::detail {

struct GridPoint {
    double x = 0.0;
    double value = 0.0;
};

// Argmax of f over {lo + step, lo + 2*step, ...} up to hi (inclusive or not).
// Ties resolve to the lowest grid point.
template <class F>
GridPoint grid_argmax(double lo, double hi, double step, bool inclusive_hi, F&& f) {
    const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    const int last = inclusive_hi ? count : (lo + count * step >= hi ? count - 1 : count);
    GridPoint best{lo + step, -std::numeric_limits<double>::infinity()};
    for (int i = 1; i <= last; ++i) {
        const double x = lo + i * step;
        const double v = f(x);
        if (v > best.value) best = {x, v};
    }
    return best;
}

inline std::vector<double> others_prices(const StrategyObservation& obs, int period) {
    std::vector<double> out;
    out.reserve(obs.n - 1);
    const auto& row = obs.prices_at(period);
    for (int k = 0; k < obs.n; ++k)
        if (k != obs.own_index) out.push_back(row[k]);
    return out;
}

inline double sum_others(const StrategyObservation& obs, int period) {
    double s = 0.0;
    const auto& row = obs.prices_at(period);
    for (int k = 0; k < obs.n; ++k)
        if (k != obs.own_index) s += row[k];
    return s;
}

inline double min_others(const StrategyObservation& obs, int period) {
    double m = std::numeric_limits<double>::infinity();
    const auto& row = obs.prices_at(period);
    for (int k = 0; k < obs.n; ++k)
        if (k != obs.own_index) m = std::min(m, row[k]);
    return m;
}

inline double own_revenue_at(const StrategyObservation& obs, int period) {
    return obs.own_price_at(period) * obs.own_sales_at(period);
}

// Simple exponential smoothing of a scalar, initialized at the first value.
struct LevelSmoother {
    double coeff = 0.3;
    double level = 0.0;
    bool primed = false;

    void update(double x) {
        level = primed ? (1.0 - coeff) * level + coeff * x : x;
        primed = true;
    }
    double forecast() const { return level; }
    void reset() { primed = false; level = 0.0; }
};

// Holt's level + trend smoothing, initialized at the first value with zero trend.
struct HoltSmoother {
    double level_coeff = 0.3;
    double trend_coeff = 0.1;
    double level = 0.0;
    double trend = 0.0;
    bool primed = false;

    void update(double x) {
        if (!primed) {
            level = x;
            trend = 0.0;
            primed = true;
            return;
        }
        const double prev_level = level;
        level = level_coeff * x + (1.0 - level_coeff) * (level + trend);
        trend = trend_coeff * (level - prev_level) + (1.0 - trend_coeff) * trend;
    }
    double forecast() const { return level + trend; }
};

}  // namespace pricesim::detail
