#include <algorithm>
#include <vector>

#include "internal.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/stats.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

// Tit-for-tat price matching: follow the cheapest competitor, with a decile
// floor that stops a race to the bottom.
class GreedyStrategy final : public Strategy {
public:
    GreedyStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {}

    std::string_view id() const override { return "greedy"; }

    double next_price(const StrategyObservation& obs) override {
        if (obs.t == 0) return stream_.uniform(hp_.greedy_init_lo, hp_.greedy_init_hi);

        const double min_prev = detail::min_others(obs, obs.t - 1);

        std::vector<double> window;
        const int first = std::max(0, obs.t - hp_.greedy_window);
        window.reserve(static_cast<std::size_t>(obs.t - first) * obs.n);
        for (int p = first; p < obs.t; ++p)
            for (double price : obs.prices_at(p)) window.push_back(price);
        const double q10 = quantile_nearest_rank(std::move(window), hp_.greedy_percentile);

        if (min_prev < q10) return std::max(q10, hp_.greedy_floor);
        return min_prev;
    }

private:
    Hyperparams hp_;
    RngStream stream_;
};

StrategyPtr make_greedy(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<GreedyStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
