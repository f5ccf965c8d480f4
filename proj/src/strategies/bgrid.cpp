#include <array>

#include "internal.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

// Epsilon-greedy bandit over the price grid 10, 20, ..., 100. Competitors'
// prices are ignored; each arm tracks the running mean of realized revenue.
class BGridStrategy final : public Strategy {
public:
    BGridStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {}

    std::string_view id() const override { return "b-grid"; }

    double next_price(const StrategyObservation& obs) override {
        if (last_arm_ >= 0 && obs.t >= 1) {
            const double revenue = detail::own_revenue_at(obs, obs.t - 1);
            auto& n = counts_[last_arm_];
            auto& mean = means_[last_arm_];
            mean = (mean * n + revenue) / (n + 1.0);
            n += 1.0;
        }

        int arm;
        if (stream_.uniform01() < hp_.epsilon) {
            arm = static_cast<int>(stream_.uniform_below(kArms));
        } else {
            arm = 0;
            for (int a = 1; a < kArms; ++a)
                if (means_[a] > means_[arm]) arm = a;
        }
        last_arm_ = arm;
        return 10.0 * (arm + 1);
    }

private:
    static constexpr int kArms = 10;
    Hyperparams hp_;
    RngStream stream_;
    std::array<double, kArms> means_{};
    std::array<double, kArms> counts_{};
    int last_arm_ = -1;
};

StrategyPtr make_bgrid(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<BGridStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
