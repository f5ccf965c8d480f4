#include <array>
#include <cmath>

#include "internal.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

// Epsilon-greedy bandit over the price buckets (0,10], (10,20], ..., (90,100].
// Arm values are conditioned on the competitors' modal price bucket, which is
// forecast by exponentially smoothing per-bucket price counts.
class BBucketStrategy final : public Strategy {
public:
    BBucketStrategy(const Hyperparams& hp, RngStream stream) : hp_(hp), stream_(std::move(stream)) {
        for (auto& row : means_) row.fill(0.0);
        for (auto& row : counts_) row.fill(0.0);
        smoothed_.fill(0.0);
    }

    std::string_view id() const override { return "b-bucket"; }

    static int bucket_of(double price) {
        if (price <= 0.0) return 0;
        return std::min(kBuckets - 1, static_cast<int>(std::ceil(price / 10.0)) - 1);
    }

    double next_price(const StrategyObservation& obs) override {
        if (obs.t >= 1) {
            if (last_arm_ >= 0) {
                const double revenue = detail::own_revenue_at(obs, obs.t - 1);
                auto& n = counts_[last_arm_][last_mode_];
                auto& mean = means_[last_arm_][last_mode_];
                mean = (mean * n + revenue) / (n + 1.0);
                n += 1.0;
            }
            std::array<double, kBuckets> fresh{};
            const auto& row = obs.prices_at(obs.t - 1);
            for (int k = 0; k < obs.n; ++k)
                if (k != obs.own_index) fresh[bucket_of(row[k])] += 1.0;
            if (!smoothing_primed_) {
                smoothed_ = fresh;
                smoothing_primed_ = true;
            } else {
                for (int b = 0; b < kBuckets; ++b)
                    smoothed_[b] = (1.0 - hp_.smooth_level) * smoothed_[b] + hp_.smooth_level * fresh[b];
            }
        }

        int mode = 0;
        for (int b = 1; b < kBuckets; ++b)
            if (smoothed_[b] > smoothed_[mode]) mode = b;

        int arm;
        if (stream_.uniform01() < hp_.epsilon) {
            arm = static_cast<int>(stream_.uniform_below(kBuckets));
        } else {
            arm = 0;
            for (int a = 1; a < kBuckets; ++a)
                if (means_[a][mode] > means_[arm][mode]) arm = a;
        }
        last_arm_ = arm;
        last_mode_ = mode;
        // draw from (10*arm, 10*(arm+1)]
        return 10.0 * (arm + 1) - stream_.uniform01() * 10.0;
    }

private:
    static constexpr int kBuckets = 10;
    Hyperparams hp_;
    RngStream stream_;
    std::array<std::array<double, kBuckets>, kBuckets> means_{};   // [arm][modal bucket]
    std::array<std::array<double, kBuckets>, kBuckets> counts_{};
    std::array<double, kBuckets> smoothed_{};
    bool smoothing_primed_ = false;
    int last_arm_ = -1;
    int last_mode_ = 0;
};

StrategyPtr make_bbucket(const Hyperparams& hp, RngStream stream) {
    return std::make_unique<BBucketStrategy>(hp, std::move(stream));
}

}  // namespace pricesim
