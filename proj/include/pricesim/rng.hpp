#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace pricesim {

// Hash-derived, splittable random streams. A stream is identified by a 64-bit
// key; keys are derived by folding labels into the parent key, so any
// (master seed, simulation, competition, consumer) path names the same
// sequence no matter which thread materializes it.
class RngStream {
public:
    explicit RngStream(std::uint64_t master_seed) : key_(mix(0x9e3779b97f4a7c15ULL, master_seed)) {
        reseed();
    }

    RngStream derive(std::uint64_t label) const { return RngStream(derived_tag{}, mix(key_, label)); }
    RngStream derive(std::string_view label) const { return derive(fnv1a(label)); }

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5ULL, 7) * 9ULL;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // 53-bit uniform in [0, 1)
    double uniform01() { return (next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) {
        if (!(lo < hi)) throw std::invalid_argument("uniform: requires lo < hi");
        return lo + uniform01() * (hi - lo);
    }

    // uniform integer in [0, n), rejection-free of modulo bias
    std::uint64_t uniform_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
        const std::uint64_t threshold = (-n) % n;
        for (;;) {
            std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    double exponential(double mean) {
        if (!(mean > 0)) throw std::invalid_argument("exponential: mean must be positive");
        return -mean * std::log(1.0 - uniform01());
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    long poisson(double mean) {
        if (!(mean >= 0)) throw std::invalid_argument("poisson: mean must be nonnegative");
        if (mean == 0.0) return 0;
        return mean < 10.0 ? poisson_small(mean) : poisson_ptrd(mean);
    }

    // index draw from explicit probabilities (assumed validated by the caller)
    std::size_t categorical(std::span<const double> probs) {
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size() - 1;
    }

    std::vector<long> multinomial(long n, std::span<const double> probs) {
        validate_probs(probs);
        if (n < 0) throw std::invalid_argument("multinomial: n must be nonnegative");
        std::vector<long> counts(probs.size(), 0);
        for (long i = 0; i < n; ++i) counts[categorical(probs)]++;
        return counts;
    }

    double gamma(double shape) {
        if (!(shape > 0)) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            // boost via G(a) = G(a+1) * U^(1/a)
            const double g = gamma(shape + 1.0);
            double u = uniform01();
            if (u < 1e-300) u = 1e-300;
            return g * std::pow(u, 1.0 / shape);
        }
        // Marsaglia-Tsang squeeze
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 1e-300 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::vector<double> dirichlet(std::span<const double> alphas) {
        if (alphas.empty()) throw std::invalid_argument("dirichlet: needs at least one alpha");
        std::vector<double> g(alphas.size());
        double total = 0.0;
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            if (!(alphas[i] > 0)) throw std::invalid_argument("dirichlet: alphas must be positive");
            g[i] = gamma(alphas[i]);
            total += g[i];
        }
        if (total <= 0.0) {  // all-zero draw is astronomically unlikely but keep the simplex valid
            for (auto& v : g) v = 1.0 / static_cast<double>(g.size());
            return g;
        }
        for (auto& v : g) v /= total;
        return g;
    }

    static void validate_probs(std::span<const double> probs) {
        double sum = 0.0;
        for (double p : probs) {
            if (!(p >= 0.0)) throw std::invalid_argument("probabilities must be nonnegative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
    }

private:
    struct derived_tag {};
    RngStream(derived_tag, std::uint64_t key) : key_(key) { reseed(); }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    // splitmix64 finalizer; also used to chain (key, label) pairs
    static std::uint64_t avalanche(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t mix(std::uint64_t key, std::uint64_t label) {
        return avalanche((key + 0x9e3779b97f4a7c15ULL) ^ avalanche(label + 0x2545f4914f6cdd1dULL));
    }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    void reseed() {
        std::uint64_t z = key_;
        for (auto& w : s_) {
            z += 0x9e3779b97f4a7c15ULL;
            w = avalanche(z);
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
        have_cached_ = false;
        cached_ = 0.0;
    }

    long poisson_small(double mean) {
        const double limit = std::exp(-mean);
        long k = 0;
        double prod = uniform01();
        while (prod > limit) {
            ++k;
            prod *= uniform01();
        }
        return k;
    }

    // Hormann's PTRD transformed-rejection sampler, exact for mean >= 10
    long poisson_ptrd(double mu) {
        const double smu = std::sqrt(mu);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mu = std::log(mu);
        for (;;) {
            double u = uniform01() - 0.5;
            double v = uniform01();
            double us = 0.5 - std::abs(u);
            double kf = std::floor((2.0 * a / us + b) * u + mu + 0.43);
            if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            const double k = kf;
            const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
            const double rhs = k * log_mu - mu - std::lgamma(k + 1.0);
            if (lhs <= rhs) return static_cast<long>(kf);
        }
    }

    std::uint64_t key_;
    std::array<std::uint64_t, 4> s_{};
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace pricesim
