#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "pricesim/strategy.hpp"

namespace pricesim::testing {

class ConstantStrategy final : public Strategy {
public:
    explicit ConstantStrategy(double price) : price_(price) {}
    std::string_view id() const override { return "stub-const"; }
    double next_price(const StrategyObservation&) override { return price_; }

private:
    double price_;
};

// Throws from a given period onward.
class ThrowingStrategy final : public Strategy {
public:
    explicit ThrowingStrategy(int fail_from_t, double price = 12.0)
        : fail_from_(fail_from_t), price_(price) {}
    std::string_view id() const override { return "stub-throw"; }
    double next_price(const StrategyObservation& obs) override {
        if (obs.t >= fail_from_) throw std::runtime_error("synthetic failure");
        return price_;
    }

private:
    int fail_from_;
    double price_;
};

// Burns steps forever; relies on the engine's budget to stop it.
class HogStrategy final : public Strategy {
public:
    explicit HogStrategy(int hog_at_t) : hog_at_(hog_at_t) {}
    std::string_view id() const override { return "stub-hog"; }
    double next_price(const StrategyObservation& obs) override {
        if (obs.t == hog_at_)
            for (;;) charge(1024);
        return 15.0;
    }

private:
    int hog_at_;
};

// Records everything it observes.
class SpyStrategy final : public Strategy {
public:
    std::string_view id() const override { return "stub-spy"; }
    double next_price(const StrategyObservation& obs) override {
        ts.push_back(obs.t);
        price_rows = *obs.price_history;
        own_sales = *obs.own_sales_history;
        return 20.0;
    }

    std::vector<int> ts;
    std::vector<std::vector<double>> price_rows;
    std::vector<double> own_sales;
};

}  // namespace pricesim::testing
