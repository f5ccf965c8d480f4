#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pricesim {

// What a competitor sees when asked for its next price: every posted price is
// public, sales are private to the observer. t counts completed periods, so
// the returned price applies to period t+1 and the very first call sees t=0
// with empty history.
struct StrategyObservation {
    int t = 0;
    int own_index = 0;
    int n = 0;
    const std::vector<std::vector<double>>* price_history = nullptr;  // [period][competitor]
    const std::vector<double>* own_sales_history = nullptr;           // [period]

    const std::vector<double>& prices_at(int period) const { return (*price_history)[period]; }
    double own_price_at(int period) const { return (*price_history)[period][own_index]; }
    double own_sales_at(int period) const { return (*own_sales_history)[period]; }
};

// Raised by cooperative step accounting when a strategy exceeds its per-call
// budget; the engine substitutes price 0 for that period and moves on.
struct StepBudgetExceeded : std::runtime_error {
    StepBudgetExceeded() : std::runtime_error("strategy step budget exceeded") {}
};

class Strategy {
public:
    virtual ~Strategy() = default;
    virtual std::string_view id() const = 0;
    virtual double next_price(const StrategyObservation& obs) = 0;

    void begin_call(std::int64_t step_budget) { steps_left_ = step_budget; }

    // Diagnostics accumulated during next_price; the engine drains them into
    // the competition's event log.
    std::vector<std::string> drain_notes() {
        std::vector<std::string> out;
        out.swap(notes_);
        return out;
    }

protected:
    void charge(std::int64_t steps) {
        steps_left_ -= steps;
        if (steps_left_ < 0) throw StepBudgetExceeded{};
    }

    void note(std::string message) { notes_.push_back(std::move(message)); }

private:
    std::int64_t steps_left_ = INT64_MAX;
    std::vector<std::string> notes_;
};

using StrategyPtr = std::unique_ptr<Strategy>;

}  // namespace pricesim
