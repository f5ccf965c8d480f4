#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pricesim/market.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

enum class CompetitionKind { Duopoly, Oligopoly };

struct CompetitionId {
    int sim = 0;
    CompetitionKind kind = CompetitionKind::Oligopoly;
    int a = 0;  // roster indices for duopolies; (0, m-1) span for the oligopoly
    int b = 0;

    std::string label() const;
};

struct StrategyEvent {
    int t = 0;     // period the substituted price applied to
    int slot = 0;  // competitor slot within the competition
    std::string what;
};

struct CompetitionTrace {
    CompetitionId id;
    std::vector<std::vector<double>> prices;  // [period][competitor], sanitized
    std::vector<PeriodOutcome> outcomes;      // [period]
    std::vector<double> cumulative_revenue;   // [competitor]
    std::vector<StrategyEvent> events;

    int periods() const { return static_cast<int>(prices.size()); }
    int competitors() const { return static_cast<int>(cumulative_revenue.size()); }
};

struct Scorecard {
    std::vector<double> x_bar;        // oligopoly revenue shares
    std::vector<double> y_bar;        // duopoly revenue shares
    std::vector<double> final_share;  // (x_bar + y_bar) / 2
    bool oligopoly_fallback = false;  // equal split applied on a zero denominator
    bool duopoly_fallback = false;
};

struct SimulationResult {
    int sim_index = 0;
    MarketParams params;
    std::vector<CompetitionTrace> duopolies;  // pairs (j, k), j < k, lexicographic
    CompetitionTrace oligopoly;
    Scorecard scorecard;
};

struct TournamentResult {
    std::vector<Scorecard> per_simulation;
    std::vector<double> mean_final;  // final score per roster slot
    std::vector<double> mean_x_bar;
    std::vector<double> mean_y_bar;
};

using StrategyFactory = std::function<StrategyPtr(RngStream)>;

struct EngineConfig {
    int periods = 1000;
    std::int64_t step_budget = 200'000'000;  // per next_price call
};

// NaN, infinite, and negative proposals become 0; anything else passes
// through untouched (prices above 100 are legal).
double sanitize_price(double raw);

CompetitionTrace run_competition(std::span<const StrategyPtr> strategies, const MarketParams& params,
                                 int n, const EngineConfig& cfg, RngStream market_stream,
                                 CompetitionId id = {});

// x[j]: oligopoly revenue of competitor j. y[j][k]: revenue of j in its
// duopoly against k (diagonal ignored). Zero denominators fall back to equal
// shares so the scorecard always sums to 1.
Scorecard score_simulation(std::span<const double> x, const std::vector<std::vector<double>>& y);

SimulationResult run_simulation(std::span<const StrategyFactory> factories, int sim_index,
                                const EngineConfig& cfg, const RngStream& root);

// Called once per finished simulation, possibly from worker threads.
using SimulationSink = std::function<void(const SimulationResult&)>;

TournamentResult run_tournament(std::span<const StrategyFactory> factories, int simulations,
                                const EngineConfig& cfg, std::uint64_t master_seed, int parallelism,
                                const SimulationSink& sink = {});

}  // namespace pricesim
