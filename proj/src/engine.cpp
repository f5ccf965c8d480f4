#include "pricesim/engine.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace pricesim {

std::string CompetitionId::label() const {
    if (kind == CompetitionKind::Oligopoly) return "oli";
    return "duo:" + std::to_string(a) + ":" + std::to_string(b);
}

double sanitize_price(double raw) {
    if (!std::isfinite(raw) || raw < 0.0) return 0.0;
    return raw;
}

CompetitionTrace run_competition(std::span<const StrategyPtr> strategies, const MarketParams& params,
                                 int n, const EngineConfig& cfg, RngStream market_stream,
                                 CompetitionId id) {
    if (strategies.size() < 2) throw std::invalid_argument("run_competition: needs >= 2 strategies");
    if (static_cast<int>(strategies.size()) != n)
        throw std::invalid_argument("run_competition: market size must match strategy count");
    if (cfg.periods < 1) throw std::invalid_argument("run_competition: periods must be >= 1");

    CompetitionTrace trace;
    trace.id = id;
    trace.cumulative_revenue.assign(strategies.size(), 0.0);
    trace.prices.reserve(cfg.periods);
    trace.outcomes.reserve(cfg.periods);

    std::vector<std::vector<double>> sales_history(strategies.size());

    for (int t = 1; t <= cfg.periods; ++t) {
        std::vector<double> prices(strategies.size(), 0.0);
        for (std::size_t k = 0; k < strategies.size(); ++k) {
            StrategyObservation obs;
            obs.t = t - 1;
            obs.own_index = static_cast<int>(k);
            obs.n = n;
            obs.price_history = &trace.prices;
            obs.own_sales_history = &sales_history[k];

            double raw = 0.0;
            strategies[k]->begin_call(cfg.step_budget);
            try {
                raw = strategies[k]->next_price(obs);
            } catch (const StepBudgetExceeded&) {
                raw = 0.0;
                trace.events.push_back({t, static_cast<int>(k), "step-budget"});
            } catch (const std::exception& e) {
                raw = 0.0;
                trace.events.push_back({t, static_cast<int>(k), std::string("exception: ") + e.what()});
            }
            for (auto& msg : strategies[k]->drain_notes())
                trace.events.push_back({t, static_cast<int>(k), std::move(msg)});
            prices[k] = sanitize_price(raw);
        }

        PeriodOutcome outcome = realize_period(prices, params, n, market_stream);
        for (std::size_t k = 0; k < strategies.size(); ++k) {
            trace.cumulative_revenue[k] += outcome.per_competitor[k].revenue;
            sales_history[k].push_back(static_cast<double>(outcome.per_competitor[k].total_sales()));
        }
        trace.prices.push_back(std::move(prices));
        trace.outcomes.push_back(std::move(outcome));
    }
    return trace;
}

Scorecard score_simulation(std::span<const double> x, const std::vector<std::vector<double>>& y) {
    const std::size_t m = x.size();
    if (y.size() != m) throw std::invalid_argument("score_simulation: mismatched revenue inputs");

    Scorecard card;
    card.x_bar.assign(m, 0.0);
    card.y_bar.assign(m, 0.0);
    card.final_share.assign(m, 0.0);

    double x_total = 0.0;
    for (double v : x) {
        if (v < 0.0) throw std::invalid_argument("score_simulation: negative revenue");
        x_total += v;
    }
    if (x_total > 0.0) {
        for (std::size_t j = 0; j < m; ++j) card.x_bar[j] = x[j] / x_total;
    } else {
        card.oligopoly_fallback = true;
        for (auto& v : card.x_bar) v = 1.0 / static_cast<double>(m);
    }

    double y_total = 0.0;
    std::vector<double> y_rows(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < m; ++k) {
            if (k == j) continue;
            if (y[j][k] < 0.0) throw std::invalid_argument("score_simulation: negative revenue");
            y_rows[j] += y[j][k];
        }
        y_total += y_rows[j];
    }
    if (y_total > 0.0) {
        for (std::size_t j = 0; j < m; ++j) card.y_bar[j] = y_rows[j] / y_total;
    } else {
        card.duopoly_fallback = true;
        for (auto& v : card.y_bar) v = 1.0 / static_cast<double>(m);
    }

    for (std::size_t j = 0; j < m; ++j)
        card.final_share[j] = 0.5 * (card.x_bar[j] + card.y_bar[j]);
    return card;
}

namespace {

constexpr std::uint64_t kParamsTag = 0x706172616d73ULL;    // "params"
constexpr std::uint64_t kMarketTag = 0x6d61726b6574ULL;    // "market"
constexpr std::uint64_t kStrategyTag = 0x7374726174ULL;    // "strat"

std::vector<StrategyPtr> make_roster(std::span<const StrategyFactory> factories,
                                     std::span<const int> slots, const RngStream& root,
                                     int sim_index, int comp_index) {
    std::vector<StrategyPtr> out;
    out.reserve(slots.size());
    const RngStream base = root.derive(kStrategyTag)
                               .derive(static_cast<std::uint64_t>(sim_index))
                               .derive(static_cast<std::uint64_t>(comp_index));
    for (std::size_t pos = 0; pos < slots.size(); ++pos)
        out.push_back(factories[slots[pos]](base.derive(static_cast<std::uint64_t>(slots[pos]))));
    return out;
}

}  // namespace

SimulationResult run_simulation(std::span<const StrategyFactory> factories, int sim_index,
                                const EngineConfig& cfg, const RngStream& root) {
    const int m = static_cast<int>(factories.size());
    if (m < 2) throw std::invalid_argument("run_simulation: roster must have >= 2 strategies");

    SimulationResult result;
    result.sim_index = sim_index;

    RngStream params_stream =
        root.derive(kParamsTag).derive(static_cast<std::uint64_t>(sim_index));
    result.params = sample_market_params(m, params_stream);

    const RngStream market_base =
        root.derive(kMarketTag).derive(static_cast<std::uint64_t>(sim_index));

    int comp_index = 0;
    std::vector<std::vector<double>> y(m, std::vector<double>(m, 0.0));
    for (int j = 0; j < m; ++j) {
        for (int k = j + 1; k < m; ++k) {
            const int slots[2] = {j, k};
            auto roster = make_roster(factories, slots, root, sim_index, comp_index);
            CompetitionId id{sim_index, CompetitionKind::Duopoly, j, k};
            auto trace =
                run_competition(roster, result.params, 2, cfg,
                                market_base.derive(static_cast<std::uint64_t>(comp_index)), id);
            y[j][k] = trace.cumulative_revenue[0];
            y[k][j] = trace.cumulative_revenue[1];
            result.duopolies.push_back(std::move(trace));
            ++comp_index;
        }
    }

    std::vector<int> all_slots(m);
    for (int j = 0; j < m; ++j) all_slots[j] = j;
    auto roster = make_roster(factories, all_slots, root, sim_index, comp_index);
    CompetitionId id{sim_index, CompetitionKind::Oligopoly, 0, m - 1};
    result.oligopoly =
        run_competition(roster, result.params, m, cfg,
                        market_base.derive(static_cast<std::uint64_t>(comp_index)), id);

    result.scorecard = score_simulation(result.oligopoly.cumulative_revenue, y);
    return result;
}

TournamentResult run_tournament(std::span<const StrategyFactory> factories, int simulations,
                                const EngineConfig& cfg, std::uint64_t master_seed, int parallelism,
                                const SimulationSink& sink) {
    if (simulations < 1) throw std::invalid_argument("run_tournament: needs >= 1 simulation");
    const int m = static_cast<int>(factories.size());
    const RngStream root(master_seed);

    TournamentResult result;
    result.per_simulation.resize(simulations);

    std::atomic<int> next_sim{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const int i = next_sim.fetch_add(1);
            if (i >= simulations || failed.load()) return;
            try {
                SimulationResult sim = run_simulation(factories, i, cfg, root);
                result.per_simulation[i] = sim.scorecard;
                if (sink) sink(sim);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failed.store(true);
                if (failure.empty()) failure = e.what();
                return;
            }
        }
    };

    const int threads = std::max(1, parallelism);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failed.load()) throw std::runtime_error("run_tournament: " + failure);

    result.mean_final.assign(m, 0.0);
    result.mean_x_bar.assign(m, 0.0);
    result.mean_y_bar.assign(m, 0.0);
    for (const auto& card : result.per_simulation) {
        for (int j = 0; j < m; ++j) {
            result.mean_final[j] += card.final_share[j];
            result.mean_x_bar[j] += card.x_bar[j];
            result.mean_y_bar[j] += card.y_bar[j];
        }
    }
    for (int j = 0; j < m; ++j) {
        result.mean_final[j] /= simulations;
        result.mean_x_bar[j] /= simulations;
        result.mean_y_bar[j] /= simulations;
    }
    return result;
}

}  // namespace pricesim
