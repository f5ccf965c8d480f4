// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 (full scale) lives in its own binary.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>
#include <vector>

#include "pricesim/bmodel_demand.hpp"
#include "pricesim/config.hpp"
#include "pricesim/engine.hpp"
#include "pricesim/market.hpp"
#include "pricesim/mixture_logit.hpp"
#include "pricesim/stats.hpp"
#include "pricesim/strategies.hpp"
#include "pricesim/trace.hpp"
#include "pricesim/wls_model.hpp"

using namespace pricesim;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

class ConstantStub final : public Strategy {
public:
    explicit ConstantStub(double price) : price_(price) {}
    std::string_view id() const override { return "stub-const"; }
    double next_price(const StrategyObservation&) override { return price_; }

private:
    double price_;
};

const Hyperparams kHp{};

// ------------------------------------------------------------ criterion 1

void criterion_1_score_normalization() {
    const double start = now_seconds();
    const auto factories = make_roster_factories(strategy_ids(), kHp);
    EngineConfig cfg;
    cfg.periods = 100;
    const auto result = run_tournament(factories, 200, cfg, 11001, 2);
    double worst = 0.0;
    for (const auto& card : result.per_simulation) {
        double sx = 0.0, sy = 0.0, sf = 0.0;
        for (std::size_t j = 0; j < card.x_bar.size(); ++j) {
            sx += card.x_bar[j];
            sy += card.y_bar[j];
            sf += card.final_share[j];
        }
        worst = std::max({worst, std::abs(sx - 1.0), std::abs(sy - 1.0), std::abs(sf - 1.0)});
    }
    const double elapsed = now_seconds() - start;
    const bool pass = worst <= 1e-12 && elapsed < 60.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "score normalization over 200 sims x 100 periods, worst |sum-1| = %.2e, "
                  "runtime %.1f s (limit 60 s)",
                  worst, elapsed);
    report(1, pass, buf);
}

// ------------------------------------------------------------ criterion 2

void criterion_2_calibration() {
    RngStream stream(11002);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const MarketParams p = sample_market_params(8, stream);
        for (int n : {2, 8}) {
            const auto peak = [&](double alpha, double beta, double target) {
                double best_p = 0.01, best = -1.0;
                for (double price = 0.01; price <= 3.0 * target + 1e-12; price += 0.01) {
                    const double e = std::exp(alpha - beta * price);
                    const double rev = n * price * e / (1.0 + n * e);
                    if (rev > best) {
                        best = rev;
                        best_p = price;
                    }
                }
                return std::abs(best_p - target);
            };
            worst = std::max(worst, peak(p.alpha_phd, p.beta_phd_by_n.at(n), p.p_phd));
            worst = std::max(worst, peak(p.alpha_prof, p.beta_prof_by_n.at(n), p.p_prof));
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "symmetric grid peak within one 0.01 step of the target price for 100 random "
                  "markets, worst offset %.4f",
                  worst);
    report(2, worst <= 0.0100001, buf);
}

// ------------------------------------------------------------ criterion 3

void criterion_3_closed_forms() {
    RngStream stream(11003);
    int checks = 0, violations = 0;
    double worst_sigma = 0.0;
    for (int config = 0; config < 20; ++config) {
        const int m = 2 + static_cast<int>(stream.uniform_below(7));
        MarketParams p = sample_market_params(m, stream);
        std::vector<double> prices(m);
        for (auto& price : prices) price = stream.uniform(0.3 * p.beta_sho, 2.5 * p.beta_sho);
        std::sort(prices.begin(), prices.end());  // distinct with probability 1

        const int periods = 100000;
        std::vector<double> sho(m, 0.0), loy(m, 0.0), sci(m, 0.0);
        RngStream market = stream.derive("market").derive(config);
        for (int t = 0; t < periods; ++t) {
            const auto outcome = realize_period(prices, p, m, market);
            for (int k = 0; k < m; ++k) {
                sho[k] += outcome.per_competitor[k].sales_sho;
                loy[k] += outcome.per_competitor[k].sales_loy;
                sci[k] += outcome.per_competitor[k].sales_sci;
            }
        }

        const auto check = [&](double observed_mean, double expected_mean) {
            const double se = std::sqrt(std::max(expected_mean, 1e-12) / periods);
            const double sigma = std::abs(observed_mean - expected_mean) / se;
            worst_sigma = std::max(worst_sigma, sigma);
            ++checks;
            if (sigma > 3.0) ++violations;
        };

        // shoppers: thinned Poisson to the cheapest competitor only
        check(sho[0] / periods, p.lambda * p.theta_sho * std::exp(-prices[0] / p.beta_sho));
        for (int k = 1; k < m; ++k) check(sho[k] / periods, 0.0);
        const auto qphd = scientist_choice_probs(prices, p.alpha_phd, p.beta_phd_by_n.at(m));
        const auto qprof = scientist_choice_probs(prices, p.alpha_prof, p.beta_prof_by_n.at(m));
        for (int k = 0; k < m; ++k) {
            check(loy[k] / periods,
                  p.lambda * p.theta_loy / m * std::exp(-prices[k] / p.beta_loy));
            check(sci[k] / periods,
                  p.lambda * p.theta_sci *
                      (p.gamma_phd * qphd.buy[k] + p.gamma_prof * qprof.buy[k]));
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "Monte-Carlo segment sales vs closed forms: %d comparisons across 20 markets, "
                  "%d beyond 3 s.e., worst %.2f s.e.",
                  checks, violations, worst_sigma);
    report(3, violations == 0, buf);
}

// ------------------------------------------------------------ criterion 4

void criterion_4_parallel_determinism() {
    const fs::path base = fs::temp_directory_path() / "pricesim_acceptance_det";
    fs::remove_all(base);
    RunConfig cfg;
    cfg.sims = 50;
    cfg.periods = 200;
    cfg.seed = 11004;

    const auto run_once = [&](const std::string& tag, int parallelism) {
        const fs::path dir = base / tag;
        DirTraceSink sink(dir.string(), cfg);
        const auto factories = make_roster_factories(cfg.roster, cfg.hyperparams);
        EngineConfig engine_cfg;
        engine_cfg.periods = cfg.periods;
        run_tournament(factories, cfg.sims, engine_cfg, cfg.seed, parallelism,
                       [&](const SimulationResult& sim) { sink(sim); });
        sink.write_manifest();
        return dir;
    };

    const fs::path serial = run_once("serial", 1);
    const int max_par = std::max(2u, std::thread::hardware_concurrency());
    const fs::path parallel = run_once("parallel", max_par);

    int mismatches = 0;
    const auto read_bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    };
    for (int i = 0; i < cfg.sims; ++i) {
        const std::string name = DirTraceSink::sim_filename(i);
        if (read_bytes(serial / name) != read_bytes(parallel / name)) ++mismatches;
    }
    if (read_bytes(serial / "manifest.json") != read_bytes(parallel / "manifest.json"))
        ++mismatches;
    fs::remove_all(base);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "serial vs %d-thread traces over 50 sims x 200 periods: %d mismatched files",
                  max_par, mismatches);
    report(4, mismatches == 0, buf);
}

// ------------------------------------------------------------ criterion 5

void criterion_5_greedy_tit_for_tat() {
    RngStream stream(11005);
    const MarketParams params = sample_market_params(2, stream);
    std::vector<StrategyPtr> roster;
    roster.push_back(make_strategy("greedy", kHp, stream.derive("greedy")));
    roster.push_back(std::make_unique<ConstantStub>(40.0));
    EngineConfig cfg;
    cfg.periods = 1000;
    const auto trace = run_competition(roster, params, 2, cfg, stream.derive("market"));
    int off = 0;
    for (int t = 1; t < cfg.periods; ++t) off += trace.prices[t][0] != 40.0;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "greedy vs constant 40: %d deviations from 40 over periods 2..1000", off);
    report(5, off == 0, buf);
}

// ------------------------------------------------------------ criterion 6

bool check_ols_linear() {
    auto ols = make_strategy("ols", kHp, RngStream(11061));
    std::vector<std::vector<double>> history;
    std::vector<double> sales;
    std::vector<double> exploit;
    for (int t = 0; t < 640; ++t) {
        StrategyObservation obs{t, 0, 2, &history, &sales};
        ols->begin_call(INT64_MAX);
        const double p = ols->next_price(obs);
        history.push_back({p, 50.0});
        sales.push_back(100.0 - 2.0 * p);
        if (t >= 40 && std::abs(p - 25.0) <= 1.101) exploit.push_back(p);
    }
    if (exploit.size() < 450) return false;
    const double mean = mean_of(exploit);
    return std::abs(mean - 25.0) <= 0.2;
}

bool check_ols_log() {
    auto ols = make_strategy("ols", kHp, RngStream(11062));
    std::vector<std::vector<double>> history;
    std::vector<double> sales;
    std::vector<double> exploit;
    for (int t = 0; t < 500; ++t) {
        StrategyObservation obs{t, 0, 2, &history, &sales};
        ols->begin_call(INT64_MAX);
        const double p = ols->next_price(obs);
        history.push_back({p, 50.0});
        sales.push_back(std::exp(5.0 - 0.1 * p));
        if (t >= 40 && std::abs(p - 10.0) <= 1.101) exploit.push_back(p);
    }
    if (exploit.size() < 350) return false;
    return std::abs(mean_of(exploit) - 10.0) <= 0.2;
}

bool check_wls_recovery() {
    RngStream s(11063);
    std::vector<double> x, sy, d;
    for (int i = 0; i < 50; ++i) {
        x.push_back(s.uniform(1.0, 90.0));
        sy.push_back(s.uniform(1.0, 200.0));
        d.push_back(50.0 - 2.0 * x.back() + 0.5 * sy.back());
    }
    for (WlsScheme scheme : kWlsSchemes) {
        const auto model = wls_fit(x, sy, d, scheme, kHp);
        if (!model.valid) return false;
        if (std::abs(model.a - 50.0) > 1e-6) return false;
        if (std::abs(model.b + 2.0) > 1e-6) return false;
        if (std::abs(model.c - 0.5) > 1e-6) return false;
    }
    return true;
}

bool check_mixture_em() {
    RngStream s(11064);
    std::vector<std::vector<double>> rows;
    std::vector<double> sales;
    for (int t = 0; t < 500; ++t) {
        const double own = s.uniform(2.0, 15.0);
        const double rival = s.uniform(2.0, 15.0);
        rows.push_back({own, rival});
        const double num = std::exp(10.0 - own);
        sales.push_back(num / (1.0 + num + std::exp(10.0 - rival)));
    }
    const auto model = fit_mixture_em(rows, sales, 0, 1, 10, 200, 1e-12);
    if (!model.valid) return false;
    const MixtureComponent* best = nullptr;
    for (const auto& c : model.components)
        if (c.arrivals > 0.0 && (!best || c.weight > best->weight)) best = &c;
    return best && std::abs(best->b - 1.0) <= 0.10;
}

bool check_bmodel_annealing() {
    RngStream s(11065);
    BModelParams truth;
    truth.d = 1;
    truth.e = 2;
    std::vector<BModelObservation> observations;
    for (int i = 0; i < 500; ++i) {
        BModelObservation row;
        row.own_price = s.uniform(5.0, 60.0);
        row.others = {s.uniform(5.0, 60.0), s.uniform(5.0, 60.0)};
        std::sort(row.others.begin(), row.others.end());
        row.own_sales = 40.0 * bmodel_share(3, row.own_price, row.others, truth, kHp.bmodel_quad_nodes);
        observations.push_back(std::move(row));
    }
    RngStream fit_stream(11066);
    const auto fit = bmodel_fit_annealing(observations, 3, kHp, fit_stream);
    return fit.ok && fit.params.d == 1 && fit.params.e == 2;
}

bool check_ml_vertex() {
    auto ml = make_strategy("ml", kHp, RngStream(11067));
    std::vector<std::vector<double>> history;
    std::vector<double> sales;
    RngStream noise(11068);
    for (int t = 0; t < 60; ++t) {
        StrategyObservation obs{t, 0, 2, &history, &sales};
        ml->begin_call(INT64_MAX);
        const double p = ml->next_price(obs);
        history.push_back({p, noise.uniform(10.0, 60.0)});
        sales.push_back(120.0 - 3.0 * p);
        if (t >= 40 && std::abs(p - 20.0) > 0.1000001) return false;
    }
    return true;
}

void criterion_6_learner_self_consistency() {
    std::string detail;
    bool pass = true;
    const auto add = [&](const char* name, bool ok) {
        pass = pass && ok;
        detail += std::string(detail.empty() ? "" : ", ") + name + (ok ? "=ok" : "=FAIL");
    };
    add("ols-linear", check_ols_linear());
    add("ols-log", check_ols_log());
    add("wls", check_wls_recovery());
    add("mixture-em", check_mixture_em());
    add("bmodel-anneal", check_bmodel_annealing());
    add("ml-vertex", check_ml_vertex());
    report(6, pass, "learner self-consistency: " + detail);
}

// ------------------------------------------------------------ criterion 7

void criterion_7_directional() {
    const double start = now_seconds();
    const auto roster = strategy_ids();
    const int greedy_slot =
        static_cast<int>(std::find(roster.begin(), roster.end(), "greedy") - roster.begin());
    const auto factories = make_roster_factories(roster, kHp);
    EngineConfig cfg;
    cfg.periods = 250;

    struct Aggregate {
        std::mutex mutex;
        std::vector<double> theta_loy;
        std::vector<double> oli_revenue_per_period;
        long greedy_high = 0;
        long oli_periods = 0;
        std::vector<std::vector<double>> x_bars, y_bars;
    } agg;

    const auto sink = [&](const SimulationResult& sim) {
        double total = 0.0;
        long strictly_high = 0;
        for (int t = 0; t < sim.oligopoly.periods(); ++t) {
            const auto& prices = sim.oligopoly.prices[t];
            for (const auto& c : sim.oligopoly.outcomes[t].per_competitor) total += c.revenue;
            bool high = true;
            for (std::size_t k = 0; k < prices.size(); ++k)
                if (static_cast<int>(k) != greedy_slot && prices[k] >= prices[greedy_slot])
                    high = false;
            strictly_high += high;
        }
        std::lock_guard<std::mutex> lock(agg.mutex);
        agg.theta_loy.push_back(sim.params.theta_loy);
        agg.oli_revenue_per_period.push_back(total / sim.oligopoly.periods());
        agg.greedy_high += strictly_high;
        agg.oli_periods += sim.oligopoly.periods();
        agg.x_bars.push_back(sim.scorecard.x_bar);
        agg.y_bars.push_back(sim.scorecard.y_bar);
    };

    run_tournament(factories, 500, cfg, 11007, 2, sink);
    const double elapsed = now_seconds() - start;

    // (a) revenue per period increasing across theta_loy deciles
    std::array<double, 10> bucket_sum{};
    std::array<long, 10> bucket_n{};
    for (std::size_t i = 0; i < agg.theta_loy.size(); ++i) {
        const int b = std::clamp(static_cast<int>(agg.theta_loy[i] * 10.0), 0, 9);
        bucket_sum[b] += agg.oli_revenue_per_period[i];
        bucket_n[b]++;
    }
    std::vector<double> decile_idx, decile_mean;
    for (int b = 0; b < 10; ++b) {
        if (bucket_n[b] == 0) continue;
        decile_idx.push_back(b);
        decile_mean.push_back(bucket_sum[b] / bucket_n[b]);
    }
    const double rho = spearman(decile_idx, decile_mean);

    // (b) greedy strictly highest-priced fraction
    const double high_frac = static_cast<double>(agg.greedy_high) / agg.oli_periods;

    // (c) oligopoly dispersion vs duopoly dispersion across strategies
    const std::size_t m = roster.size();
    std::vector<double> mean_x(m, 0.0), mean_y(m, 0.0);
    for (std::size_t i = 0; i < agg.x_bars.size(); ++i)
        for (std::size_t j = 0; j < m; ++j) {
            mean_x[j] += agg.x_bars[i][j] / agg.x_bars.size();
            mean_y[j] += agg.y_bars[i][j] / agg.y_bars.size();
        }
    const auto stdev = [](const std::vector<double>& v) {
        double mu = 0.0;
        for (double x : v) mu += x / v.size();
        double s = 0.0;
        for (double x : v) s += (x - mu) * (x - mu) / v.size();
        return std::sqrt(s);
    };
    const double disp_x = stdev(mean_x);
    const double disp_y = stdev(mean_y);

    const double eight_core_estimate = elapsed * 2.0 / 8.0;
    const bool pass = rho > 0.8 && high_frac <= 0.01 && disp_x > disp_y &&
                      eight_core_estimate < 600.0;
    char buf[280];
    std::snprintf(buf, sizeof(buf),
                  "500 sims x 250 periods: Spearman(theta_loy decile, revenue) = %.3f (> 0.8), "
                  "greedy strictly-highest %.4f%% (<= 1%%), dispersion oligopoly %.4f vs duopoly "
                  "%.4f, runtime %.0f s on 2 cores (~%.0f s scaled to 8 cores, target 600)",
                  rho, 100.0 * high_frac, disp_x, disp_y, elapsed, eight_core_estimate);
    report(7, pass, buf);
}

// ------------------------------------------------------------ criterion 8

void criterion_8_symmetry() {
    std::vector<std::string> roster(8, "b-grid");
    const auto factories = make_roster_factories(roster, kHp);
    EngineConfig cfg;
    cfg.periods = 100;
    const auto result = run_tournament(factories, 200, cfg, 11008, 2);
    double worst = 0.0;
    for (double f : result.mean_final) worst = std::max(worst, std::abs(f - 0.125));
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "8 copies of b-grid over 200 sims: worst |mean final - 1/8| = %.4f (<= 0.02)",
                  worst);
    report(8, worst <= 0.02, buf);
}

}  // namespace

int main() {
    criterion_1_score_normalization();
    criterion_2_calibration();
    criterion_3_closed_forms();
    criterion_4_parallel_determinism();
    criterion_5_greedy_tit_for_tat();
    criterion_6_learner_self_consistency();
    criterion_7_directional();
    criterion_8_symmetry();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
