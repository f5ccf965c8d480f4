#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "pricesim/cli.hpp"
#include "pricesim/config.hpp"
#include "pricesim/report.hpp"
#include "pricesim/strategies.hpp"
#include "pricesim/trace.hpp"
#include "support/stubs.hpp"

using namespace pricesim;
using namespace pricesim::testing;
namespace fs = std::filesystem;

namespace {

StrategyFactory constant_factory(double price) {
    return [price](RngStream) { return std::make_unique<ConstantStrategy>(price); };
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SimulationResult tiny_simulation(std::uint64_t seed, int periods) {
    std::vector<StrategyFactory> factories = {constant_factory(8.0), constant_factory(15.0)};
    EngineConfig cfg;
    cfg.periods = periods;
    return run_simulation(factories, 0, cfg, RngStream(seed));
}

}  // namespace

TEST_CASE("an empty config resolves to the full-scale defaults") {
    const RunConfig cfg = parse_config_json("{}");
    CHECK(cfg.sims == 5000);
    CHECK(cfg.periods == 1000);
    CHECK(cfg.roster.size() == 8);
    CHECK(cfg.roster == strategy_ids());
    CHECK(cfg.trace_level == TraceLevel::Full);
}

TEST_CASE("config validation produces distinct diagnostics") {
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"roster":["greedy"]})"),
                         "roster must contain at least 2 strategies", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"roster":["greedy","nope"]})"),
                         "unknown strategy identifier 'nope'", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"sims":0})"), "sims must be >= 1", ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"periods":-3})"), "periods must be >= 1",
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_json(R"({"bogus":1})"), "unknown config key 'bogus'",
                         ConfigError);
    CHECK_THROWS_AS(parse_config_json(R"({"hyperparams":{"nope":1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config_json("not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/config.json"), ConfigError);

    const RunConfig two = parse_config_json(R"({"roster":["greedy","wls"]})");
    CHECK(two.roster.size() == 2);
}

TEST_CASE("config hash changes exactly when the experiment changes") {
    RunConfig a;
    RunConfig b;
    CHECK(config_hash(a) == config_hash(b));
    b.sims = a.sims + 1;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.hyperparams.epsilon = 0.3;
    CHECK(config_hash(a) != config_hash(b));
    b = a;
    b.out_dir = "elsewhere";  // execution detail, not part of the experiment
    b.parallel = 7;
    CHECK(config_hash(a) == config_hash(b));
}

TEST_CASE("traces round-trip through the sink and reader") {
    TempDir dir("pricesim_trace_roundtrip");
    RunConfig cfg;
    cfg.roster = {"greedy", "wls"};
    cfg.sims = 1;
    cfg.periods = 4;
    DirTraceSink sink(dir.path.string(), cfg);

    const SimulationResult sim = tiny_simulation(42, 4);
    sink(sim);
    sink.write_manifest();

    const auto files = list_simulation_files(dir.path.string());
    REQUIRE(files.size() == 1);
    const auto loaded = read_simulation_file(files[0]);
    REQUIRE(loaded.has_value());
    CHECK(loaded->params.lambda == sim.params.lambda);
    CHECK(loaded->params.beta_phd_by_n == sim.params.beta_phd_by_n);
    CHECK(loaded->duopolies.size() == 1);
    CHECK(loaded->duopolies[0].prices == sim.duopolies[0].prices);
    CHECK(loaded->oligopoly.cumulative_revenue == sim.oligopoly.cumulative_revenue);
    CHECK(loaded->scorecard.final_share == sim.scorecard.final_share);
    for (int t = 0; t < 4; ++t)
        for (int k = 0; k < 2; ++k) {
            const auto& a = loaded->oligopoly.outcomes[t].per_competitor[k];
            const auto& b = sim.oligopoly.outcomes[t].per_competitor[k];
            CHECK(a.sales_sho == b.sales_sho);
            CHECK(a.sales_loy == b.sales_loy);
            CHECK(a.sales_sci == b.sales_sci);
            CHECK(a.revenue == b.revenue);
        }
    CHECK(manifest_roster(dir.path.string()) == cfg.roster);
}

TEST_CASE("repeated runs emit byte-identical files") {
    TempDir dir_a("pricesim_bytes_a");
    TempDir dir_b("pricesim_bytes_b");
    RunConfig cfg;
    cfg.roster = {"greedy", "wls"};
    cfg.sims = 1;
    cfg.periods = 6;
    DirTraceSink sink_a(dir_a.path.string(), cfg);
    DirTraceSink sink_b(dir_b.path.string(), cfg);
    sink_a(tiny_simulation(7, 6));
    sink_b(tiny_simulation(7, 6));
    sink_a.write_manifest();
    sink_b.write_manifest();
    CHECK(read_file(dir_a.path / "sim_00000.jsonl") == read_file(dir_b.path / "sim_00000.jsonl"));
    CHECK(read_file(dir_a.path / "manifest.json") == read_file(dir_b.path / "manifest.json"));
}

TEST_CASE("single-period traces carry exactly one record per competition") {
    TempDir dir("pricesim_single_period");
    RunConfig cfg;
    cfg.roster = {"greedy", "wls"};
    cfg.sims = 1;
    cfg.periods = 1;
    DirTraceSink sink(dir.path.string(), cfg);
    sink(tiny_simulation(3, 1));
    const std::string text = read_file(dir.path / "sim_00000.jsonl");
    std::size_t duo_periods = 0, pos = 0;
    while ((pos = text.find(R"("type":"period")", pos)) != std::string::npos) {
        ++duo_periods;
        ++pos;
    }
    CHECK(duo_periods == 2);  // one duopoly + one oligopoly record
    CHECK(text.find(R"("type":"market")") != std::string::npos);
}

TEST_CASE("revenue-only traces omit period records but keep summaries") {
    TempDir dir("pricesim_revenue_only");
    RunConfig cfg;
    cfg.roster = {"greedy", "wls"};
    cfg.sims = 1;
    cfg.periods = 5;
    cfg.trace_level = TraceLevel::RevenueOnly;
    DirTraceSink sink(dir.path.string(), cfg);
    sink(tiny_simulation(9, 5));
    const std::string text = read_file(dir.path / "sim_00000.jsonl");
    CHECK(text.find(R"("type":"period")") == std::string::npos);
    CHECK(text.find(R"("type":"summary")") != std::string::npos);

    const auto loaded = read_simulation_file((dir.path / "sim_00000.jsonl").string());
    REQUIRE(loaded.has_value());
    CHECK(loaded->oligopoly.prices.empty());
    CHECK(loaded->oligopoly.cumulative_revenue.size() == 2);
}

TEST_CASE("a hand-built two-period simulation reproduces every report table") {
    SimulationResult sim;
    sim.sim_index = 0;
    sim.params = MarketParams::from_draws(2, 100.0, {0.2, 0.3, 0.5}, 0.5, 10.0, 1.5, 1.0, 1.0, 1.0);

    // duopoly: prices (10, 20) both periods
    CompetitionTrace duo;
    duo.id = {0, CompetitionKind::Duopoly, 0, 1};
    duo.prices = {{10.0, 20.0}, {10.0, 20.0}};
    duo.outcomes.resize(2);
    duo.outcomes[0].per_competitor = {{3, 1, 0, 40.0}, {0, 2, 1, 60.0}};
    duo.outcomes[1].per_competitor = {{1, 0, 1, 20.0}, {1, 1, 0, 40.0}};
    duo.cumulative_revenue = {60.0, 100.0};

    CompetitionTrace oli;
    oli.id = {0, CompetitionKind::Oligopoly, 0, 1};
    oli.prices = {{10.0, 30.0}, {25.0, 20.0}};
    oli.outcomes.resize(2);
    oli.outcomes[0].per_competitor = {{2, 1, 1, 40.0}, {0, 1, 0, 30.0}};
    oli.outcomes[1].per_competitor = {{0, 1, 0, 25.0}, {1, 0, 1, 40.0}};
    oli.cumulative_revenue = {65.0, 70.0};
    sim.oligopoly = oli;
    sim.duopolies = {duo};
    sim.scorecard = score_simulation(oli.cumulative_revenue, {{0.0, 60.0}, {100.0, 0.0}});

    const ReportBundle report = build_report({sim}, {"alpha", "beta"});

    // scores: x = (65,70)/135; y = (60,100)/160
    CHECK(report.scores[0].mean_x_bar == doctest::Approx(65.0 / 135.0).epsilon(1e-12));
    CHECK(report.scores[1].mean_y_bar == doctest::Approx(100.0 / 160.0).epsilon(1e-12));
    CHECK(report.scores[0].mean_final ==
          doctest::Approx(0.5 * (65.0 / 135.0 + 60.0 / 160.0)).epsilon(1e-12));
    CHECK(report.scores[0].rank == 2);
    CHECK(report.scores[1].rank == 1);

    // scorecard agreement between the two independent share computations
    CHECK(report.scores[0].mean_final ==
          doctest::Approx(sim.scorecard.final_share[0]).epsilon(1e-9));

    // duopoly matrix: row revenue / periods
    CHECK(report.duopoly_mean_revenue.cell[0][1] == doctest::Approx(30.0));
    CHECK(report.duopoly_mean_revenue.cell[1][0] == doctest::Approx(50.0));
    CHECK(report.duopoly_mean_price.cell[0][1] == doctest::Approx(10.0));
    CHECK(report.duopoly_mean_price.cell[1][0] == doctest::Approx(20.0));
    CHECK(report.duopoly_price_cov.cell[0][1] == doctest::Approx(0.0));

    // extremes from the oligopoly: period 1 lows (10 vs 30), period 2 lows (25 vs 20)
    CHECK(report.extremes[0].price_low == doctest::Approx(0.5));
    CHECK(report.extremes[0].price_high == doctest::Approx(0.5));
    CHECK(report.extremes[1].price_low == doctest::Approx(0.5));
    CHECK(report.extremes[1].price_high == doctest::Approx(0.5));
    // sales: period 1 totals (4, 1) -> high/low; period 2 totals (1, 2)
    CHECK(report.extremes[0].sales_high == doctest::Approx(0.5));
    CHECK(report.extremes[0].sales_low == doctest::Approx(0.5));
    // revenue: period 1 (40, 30); period 2 (25, 40)
    CHECK(report.extremes[0].revenue_high == doctest::Approx(0.5));
    CHECK(report.extremes[1].revenue_high == doctest::Approx(0.5));

    // oligopoly price summary for competitor 0: prices 10, 25
    CHECK(report.oligopoly_prices[0].mean == doctest::Approx(17.5));
    CHECK(report.oligopoly_prices[0].median == doctest::Approx(17.5));
    const double sd = std::sqrt((10.0 - 17.5) * (10.0 - 17.5));  // population stdev of {10,25}
    CHECK(report.oligopoly_prices[0].cov == doctest::Approx(sd / 17.5));

    // segments for competitor 0: shopper sales (2+0)/2, revenue 10*2+25*0
    CHECK(report.segments[0].sales_sho == doctest::Approx(1.0));
    CHECK(report.segments[0].sales_loy == doctest::Approx(1.0));
    const double expected_sho_arrivals = 100.0 * 0.2 * 2.0;
    CHECK(report.segments[0].rev_per_sho == doctest::Approx(20.0 / expected_sho_arrivals));

    // theta buckets: theta_loy = 0.3 -> bucket 3; revenue per period (65,70)/2
    CHECK(report.revenue_by_theta_loy.sim_count[3] == 1);
    CHECK(report.revenue_by_theta_loy.values[3][0] == doctest::Approx(32.5));
    CHECK(report.price_by_theta_loy.values[3][1] == doctest::Approx(25.0));
    CHECK(report.revenue_by_theta_sci.sim_count[5] == 1);
}

TEST_CASE("report recomputation is pure") {
    const SimulationResult sim = tiny_simulation(77, 10);
    const auto a = build_report({sim}, {"x", "y"});
    const auto b = build_report({sim}, {"x", "y"});
    CHECK(a.scores[0].mean_final == b.scores[0].mean_final);
    CHECK(a.oligopoly_prices[0].q25 == b.oligopoly_prices[0].q25);
    CHECK(a.extremes[1].revenue_low == b.extremes[1].revenue_low);
}

TEST_CASE("report shares agree with the engine scorecard on real simulations") {
    std::vector<SimulationResult> sims;
    for (int i = 0; i < 5; ++i) {
        std::vector<StrategyFactory> factories = {constant_factory(8.0), constant_factory(12.0),
                                                  constant_factory(16.0)};
        EngineConfig cfg;
        cfg.periods = 30;
        sims.push_back(run_simulation(factories, i, cfg, RngStream(900)));
    }
    const auto report = build_report(sims, {"a", "b", "c"});
    std::vector<double> mean_final(3, 0.0);
    for (const auto& sim : sims)
        for (int j = 0; j < 3; ++j) mean_final[j] += sim.scorecard.final_share[j] / sims.size();
    for (int j = 0; j < 3; ++j)
        CHECK(std::abs(report.scores[j].mean_final - mean_final[j]) <= 1e-9);
}

TEST_CASE("per-segment revenue decomposes total revenue exactly") {
    const SimulationResult sim = tiny_simulation(31, 25);
    for (const auto& trace : {sim.duopolies[0], sim.oligopoly}) {
        for (int t = 0; t < trace.periods(); ++t)
            for (int k = 0; k < trace.competitors(); ++k) {
                const auto& c = trace.outcomes[t].per_competitor[k];
                const double segment_revenue =
                    trace.prices[t][k] * (c.sales_sho + c.sales_loy + c.sales_sci);
                CHECK(segment_revenue == c.revenue);
            }
    }
}

TEST_CASE("truncated trace files are excluded from the report") {
    TempDir dir("pricesim_truncated");
    RunConfig cfg;
    cfg.roster = {"greedy", "wls"};
    cfg.sims = 2;
    cfg.periods = 3;
    DirTraceSink sink(dir.path.string(), cfg);
    sink(tiny_simulation(1, 3));
    auto second = tiny_simulation(2, 3);
    second.sim_index = 1;
    sink(second);
    sink.write_manifest();

    // truncate the second file mid-line
    const fs::path victim = dir.path / "sim_00001.jsonl";
    const std::string full = read_file(victim);
    std::ofstream(victim, std::ios::trunc) << full.substr(0, full.size() / 2);

    const auto report = build_report_from_dir(dir.path.string());
    CHECK(report.simulations == 1);
    CHECK_THROWS(build_report_from_dir((dir.path / "empty").string()));
}

TEST_CASE("cli run, report, and inspect round-trip") {
    TempDir dir("pricesim_cli");
    const std::string out = (dir.path / "out").string();

    const char* run_argv[] = {"pricesim", "run",   "--sims", "3",        "--periods", "40",
                              "--seed",   "7",     "--roster", "greedy,b-grid", "--out", out.c_str(),
                              "--parallel", "2",   "--trace-level", "full"};
    CHECK(cli_main(16, run_argv) == 0);
    CHECK(fs::exists(fs::path(out) / "sim_00000.jsonl"));
    CHECK(fs::exists(fs::path(out) / "sim_00002.jsonl"));
    CHECK(fs::exists(fs::path(out) / "manifest.json"));
    CHECK(fs::exists(fs::path(out) / "report" / "scores.csv"));
    CHECK(fs::exists(fs::path(out) / "report" / "extremes.csv"));

    const std::string report_out = (dir.path / "report2").string();
    const char* report_argv[] = {"pricesim", "report", "--in", out.c_str(), "--out",
                                 report_out.c_str()};
    CHECK(cli_main(6, report_argv) == 0);
    CHECK(read_file(fs::path(report_out) / "scores.csv") ==
          read_file(fs::path(out) / "report" / "scores.csv"));

    const char* inspect_argv[] = {"pricesim", "inspect", "--in", out.c_str(), "--sim", "1",
                                  "--kind", "oligopoly"};
    CHECK(cli_main(8, inspect_argv) == 0);

    const std::string empty_dir = (dir.path / "nothing").string();
    const char* bad_argv[] = {"pricesim", "report", "--in", empty_dir.c_str()};
    CHECK(cli_main(4, bad_argv) != 0);
}
