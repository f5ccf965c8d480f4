#include "pricesim/cli.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "pricesim/config.hpp"
#include "pricesim/report.hpp"
#include "pricesim/strategies.hpp"
#include "pricesim/trace.hpp"

namespace pricesim {

namespace {

std::vector<std::string> split_roster(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int resolved_parallelism(const RunConfig& cfg) {
    if (cfg.parallel > 0) return cfg.parallel;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int run_command(const RunConfig& cfg) {
    cfg.validate();
    const auto factories = make_roster_factories(cfg.roster, cfg.hyperparams);
    EngineConfig engine_cfg;
    engine_cfg.periods = cfg.periods;

    DirTraceSink sink(cfg.out_dir, cfg);
    ReportAccumulator accumulator(cfg.roster);
    std::mutex accumulator_mutex;
    std::atomic<int> done{0};

    const auto started = std::chrono::steady_clock::now();
    const auto on_simulation = [&](const SimulationResult& sim) {
        sink(sim);
        {
            std::lock_guard<std::mutex> lock(accumulator_mutex);
            accumulator.add(sim);
        }
        const int n = ++done;
        if (n % 100 == 0) std::cerr << "completed " << n << "/" << cfg.sims << " simulations\n";
    };

    const auto result = run_tournament(factories, cfg.sims, engine_cfg, cfg.seed,
                                       resolved_parallelism(cfg), on_simulation);
    sink.write_manifest();

    const ReportBundle report = accumulator.finish();
    write_report_csv(report, cfg.out_dir + "/report");

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << "simulations: " << cfg.sims << "  periods: " << cfg.periods
              << "  wall_clock_s: " << elapsed << "\n";
    std::cout << "competitor,mean_final_score\n";
    for (std::size_t j = 0; j < cfg.roster.size(); ++j)
        std::cout << cfg.roster[j] << "," << result.mean_final[j] << "\n";
    std::cout << "traces: " << cfg.out_dir << "  report: " << cfg.out_dir << "/report\n";
    return 0;
}

int report_command(const std::string& in_dir, const std::string& out_dir) {
    const ReportBundle report = build_report_from_dir(in_dir);
    write_report_csv(report, out_dir);
    std::cout << "report written to " << out_dir << " from " << report.simulations
              << " simulations\n";
    return 0;
}

int inspect_command(const std::string& in_dir, int sim_index, const std::string& kind) {
    const std::string file = in_dir + "/" + DirTraceSink::sim_filename(sim_index);
    const auto sim = read_simulation_file(file);
    if (!sim) throw std::runtime_error("cannot read simulation trace " + file);

    const CompetitionTrace* trace = nullptr;
    if (kind == "oligopoly" || kind == "oli") {
        trace = &sim->oligopoly;
    } else {
        for (const auto& duo : sim->duopolies)
            if (duo.id.label() == kind) trace = &duo;
    }
    if (!trace)
        throw std::runtime_error("no competition '" + kind +
                                 "' in this simulation (use oligopoly or duo:J:K)");
    if (trace->prices.empty())
        throw std::runtime_error("trace has no per-period records (revenue-only level)");

    const int n = trace->competitors();
    std::cout << "period";
    for (int k = 0; k < n; ++k) std::cout << ",price_" << k;
    for (int k = 0; k < n; ++k) std::cout << ",revenue_" << k;
    std::cout << "\n";
    for (int t = 0; t < trace->periods(); ++t) {
        std::cout << t + 1;
        for (int k = 0; k < n; ++k) std::cout << "," << trace->prices[t][k];
        for (int k = 0; k < n; ++k) std::cout << "," << trace->outcomes[t].per_competitor[k].revenue;
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"dynamic pricing duopoly/oligopoly tournament simulator"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a tournament and persist traces + report");
    std::string config_path, roster_csv, trace_level_str, out_dir;
    RunConfig cfg;
    int sims = -1, periods = -1, parallel = -1;
    std::int64_t seed = -1;
    run->add_option("--config", config_path, "JSON config file");
    run->add_option("--sims", sims, "number of simulations");
    run->add_option("--periods", periods, "periods per competition");
    run->add_option("--seed", seed, "master seed");
    run->add_option("--roster", roster_csv, "comma-separated strategy ids");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--parallel", parallel, "worker threads (0 = hardware)");
    run->add_option("--trace-level", trace_level_str, "trace verbosity: full | revenue");

    // report
    auto* report = app.add_subcommand("report", "rebuild report tables from persisted traces");
    std::string report_in, report_out;
    report->add_option("--in", report_in, "trace directory")->required();
    report->add_option("--out", report_out, "report output directory");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "print one competition's price/revenue series");
    std::string inspect_in, inspect_kind = "oligopoly";
    int inspect_sim = 0;
    inspect->add_option("--in", inspect_in, "trace directory")->required();
    inspect->add_option("--sim", inspect_sim, "simulation index");
    inspect->add_option("--kind", inspect_kind, "oligopoly or duo:J:K");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (run->parsed()) {
            if (!config_path.empty()) cfg = parse_config_file(config_path);
            if (sims >= 0) cfg.sims = sims;
            if (periods >= 0) cfg.periods = periods;
            if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
            if (!roster_csv.empty()) cfg.roster = split_roster(roster_csv);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (parallel >= 0) cfg.parallel = parallel;
            if (!trace_level_str.empty())
                cfg.trace_level = trace_level_from_string(trace_level_str);
            return run_command(cfg);
        }
        if (report->parsed())
            return report_command(report_in,
                                  report_out.empty() ? report_in + "/report" : report_out);
        if (inspect->parsed()) return inspect_command(inspect_in, inspect_sim, inspect_kind);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace pricesim
