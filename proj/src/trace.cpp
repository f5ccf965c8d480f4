#include "pricesim/trace.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace pricesim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json params_to_json(const MarketParams& p) {
    json phd, prof;
    for (const auto& [n, b] : p.beta_phd_by_n) phd[std::to_string(n)] = b;
    for (const auto& [n, b] : p.beta_prof_by_n) prof[std::to_string(n)] = b;
    return json{{"lambda", p.lambda},
                {"theta", {p.theta_sho, p.theta_loy, p.theta_sci}},
                {"gamma", {p.gamma_phd, p.gamma_prof}},
                {"beta_sho", p.beta_sho},
                {"beta_loy", p.beta_loy},
                {"alpha_phd", p.alpha_phd},
                {"alpha_prof", p.alpha_prof},
                {"p_phd", p.p_phd},
                {"p_prof", p.p_prof},
                {"beta_phd_by_n", phd},
                {"beta_prof_by_n", prof},
                {"m", p.m}};
}

MarketParams params_from_json(const json& j) {
    MarketParams p;
    p.lambda = j.at("lambda").get<double>();
    const auto theta = j.at("theta").get<std::vector<double>>();
    p.theta_sho = theta.at(0);
    p.theta_loy = theta.at(1);
    p.theta_sci = theta.at(2);
    const auto gamma = j.at("gamma").get<std::vector<double>>();
    p.gamma_phd = gamma.at(0);
    p.gamma_prof = gamma.at(1);
    p.beta_sho = j.at("beta_sho").get<double>();
    p.beta_loy = j.at("beta_loy").get<double>();
    p.alpha_phd = j.at("alpha_phd").get<double>();
    p.alpha_prof = j.at("alpha_prof").get<double>();
    p.p_phd = j.at("p_phd").get<double>();
    p.p_prof = j.at("p_prof").get<double>();
    for (const auto& [k, v] : j.at("beta_phd_by_n").items())
        p.beta_phd_by_n[std::stoi(k)] = v.get<double>();
    for (const auto& [k, v] : j.at("beta_prof_by_n").items())
        p.beta_prof_by_n[std::stoi(k)] = v.get<double>();
    p.m = j.at("m").get<int>();
    return p;
}

void write_competition(std::ostream& out, const CompetitionTrace& trace, TraceLevel level) {
    const std::string comp = trace.id.label();
    if (level == TraceLevel::Full) {
        for (int t = 0; t < trace.periods(); ++t) {
            json line{{"type", "period"}, {"comp", comp}, {"t", t + 1}};
            line["prices"] = trace.prices[t];
            std::vector<long> sho, loy, sci;
            std::vector<double> rev;
            for (const auto& c : trace.outcomes[t].per_competitor) {
                sho.push_back(c.sales_sho);
                loy.push_back(c.sales_loy);
                sci.push_back(c.sales_sci);
                rev.push_back(c.revenue);
            }
            line["sho"] = sho;
            line["loy"] = loy;
            line["sci"] = sci;
            line["rev"] = rev;
            out << line.dump() << '\n';
        }
    }
    for (const auto& ev : trace.events) {
        out << json{{"type", "event"}, {"comp", comp}, {"t", ev.t}, {"slot", ev.slot},
                    {"what", ev.what}}
                   .dump()
            << '\n';
    }
    out << json{{"type", "summary"}, {"comp", comp}, {"cum_rev", trace.cumulative_revenue}}.dump()
        << '\n';
}

CompetitionId parse_comp_label(const std::string& label, int sim, int m) {
    if (label == "oli") return CompetitionId{sim, CompetitionKind::Oligopoly, 0, m - 1};
    if (label.rfind("duo:", 0) == 0) {
        const auto second = label.find(':', 4);
        CompetitionId id{sim, CompetitionKind::Duopoly, std::stoi(label.substr(4, second - 4)),
                         std::stoi(label.substr(second + 1))};
        return id;
    }
    throw std::runtime_error("trace: bad competition label '" + label + "'");
}

}  // namespace

DirTraceSink::DirTraceSink(std::string out_dir, const RunConfig& cfg)
    : out_dir_(std::move(out_dir)), cfg_(cfg) {
    fs::create_directories(out_dir_);
}

std::string DirTraceSink::sim_filename(int sim_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sim_%05d.jsonl", sim_index);
    return buf;
}

void DirTraceSink::operator()(const SimulationResult& sim) const {
    const fs::path final_path = fs::path(out_dir_) / sim_filename(sim.sim_index);
    const fs::path tmp_path = final_path.string() + ".tmp";

    {
        std::ofstream out(tmp_path, std::ios::trunc);
        if (!out) {
            std::ofstream(fs::path(out_dir_) / "PARTIAL") << "write failed\n";
            throw std::runtime_error("trace: cannot open " + tmp_path.string());
        }
        json market{{"type", "market"},
                    {"sim", sim.sim_index},
                    {"m", static_cast<int>(sim.oligopoly.competitors())},
                    {"roster", cfg_.roster},
                    {"params", params_to_json(sim.params)}};
        out << market.dump() << '\n';
        for (const auto& duo : sim.duopolies) write_competition(out, duo, cfg_.trace_level);
        write_competition(out, sim.oligopoly, cfg_.trace_level);
        out << json{{"type", "scorecard"},
                    {"x_bar", sim.scorecard.x_bar},
                    {"y_bar", sim.scorecard.y_bar},
                    {"final", sim.scorecard.final_share}}
                   .dump()
            << '\n';
        if (!out.good()) {
            std::ofstream(fs::path(out_dir_) / "PARTIAL") << "write failed\n";
            throw std::runtime_error("trace: write failed for " + tmp_path.string());
        }
    }
    fs::rename(tmp_path, final_path);
}

void DirTraceSink::write_manifest() const {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(cfg_)));
    json manifest{{"config_hash", hash},
                  {"seed", cfg_.seed},
                  {"sims", cfg_.sims},
                  {"periods", cfg_.periods},
                  {"roster", cfg_.roster},
                  {"trace_level", to_string(cfg_.trace_level)}};
    std::ofstream out(fs::path(out_dir_) / "manifest.json", std::ios::trunc);
    if (!out) throw std::runtime_error("trace: cannot write manifest");
    out << manifest.dump(2) << '\n';
}

std::vector<std::string> list_simulation_files(const std::string& dir) {
    std::vector<std::string> files;
    if (!fs::is_directory(dir)) return files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("sim_", 0) == 0 && name.size() > 6 &&
            name.substr(name.size() - 6) == ".jsonl")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

std::vector<std::string> manifest_roster(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "manifest.json");
    if (!in) return {};
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("roster")) return {};
    return j.at("roster").get<std::vector<std::string>>();
}

std::optional<SimulationResult> read_simulation_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;

    SimulationResult sim;
    int m = 0;
    bool saw_market = false;
    bool saw_scorecard = false;
    std::vector<CompetitionTrace> traces;
    std::unordered_map<std::string, std::size_t> trace_index;

    auto trace_for = [&](const std::string& label) -> CompetitionTrace& {
        const auto it = trace_index.find(label);
        if (it != trace_index.end()) return traces[it->second];
        CompetitionTrace t;
        t.id = parse_comp_label(label, sim.sim_index, m);
        trace_index.emplace(label, traces.size());
        traces.push_back(std::move(t));
        return traces.back();
    };

    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) return std::nullopt;  // truncated or corrupt line
        const std::string type = j.value("type", "");
        if (type == "market") {
            sim.sim_index = j.at("sim").get<int>();
            m = j.at("m").get<int>();
            sim.params = params_from_json(j.at("params"));
            saw_market = true;
        } else if (type == "period") {
            auto& trace = trace_for(j.at("comp").get<std::string>());
            PeriodOutcome outcome;
            const auto prices = j.at("prices").get<std::vector<double>>();
            const auto sho = j.at("sho").get<std::vector<long>>();
            const auto loy = j.at("loy").get<std::vector<long>>();
            const auto sci = j.at("sci").get<std::vector<long>>();
            const auto rev = j.at("rev").get<std::vector<double>>();
            outcome.per_competitor.resize(prices.size());
            for (std::size_t k = 0; k < prices.size(); ++k)
                outcome.per_competitor[k] = {sho[k], loy[k], sci[k], rev[k]};
            trace.prices.push_back(prices);
            trace.outcomes.push_back(std::move(outcome));
        } else if (type == "event") {
            auto& trace = trace_for(j.at("comp").get<std::string>());
            trace.events.push_back(
                {j.at("t").get<int>(), j.at("slot").get<int>(), j.at("what").get<std::string>()});
        } else if (type == "summary") {
            auto& trace = trace_for(j.at("comp").get<std::string>());
            trace.cumulative_revenue = j.at("cum_rev").get<std::vector<double>>();
        } else if (type == "scorecard") {
            sim.scorecard.x_bar = j.at("x_bar").get<std::vector<double>>();
            sim.scorecard.y_bar = j.at("y_bar").get<std::vector<double>>();
            sim.scorecard.final_share = j.at("final").get<std::vector<double>>();
            saw_scorecard = true;
        } else {
            return std::nullopt;
        }
    }
    if (!saw_market || !saw_scorecard) return std::nullopt;

    for (auto& t : traces) {
        if (t.cumulative_revenue.empty()) return std::nullopt;  // missing summary
        if (t.id.kind == CompetitionKind::Oligopoly)
            sim.oligopoly = std::move(t);
        else
            sim.duopolies.push_back(std::move(t));
    }
    std::sort(sim.duopolies.begin(), sim.duopolies.end(),
              [](const CompetitionTrace& a, const CompetitionTrace& b) {
                  return std::pair(a.id.a, a.id.b) < std::pair(b.id.a, b.id.b);
              });
    return sim;
}

}  // namespace pricesim
