#include "pricesim/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pricesim/strategies.hpp"

namespace pricesim {

using nlohmann::json;

std::string to_string(TraceLevel level) {
    return level == TraceLevel::Full ? "full" : "revenue";
}

TraceLevel trace_level_from_string(const std::string& s) {
    if (s == "full") return TraceLevel::Full;
    if (s == "revenue") return TraceLevel::RevenueOnly;
    throw ConfigError("unknown trace level '" + s + "' (expected 'full' or 'revenue')");
}

RunConfig::RunConfig() : roster(strategy_ids()) {}

void RunConfig::validate() const {
    if (sims < 1) throw ConfigError("sims must be >= 1");
    if (periods < 1) throw ConfigError("periods must be >= 1");
    if (roster.size() < 2) throw ConfigError("roster must contain at least 2 strategies");
    for (const auto& id : roster)
        if (!is_strategy_id(id)) throw ConfigError("unknown strategy identifier '" + id + "'");
    if (parallel < 0) throw ConfigError("parallel must be >= 0");
}

namespace {

json hyperparams_to_json(const Hyperparams& hp) {
    return json{{"epsilon", hp.epsilon},
                {"smooth_level", hp.smooth_level},
                {"smooth_trend", hp.smooth_trend},
                {"line_step", hp.line_step},
                {"logit_line_step", hp.logit_line_step},
                {"greedy_init_lo", hp.greedy_init_lo},
                {"greedy_init_hi", hp.greedy_init_hi},
                {"greedy_window", hp.greedy_window},
                {"greedy_percentile", hp.greedy_percentile},
                {"greedy_floor", hp.greedy_floor},
                {"ols_explore_periods", hp.ols_explore_periods},
                {"ols_explore_prob", hp.ols_explore_prob},
                {"ols_disrupt_prob", hp.ols_disrupt_prob},
                {"ols_perturb", hp.ols_perturb},
                {"logit_explore_periods", hp.logit_explore_periods},
                {"logit_refit_every", hp.logit_refit_every},
                {"logit_mvn_samples", hp.logit_mvn_samples},
                {"logit_max_components", hp.logit_max_components},
                {"logit_em_iters", hp.logit_em_iters},
                {"logit_em_tol", hp.logit_em_tol},
                {"bmodel_explore_periods", hp.bmodel_explore_periods},
                {"bmodel_anneal_proposals", hp.bmodel_anneal_proposals},
                {"bmodel_anneal_cooling", hp.bmodel_anneal_cooling},
                {"bmodel_anneal_cool_every", hp.bmodel_anneal_cool_every},
                {"bmodel_quad_nodes", hp.bmodel_quad_nodes},
                {"ml_explore_len", hp.ml_explore_len},
                {"ml_cos_amplitude", hp.ml_cos_amplitude},
                {"ml_cos_period", hp.ml_cos_period},
                {"ml_exploit_lo", hp.ml_exploit_lo},
                {"ml_exploit_hi", hp.ml_exploit_hi},
                {"ml_abort_frac", hp.ml_abort_frac},
                {"ml_abort_window", hp.ml_abort_window},
                {"ml_cv_folds", hp.ml_cv_folds},
                {"ml_init_lo", hp.ml_init_lo},
                {"ml_init_hi", hp.ml_init_hi},
                {"ml_forest_trees", hp.ml_forest_trees},
                {"ml_forest_depth", hp.ml_forest_depth},
                {"wls_explore_periods", hp.wls_explore_periods},
                {"wls_price_windows", hp.wls_price_windows},
                {"wls_halflife_short", hp.wls_halflife_short},
                {"wls_halflife_long", hp.wls_halflife_long},
                {"wls_recent_window", hp.wls_recent_window},
                {"wls_constant_run", hp.wls_constant_run}};
}

void hyperparams_from_json(const json& j, Hyperparams& hp) {
    const json defaults = hyperparams_to_json(hp);
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) throw ConfigError("unknown hyperparameter key '" + key + "'");
        (void)value;
    }
    const auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("epsilon", hp.epsilon);
    get("smooth_level", hp.smooth_level);
    get("smooth_trend", hp.smooth_trend);
    get("line_step", hp.line_step);
    get("logit_line_step", hp.logit_line_step);
    get("greedy_init_lo", hp.greedy_init_lo);
    get("greedy_init_hi", hp.greedy_init_hi);
    get("greedy_window", hp.greedy_window);
    get("greedy_percentile", hp.greedy_percentile);
    get("greedy_floor", hp.greedy_floor);
    get("ols_explore_periods", hp.ols_explore_periods);
    get("ols_explore_prob", hp.ols_explore_prob);
    get("ols_disrupt_prob", hp.ols_disrupt_prob);
    get("ols_perturb", hp.ols_perturb);
    get("logit_explore_periods", hp.logit_explore_periods);
    get("logit_refit_every", hp.logit_refit_every);
    get("logit_mvn_samples", hp.logit_mvn_samples);
    get("logit_max_components", hp.logit_max_components);
    get("logit_em_iters", hp.logit_em_iters);
    get("logit_em_tol", hp.logit_em_tol);
    get("bmodel_explore_periods", hp.bmodel_explore_periods);
    get("bmodel_anneal_proposals", hp.bmodel_anneal_proposals);
    get("bmodel_anneal_cooling", hp.bmodel_anneal_cooling);
    get("bmodel_anneal_cool_every", hp.bmodel_anneal_cool_every);
    get("bmodel_quad_nodes", hp.bmodel_quad_nodes);
    get("ml_explore_len", hp.ml_explore_len);
    get("ml_cos_amplitude", hp.ml_cos_amplitude);
    get("ml_cos_period", hp.ml_cos_period);
    get("ml_exploit_lo", hp.ml_exploit_lo);
    get("ml_exploit_hi", hp.ml_exploit_hi);
    get("ml_abort_frac", hp.ml_abort_frac);
    get("ml_abort_window", hp.ml_abort_window);
    get("ml_cv_folds", hp.ml_cv_folds);
    get("ml_init_lo", hp.ml_init_lo);
    get("ml_init_hi", hp.ml_init_hi);
    get("ml_forest_trees", hp.ml_forest_trees);
    get("ml_forest_depth", hp.ml_forest_depth);
    get("wls_explore_periods", hp.wls_explore_periods);
    get("wls_price_windows", hp.wls_price_windows);
    get("wls_halflife_short", hp.wls_halflife_short);
    get("wls_halflife_long", hp.wls_halflife_long);
    get("wls_recent_window", hp.wls_recent_window);
    get("wls_constant_run", hp.wls_constant_run);
}

const char* kTopLevelKeys[] = {"seed",    "sims",     "periods",    "roster",
                               "out",     "parallel", "trace_level", "hyperparams"};

}  // namespace

RunConfig parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");

    RunConfig cfg;
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* k : kTopLevelKeys) known = known || key == k;
        if (!known) throw ConfigError("unknown config key '" + key + "'");
        (void)value;
    }
    try {
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("sims")) cfg.sims = j.at("sims").get<int>();
        if (j.contains("periods")) cfg.periods = j.at("periods").get<int>();
        if (j.contains("roster")) cfg.roster = j.at("roster").get<std::vector<std::string>>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
        if (j.contains("parallel")) cfg.parallel = j.at("parallel").get<int>();
        if (j.contains("trace_level"))
            cfg.trace_level = trace_level_from_string(j.at("trace_level").get<std::string>());
        if (j.contains("hyperparams")) hyperparams_from_json(j.at("hyperparams"), cfg.hyperparams);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str());
}

std::string canonical_config(const RunConfig& cfg) {
    json j{{"seed", cfg.seed},
           {"sims", cfg.sims},
           {"periods", cfg.periods},
           {"roster", cfg.roster},
           {"trace_level", to_string(cfg.trace_level)},
           {"hyperparams", hyperparams_to_json(cfg.hyperparams)}};
    return j.dump();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    const std::string canon = canonical_config(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace pricesim
