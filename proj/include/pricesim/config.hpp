#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricesim/hyperparams.hpp"

namespace pricesim {

enum class TraceLevel { Full, RevenueOnly };

std::string to_string(TraceLevel level);
TraceLevel trace_level_from_string(const std::string& s);

struct RunConfig {
    std::uint64_t seed = 1;
    int sims = 5000;
    int periods = 1000;
    std::vector<std::string> roster;  // defaults to the eight built-in strategies
    Hyperparams hyperparams;
    std::string out_dir = "out";
    int parallel = 0;  // 0: use hardware concurrency
    TraceLevel trace_level = TraceLevel::Full;

    RunConfig();
    void validate() const;  // throws ConfigError with a distinct diagnostic
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Strict parse: unknown keys and malformed values are rejected.
RunConfig parse_config_file(const std::string& path);
RunConfig parse_config_json(const std::string& text);

// Canonical serialization of the experiment-defining fields (seed, sims,
// periods, roster, trace level, hyperparameters). Execution details such as
// the output directory and thread count are excluded so reruns hash equal.
std::string canonical_config(const RunConfig& cfg);
std::uint64_t config_hash(const RunConfig& cfg);

}  // namespace pricesim
