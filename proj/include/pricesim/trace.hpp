#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pricesim/config.hpp"
#include "pricesim/engine.hpp"

namespace pricesim {

// Writes one JSON-lines file per simulation plus a manifest. Files depend
// only on the simulation content, so serial and parallel runs emit identical
// bytes. Thread-safe: each simulation goes to its own file.
class DirTraceSink {
public:
    DirTraceSink(std::string out_dir, const RunConfig& cfg);

    void operator()(const SimulationResult& sim) const;

    void write_manifest() const;

    static std::string sim_filename(int sim_index);

private:
    std::string out_dir_;
    RunConfig cfg_;
};

// In-memory reconstruction of one persisted simulation. Periods are empty
// for revenue-only traces.
std::optional<SimulationResult> read_simulation_file(const std::string& path);

std::vector<std::string> list_simulation_files(const std::string& dir);

// Roster recorded in a trace directory's manifest.
std::vector<std::string> manifest_roster(const std::string& dir);

}  // namespace pricesim
