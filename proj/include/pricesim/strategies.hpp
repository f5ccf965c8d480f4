#pragma once

#include <string>
#include <vector>

#include "pricesim/engine.hpp"
#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/strategy.hpp"

namespace pricesim {

// Stable identifiers of the eight built-in strategies, in roster order.
const std::vector<std::string>& strategy_ids();

bool is_strategy_id(const std::string& id);

StrategyPtr make_strategy(const std::string& id, const Hyperparams& hp, RngStream stream);

StrategyFactory make_factory(const std::string& id, const Hyperparams& hp);

std::vector<StrategyFactory> make_roster_factories(const std::vector<std::string>& ids,
                                                   const Hyperparams& hp);

}  // namespace pricesim
