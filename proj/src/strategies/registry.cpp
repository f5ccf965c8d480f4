#include "pricesim/strategies.hpp"

#include <stdexcept>

namespace pricesim {

StrategyPtr make_logit(const Hyperparams&, RngStream);
StrategyPtr make_ols(const Hyperparams&, RngStream);
StrategyPtr make_bbucket(const Hyperparams&, RngStream);
StrategyPtr make_bgrid(const Hyperparams&, RngStream);
StrategyPtr make_bmodel(const Hyperparams&, RngStream);
StrategyPtr make_ml(const Hyperparams&, RngStream);
StrategyPtr make_greedy(const Hyperparams&, RngStream);
StrategyPtr make_wls(const Hyperparams&, RngStream);

const std::vector<std::string>& strategy_ids() {
    static const std::vector<std::string> ids = {"logit", "ols",    "b-bucket", "b-grid",
                                                 "b-model", "ml",   "greedy",   "wls"};
    return ids;
}

bool is_strategy_id(const std::string& id) {
    for (const auto& known : strategy_ids())
        if (known == id) return true;
    return false;
}

StrategyPtr make_strategy(const std::string& id, const Hyperparams& hp, RngStream stream) {
    if (id == "logit") return make_logit(hp, std::move(stream));
    if (id == "ols") return make_ols(hp, std::move(stream));
    if (id == "b-bucket") return make_bbucket(hp, std::move(stream));
    if (id == "b-grid") return make_bgrid(hp, std::move(stream));
    if (id == "b-model") return make_bmodel(hp, std::move(stream));
    if (id == "ml") return make_ml(hp, std::move(stream));
    if (id == "greedy") return make_greedy(hp, std::move(stream));
    if (id == "wls") return make_wls(hp, std::move(stream));
    throw std::invalid_argument("unknown strategy id: " + id);
}

StrategyFactory make_factory(const std::string& id, const Hyperparams& hp) {
    if (!is_strategy_id(id)) throw std::invalid_argument("unknown strategy id: " + id);
    return [id, hp](RngStream stream) { return make_strategy(id, hp, std::move(stream)); };
}

std::vector<StrategyFactory> make_roster_factories(const std::vector<std::string>& ids,
                                                   const Hyperparams& hp) {
    std::vector<StrategyFactory> out;
    out.reserve(ids.size());
    for (const auto& id : ids) out.push_back(make_factory(id, hp));
    return out;
}

}  // namespace pricesim
