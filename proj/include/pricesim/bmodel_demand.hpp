#pragma once

#include <span>
#include <vector>

#include "pricesim/hyperparams.hpp"
#include "pricesim/rng.hpp"

namespace pricesim {

// Internal demand models of the model-bandit competitor. WTP is modeled as
// normal(wtp_mean, wtp_std); b and c shape the price sensitivity of the
// bargain-hunter and quality-seeker models; [d, e] bound the visible-subset
// size of the cheapest-price model. scale* are the fitted arrivals-per-period
// factors that map per-arrival shares onto sales.
struct BModelParams {
    double wtp_mean = 50.0;
    double wtp_std = 20.0;
    double b = 1.0;
    double c = 1.0;
    int d = 1;
    int e = 1;
    double scale1 = 0.0;
    double scale2 = 0.0;
    double scale3 = 0.0;

    double scale_for(int model_id) const {
        return model_id == 1 ? scale1 : model_id == 2 ? scale2 : scale3;
    }
};

// Expected own sales per arrival under one internal model (model_id in
// {1,2,3}), given the competitors' prices. Models 1 and 2 integrate over the
// WTP distribution with a fixed-node midpoint rule; model 3 is exact
// combinatorics over price ranks.
double bmodel_share(int model_id, double own_price, std::span<const double> others,
                    const BModelParams& params, int quad_nodes);

// Per-arrival expected revenue: own_price * share.
double bmodel_eval_demand(int model_id, double own_price, std::span<const double> others,
                          const BModelParams& params, int quad_nodes);

struct BModelObservation {
    double own_price = 0.0;
    std::vector<double> others;
    double own_sales = 0.0;
};

struct BModelFit {
    BModelParams params;
    double objective = 0.0;
    bool ok = false;
};

// Joint fit of all model parameters by simulated annealing on the summed
// squared sales-prediction error; per-model demand scales are profiled out in
// closed form at every evaluation.
BModelFit bmodel_fit_annealing(const std::vector<BModelObservation>& observations, int n_competitors,
                               const Hyperparams& hp, RngStream& stream);

}  // namespace pricesim
