#pragma once

#include <vector>

namespace pricesim {

// Every tunable the eight strategies use, in one place. Defaults are the
// pinned values the test suite asserts against; the run configuration may
// override any of them.
struct Hyperparams {
    // shared
    double epsilon = 0.2;           // bandit exploration rate
    double smooth_level = 0.3;      // exponential smoothing, level coefficient
    double smooth_trend = 0.1;      // exponential smoothing, trend coefficient
    double line_step = 0.1;         // revenue line-search grid step
    double logit_line_step = 0.5;   // coarser grid for the sampled-revenue search

    // greedy
    double greedy_init_lo = 30.0;
    double greedy_init_hi = 70.0;
    int greedy_window = 30;
    double greedy_percentile = 0.10;
    double greedy_floor = 5.0;

    // ols
    int ols_explore_periods = 40;
    double ols_explore_prob = 0.05;
    double ols_disrupt_prob = 0.01;
    double ols_perturb = 1.0;  // +/- uniform perturbation added to the optimum

    // logit
    int logit_explore_periods = 100;
    int logit_refit_every = 20;
    int logit_mvn_samples = 1000;
    int logit_max_components = 10;
    int logit_em_iters = 25;
    double logit_em_tol = 1e-6;

    // b-model
    int bmodel_explore_periods = 100;
    int bmodel_anneal_proposals = 2000;
    double bmodel_anneal_cooling = 0.95;
    int bmodel_anneal_cool_every = 20;
    int bmodel_quad_nodes = 24;

    // ml
    int ml_explore_len = 40;
    double ml_cos_amplitude = 0.3;
    double ml_cos_period = 20.0;
    int ml_exploit_lo = 70;
    int ml_exploit_hi = 150;
    double ml_abort_frac = 0.5;
    int ml_abort_window = 10;
    int ml_cv_folds = 5;
    double ml_init_lo = 20.0;
    double ml_init_hi = 80.0;
    int ml_forest_trees = 25;
    int ml_forest_depth = 6;

    // wls
    int wls_explore_periods = 10;
    std::vector<int> wls_price_windows{5, 10, 20, 50};
    double wls_halflife_short = 20.0;
    double wls_halflife_long = 100.0;
    int wls_recent_window = 50;
    int wls_constant_run = 3;
};

}  // namespace pricesim
