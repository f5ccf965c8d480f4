#pragma once

#include <map>
#include <span>
#include <vector>

#include "pricesim/rng.hpp"

namespace pricesim {

// One simulation's ground truth. Two logit slopes are kept per scientist
// subsegment, keyed by market size, because duopolies and the oligopoly share
// every other parameter within a simulation.
struct MarketParams {
    double lambda = 0.0;     // mean arrivals per period
    double theta_sho = 0.0;  // segment shares, sum to 1
    double theta_loy = 0.0;
    double theta_sci = 0.0;
    double gamma_phd = 0.0;  // scientist subsegment shares, sum to 1
    double gamma_prof = 0.0;
    double beta_sho = 0.0;  // mean shopper WTP
    double beta_loy = 0.0;  // mean loyal WTP
    double alpha_phd = 0.0;
    double alpha_prof = 0.0;
    double p_phd = 0.0;  // calibration target prices
    double p_prof = 0.0;
    std::map<int, double> beta_phd_by_n;
    std::map<int, double> beta_prof_by_n;
    int m = 0;  // roster size the params were sampled for

    // Pure arithmetic from the underlying uniform draws; sampling wraps this.
    static MarketParams from_draws(int m, double lambda, const std::vector<double>& theta,
                                   double gamma_phd, double beta_sho, double u_loy, double u_p_phd,
                                   double u_alpha_prof, double u_p_prof);
};

struct PeriodArrivals {
    long n_sho = 0;
    long n_loy = 0;
    long n_phd = 0;
    long n_prof = 0;
    long scientists() const { return n_phd + n_prof; }
    long total() const { return n_sho + n_loy + n_phd + n_prof; }
};

struct CompetitorOutcome {
    long sales_sho = 0;
    long sales_loy = 0;
    long sales_sci = 0;
    double revenue = 0.0;
    long total_sales() const { return sales_sho + sales_loy + sales_sci; }
};

struct PeriodOutcome {
    std::vector<CompetitorOutcome> per_competitor;
};

struct ScientistChoice {
    std::vector<double> buy;  // per competitor
    double no_purchase = 0.0;
};

MarketParams sample_market_params(int m, RngStream& stream);

PeriodArrivals sample_arrivals(const MarketParams& params, RngStream& stream);

std::vector<long> realize_shopper_sales(std::span<const double> prices, long n_sho, double beta_sho,
                                        RngStream& stream);

std::vector<long> realize_loyal_sales(std::span<const double> prices, long n_loy, double beta_loy,
                                      RngStream& stream);

// q_k = exp(alpha - beta_n p_k) / (1 + sum_j exp(alpha - beta_n p_j)), with a
// no-purchase share; evaluated with a max-shift so large intercepts stay finite.
ScientistChoice scientist_choice_probs(std::span<const double> prices, double alpha, double beta_n);

PeriodOutcome realize_period(std::span<const double> prices, const MarketParams& params, int n,
                             RngStream& stream);

}  // namespace pricesim
