#include "pricesim/market.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "pricesim/lambert.hpp"

namespace pricesim {

namespace {

double calibrated_slope(int n, double alpha, double target_price) {
    return (lambert_w(static_cast<double>(n) * std::exp(alpha - 1.0)) + 1.0) / target_price;
}

}  // namespace

MarketParams MarketParams::from_draws(int m, double lambda, const std::vector<double>& theta,
                                      double gamma_phd, double beta_sho, double u_loy, double u_p_phd,
                                      double u_alpha_prof, double u_p_prof) {
    if (m < 2) throw std::invalid_argument("MarketParams: market size must be >= 2");
    if (theta.size() != 3) throw std::invalid_argument("MarketParams: theta must have 3 shares");

    MarketParams p;
    p.m = m;
    p.lambda = lambda;
    p.theta_sho = theta[0];
    p.theta_loy = theta[1];
    p.theta_sci = theta[2];
    p.gamma_phd = gamma_phd;
    p.gamma_prof = 1.0 - gamma_phd;
    p.beta_sho = beta_sho;
    p.beta_loy = u_loy * beta_sho;
    p.alpha_phd = beta_sho;
    p.p_phd = beta_sho * u_p_phd;
    p.alpha_prof = p.alpha_phd * u_alpha_prof;
    p.p_prof = p.p_phd * u_p_prof;
    for (int n : {2, m}) {
        p.beta_phd_by_n[n] = calibrated_slope(n, p.alpha_phd, p.p_phd);
        p.beta_prof_by_n[n] = calibrated_slope(n, p.alpha_prof, p.p_prof);
    }
    return p;
}

MarketParams sample_market_params(int m, RngStream& stream) {
    if (m < 2) throw std::invalid_argument("sample_market_params: market size must be >= 2");
    const double lambda = stream.uniform(50.0, 150.0);
    const double ones[3] = {1.0, 1.0, 1.0};
    const std::vector<double> theta = stream.dirichlet(ones);
    const double gamma_phd = stream.uniform01();
    const double beta_sho = stream.uniform(5.0, 15.0);
    const double u_loy = stream.uniform(1.5, 2.0);
    const double u_p_phd = stream.uniform(0.5, 1.5);
    const double u_alpha_prof = stream.uniform(1.0, 1.25);
    const double u_p_prof = stream.uniform(1.0, 1.5);
    return MarketParams::from_draws(m, lambda, theta, gamma_phd, beta_sho, u_loy, u_p_phd,
                                    u_alpha_prof, u_p_prof);
}

PeriodArrivals sample_arrivals(const MarketParams& params, RngStream& stream) {
    const long n = stream.poisson(params.lambda);
    const double theta[3] = {params.theta_sho, params.theta_loy, params.theta_sci};
    const auto by_segment = stream.multinomial(n, theta);
    const double gamma[2] = {params.gamma_phd, params.gamma_prof};
    const auto by_sub = stream.multinomial(by_segment[2], gamma);
    return PeriodArrivals{by_segment[0], by_segment[1], by_sub[0], by_sub[1]};
}

std::vector<long> realize_shopper_sales(std::span<const double> prices, long n_sho, double beta_sho,
                                        RngStream& stream) {
    std::vector<long> sales(prices.size(), 0);
    if (prices.empty() || n_sho <= 0) return sales;
    const double pmin = *std::min_element(prices.begin(), prices.end());
    std::vector<std::size_t> cheapest;
    for (std::size_t k = 0; k < prices.size(); ++k)
        if (prices[k] == pmin) cheapest.push_back(k);

    for (long i = 0; i < n_sho; ++i) {
        const double wtp = stream.exponential(beta_sho);
        if (wtp > pmin) {
            const std::size_t pick =
                cheapest.size() == 1 ? cheapest[0]
                                     : cheapest[stream.uniform_below(cheapest.size())];
            sales[pick]++;
        }
    }
    return sales;
}

std::vector<long> realize_loyal_sales(std::span<const double> prices, long n_loy, double beta_loy,
                                      RngStream& stream) {
    std::vector<long> sales(prices.size(), 0);
    if (prices.empty() || n_loy <= 0) return sales;
    for (long i = 0; i < n_loy; ++i) {
        const std::size_t k = stream.uniform_below(prices.size());
        const double wtp = stream.exponential(beta_loy);
        if (wtp > prices[k]) sales[k]++;
    }
    return sales;
}

ScientistChoice scientist_choice_probs(std::span<const double> prices, double alpha, double beta_n) {
    ScientistChoice choice;
    choice.buy.resize(prices.size(), 0.0);
    double shift = 0.0;  // utility of the no-purchase option is 0
    for (double p : prices) shift = std::max(shift, alpha - beta_n * p);
    double denom = std::exp(-shift);
    for (std::size_t k = 0; k < prices.size(); ++k) {
        choice.buy[k] = std::exp(alpha - beta_n * prices[k] - shift);
        denom += choice.buy[k];
    }
    for (auto& q : choice.buy) q /= denom;
    choice.no_purchase = std::exp(-shift) / denom;
    return choice;
}

namespace {

void realize_scientists(std::span<const double> prices, long count, double alpha, double beta_n,
                        RngStream& stream, std::vector<long>& sales) {
    if (count <= 0) return;
    ScientistChoice choice = scientist_choice_probs(prices, alpha, beta_n);
    std::vector<double> probs = choice.buy;
    probs.push_back(choice.no_purchase);
    for (long i = 0; i < count; ++i) {
        const std::size_t pick = stream.categorical(probs);
        if (pick < prices.size()) sales[pick]++;
    }
}

}  // namespace

PeriodOutcome realize_period(std::span<const double> prices, const MarketParams& params, int n,
                             RngStream& stream) {
    assert(static_cast<int>(prices.size()) == n);
    for ([[maybe_unused]] double p : prices) assert(std::isfinite(p) && p >= 0.0);
    assert(params.beta_phd_by_n.count(n) == 1);

    const PeriodArrivals arrivals = sample_arrivals(params, stream);
    const auto sho = realize_shopper_sales(prices, arrivals.n_sho, params.beta_sho, stream);
    const auto loy = realize_loyal_sales(prices, arrivals.n_loy, params.beta_loy, stream);
    std::vector<long> sci(prices.size(), 0);
    realize_scientists(prices, arrivals.n_phd, params.alpha_phd, params.beta_phd_by_n.at(n), stream,
                       sci);
    realize_scientists(prices, arrivals.n_prof, params.alpha_prof, params.beta_prof_by_n.at(n),
                       stream, sci);

    PeriodOutcome outcome;
    outcome.per_competitor.resize(prices.size());
    for (std::size_t k = 0; k < prices.size(); ++k) {
        auto& c = outcome.per_competitor[k];
        c.sales_sho = sho[k];
        c.sales_loy = loy[k];
        c.sales_sci = sci[k];
        c.revenue = prices[k] * static_cast<double>(c.total_sales());
    }
    return outcome;
}

}  // namespace pricesim
