#pragma once

#include <span>

#include "pricesim/hyperparams.hpp"

namespace pricesim {

// Linear demand in own price and the sum of competitor prices:
// d(x, y) = a + b*x + c*sum(y). Permutation invariance in competitor prices
// holds by construction.
struct WlsModel {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    bool valid = false;
    bool ridged = false;  // normal equations were singular, ridge applied

    double predict(double own_price, double comp_sum) const { return a + b * own_price + c * comp_sum; }
};

enum class WlsScheme { Uniform, HalfLifeShort, HalfLifeLong, RecentWindow };
inline constexpr WlsScheme kWlsSchemes[] = {WlsScheme::Uniform, WlsScheme::HalfLifeShort,
                                            WlsScheme::HalfLifeLong, WlsScheme::RecentWindow};

// Weighted least squares over aligned histories of own price, competitor
// price sum, and own demand. Requires at least 4 observations.
WlsModel wls_fit(std::span<const double> own_price, std::span<const double> comp_sum,
                 std::span<const double> demand, WlsScheme scheme, const Hyperparams& hp);

}  // namespace pricesim
