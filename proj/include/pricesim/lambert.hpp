#pragma once

#include <cmath>
#include <stdexcept>

namespace pricesim {

// Principal-branch Lambert W on [0, inf): the w >= 0 with w*e^w = x.
// Halley iteration from a log-based guess; converges to near machine
// precision in a handful of steps over the whole calibration range.
inline double lambert_w(double x) {
    if (std::isnan(x) || x < 0.0) throw std::domain_error("lambert_w: requires x >= 0");
    if (x == 0.0) return 0.0;

    double w;
    if (x > 2.718281828459045) {
        const double l1 = std::log(x);
        const double l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    } else {
        w = std::log1p(x) * 0.7;
    }

    for (int iter = 0; iter < 50; ++iter) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double fp = ew * (w + 1.0);
        const double denom = fp - (w + 2.0) * f / (2.0 * w + 2.0);
        const double step = f / denom;
        w -= step;
        if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
    }
    return w < 0.0 ? 0.0 : w;
}

}  // namespace pricesim
