#pragma once

#include <cstddef>
#include <vector>

#include "pricesim/rng.hpp"

namespace pricesim {

// Multivariate normal with a ridge-stabilized covariance. Covariance and its
// Cholesky-type factor are stored row-major (dim x dim).
struct MvnModel {
    std::vector<double> mean;
    std::vector<double> cov;
    std::vector<double> chol;  // lower-triangular factor, L * L^T = cov
    double ridge = 0.0;

    std::size_t dim() const { return mean.size(); }
};

// PSD-tolerant lower Cholesky: zero or slightly negative pivots produce a
// zero column instead of failing, so degenerate covariances stay usable.
// Returns false when a pivot is negative beyond tolerance.
bool cholesky_psd(const std::vector<double>& a, std::size_t dim, std::vector<double>& out);

// Sample mean + sample covariance (n-1 denominator) + ridge * I.
// ridge < 0 selects the default ridge 1e-6 * (mean diagonal variance).
MvnModel fit_mvn(const std::vector<std::vector<double>>& samples, double ridge = -1.0);

std::vector<double> sample_mvn_one(const MvnModel& model, RngStream& stream);
std::vector<std::vector<double>> sample_mvn(const MvnModel& model, std::size_t k, RngStream& stream);

}  // namespace pricesim
