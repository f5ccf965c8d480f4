#include "pricesim/mvn.hpp"

#include <cmath>
#include <stdexcept>

namespace pricesim {

bool cholesky_psd(const std::vector<double>& a, std::size_t dim, std::vector<double>& out) {
    out.assign(dim * dim, 0.0);
    double scale = 0.0;
    for (std::size_t i = 0; i < dim; ++i) scale = std::max(scale, std::abs(a[i * dim + i]));
    const double tol = 1e-12 * std::max(scale, 1.0);

    for (std::size_t j = 0; j < dim; ++j) {
        double d = a[j * dim + j];
        for (std::size_t k = 0; k < j; ++k) d -= out[j * dim + k] * out[j * dim + k];
        if (d < -tol) return false;
        if (d <= tol) {
            // rank-deficient direction: pin the whole column to zero
            for (std::size_t i = j; i < dim; ++i) out[i * dim + j] = 0.0;
            continue;
        }
        const double l = std::sqrt(d);
        out[j * dim + j] = l;
        for (std::size_t i = j + 1; i < dim; ++i) {
            double s = a[i * dim + j];
            for (std::size_t k = 0; k < j; ++k) s -= out[i * dim + k] * out[j * dim + k];
            out[i * dim + j] = s / l;
        }
    }
    return true;
}

MvnModel fit_mvn(const std::vector<std::vector<double>>& samples, double ridge) {
    if (samples.size() < 2) throw std::invalid_argument("fit_mvn: needs at least 2 samples");
    const std::size_t dim = samples.front().size();
    if (dim == 0) throw std::invalid_argument("fit_mvn: empty sample vectors");
    for (const auto& s : samples)
        if (s.size() != dim) throw std::invalid_argument("fit_mvn: samples of unequal dimension");

    MvnModel model;
    model.mean.assign(dim, 0.0);
    for (const auto& s : samples)
        for (std::size_t i = 0; i < dim; ++i) model.mean[i] += s[i];
    const double n = static_cast<double>(samples.size());
    for (auto& m : model.mean) m /= n;

    model.cov.assign(dim * dim, 0.0);
    for (const auto& s : samples)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                model.cov[i * dim + j] += (s[i] - model.mean[i]) * (s[j] - model.mean[j]);
    for (auto& c : model.cov) c /= (n - 1.0);

    if (ridge < 0.0) {
        double diag_mean = 0.0;
        for (std::size_t i = 0; i < dim; ++i) diag_mean += model.cov[i * dim + i];
        ridge = 1e-6 * (diag_mean / static_cast<double>(dim));
    }
    model.ridge = ridge;
    for (std::size_t i = 0; i < dim; ++i) model.cov[i * dim + i] += ridge;

    if (!cholesky_psd(model.cov, dim, model.chol))
        throw std::runtime_error("fit_mvn: covariance not PSD after ridge");
    return model;
}

std::vector<double> sample_mvn_one(const MvnModel& model, RngStream& stream) {
    const std::size_t dim = model.dim();
    std::vector<double> z(dim);
    for (auto& v : z) v = stream.normal();
    std::vector<double> x(model.mean);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j <= i; ++j) x[i] += model.chol[i * dim + j] * z[j];
    return x;
}

std::vector<std::vector<double>> sample_mvn(const MvnModel& model, std::size_t k, RngStream& stream) {
    if (k < 1) throw std::invalid_argument("sample_mvn: k must be >= 1");
    if (model.chol.size() != model.dim() * model.dim())
        throw std::runtime_error("sample_mvn: model has no factorization");
    std::vector<std::vector<double>> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(sample_mvn_one(model, stream));
    return out;
}

}  // namespace pricesim
