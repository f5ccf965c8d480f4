#include <cmath>
#include <thread>
#include <vector>

#include "doctest.h"
#include "pricesim/lambert.hpp"
#include "pricesim/mvn.hpp"
#include "pricesim/rng.hpp"
#include "pricesim/stats.hpp"

using namespace pricesim;

namespace {

// independent root finder for w * e^w = x on w >= 0
double lambert_bisect(double x) {
    double lo = 0.0, hi = 1.0;
    while (hi * std::exp(hi) < x) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::exp(mid) < x ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("lambert_w fixed points") {
    CHECK(lambert_w(0.0) == 0.0);
    CHECK(lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lambert_w(2.0 * std::exp(2.0)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(lambert_w(-1e-9), std::domain_error);
}

TEST_CASE("lambert_w residual and monotonicity across twelve decades") {
    double prev = -1.0;
    for (double x = 1e-8; x <= 1.0001e8; x *= 1.7) {
        const double w = lambert_w(x);
        const double resid = std::abs(w * std::exp(w) - x);
        CHECK(resid <= 1e-12 * x);
        CHECK(w > prev);
        prev = w;
    }
    const double w = lambert_w(2.0 * std::exp(9.0));
    CHECK(w == doctest::Approx(lambert_bisect(2.0 * std::exp(9.0))).epsilon(1e-10));
}

TEST_CASE("identical derivation path reproduces bit-identical draws across threads") {
    const RngStream root(99);
    std::vector<std::uint64_t> a, b;
    std::thread ta([&] {
        RngStream s = root.derive(7).derive("consumer");
        for (int i = 0; i < 10000; ++i) a.push_back(s.next_u64());
    });
    std::thread tb([&] {
        RngStream s = root.derive(7).derive("consumer");
        for (int i = 0; i < 10000; ++i) b.push_back(s.next_u64());
    });
    ta.join();
    tb.join();
    CHECK(a == b);
}

TEST_CASE("sibling streams are effectively uncorrelated") {
    const RngStream root(123);
    RngStream s1 = root.derive(1);
    RngStream s2 = root.derive(2);
    const int n = 100000;
    std::vector<double> xs(n), ys(n);
    for (int i = 0; i < n; ++i) {
        xs[i] = s1.uniform01();
        ys[i] = s2.uniform01();
    }
    CHECK(std::abs(pearson(xs, ys)) <= 0.01);
}

TEST_CASE("exponential sample mean matches its parameter") {
    RngStream s(2024);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += s.exponential(10.0);
    const double mean = sum / n;
    CHECK(mean >= 9.95);
    CHECK(mean <= 10.05);
    CHECK_THROWS_AS(s.exponential(0.0), std::invalid_argument);
}

TEST_CASE("poisson degenerate and moment checks") {
    RngStream s(5);
    CHECK(s.poisson(0.0) == 0);
    CHECK_THROWS_AS(s.poisson(-1.0), std::invalid_argument);

    for (double mean : {4.0, 100.0}) {
        double sum = 0.0, sum_sq = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(s.poisson(mean));
            sum += k;
            sum_sq += k * k;
        }
        const double m = sum / n;
        const double var = sum_sq / n - m * m;
        const double se = std::sqrt(mean / n);
        CHECK(std::abs(m - mean) <= 5.0 * se);
        CHECK(std::abs(var - mean) <= 0.05 * mean);
    }
}

TEST_CASE("multinomial degenerate probabilities and validation") {
    RngStream s(7);
    const double degenerate[3] = {1.0, 0.0, 0.0};
    const auto counts = s.multinomial(10, degenerate);
    CHECK(counts[0] == 10);
    CHECK(counts[1] == 0);
    CHECK(counts[2] == 0);

    const double bad_sum[2] = {0.7, 0.1};
    CHECK_THROWS_AS(s.multinomial(5, bad_sum), std::invalid_argument);
    const double negative[2] = {1.5, -0.5};
    CHECK_THROWS_AS(s.multinomial(5, negative), std::invalid_argument);
}

TEST_CASE("uniform requires lo < hi") {
    RngStream s(3);
    CHECK_THROWS_AS(s.uniform(2.0, 2.0), std::invalid_argument);
    for (int i = 0; i < 1000; ++i) {
        const double u = s.uniform(5.0, 6.0);
        CHECK(u >= 5.0);
        CHECK(u < 6.0);
    }
}

TEST_CASE("dirichlet(1,1,1) is uniform on the simplex") {
    RngStream s(11);
    const double alphas[3] = {1.0, 1.0, 1.0};
    double mean_second = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const auto draw = s.dirichlet(alphas);
        CHECK(draw[0] + draw[1] + draw[2] == doctest::Approx(1.0).epsilon(1e-12));
        mean_second += draw[1];
    }
    CHECK(std::abs(mean_second / n - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("fit_mvn hand cases") {
    const std::vector<std::vector<double>> identical(5, {3.0, -1.0});
    const auto degenerate = fit_mvn(identical, 1e-6);
    CHECK(degenerate.mean[0] == doctest::Approx(3.0));
    CHECK(degenerate.mean[1] == doctest::Approx(-1.0));
    CHECK(degenerate.cov[0] == doctest::Approx(1e-6));
    CHECK(degenerate.cov[3] == doctest::Approx(1e-6));
    CHECK(degenerate.cov[1] == doctest::Approx(0.0));

    const std::vector<std::vector<double>> two = {{0.0, 0.0}, {2.0, 2.0}};
    const auto fitted = fit_mvn(two, 0.0);
    CHECK(fitted.mean[0] == doctest::Approx(1.0));
    CHECK(fitted.mean[1] == doctest::Approx(1.0));
    for (double c : fitted.cov) CHECK(c == doctest::Approx(2.0));

    CHECK_THROWS_AS(fit_mvn({{1.0, 2.0}}, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_mvn({{1.0}, {1.0, 2.0}}, 0.0), std::invalid_argument);
}

TEST_CASE("fit_mvn recovers a known distribution within 3 standard errors") {
    MvnModel truth;
    truth.mean = {1.0, 2.0};
    truth.cov = {4.0, 1.0, 1.0, 2.0};
    REQUIRE(cholesky_psd(truth.cov, 2, truth.chol));

    RngStream s(42);
    const auto samples = sample_mvn(truth, 4000, s);
    const auto fitted = fit_mvn(samples, 0.0);
    for (int i = 0; i < 2; ++i) {
        const double se = std::sqrt(truth.cov[i * 2 + i] / 4000.0);
        CHECK(std::abs(fitted.mean[i] - truth.mean[i]) <= 3.0 * se);
    }
}

TEST_CASE("sample_mvn degenerate and statistical behavior") {
    MvnModel zero;
    zero.mean = {5.0, 7.0};
    zero.cov = {0.0, 0.0, 0.0, 0.0};
    REQUIRE(cholesky_psd(zero.cov, 2, zero.chol));
    RngStream s(8);
    for (const auto& draw : sample_mvn(zero, 50, s)) {
        CHECK(draw[0] == 5.0);
        CHECK(draw[1] == 7.0);
    }

    MvnModel model;
    model.mean = {0.0, 0.0};
    model.cov = {3.0, -1.0, -1.0, 2.0};
    REQUIRE(cholesky_psd(model.cov, 2, model.chol));
    const auto draws = sample_mvn(model, 1000, s);
    const auto fitted = fit_mvn(draws, 0.0);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double scale = std::sqrt(model.cov[i * 2 + i] * model.cov[j * 2 + j]);
            CHECK(std::abs(fitted.cov[i * 2 + j] - model.cov[i * 2 + j]) <= 0.2 * scale);
        }

    MvnModel standard;
    standard.mean = {0.0, 0.0};
    standard.cov = {1.0, 0.0, 0.0, 1.0};
    REQUIRE(cholesky_psd(standard.cov, 2, standard.chol));
    int positive = 0;
    const auto unit = sample_mvn(standard, 10000, s);
    for (const auto& draw : unit)
        if (draw[0] > 0.0) ++positive;
    CHECK(std::abs(positive / 10000.0 - 0.5) <= 0.05);
}

TEST_CASE("auto ridge scales with the diagonal") {
    std::vector<std::vector<double>> samples;
    RngStream s(17);
    for (int i = 0; i < 200; ++i) samples.push_back({s.normal(0.0, 2.0), s.normal(0.0, 4.0)});
    const auto fitted = fit_mvn(samples);
    const double diag_mean = (fitted.cov[0] + fitted.cov[3]) / 2.0 - fitted.ridge;
    CHECK(fitted.ridge == doctest::Approx(1e-6 * diag_mean).epsilon(1e-6));
}
