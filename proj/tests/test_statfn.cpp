#include <doctest.h>

#include <cmath>

#include "banditlab/statfn.hpp"
#include "oracles.hpp"

using namespace banditlab;

TEST_CASE("normal_cdf basics") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(normal_cdf(8.0) > 1.0 - 1e-14);
    CHECK(normal_cdf(-8.0) < 1e-14);
    // Monotone on a coarse grid.
    double prev = 0.0;
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        double c = normal_cdf(x);
        CHECK(c > prev);
        prev = c;
    }
    // Derived check against the quadrature oracle.
    CHECK(std::fabs(normal_cdf(1.959964) - 0.975) < 1e-6);
    for (double x : {-3.0, -1.2, 0.3, 0.7, 2.5}) {
        CHECK(std::fabs(normal_cdf(x) - oracles::normal_cdf(x)) < 1e-12);
    }
}

TEST_CASE("normal_quantile") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
    // Frozen via bisection on the quadrature CDF oracle.
    CHECK(std::fabs(normal_quantile(0.975) - 1.959963984540054) < 1e-5);
    CHECK(normal_cdf(normal_quantile(0.9)) == doctest::Approx(0.9).epsilon(1e-9));
    CHECK_THROWS_AS(normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(normal_quantile(-0.2), std::domain_error);
}

TEST_CASE("chi2_quantile") {
    // Frozen from the quadrature + bisection oracle.
    CHECK(std::fabs(chi2_quantile(1, 0.9) - 2.705543454095404) < 1e-4);
    CHECK(std::fabs(chi2_quantile(6, 0.9) - 10.644640675668422) < 1e-3);
    double oracle_90 = oracles::invert_cdf([](double x) { return oracles::chi2_cdf(6, x); }, 0.9,
                                           0.0, 60.0);
    CHECK(chi2_quantile(6, 0.9) == doctest::Approx(oracle_90).epsilon(1e-9));
    // Closed form at d = 2.
    for (double p : {0.1, 0.5, 0.9, 0.99}) {
        CHECK(chi2_quantile(2, p) == doctest::Approx(-2.0 * std::log(1.0 - p)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(chi2_quantile(0, 0.5), std::domain_error);
    CHECK_THROWS_AS(chi2_quantile(3, 1.0), std::domain_error);
}

TEST_CASE("f_quantile") {
    // Large-d2 limit collapses to chi2/d1.
    for (int d1 : {1, 3, 6}) {
        double lim = d1 * f_quantile(d1, 1000000, 0.9);
        double chi = chi2_quantile(d1, 0.9);
        CHECK(std::fabs(lim - chi) / chi < 1e-3);
    }
    // Squared t quantile identity, with the t quantile from the quadrature oracle.
    double t7 = oracles::invert_cdf([](double x) { return oracles::t_cdf(7, x); }, 0.95, 0.0, 40.0);
    CHECK(f_quantile(1, 7, 0.9) == doctest::Approx(t7 * t7).epsilon(1e-7));
    // Golden constant recorded from the incomplete-beta bisection oracle.
    CHECK(std::fabs(f_quantile(6, 994, 0.9) - 1.780044966242048) < 1e-6);
    double oracle_f = oracles::invert_cdf([](double x) { return oracles::f_cdf(6, 994, x); }, 0.9,
                                          0.0, 50.0);
    CHECK(f_quantile(6, 994, 0.9) == doctest::Approx(oracle_f).epsilon(1e-7));
    CHECK_THROWS_AS(f_quantile(0, 5, 0.5), std::domain_error);
    CHECK_THROWS_AS(f_quantile(5, 5, 1.2), std::domain_error);
}

TEST_CASE("quantile round trips hold to 1e-8") {
    for (int i = 1; i <= 99; ++i) {
        double p = i / 100.0;
        CHECK(std::fabs(normal_cdf(normal_quantile(p)) - p) < 1e-8);
        for (int d : {1, 2, 6}) {
            CHECK(std::fabs(regularized_gamma_p(0.5 * d, 0.5 * chi2_quantile(d, p)) - p) < 1e-8);
        }
        double f = f_quantile(6, 994, p);
        double u = 6.0 * f / (6.0 * f + 994.0);
        CHECK(std::fabs(regularized_beta(3.0, 497.0, u) - p) < 1e-8);
    }
}

TEST_CASE("cholesky") {
    CHECK(cholesky(Matrix::identity(3))(2, 2) == doctest::Approx(1.0));
    Matrix m(2, 2);
    m(0, 0) = 4.0; m(0, 1) = 2.0;
    m(1, 0) = 2.0; m(1, 1) = 3.0;
    Matrix l = cholesky(m);
    CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(l(0, 1) == 0.0);

    Matrix indefinite(2, 2);
    indefinite(0, 0) = 1.0; indefinite(0, 1) = 2.0;
    indefinite(1, 0) = 2.0; indefinite(1, 1) = 1.0;
    CHECK_THROWS_AS(cholesky(indefinite), NotPositiveDefinite);

    Matrix asym(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(cholesky(asym), std::invalid_argument);
}

TEST_CASE("cholesky and solve residuals on random SPD matrices") {
    RngStream rng(999, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = 2 + static_cast<int>(rng.next_u64() % 7);  // dims 2..8
        Matrix b(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b(i, j) = sample_std_normal(rng);
        Matrix a = b * transpose(b) + 0.01 * Matrix::identity(n);
        Matrix l = cholesky(a);
        Matrix rec = l * transpose(l);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                num += (rec(i, j) - a(i, j)) * (rec(i, j) - a(i, j));
                den += a(i, j) * a(i, j);
            }
        }
        CHECK(std::sqrt(num) <= 1e-9 * std::sqrt(den));

        Vector rhs(n);
        for (int i = 0; i < n; ++i) rhs[i] = sample_std_normal(rng);
        Vector x = solve_spd(a, rhs);
        Vector ax = a * x;
        double resid = 0.0, xnorm = 0.0, rnorm = 0.0;
        for (int i = 0; i < n; ++i) {
            resid = std::max(resid, std::fabs(ax[i] - rhs[i]));
            xnorm += x[i] * x[i];
            rnorm += rhs[i] * rhs[i];
        }
        double scale = max_abs(a) * std::sqrt(xnorm) + std::sqrt(rnorm);
        CHECK(resid <= 1e-8 * scale);
    }
}

TEST_CASE("solve_spd basics") {
    Vector b = {3.0, -1.0, 2.0};
    Vector x = solve_spd(Matrix::identity(3), b);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == b[i]);
    Matrix d(2, 2);
    d(0, 0) = 2.0; d(1, 1) = 4.0;
    Vector y = solve_spd(d, Vector{2.0, 4.0});
    CHECK(y[0] == doctest::Approx(1.0));
    CHECK(y[1] == doctest::Approx(1.0));
}

TEST_CASE("symmetric eigenvalues") {
    Matrix d(3, 3);
    d(0, 0) = 3.0; d(1, 1) = 1.0; d(2, 2) = 2.0;
    Vector eig = symmetric_eigenvalues(d);
    CHECK(eig[0] == doctest::Approx(1.0));
    CHECK(eig[1] == doctest::Approx(2.0));
    CHECK(eig[2] == doctest::Approx(3.0));
    // Random SPD: eigenvalue sum equals trace, min eigenvalue positive.
    RngStream rng(5, 5);
    Matrix b(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) b(i, j) = sample_std_normal(rng);
    Matrix a = b * transpose(b) + 0.1 * Matrix::identity(4);
    Vector e = symmetric_eigenvalues(a);
    double sum = 0.0;
    for (double v : e) sum += v;
    CHECK(sum == doctest::Approx(trace(a)).epsilon(1e-10));
    CHECK(e.front() > 0.0);
}

TEST_CASE("RngStream determinism") {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t va = a.next_u64();
        std::uint64_t vb = b.next_u64();
        all_equal = all_equal && (va == vb);
        any_diff = any_diff || (va != c.next_u64());
    }
    CHECK(all_equal);
    CHECK(any_diff);
    CHECK(derive_stream_id({1, 2, 3}) != derive_stream_id({1, 3, 2}));
}

TEST_CASE("sampler moments at one million draws") {
    const int n = 1000000;
    RngStream rng(2024, 11);

    SUBCASE("uniform(0,5) mean") {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += sample_uniform(rng, 0.0, 5.0);
        CHECK(std::fabs(s / n - 2.5) < 0.025);
    }
    SUBCASE("standard normal mean and variance") {
        double s = 0.0, ss = 0.0;
        for (int i = 0; i < n; ++i) {
            double x = sample_std_normal(rng);
            s += x;
            ss += x * x;
        }
        double mean = s / n;
        double var = ss / n - mean * mean;
        CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
        CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
    }
    SUBCASE("t5 variance is 5/3") {
        double s = 0.0, ss = 0.0;
        for (int i = 0; i < n; ++i) {
            double x = sample_t(5, rng);
            s += x;
            ss += x * x;
        }
        double var = ss / n - (s / n) * (s / n);
        CHECK(std::fabs(var - 5.0 / 3.0) < 0.02 * (5.0 / 3.0));
    }
    SUBCASE("poisson") {
        CHECK(sample_poisson(0.0, rng) == 0);
        double lambda = 2.5;
        double s = 0.0, ss = 0.0;
        for (int i = 0; i < n; ++i) {
            double x = static_cast<double>(sample_poisson(lambda, rng));
            s += x;
            ss += x * x;
        }
        double mean = s / n;
        double var = ss / n - mean * mean;
        CHECK(std::fabs(mean - lambda) < 3.0 * std::sqrt(lambda / n));
        CHECK(std::fabs(var - lambda) < 4.0 * std::sqrt(1.0 * lambda * (1 + 2 * lambda) / n));
    }
    SUBCASE("bernoulli") {
        double p = 0.3;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += sample_bernoulli(p, rng);
        CHECK(std::fabs(s / n - p) < 3.0 * std::sqrt(p * (1 - p) / n));
        CHECK_THROWS_AS(sample_bernoulli(1.5, rng), std::domain_error);
    }
}
