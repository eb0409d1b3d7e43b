#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "relplan/numerics.hpp"

#include <cmath>
#include <limits>
#include <set>

using namespace relplan;

TEST_CASE("normal cdf at anchor points") {
    CHECK(std_normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(std_normal_cdf(8.0) - 1.0) < 1e-12);
    // Frozen from the quadrature oracle below.
    CHECK(std::abs(std_normal_cdf(1.0) - 0.8413447460685429) < 1e-12);
    CHECK(std::abs(std_normal_cdf(1.0) - oracles::normal_cdf_quadrature(1.0)) < 1e-12);
    for (double x : {-5.5, -2.25, -0.75, 0.3, 1.9, 3.4}) {
        CHECK(std::abs(std_normal_cdf(x) - oracles::normal_cdf_quadrature(x)) < 1e-12);
    }
}

TEST_CASE("normal cdf rejects non-finite input") {
    CHECK_THROWS_AS(std_normal_cdf(std::nan("")), std::domain_error);
    CHECK_THROWS_AS(std_normal_cdf(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("normal cdf is nondecreasing on a sorted sample") {
    Rng rng(42);
    std::set<double> xs;
    while (xs.size() < 10000) xs.insert(12.0 * rng.next_uniform() - 6.0);
    double prev = 0.0;
    for (double x : xs) {
        const double c = std_normal_cdf(x);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("normal quantile inverts the cdf") {
    CHECK(std_normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(std::abs(std_normal_quantile(0.841344746) - 1.0) < 1e-8);
    for (double x : {-6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0}) {
        CHECK(std::abs(std_normal_quantile(std_normal_cdf(x)) - x) < 1e-8);
    }
    // Absolute error across the stated domain.
    for (double p : {1e-12, 1e-6, 0.012, 0.4, 0.77, 1.0 - 1e-6, 1.0 - 1e-12}) {
        CHECK(std::abs(std_normal_cdf(std_normal_quantile(p)) - p) < 1e-9);
    }
}

TEST_CASE("normal quantile rejects out-of-range probabilities") {
    CHECK_THROWS_AS(std_normal_quantile(0.0), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(1.0), std::domain_error);
    CHECK_THROWS_AS(std_normal_quantile(-0.1), std::domain_error);
}

TEST_CASE("bivariate normal cdf at anchor points") {
    CHECK(bvn_cdf(0.0, 0.0, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(bvn_cdf(0.0, 0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(bvn_cdf(0.8, -1.3, 0.0) == std_normal_cdf(0.8) * std_normal_cdf(-1.3));
    // Closed-form orthant identity 1/4 + asin(rho) / (2 pi).
    const double expected = 0.25 + std::asin(0.5) / (2.0 * 3.14159265358979323846);
    CHECK(std::abs(bvn_cdf(0.0, 0.0, 0.5) - expected) < 1e-7);
    CHECK(std::abs(expected - 1.0 / 3.0) < 1e-15);
}

TEST_CASE("bivariate normal cdf against quadrature") {
    for (double rho : {-0.95, -0.6, -0.2, 0.0, 0.35, 0.8, 0.95}) {
        for (double a : {-1.5, 0.0, 0.7, 2.0}) {
            for (double b : {-2.0, -0.3, 1.2}) {
                CHECK(std::abs(bvn_cdf(a, b, rho) - oracles::bvn_quadrature(a, b, rho)) < 1e-7);
            }
        }
    }
}

TEST_CASE("bivariate normal cdf symmetry and monotonicity") {
    for (double rho : {-0.9, -0.4, 0.0, 0.55, 0.99}) {
        for (double a : {-2.0, -0.5, 0.9}) {
            for (double b : {-1.1, 0.4, 1.8}) {
                CHECK(bvn_cdf(a, b, rho) == doctest::Approx(bvn_cdf(b, a, rho)).epsilon(1e-12));
            }
        }
    }
    double prev = -1.0;
    for (double a = -3.0; a <= 3.0; a += 0.25) {
        const double v = bvn_cdf(a, 0.7, 0.4);
        CHECK(v >= prev - 1e-12);
        prev = v;
    }
    prev = -1.0;
    for (double rho = -1.0; rho <= 1.0; rho += 0.05) {
        const double v = bvn_cdf(0.3, -0.4, rho);
        CHECK(v >= prev - 1e-9);
        prev = v;
    }
}

TEST_CASE("bivariate normal cdf limiting correlations") {
    for (double a : {-1.0, 0.2, 1.4}) {
        for (double b : {-0.7, 0.5}) {
            CHECK(bvn_cdf(a, b, 1.0) ==
                  doctest::Approx(std_normal_cdf(std::min(a, b))).epsilon(1e-10));
            CHECK(bvn_cdf(a, b, -1.0) ==
                  doctest::Approx(std::max(0.0, std_normal_cdf(a) + std_normal_cdf(b) - 1.0))
                      .epsilon(1e-10));
        }
    }
}

TEST_CASE("bivariate normal cdf sentinels and domain") {
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(bvn_cdf(inf, inf, 0.3) == 1.0);
    CHECK(bvn_cdf(-inf, 1.0, 0.3) == 0.0);
    CHECK(bvn_cdf(inf, 0.7, 0.3) == doctest::Approx(std_normal_cdf(0.7)).epsilon(1e-14));
    CHECK_THROWS_AS(bvn_cdf(0.0, 0.0, 1.5), std::domain_error);
    CHECK_THROWS_AS(bvn_cdf(std::nan(""), 0.0, 0.0), std::domain_error);
}

TEST_CASE("nearest correlation keeps PSD input") {
    Matrix id = Matrix::Identity(3, 3);
    CHECK((nearest_correlation(id).matrix() - id).cwiseAbs().maxCoeff() < 1e-12);

    Matrix psd(2, 2);
    psd << 1.0, 0.5, 0.5, 1.0;
    CHECK((nearest_correlation(psd).matrix() - psd).cwiseAbs().maxCoeff() < 1e-10);

    Matrix one(1, 1);
    one(0, 0) = 1.0;
    CHECK(nearest_correlation(one).matrix()(0, 0) == 1.0);
}

TEST_CASE("nearest correlation repairs an indefinite matrix") {
    Matrix m(3, 3);
    m << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
    CHECK(oracles::jacobi_eigenvalues(m).front() < -0.1); // oracle agrees it is indefinite

    const CorrelationMatrix repaired = nearest_correlation(m);
    for (double eig : oracles::jacobi_eigenvalues(repaired.matrix())) {
        CHECK(eig >= -1e-10);
    }
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(repaired.matrix()(i, i) == 1.0);
        for (Eigen::Index j = 0; j < 3; ++j) {
            CHECK(std::abs(repaired.matrix()(i, j)) <= 1.0);
        }
    }
    // Idempotence.
    const CorrelationMatrix again = nearest_correlation(repaired.matrix());
    CHECK((again.matrix() - repaired.matrix()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("nearest correlation rejects malformed input") {
    Matrix bad(2, 2);
    bad << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(nearest_correlation(bad), std::invalid_argument);
    bad << 0.9, 0.1, 0.1, 1.0;
    CHECK_THROWS_AS(nearest_correlation(bad), std::invalid_argument);
}

TEST_CASE("triangular factor reproduces repaired matrices") {
    Matrix m(3, 3);
    m << 1.0, 0.9, -0.9, 0.9, 1.0, 0.9, -0.9, 0.9, 1.0;
    const CorrelationMatrix repaired = nearest_correlation(m);
    const Matrix l = cholesky_factor(repaired);
    CHECK((l * l.transpose() - repaired.matrix()).norm() < 1e-8);
    for (Eigen::Index i = 0; i < l.rows(); ++i)
        for (Eigen::Index j = i + 1; j < l.cols(); ++j) CHECK(l(i, j) == 0.0);

    // Exactly comonotone pair: semidefinite with a zero pivot.
    Matrix co(2, 2);
    co << 1.0, 1.0, 1.0, 1.0;
    const Matrix lc = cholesky_factor(nearest_correlation(co));
    CHECK((lc * lc.transpose() - co).norm() < 1e-12);
}

TEST_CASE("seeded rng streams are bit-exact and independent") {
    Rng a(123456789), b(123456789), c(987654321);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);

    Rng d1 = Rng::derive(7, 0), d2 = Rng::derive(7, 0), d3 = Rng::derive(7, 1);
    CHECK(d1.next_u64() == d2.next_u64());
    CHECK(Rng(7).next_u64() != d3.next_u64());
}

TEST_CASE("rng uniforms stay inside the open unit interval") {
    Rng rng(5);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("rng normals have sane first moments") {
    Rng rng(11);
    double sum = 0.0, sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.next_normal();
        sum += z;
        sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sq / n - 1.0) < 0.02);
}
