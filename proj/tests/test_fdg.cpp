#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "relplan/fdg.hpp"

#include <cmath>

using namespace relplan;

namespace {

EellsMatrix eta_from(const Eigen::MatrixXd& m) {
    EellsMatrix eta;
    eta.eta = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) eta.feature_ids.push_back("f" + std::to_string(i + 1));
    return eta;
}

InfluenceMatrix influence_from(const Eigen::MatrixXd& m) {
    InfluenceMatrix d;
    d.entries = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) d.feature_ids.push_back("f" + std::to_string(i + 1));
    d.validate();
    return d;
}

} // namespace

TEST_CASE("membership functions satisfy the shape invariants") {
    const MembershipFunction fns[] = {
        MembershipFunction::identity(),
        MembershipFunction::thresholded_linear(0.16, 0.83),
        MembershipFunction::concave(0.5),
        MembershipFunction::s_curve(0.16, 0.83),
    };
    for (const auto& g : fns) {
        CHECK(g(0.0) == 0.0);
        CHECK(g(1.0) == 1.0);
        double prev = -1.0;
        for (int i = 0; i <= 1000; ++i) {
            const double v = g(i / 1000.0);
            CHECK(v >= prev);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
    }
}

TEST_CASE("thresholded linear ramp values") {
    const MembershipFunction g = MembershipFunction::thresholded_linear(0.16, 0.83);
    CHECK(g(0.10) == 0.0);
    CHECK(g(0.495) == doctest::Approx((0.495 - 0.16) / (0.83 - 0.16)).epsilon(1e-15));
    CHECK(g(0.495) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g(0.83) == 1.0);
    CHECK(g(0.9) == 1.0);
}

TEST_CASE("membership parameter validation and parsing") {
    CHECK_THROWS_AS(MembershipFunction::thresholded_linear(0.9, 0.8), ValidationError);
    CHECK_THROWS_AS(MembershipFunction::concave(1.5), ValidationError);
    CHECK(MembershipFunction::parse("identity").kind() == MembershipFunction::Kind::Identity);
    CHECK(MembershipFunction::parse("tl:0.16:0.83")(0.495) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(MembershipFunction::parse("concave:0.5")(0.25) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(MembershipFunction::parse("sc:0.2:0.8").kind() == MembershipFunction::Kind::SCurve);
    CHECK_THROWS_AS(MembershipFunction::parse("bogus"), ValidationError);
    CHECK_THROWS_AS(MembershipFunction::parse("tl:0.16"), ValidationError);
}

TEST_CASE("identity membership preserves eta off the diagonal") {
    Eigen::MatrixXd m(2, 2);
    m << 0.2, -0.37, 0.9, 0.1;
    const InfluenceMatrix d = apply_membership(eta_from(m), MembershipFunction::identity());
    CHECK(d.entries(0, 1) == -0.37);
    CHECK(d.entries(1, 0) == 0.9);
    CHECK(d.entries(0, 0) == 1.0);
    CHECK(d.entries(1, 1) == 1.0);
}

TEST_CASE("membership keeps the unspecified quality at zero") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
    const InfluenceMatrix d =
        apply_membership(eta_from(m), MembershipFunction::thresholded_linear(0.1, 0.9));
    CHECK(d.entries(0, 1) == 0.0);
    CHECK(d.entries(1, 0) == 0.0);
}

TEST_CASE("thresholded membership zeroes weak dependencies") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, -0.10, 0.495, 1.0;
    const InfluenceMatrix d =
        apply_membership(eta_from(m), MembershipFunction::thresholded_linear(0.16, 0.83));
    CHECK(d.entries(0, 1) == 0.0); // |eta| below the cutoff
    CHECK(d.entries(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("precedence overrides force full strength with the declared sign") {
    Eigen::MatrixXd m(4, 4);
    m.setZero();
    m.diagonal().setOnes();
    m(0, 2) = 0.0417;
    m(3, 2) = 0.0417;
    const InfluenceMatrix d = influence_from(m);

    PrecedenceMatrix gamma = PrecedenceMatrix::zero(d.feature_ids);
    gamma.entries(0, 2) = 1;
    gamma.entries(3, 2) = -1;

    const InfluenceMatrix updated = apply_precedence(d, gamma);
    CHECK(updated.entries(0, 2) == 1.0);
    CHECK(updated.entries(3, 2) == -1.0);
    CHECK(updated.entries(1, 0) == 0.0);

    // Idempotent.
    const InfluenceMatrix again = apply_precedence(updated, gamma);
    CHECK(again.entries == updated.entries);
}

TEST_CASE("all-zero precedence is a bit-exact no-op") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, -0.25, 0.7, 1.0;
    const InfluenceMatrix d = influence_from(m);
    const InfluenceMatrix out = apply_precedence(d, PrecedenceMatrix::zero(d.feature_ids));
    CHECK(out.entries == d.entries);
}

TEST_CASE("transitive closure follows the weakest link of a chain") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m.diagonal().setOnes();
    m(0, 1) = 0.8;
    m(1, 2) = 0.5;
    const InfluenceMatrix closed = transitive_influence(influence_from(m));
    CHECK(closed.entries(0, 2) == 0.5);

    Eigen::MatrixXd neg = m;
    neg(1, 2) = -0.5;
    const InfluenceMatrix closed_neg = transitive_influence(influence_from(neg));
    CHECK(closed_neg.entries(0, 2) == -0.5);
}

TEST_CASE("transitive closure is idempotent and never weakens a pair") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m.diagonal().setOnes();
    m(0, 1) = 0.8;
    m(1, 2) = -0.6;
    m(2, 3) = 0.9;
    m(3, 0) = -0.2;
    m(0, 2) = 0.1;
    const InfluenceMatrix once = transitive_influence(influence_from(m));
    const InfluenceMatrix twice = transitive_influence(once);
    CHECK(once.entries == twice.entries);
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            CHECK(std::abs(once.entries(i, j)) >= std::abs(m(i, j)) - 1e-15);
        }
    }
}

TEST_CASE("an even number of negative edges flips back to positive") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
    m.diagonal().setOnes();
    m(0, 1) = -0.7;
    m(1, 2) = -0.4;
    const InfluenceMatrix closed = transitive_influence(influence_from(m));
    CHECK(closed.entries(0, 2) == 0.4);
}
