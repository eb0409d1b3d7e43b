#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <utility>

// Scalar and matrix statistical primitives used by the preference
// resampler: standard-normal CDF/quantile, bivariate normal CDF,
// positive-semidefinite repair of correlation matrices, and a seeded
// reproducible random stream.

namespace relplan {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Standard normal CDF. Absolute error below 1e-12 on finite input.
/// Throws std::domain_error on non-finite input.
double std_normal_cdf(double x);

/// Inverse of std_normal_cdf on (0, 1). Throws std::domain_error for
/// p <= 0 or p >= 1; callers must pre-clamp degenerate probabilities.
double std_normal_quantile(double p);

/// P(X <= a, Y <= b) for a standard bivariate normal pair with
/// correlation rho. Accepts +-infinity sentinels for a and b; absolute
/// error below 1e-7 over rho in [-1, 1]. Throws std::domain_error for
/// rho outside [-1, 1].
double bvn_cdf(double a, double b, double rho);

/// A symmetric unit-diagonal matrix that is positive semidefinite up to
/// tolerance (eigenvalues >= -1e-8), with off-diagonal entries in [-1, 1].
class CorrelationMatrix {
public:
    /// Validates the invariants; throws std::invalid_argument on failure.
    explicit CorrelationMatrix(Matrix m);

    Eigen::Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Matrix m_;
};

/// Repairs a symmetric unit-diagonal matrix into a valid correlation
/// matrix. An input that is already PSD (min eigenvalue >= -1e-10) is
/// returned unchanged; otherwise eigenvalues are clipped at 1e-8, the
/// matrix reconstructed and rescaled back to unit diagonal.
/// Throws std::invalid_argument when the input is not symmetric or not
/// unit-diagonal within 1e-9.
CorrelationMatrix nearest_correlation(const Matrix& m);

/// Lower-triangular L with L * L^T equal to the matrix (Frobenius error
/// below 1e-8 for repaired correlation matrices). Semidefinite pivots
/// are clamped to zero, so exactly comonotone blocks factor cleanly.
Matrix cholesky_factor(const CorrelationMatrix& c);

/// xoshiro256++ stream with an explicit 64-bit seed. Identical seeds
/// give bit-identical streams; normal deviates go through the inverse
/// CDF so the stream does not depend on library distribution internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform double in the open interval (0, 1).
    double next_uniform();
    /// Standard normal deviate via inverse-CDF transform.
    double next_normal();

    /// Independent stream for a sub-task, derived deterministically from
    /// (seed, stream). Used to keep chunked generation reproducible
    /// regardless of how work is partitioned.
    static Rng derive(std::uint64_t seed, std::uint64_t stream);

private:
    std::uint64_t s_[4];
};

} // namespace relplan
