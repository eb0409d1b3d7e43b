#include "relplan/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace relplan {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

double std_normal_cdf(double x) {
    if (!std::isfinite(x)) {
        throw std::domain_error("std_normal_cdf: non-finite input");
    }
    // 0.5 * erfc(-x / sqrt(2)); erfc is accurate to a few ulp, well inside
    // the 1e-12 budget.
    return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("std_normal_quantile: p must lie in (0, 1), got " +
                                std::to_string(p));
    }
    // Wichura's AS 241 (PPND16), relative error ~1e-15 over the full range.
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double z;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        z = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        z = num / den;
    }
    return (q < 0.0) ? -z : z;
}

namespace {

// Gauss-Legendre abscissae/weights used by the Drezner-Wesolowsky/Genz
// bivariate normal quadrature, split by correlation magnitude.
const double kGlX6[3] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969};
const double kGlW6[3] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910};

const double kGlX12[6] = {-0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
                          -0.5873179542866175, -0.3678314989981802, -0.1252334085114689};
const double kGlW12[6] = {0.04717533638651183, 0.1069393259953184, 0.1600783285433462,
                          0.2031674267230659,  0.2334925365383548, 0.2491470458134028};

const double kGlX20[10] = {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                           -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
                           -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
                           -0.07652652113349733};
const double kGlW20[10] = {0.01761400713915212, 0.04060142980038694, 0.06267204833410907,
                           0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                           0.1316886384491766,  0.1420961093183820,  0.1491729864726037,
                           0.1527533871307258};

double phi(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// Genz's BVND: P(X > h, Y > k) for standard bivariate normal with
// correlation r. Stable over the whole range of r, including |r| -> 1.
double bvnd(double h, double k, double r) {
    const double* x;
    const double* w;
    int pts;
    const double ar = std::abs(r);
    if (ar < 0.3) {
        x = kGlX6; w = kGlW6; pts = 3;
    } else if (ar < 0.75) {
        x = kGlX12; w = kGlW12; pts = 6;
    } else {
        x = kGlX20; w = kGlW20; pts = 10;
    }

    double hk = h * k;
    double bvn = 0.0;
    if (ar < 0.925) {
        if (ar > 0.0) {
            const double hs = (h * h + k * k) / 2.0;
            const double asr = std::asin(r);
            for (int i = 0; i < pts; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double sn = std::sin(asr * (is * x[i] + 1.0) / 2.0);
                    bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
                }
            }
            bvn = bvn * asr / (2.0 * kTwoPi);
        }
        bvn += phi(-h) * phi(-k);
    } else {
        if (r < 0.0) {
            k = -k;
            hk = -hk;
        }
        if (ar < 1.0) {
            const double as = (1.0 - r) * (1.0 + r);
            double a = std::sqrt(as);
            const double bs = (h - k) * (h - k);
            const double c = (4.0 - hk) / 8.0;
            const double d = (12.0 - hk) / 16.0;
            double asr = -(bs / as + hk) / 2.0;
            if (asr > -100.0) {
                bvn = a * std::exp(asr) *
                      (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
            }
            if (-hk < 100.0) {
                const double b = std::sqrt(bs);
                bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * phi(-b / a) * b *
                       (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
            }
            a /= 2.0;
            for (int i = 0; i < pts; ++i) {
                for (int is = -1; is <= 1; is += 2) {
                    const double xs = a * (is * x[i] + 1.0) * a * (is * x[i] + 1.0);
                    const double rs = std::sqrt(1.0 - xs);
                    asr = -(bs / xs + hk) / 2.0;
                    if (asr > -100.0) {
                        bvn += a * w[i] * std::exp(asr) *
                               (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                                (1.0 + c * xs * (1.0 + d * xs)));
                    }
                }
            }
            bvn = -bvn / kTwoPi;
        }
        if (r > 0.0) {
            bvn += phi(-std::max(h, k));
        } else {
            bvn = -bvn;
            if (k > h) {
                bvn += phi(k) - phi(h);
            }
        }
    }
    return bvn;
}

} // namespace

double bvn_cdf(double a, double b, double rho) {
    if (std::isnan(a) || std::isnan(b) || std::isnan(rho)) {
        throw std::domain_error("bvn_cdf: NaN input");
    }
    if (!(rho >= -1.0 && rho <= 1.0)) {
        throw std::domain_error("bvn_cdf: correlation outside [-1, 1]: " + std::to_string(rho));
    }
    // Infinite sentinels reduce to marginals.
    if (a == -std::numeric_limits<double>::infinity() ||
        b == -std::numeric_limits<double>::infinity()) {
        return 0.0;
    }
    const bool a_inf = a == std::numeric_limits<double>::infinity();
    const bool b_inf = b == std::numeric_limits<double>::infinity();
    if (a_inf && b_inf) return 1.0;
    if (a_inf) return phi(b);
    if (b_inf) return phi(a);
    // P(X <= a, Y <= b) = P(-X > -a, -Y > -b), and negating both keeps rho.
    double v = bvnd(-a, -b, rho);
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    return v;
}

CorrelationMatrix::CorrelationMatrix(Matrix m) : m_(std::move(m)) {
    const Eigen::Index n = m_.rows();
    if (n == 0 || m_.cols() != n) {
        throw std::invalid_argument("CorrelationMatrix: matrix must be square and non-empty");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(m_(i, i) - 1.0) > 1e-12) {
            throw std::invalid_argument("CorrelationMatrix: diagonal entry (" +
                                        std::to_string(i) + ") not 1");
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(m_(i, j) - m_(j, i)) > 1e-12) {
                throw std::invalid_argument("CorrelationMatrix: not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            }
            if (std::abs(m_(i, j)) > 1.0 + 1e-12) {
                throw std::invalid_argument("CorrelationMatrix: entry (" + std::to_string(i) +
                                            "," + std::to_string(j) + ") outside [-1, 1]");
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) {
        throw std::invalid_argument("CorrelationMatrix: not positive semidefinite (min eig " +
                                    std::to_string(es.eigenvalues().minCoeff()) + ")");
    }
}

CorrelationMatrix nearest_correlation(const Matrix& m) {
    const Eigen::Index n = m.rows();
    if (n == 0 || m.cols() != n) {
        throw std::invalid_argument("nearest_correlation: matrix must be square and non-empty");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("nearest_correlation: input not symmetric");
    }
    if ((m.diagonal().array() - 1.0).abs().maxCoeff() > 1e-9) {
        throw std::invalid_argument("nearest_correlation: input diagonal not 1");
    }

    Matrix sym = (m + m.transpose()) / 2.0;
    sym.diagonal().setOnes();

    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.eigenvalues().minCoeff() >= -1e-10) {
        Matrix out = sym;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (i != j) out(i, j) = std::clamp(out(i, j), -1.0, 1.0);
        return CorrelationMatrix(std::move(out));
    }

    // Spectral clip: raise negative eigenvalues to 1e-8, rebuild, rescale
    // back to unit diagonal.
    Vector lambda = es.eigenvalues().cwiseMax(1e-8);
    Matrix rebuilt = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    Vector scale = rebuilt.diagonal().cwiseSqrt().cwiseInverse();
    Matrix out = scale.asDiagonal() * rebuilt * scale.asDiagonal();
    out = ((out + out.transpose()) / 2.0).eval();
    out.diagonal().setOnes();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j) out(i, j) = std::clamp(out(i, j), -1.0, 1.0);
    return CorrelationMatrix(std::move(out));
}

Matrix cholesky_factor(const CorrelationMatrix& c) {
    const Eigen::Index n = c.dim();
    const Matrix& a = c.matrix();
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j);
        for (Eigen::Index kcol = 0; kcol < j; ++kcol) d -= l(j, kcol) * l(j, kcol);
        if (d <= 0.0) {
            // Semidefinite pivot: the remaining column is zero for PSD input.
            l(j, j) = 0.0;
            continue;
        }
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index kcol = 0; kcol < j; ++kcol) s -= l(i, kcol) * l(j, kcol);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::next_uniform() {
    // 53-bit mantissa in [0, 1), nudged off zero so the inverse CDF is safe.
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double Rng::next_normal() { return std_normal_quantile(next_uniform()); }

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t sm = seed;
    std::uint64_t base = splitmix64(sm);
    sm = base ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    return Rng(splitmix64(sm));
}

} // namespace relplan
