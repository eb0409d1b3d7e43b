#include "relplan/resample.hpp"

#include "relplan/mining.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace relplan {

void MomentTargets::validate() const {
    const Eigen::Index n = mu.size();
    if (n < 1 || sigma.rows() != n || sigma.cols() != n) {
        throw ValidationError("moments: sigma must be square with the dimension of mu");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(mu(i) >= 0.0 && mu(i) <= 1.0)) {
            throw ValidationError("moments: mean of feature " + std::to_string(i) +
                                  " outside [0, 1]");
        }
        if (std::abs(sigma(i, i) - mu(i) * (1.0 - mu(i))) > 1e-9) {
            throw ValidationError("moments: variance of feature " + std::to_string(i) +
                                  " violates the Bernoulli identity mu(1-mu)");
        }
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (std::abs(sigma(i, j) - sigma(j, i)) > 1e-12) {
                throw ValidationError("moments: sigma not symmetric at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
            }
            const double lo = std::max(-mu(i) * mu(j), mu(i) + mu(j) - 1.0 - mu(i) * mu(j));
            const double hi = std::min(mu(i), mu(j)) - mu(i) * mu(j);
            if (sigma(i, j) < lo - 1e-9 || sigma(i, j) > hi + 1e-9) {
                throw ValidationError("moments: covariance at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") outside the Frechet bounds");
            }
        }
    }
}

bool CalibrationDiagnostics::pair_clamped(Eigen::Index i, Eigen::Index j) const {
    for (const Clamp& c : clamps) {
        if ((c.i == i && c.j == j) || (c.i == j && c.j == i)) return true;
    }
    return false;
}

MomentTargets estimate_moments(const PreferenceMatrix& m) {
    const CountMatrix counts = count_cooccurrence(m);
    const Eigen::Index n = m.feature_count();
    const double k = static_cast<double>(m.user_count());

    MomentTargets t;
    t.mu.resize(n);
    t.sigma.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        t.mu(i) = static_cast<double>(counts.lambda(i, i)) / k;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            t.sigma(i, j) = static_cast<double>(counts.lambda(i, j)) / k - t.mu(i) * t.mu(j);
        }
        // Pin the diagonal to the exact Bernoulli identity.
        t.sigma(i, i) = t.mu(i) * (1.0 - t.mu(i));
    }
    return t;
}

namespace {

// Solves bvn_cdf(gi, gj, r) = target for r. The target is assumed to lie
// within the achievable window; returns the residual via out-param.
double bisect_latent_corr(double gi, double gj, double target, double& residual) {
    double lo = -1.0 + 1e-9;
    double hi = 1.0 - 1e-9;
    double mid = 0.0;
    double f_mid = 0.0;
    for (int it = 0; it < 200; ++it) {
        mid = (lo + hi) / 2.0;
        f_mid = bvn_cdf(gi, gj, mid) - target;
        if (std::abs(f_mid) <= 1e-8) {
            residual = std::abs(f_mid);
            return mid;
        }
        if (f_mid < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    residual = std::abs(f_mid);
    return mid;
}

} // namespace

DichotomizedGaussianModel calibrate_latent(const MomentTargets& targets, std::uint64_t seed,
                                           const std::vector<std::string>& feature_ids) {
    targets.validate();
    const Eigen::Index n = targets.size();

    DichotomizedGaussianModel model;
    model.seed = seed;
    model.latent_index.assign(static_cast<std::size_t>(n), -1);
    if (feature_ids.empty()) {
        for (Eigen::Index i = 0; i < n; ++i) model.feature_ids.push_back("f" + std::to_string(i + 1));
    } else {
        if (static_cast<Eigen::Index>(feature_ids.size()) != n) {
            throw ValidationError("calibrate: feature id count does not match targets");
        }
        model.feature_ids = feature_ids;
    }

    // Degenerate rows bypass the latent model entirely; the inverse CDF is
    // undefined at 0 and 1, and a constant preserves the moments exactly.
    std::vector<Eigen::Index> latent_rows;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (targets.mu(i) <= 0.0) {
            model.constant_rows.emplace_back(i, std::uint8_t{0});
        } else if (targets.mu(i) >= 1.0) {
            model.constant_rows.emplace_back(i, std::uint8_t{1});
        } else {
            model.latent_index[static_cast<std::size_t>(i)] = static_cast<int>(latent_rows.size());
            latent_rows.push_back(i);
        }
    }

    const Eigen::Index m = static_cast<Eigen::Index>(latent_rows.size());
    model.gamma.resize(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        model.gamma(a) = std_normal_quantile(targets.mu(latent_rows[static_cast<std::size_t>(a)]));
    }

    if (m == 0) {
        model.latent_corr.resize(0, 0);
        model.latent_factor.resize(0, 0);
        return model;
    }

    Matrix corr = Matrix::Identity(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index i = latent_rows[static_cast<std::size_t>(a)];
        for (Eigen::Index b = a + 1; b < m; ++b) {
            const Eigen::Index j = latent_rows[static_cast<std::size_t>(b)];
            const double mu_i = targets.mu(i);
            const double mu_j = targets.mu(j);
            const double target = mu_i * mu_j + targets.sigma(i, j);

            // The joint probability achievable by a latent pair spans the
            // window between the bisection endpoints; anything outside is
            // clamped and reported.
            const double gi = model.gamma(a);
            const double gj = model.gamma(b);
            const double reach_lo = bvn_cdf(gi, gj, -1.0 + 1e-9);
            const double reach_hi = bvn_cdf(gi, gj, 1.0 - 1e-9);

            double r;
            if (target >= reach_hi) {
                r = 1.0;
                if (target > reach_hi + 1e-12) {
                    model.diagnostics.clamps.push_back({i, j, target, reach_hi});
                }
            } else if (target <= reach_lo) {
                r = -1.0;
                if (target < reach_lo - 1e-12) {
                    model.diagnostics.clamps.push_back({i, j, target, reach_lo});
                }
            } else {
                double residual = 0.0;
                r = bisect_latent_corr(gi, gj, target, residual);
                if (residual > 1e-8) {
                    throw CalibrationError("calibrate: bisection for pair (" + std::to_string(i) +
                                           "," + std::to_string(j) + ") did not converge, residual " +
                                           std::to_string(residual));
                }
                model.diagnostics.max_bisection_residual =
                    std::max(model.diagnostics.max_bisection_residual, residual);
            }
            corr(a, b) = r;
            corr(b, a) = r;
        }
    }

    const CorrelationMatrix repaired = nearest_correlation(corr);
    model.diagnostics.max_repair_delta = (repaired.matrix() - corr).cwiseAbs().maxCoeff();
    model.latent_corr = repaired.matrix();
    model.latent_factor = cholesky_factor(repaired);
    return model;
}

PreferenceMatrix generate(const DichotomizedGaussianModel& model, Eigen::Index count) {
    if (count < 1) {
        throw ValidationError("generate: sample count must be at least 1");
    }
    const Eigen::Index n = model.feature_count();
    const Eigen::Index m = model.gamma.size();

    PreferenceMatrix out;
    out.feature_ids = model.feature_ids;
    out.entries.resize(n, count);

    for (const auto& [row, value] : model.constant_rows) {
        out.entries.row(row).setConstant(value);
    }

    // Latent rows in model order, so a whole chunk can be thresholded from
    // one matrix product.
    std::vector<Eigen::Index> latent_rows;
    latent_rows.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        if (model.latent_index[static_cast<std::size_t>(i)] >= 0) latent_rows.push_back(i);
    }

    if (m == 0) return out;

    constexpr Eigen::Index kChunk = 8192;
    Matrix u(m, kChunk);
    for (Eigen::Index start = 0, chunk_id = 0; start < count; start += kChunk, ++chunk_id) {
        const Eigen::Index cols = std::min(kChunk, count - start);
        Rng rng = Rng::derive(model.seed, static_cast<std::uint64_t>(chunk_id));
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < m; ++r) u(r, c) = rng.next_normal();
        }
        const Matrix z = model.latent_factor * u.leftCols(cols);
        for (Eigen::Index c = 0; c < cols; ++c) {
            for (Eigen::Index r = 0; r < m; ++r) {
                out.entries(latent_rows[static_cast<std::size_t>(r)], start + c) =
                    (model.gamma(r) + z(r, c)) > 0.0 ? 1 : 0;
            }
        }
    }
    return out;
}

FidelityReport validate_moments(const PreferenceMatrix& generated, const MomentTargets& targets,
                                const CalibrationDiagnostics* diagnostics) {
    if (generated.feature_count() != targets.size()) {
        throw ValidationError("fidelity: generated sample and targets have different dimensions");
    }
    const MomentTargets got = estimate_moments(generated);

    FidelityReport report;
    report.max_mean_deviation = (got.mu - targets.mu).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < targets.size(); ++i) {
        for (Eigen::Index j = 0; j < targets.size(); ++j) {
            const double dev = std::abs(got.sigma(i, j) - targets.sigma(i, j));
            report.max_cov_deviation_all = std::max(report.max_cov_deviation_all, dev);
            if (!diagnostics || !diagnostics->pair_clamped(i, j)) {
                report.max_cov_deviation = std::max(report.max_cov_deviation, dev);
            }
        }
    }
    if (diagnostics) {
        report.clamp_count = diagnostics->clamps.size();
        report.clamped_pairs = diagnostics->clamps;
    }
    return report;
}

std::string FidelityReport::to_json() const {
    nlohmann::json j;
    j["max_mean_deviation"] = max_mean_deviation;
    j["max_cov_deviation"] = max_cov_deviation;
    j["max_cov_deviation_all"] = max_cov_deviation_all;
    j["clamp_count"] = clamp_count;
    j["clamped_pairs"] = nlohmann::json::array();
    for (const auto& c : clamped_pairs) {
        j["clamped_pairs"].push_back(
            {{"i", c.i}, {"j", c.j}, {"target", c.target}, {"clamped", c.clamped}});
    }
    return j.dump(2);
}

} // namespace relplan
