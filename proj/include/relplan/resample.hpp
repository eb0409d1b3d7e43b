#pragma once

#include "relplan/model.hpp"
#include "relplan/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

// Generates large synthetic preference samples that preserve the
// per-feature selection means and pairwise covariances of a seed survey.
// A latent multivariate Gaussian is calibrated so that thresholding it at
// zero reproduces the target first and second moments (the dichotomized
// Gaussian construction), then samples are drawn from it.

namespace relplan {

/// First and second moments of a binary preference sample: per-feature
/// selection means and the population covariance of the rows.
struct MomentTargets {
    Vector mu;
    Matrix sigma;

    Eigen::Index size() const { return mu.size(); }
    /// Checks mean range, symmetry, the Bernoulli variance identity on the
    /// diagonal and the Frechet covariance bounds.
    void validate() const;
};

/// Per-pair calibration notes: targets that had to be clamped to the
/// achievable range, the worst bisection residual, and how much the PSD
/// repair moved the assembled matrix.
struct CalibrationDiagnostics {
    struct Clamp {
        Eigen::Index i = 0;
        Eigen::Index j = 0;
        double target = 0.0;
        double clamped = 0.0;
    };
    std::vector<Clamp> clamps;
    double max_bisection_residual = 0.0;
    double max_repair_delta = 0.0;

    bool pair_clamped(Eigen::Index i, Eigen::Index j) const;
};

/// Calibrated latent model. Rows with a degenerate mean (0 or 1) are kept
/// out of the latent part and emitted as constants.
struct DichotomizedGaussianModel {
    std::vector<std::string> feature_ids;
    /// Latent threshold means of the calibrated rows.
    Vector gamma;
    /// Latent correlation of the calibrated rows (PSD after repair).
    Matrix latent_corr;
    /// Lower-triangular factor with L L^T = latent_corr.
    Matrix latent_factor;
    /// Per feature: index into the latent block, or -1 for constant rows.
    std::vector<int> latent_index;
    /// Constant rows and the value they emit.
    std::vector<std::pair<Eigen::Index, std::uint8_t>> constant_rows;
    std::uint64_t seed = 0;
    CalibrationDiagnostics diagnostics;

    Eigen::Index feature_count() const { return static_cast<Eigen::Index>(latent_index.size()); }
};

/// Comparison of a generated sample against its targets.
struct FidelityReport {
    double max_mean_deviation = 0.0;
    /// Worst covariance deviation over pairs that were not clamped.
    double max_cov_deviation = 0.0;
    /// Worst covariance deviation over all pairs.
    double max_cov_deviation_all = 0.0;
    std::size_t clamp_count = 0;
    std::vector<CalibrationDiagnostics::Clamp> clamped_pairs;

    std::string to_json() const;
};

/// Row means and population covariance (divide by k, so the diagonal is
/// exactly mu (1 - mu)).
MomentTargets estimate_moments(const PreferenceMatrix& m);

/// Solves, per non-degenerate pair, for the latent correlation whose
/// orthant probability matches the target joint selection probability
/// (bisection to 1e-8), clamping unachievable targets to the nearest
/// achievable value. The assembled matrix goes through PSD repair.
/// Throws CalibrationError if a bisection fails to converge.
DichotomizedGaussianModel calibrate_latent(const MomentTargets& targets,
                                           std::uint64_t seed = 0,
                                           const std::vector<std::string>& feature_ids = {});

/// Draws `count` columns: each is the 0/1 indicator of gamma + L u > 0
/// with u standard normal. Constant rows emit their constant. The stream
/// is chunked with sub-seeds derived from (seed, chunk), so the output is
/// bit-identical for a given (model, count) regardless of scheduling.
PreferenceMatrix generate(const DichotomizedGaussianModel& model, Eigen::Index count);

/// Compares the moments of a generated sample against the targets;
/// clamp diagnostics, when given, exclude clamped pairs from the headline
/// covariance deviation.
FidelityReport validate_moments(const PreferenceMatrix& generated, const MomentTargets& targets,
                                const CalibrationDiagnostics* diagnostics = nullptr);

} // namespace relplan
