#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Core domain types for release planning: the feature catalog, the binary
// user-preference matrix, the stakeholder precedence matrix, and the signed
// influence matrix of value-related dependencies. All types are immutable
// after validation and safe to share across threads.

namespace relplan {

/// Input failed a format or cross-invariant check. The CLI maps this to
/// exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A solver refused to run (e.g. brute force beyond its size guard).
/// CLI exit code 3.
class SolverGuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Latent-model calibration failed to converge. CLI exit code 4.
class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Feature {
    std::string id;
    std::string name;
    double cost = 0.0;
    double value = 0.0;
};

/// Ordered feature list; the order defines row indices of every matrix.
class FeatureCatalog {
public:
    FeatureCatalog() = default;
    /// Validates id uniqueness and non-negative finite cost/value.
    explicit FeatureCatalog(std::vector<Feature> features);

    std::size_t size() const { return features_.size(); }
    const Feature& operator[](std::size_t i) const { return features_[i]; }
    const std::vector<Feature>& features() const { return features_; }
    std::vector<std::string> ids() const;

    Eigen::VectorXd costs() const;
    Eigen::VectorXd values() const;
    double total_cost() const;
    double total_value() const;

private:
    std::vector<Feature> features_;
};

/// n x k binary matrix; rows are features, columns are users.
struct PreferenceMatrix {
    std::vector<std::string> feature_ids;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> entries;

    Eigen::Index feature_count() const { return entries.rows(); }
    Eigen::Index user_count() const { return entries.cols(); }
    /// Checks entries are 0/1, dimensions positive, ids match the rows.
    void validate() const;
};

/// n x n matrix over {-1, 0, +1} of stakeholder-declared precede
/// relations; gamma(i, j) = +1 means f_j precedes f_i.
struct PrecedenceMatrix {
    std::vector<std::string> feature_ids;
    Eigen::MatrixXi entries;

    Eigen::Index size() const { return entries.rows(); }
    void validate() const;

    static PrecedenceMatrix zero(std::vector<std::string> ids);
};

/// Signed strengths of value-related dependencies, d(i, j) in [-1, 1]:
/// the sign is the dependency quality, the magnitude its strength, and
/// d(i, j) = 0 encodes an unspecified quality. Row i reads "the value of
/// f_i depends on f_j like this". Diagonal entries are +1.
struct InfluenceMatrix {
    std::vector<std::string> feature_ids;
    Eigen::MatrixXd entries;

    Eigen::Index size() const { return entries.rows(); }
    void validate() const;
};

/// Raw stakeholder estimates, at least one per feature for cost and value.
struct EstimateSheet {
    struct Row {
        std::string id;
        std::vector<double> cost_estimates;
        std::vector<double> value_estimates;
    };
    std::vector<Row> rows;

    void validate() const;
};

/// Per feature, the median of the raw estimates, then each of the two
/// median vectors rescaled linearly so its maximum equals scale_max.
/// Throws ValidationError when a median vector is all zero (the scale
/// would be degenerate).
FeatureCatalog aggregate_estimates(const EstimateSheet& sheet, double scale_max = 20.0);

/// Catalog plus whichever matrices were provided, cross-validated.
struct InstanceBundle {
    FeatureCatalog catalog;
    PreferenceMatrix preferences;
    PrecedenceMatrix precedence;
    InfluenceMatrix influence;
    bool has_preferences = false;
    bool has_precedence = false;
    bool has_influence = false;
};

} // namespace relplan
