#include "relplan/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace relplan {

FeatureCatalog::FeatureCatalog(std::vector<Feature> features) : features_(std::move(features)) {
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < features_.size(); ++i) {
        const Feature& f = features_[i];
        if (f.id.empty()) {
            throw ValidationError("catalog: feature " + std::to_string(i) + " has an empty id");
        }
        if (!seen.insert(f.id).second) {
            throw ValidationError("catalog: duplicate feature id '" + f.id + "'");
        }
        if (!std::isfinite(f.cost) || f.cost < 0.0) {
            throw ValidationError("catalog: feature '" + f.id + "' has invalid cost");
        }
        if (!std::isfinite(f.value) || f.value < 0.0) {
            throw ValidationError("catalog: feature '" + f.id + "' has invalid value");
        }
    }
}

std::vector<std::string> FeatureCatalog::ids() const {
    std::vector<std::string> out;
    out.reserve(features_.size());
    for (const Feature& f : features_) out.push_back(f.id);
    return out;
}

Eigen::VectorXd FeatureCatalog::costs() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(features_.size()));
    for (std::size_t i = 0; i < features_.size(); ++i) v(static_cast<Eigen::Index>(i)) = features_[i].cost;
    return v;
}

Eigen::VectorXd FeatureCatalog::values() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(features_.size()));
    for (std::size_t i = 0; i < features_.size(); ++i) v(static_cast<Eigen::Index>(i)) = features_[i].value;
    return v;
}

double FeatureCatalog::total_cost() const {
    double s = 0.0;
    for (const Feature& f : features_) s += f.cost;
    return s;
}

double FeatureCatalog::total_value() const {
    double s = 0.0;
    for (const Feature& f : features_) s += f.value;
    return s;
}

void PreferenceMatrix::validate() const {
    if (entries.rows() < 1 || entries.cols() < 1) {
        throw ValidationError("preferences: matrix must have at least one feature and one user");
    }
    if (static_cast<Eigen::Index>(feature_ids.size()) != entries.rows()) {
        throw ValidationError("preferences: " + std::to_string(feature_ids.size()) +
                              " feature ids for " + std::to_string(entries.rows()) + " rows");
    }
    for (Eigen::Index i = 0; i < entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < entries.cols(); ++j) {
            if (entries(i, j) > 1) {
                throw ValidationError("preferences: entry at feature row " + std::to_string(i) +
                                      ", user column " + std::to_string(j) + " is not 0/1");
            }
        }
    }
}

void PrecedenceMatrix::validate() const {
    const Eigen::Index n = entries.rows();
    if (entries.cols() != n) {
        throw ValidationError("precedence: matrix must be square");
    }
    if (static_cast<Eigen::Index>(feature_ids.size()) != n) {
        throw ValidationError("precedence: feature id count does not match matrix size");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (entries(i, i) != 0) {
            throw ValidationError("precedence: diagonal entry at row " + std::to_string(i) +
                                  " must be 0");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            if (entries(i, j) < -1 || entries(i, j) > 1) {
                throw ValidationError("precedence: entry at row " + std::to_string(i) +
                                      ", column " + std::to_string(j) + " outside {-1, 0, 1}");
            }
        }
    }
}

PrecedenceMatrix PrecedenceMatrix::zero(std::vector<std::string> ids) {
    PrecedenceMatrix p;
    const Eigen::Index n = static_cast<Eigen::Index>(ids.size());
    p.feature_ids = std::move(ids);
    p.entries = Eigen::MatrixXi::Zero(n, n);
    return p;
}

void InfluenceMatrix::validate() const {
    const Eigen::Index n = entries.rows();
    if (entries.cols() != n || n < 1) {
        throw ValidationError("influence: matrix must be square and non-empty");
    }
    if (static_cast<Eigen::Index>(feature_ids.size()) != n) {
        throw ValidationError("influence: feature id count does not match matrix size");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (entries(i, i) != 1.0) {
            throw ValidationError("influence: diagonal entry at row " + std::to_string(i) +
                                  " must be +1");
        }
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = entries(i, j);
            if (!std::isfinite(d) || d < -1.0 || d > 1.0) {
                throw ValidationError("influence: entry at row " + std::to_string(i) +
                                      ", column " + std::to_string(j) + " outside [-1, 1]");
            }
        }
    }
}

void EstimateSheet::validate() const {
    if (rows.empty()) {
        throw ValidationError("estimates: no features");
    }
    for (const Row& r : rows) {
        if (r.cost_estimates.empty() || r.value_estimates.empty()) {
            throw ValidationError("estimates: feature '" + r.id +
                                  "' needs at least one cost and one value estimate");
        }
        for (double e : r.cost_estimates) {
            if (!std::isfinite(e) || e < 0.0) {
                throw ValidationError("estimates: invalid cost estimate for '" + r.id + "'");
            }
        }
        for (double e : r.value_estimates) {
            if (!std::isfinite(e) || e < 0.0) {
                throw ValidationError("estimates: invalid value estimate for '" + r.id + "'");
            }
        }
    }
}

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<double> rescale_to_max(std::vector<double> medians, double scale_max,
                                   const char* what) {
    const double mx = *std::max_element(medians.begin(), medians.end());
    if (mx <= 0.0) {
        throw ValidationError(std::string("estimates: all ") + what +
                              " medians are zero, cannot rescale");
    }
    for (double& m : medians) m *= scale_max / mx;
    return medians;
}

} // namespace

FeatureCatalog aggregate_estimates(const EstimateSheet& sheet, double scale_max) {
    sheet.validate();
    if (!(scale_max > 0.0)) {
        throw ValidationError("estimates: scale_max must be positive");
    }
    std::vector<double> cost_medians, value_medians;
    cost_medians.reserve(sheet.rows.size());
    value_medians.reserve(sheet.rows.size());
    for (const EstimateSheet::Row& r : sheet.rows) {
        cost_medians.push_back(median(r.cost_estimates));
        value_medians.push_back(median(r.value_estimates));
    }
    cost_medians = rescale_to_max(std::move(cost_medians), scale_max, "cost");
    value_medians = rescale_to_max(std::move(value_medians), scale_max, "value");

    std::vector<Feature> features;
    features.reserve(sheet.rows.size());
    for (std::size_t i = 0; i < sheet.rows.size(); ++i) {
        features.push_back({sheet.rows[i].id, sheet.rows[i].id, cost_medians[i], value_medians[i]});
    }
    return FeatureCatalog(std::move(features));
}

} // namespace relplan
