#pragma once

#include "relplan/model.hpp"

#include <Eigen/Dense>

// Mines signed causal strengths between features from binary co-selection
// data: count how often features are chosen together, then score each
// ordered pair with the difference of conditional selection probabilities.

namespace relplan {

/// Co-selection tallies over the user columns. lambda(i, j) for j < n is
/// the number of users selecting both f_i and f_j; lambda(i, j + n) the
/// number selecting f_i but not f_j. lambda(i, i) is the selection count
/// of f_i and lambda(i, i + n) is always zero.
struct CountMatrix {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> lambda;
    std::int64_t user_count = 0;

    Eigen::Index feature_count() const { return lambda.rows(); }
};

/// Signed conditional-probability differences, eta(i, j) in [-1, 1]:
/// the probability of selecting f_i given f_j minus the probability of
/// selecting f_i given not-f_j.
struct EellsMatrix {
    std::vector<std::string> feature_ids;
    Eigen::MatrixXd eta;

    Eigen::Index size() const { return eta.rows(); }
};

/// Tallies co-selection counts in one pass over the user columns.
CountMatrix count_cooccurrence(const PreferenceMatrix& m);

/// eta(i, j) = lambda(i, j) / lambda(j, j)
///           - lambda(i, j + n) / (k - lambda(j, j)),
/// where a 0/0 ratio is defined as 0: a feature selected by nobody
/// contributes no positive term, a feature selected by everybody no
/// negative term.
EellsMatrix eells_matrix(const CountMatrix& counts, const std::vector<std::string>& feature_ids);

/// Convenience: counts then scores.
EellsMatrix mine_eells(const PreferenceMatrix& m);

} // namespace relplan
