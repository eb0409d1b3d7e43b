#pragma once

#include "relplan/model.hpp"
#include "relplan/numerics.hpp"

#include <cstdint>
#include <utility>
#include <vector>

// Exact solvers for the three release-planning programs:
//   BKP     maximize accumulated value under the budget.
//   BKP-PC  BKP plus precedence constraints for every dependency whose
//           strength exceeds beta: a positive dependency from f_j to f_k
//           forces x_j <= x_k, a negative one x_j <= 1 - x_k.
//   DA-SRP  maximize overall value, where each selected feature is
//           discounted by its strongest ignored-positive or
//           selected-negative dependency.
// All solvers are exact (branch and bound with a fractional-knapsack
// bound); a 2^n brute-force oracle is provided for verification.

namespace relplan {

enum class PlanModel { Bkp, BkpPc, Dasrp };

std::string to_string(PlanModel m);

struct PlanningInstance {
    FeatureCatalog catalog;
    InfluenceMatrix influence;
    double budget = 0.0;
    PlanModel model = PlanModel::Bkp;
    /// BKP-PC strength threshold; constraints apply where |d| > beta.
    double beta = 0.0;

    void validate() const;
    Eigen::Index size() const { return static_cast<Eigen::Index>(catalog.size()); }
};

struct PlanSolution {
    std::vector<std::uint8_t> x;
    /// Penalty per feature under the model's effective dependency set
    /// (BKP-PC masks dependencies at or below beta; see residual_penalty).
    Vector penalties;
    /// phi = 1 - penalties.
    Vector phi;
    /// BKP-PC only: penalties arising from the sub-threshold dependencies
    /// that were excluded from the constraint set.
    Vector residual_penalty;
    double av = 0.0;
    double ov = 0.0;
    /// Overall value of this selection under the full influence matrix;
    /// equals ov for BKP and DA-SRP. This is the apples-to-apples number
    /// used when comparing models.
    double adjusted_ov = 0.0;
    double cost_used = 0.0;
    std::uint64_t nodes_explored = 0;
    double wall_ms = 0.0;

    std::string selection_bits() const;
};

/// p_i = max over j != i of (|d_ij| + (1 - 2 x_j) d_ij) / 2: the strength
/// of the strongest positive dependency of f_i on an unselected feature
/// or negative dependency on a selected one.
Vector penalties(const InfluenceMatrix& influence, const std::vector<std::uint8_t>& x);

/// (AV, OV) of a selection: AV = sum of selected values, OV = sum of
/// selected values discounted by their penalties.
std::pair<double, double> overall_value(const FeatureCatalog& catalog,
                                        const InfluenceMatrix& influence,
                                        const std::vector<std::uint8_t>& x);

PlanSolution solve_bkp(const PlanningInstance& instance);
/// Dynamic program over costs scaled by 10; exact when every cost is a
/// multiple of 0.1 (throws SolverGuardError otherwise). Cross-checks the
/// branch-and-bound path.
PlanSolution solve_bkp_dp(const PlanningInstance& instance);
PlanSolution solve_bkp_pc(const PlanningInstance& instance);
PlanSolution solve_dasrp(const PlanningInstance& instance);

/// Dispatch on instance.model.
PlanSolution solve(const PlanningInstance& instance);

/// Enumerates all 2^n selections (n <= 25, SolverGuardError beyond) and
/// returns the objective-maximal feasible one under the instance's rules.
PlanSolution brute_force(const PlanningInstance& instance);

} // namespace relplan
