#pragma once

#include "relplan/solve.hpp"

#include <filesystem>
#include <optional>
#include <vector>

// Budget-sweep experiment harness: solves every (budget, model) pair
// exactly, normalizes the objectives, and emits CSV plus an optional SVG
// comparison chart.

namespace relplan {

/// One model to run in a sweep; beta applies to BKP-PC only.
struct ModelVariant {
    PlanModel model = PlanModel::Bkp;
    double beta = 0.0;

    std::string label() const;
};

struct SweepRow {
    double budget = 0.0;
    double pct_budget = 0.0;
    PlanModel model = PlanModel::Bkp;
    std::optional<double> beta;
    double av = 0.0;
    /// The model's reported overall value (equals av for BKP-PC rows).
    double ov = 0.0;
    /// Overall value of the row's selection under the full influence
    /// matrix; the number used for cross-model %OV comparison.
    double adjusted_ov = 0.0;
    double pct_av = 0.0;
    double pct_ov = 0.0;
    std::string selection;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double total_cost = 0.0;
    double total_value = 0.0;
    /// Fixed %OV normalizer: the overall value with every feature
    /// selected, computed once per instance.
    double ov_denominator = 0.0;
};

/// Sum of (1 - p_i) v_i with every feature selected: the constant %OV
/// normalizer of an instance.
double ov_normalizer(const FeatureCatalog& catalog, const InfluenceMatrix& influence);

/// The default integer budget grid 1..ceil(total cost).
std::vector<double> default_budgets(const FeatureCatalog& catalog, double step = 1.0);

/// Solves every (budget, variant) pair exactly. Budget points are solved
/// by a worker pool; rows come out ordered by (budget, variant) no matter
/// how the work was scheduled. threads = 0 picks the hardware default.
SweepResult sweep(const FeatureCatalog& catalog, const InfluenceMatrix& influence,
                  const std::vector<ModelVariant>& variants, const std::vector<double>& budgets,
                  unsigned threads = 0);

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

/// 960x540 polyline chart: %AV and %OV per model against %budget.
void write_sweep_svg(const SweepResult& result, const std::filesystem::path& path);

} // namespace relplan
