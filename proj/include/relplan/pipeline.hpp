#pragma once

#include "relplan/fdg.hpp"
#include "relplan/resample.hpp"
#include "relplan/sweep.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

// End-to-end experiment driver: mine dependencies from a survey
// (optionally resampled to a larger synthetic sample first), build the
// influence matrix through the configured membership function and
// precedence overrides, and sweep the planning models across budgets.
// Every intermediate artifact is persisted to the output directory.

namespace relplan {

struct PipelineConfig {
    MembershipFunction membership = MembershipFunction::identity();
    std::vector<double> beta_list = {0.0, 0.25, 0.5, 0.75};
    /// 0 disables resampling.
    Eigen::Index resample_count = 0;
    std::uint64_t seed = 0;
    bool transitive = false;
    std::optional<double> budget_min;
    std::optional<double> budget_max;
    double budget_step = 1.0;
    unsigned threads = 0;

    /// Reads the config.json schema {membership, beta_list, resample,
    /// transitive, budget}; missing fields keep their defaults.
    static PipelineConfig from_json_file(const std::filesystem::path& path);

    std::vector<ModelVariant> variants() const;
    std::vector<double> budgets(const FeatureCatalog& catalog) const;
};

struct PipelineResult {
    SweepResult sweep;
    std::optional<FidelityReport> fidelity;
    std::vector<std::filesystem::path> artifacts;
};

/// Runs mine -> (optional resample) -> membership -> precedence -> sweep,
/// writing eells.csv, influence.csv, sweep.csv, sweep.svg, metadata.json
/// (and synthetic.csv, fidelity.json when resampling) under out_dir.
/// Stage failures are rethrown with the stage name prepended.
PipelineResult run_end_to_end(const std::filesystem::path& prefs_path,
                              const std::filesystem::path& catalog_path,
                              const std::optional<std::filesystem::path>& precedence_path,
                              const PipelineConfig& config,
                              const std::filesystem::path& out_dir);

} // namespace relplan
