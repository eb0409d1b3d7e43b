#pragma once

#include "relplan/model.hpp"

#include <filesystem>
#include <optional>
#include <string>

// File formats of the toolkit:
//   catalog.json     array of {"id", "name", "cost", "value"}
//   preferences.csv  header "feature,u1,...,uk", one 0/1 row per feature
//   precedence.csv   header "feature,f1,...,fn", square, entries -1/0/1
//   influence.csv    same shape, real entries in [-1, 1], diagonal +1
//   eells.csv        same shape, real entries in [-1, 1]
//   estimates.json   array of {"id", "cost_estimates": [...], "value_estimates": [...]}
// Matrix writers emit shortest round-trip decimal, so parse -> serialize is
// idempotent byte-for-byte.

namespace relplan {

/// Shortest decimal string that parses back to exactly this double.
std::string format_double(double v);

FeatureCatalog load_catalog(const std::filesystem::path& path);
void save_catalog(const FeatureCatalog& catalog, const std::filesystem::path& path);

PreferenceMatrix load_preferences(const std::filesystem::path& path);
void save_preferences(const PreferenceMatrix& m, const std::filesystem::path& path);

PrecedenceMatrix load_precedence(const std::filesystem::path& path);
void save_precedence(const PrecedenceMatrix& m, const std::filesystem::path& path);

InfluenceMatrix load_influence(const std::filesystem::path& path);
void save_influence(const InfluenceMatrix& m, const std::filesystem::path& path);

/// Square signed matrix in the influence.csv layout without the
/// diagonal-is-one requirement (mining output).
struct SignedMatrixCsv {
    std::vector<std::string> feature_ids;
    Eigen::MatrixXd entries;
};
SignedMatrixCsv load_signed_matrix(const std::filesystem::path& path);
void save_signed_matrix(const std::vector<std::string>& ids, const Eigen::MatrixXd& entries,
                        const std::filesystem::path& path);

EstimateSheet load_estimates(const std::filesystem::path& path);

/// Loads and cross-validates an instance: matrix dimensions must match the
/// catalog and feature ids must align in catalog order. Optional sources
/// may be empty paths.
InstanceBundle load_and_validate(const std::filesystem::path& catalog_path,
                                 const std::optional<std::filesystem::path>& preferences_path,
                                 const std::optional<std::filesystem::path>& precedence_path = {},
                                 const std::optional<std::filesystem::path>& influence_path = {});

} // namespace relplan
