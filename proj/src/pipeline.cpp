#include "relplan/pipeline.hpp"

#include "relplan/io.hpp"
#include "relplan/mining.hpp"

#include <json.hpp>

#include <fstream>

namespace relplan {

namespace {

using nlohmann::json;

MembershipFunction membership_from_json(const json& j) {
    const std::string kind = j.value("kind", "identity");
    if (kind == "identity") return MembershipFunction::identity();
    if (kind == "thresholded_linear" || kind == "tl") {
        return MembershipFunction::thresholded_linear(j.at("lo").get<double>(),
                                                      j.at("hi").get<double>());
    }
    if (kind == "concave") {
        return MembershipFunction::concave(j.at("exponent").get<double>());
    }
    if (kind == "s_curve" || kind == "sc") {
        return MembershipFunction::s_curve(j.at("lo").get<double>(), j.at("hi").get<double>());
    }
    throw ValidationError("config: unknown membership kind '" + kind + "'");
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(name) + ": " + e.what());
    } catch (const CalibrationError& e) {
        throw CalibrationError(std::string(name) + ": " + e.what());
    } catch (const SolverGuardError& e) {
        throw SolverGuardError(std::string(name) + ": " + e.what());
    }
}

} // namespace

PipelineConfig PipelineConfig::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open config '" + path.string() + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }

    PipelineConfig cfg;
    if (doc.contains("membership")) cfg.membership = membership_from_json(doc["membership"]);
    if (doc.contains("beta_list")) cfg.beta_list = doc["beta_list"].get<std::vector<double>>();
    if (doc.contains("resample")) {
        cfg.resample_count = doc["resample"].value("count", 0);
        cfg.seed = doc["resample"].value("seed", std::uint64_t{0});
    }
    cfg.transitive = doc.value("transitive", false);
    if (doc.contains("budget")) {
        const json& b = doc["budget"];
        if (b.contains("min")) cfg.budget_min = b["min"].get<double>();
        if (b.contains("max")) cfg.budget_max = b["max"].get<double>();
        cfg.budget_step = b.value("step", 1.0);
    }
    return cfg;
}

std::vector<ModelVariant> PipelineConfig::variants() const {
    std::vector<ModelVariant> v;
    v.push_back({PlanModel::Bkp, 0.0});
    for (double beta : beta_list) v.push_back({PlanModel::BkpPc, beta});
    v.push_back({PlanModel::Dasrp, 0.0});
    return v;
}

std::vector<double> PipelineConfig::budgets(const FeatureCatalog& catalog) const {
    if (!(budget_step > 0.0)) {
        throw ValidationError("config: budget step must be positive");
    }
    const double lo = budget_min.value_or(1.0);
    const double hi = budget_max.value_or(std::ceil(catalog.total_cost()));
    std::vector<double> out;
    for (double b = lo; b <= hi + 1e-9; b += budget_step) out.push_back(b);
    if (out.empty()) {
        throw ValidationError("config: empty budget grid");
    }
    return out;
}

PipelineResult run_end_to_end(const std::filesystem::path& prefs_path,
                              const std::filesystem::path& catalog_path,
                              const std::optional<std::filesystem::path>& precedence_path,
                              const PipelineConfig& config,
                              const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    PipelineResult result;

    InstanceBundle bundle = stage("load", [&] {
        return load_and_validate(catalog_path, prefs_path, precedence_path);
    });

    PreferenceMatrix mined_from = bundle.preferences;
    if (config.resample_count > 0) {
        stage("resample", [&] {
            const MomentTargets targets = estimate_moments(bundle.preferences);
            const DichotomizedGaussianModel model =
                calibrate_latent(targets, config.seed, bundle.preferences.feature_ids);
            mined_from = generate(model, config.resample_count);
            result.fidelity = validate_moments(mined_from, targets, &model.diagnostics);
            save_preferences(mined_from, out_dir / "synthetic.csv");
            result.artifacts.push_back(out_dir / "synthetic.csv");
            std::ofstream rep(out_dir / "fidelity.json", std::ios::binary);
            rep << result.fidelity->to_json() << '\n';
            result.artifacts.push_back(out_dir / "fidelity.json");
            return 0;
        });
    }

    const EellsMatrix eells = stage("mine", [&] { return mine_eells(mined_from); });
    save_signed_matrix(eells.feature_ids, eells.eta, out_dir / "eells.csv");
    result.artifacts.push_back(out_dir / "eells.csv");

    InfluenceMatrix influence = stage("graph", [&] {
        InfluenceMatrix d = apply_membership(eells, config.membership);
        d = apply_precedence(d, bundle.precedence);
        if (config.transitive) d = transitive_influence(d);
        return d;
    });
    save_influence(influence, out_dir / "influence.csv");
    result.artifacts.push_back(out_dir / "influence.csv");

    result.sweep = stage("sweep", [&] {
        return sweep(bundle.catalog, influence, config.variants(), config.budgets(bundle.catalog),
                     config.threads);
    });
    write_sweep_csv(result.sweep, out_dir / "sweep.csv");
    result.artifacts.push_back(out_dir / "sweep.csv");
    write_sweep_svg(result.sweep, out_dir / "sweep.svg");
    result.artifacts.push_back(out_dir / "sweep.svg");

    json meta;
    meta["seed"] = config.seed;
    meta["resample_count"] = config.resample_count;
    meta["membership"] = config.membership.spec();
    meta["transitive"] = config.transitive;
    meta["beta_list"] = config.beta_list;
    meta["total_cost"] = result.sweep.total_cost;
    meta["total_value"] = result.sweep.total_value;
    // The %OV normalizer: overall value with every feature selected.
    meta["ov_denominator"] = result.sweep.ov_denominator;
    if (result.fidelity) {
        meta["resample_clamped_pairs"] = result.fidelity->clamp_count;
        meta["resample_max_mean_deviation"] = result.fidelity->max_mean_deviation;
        meta["resample_max_cov_deviation"] = result.fidelity->max_cov_deviation;
    }
    std::ofstream meta_out(out_dir / "metadata.json", std::ios::binary);
    meta_out << meta.dump(2) << '\n';
    result.artifacts.push_back(out_dir / "metadata.json");

    return result;
}

} // namespace relplan
