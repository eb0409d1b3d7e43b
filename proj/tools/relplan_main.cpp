// relplan: release-planning toolkit.
//
//   mine      compute signed dependency strengths from a survey
//   resample  generate a large synthetic survey with matching moments
//   graph     build the influence matrix from mined strengths
//   plan      solve one planning model at one budget
//   sweep     solve every (budget, model) pair and write CSV/SVG reports
//   run       the whole pipeline end to end
//
// Exit codes: 0 success, 2 validation error, 3 solver guard, 4 calibration
// failure.

#include "relplan/io.hpp"
#include "relplan/mining.hpp"
#include "relplan/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

namespace {

using namespace relplan;

PlanModel parse_model(const std::string& name) {
    if (name == "bkp") return PlanModel::Bkp;
    if (name == "bkppc") return PlanModel::BkpPc;
    if (name == "dasrp") return PlanModel::Dasrp;
    throw ValidationError("unknown model '" + name + "' (expected bkp | bkppc | dasrp)");
}

void write_plan_json(const PlanningInstance& inst, const PlanSolution& sol,
                     const std::filesystem::path& path) {
    nlohmann::json j;
    j["model"] = to_string(inst.model);
    if (inst.model == PlanModel::BkpPc) j["beta"] = inst.beta;
    j["budget"] = inst.budget;
    j["x"] = std::vector<int>(sol.x.begin(), sol.x.end());
    nlohmann::json selected = nlohmann::json::array();
    for (std::size_t i = 0; i < sol.x.size(); ++i) {
        if (sol.x[i]) selected.push_back(inst.catalog[i].id);
    }
    j["selection"] = selected;
    j["p"] = std::vector<double>(sol.penalties.data(), sol.penalties.data() + sol.penalties.size());
    j["phi"] = std::vector<double>(sol.phi.data(), sol.phi.data() + sol.phi.size());
    if (sol.residual_penalty.size() > 0) {
        j["residual_penalty"] = std::vector<double>(
            sol.residual_penalty.data(), sol.residual_penalty.data() + sol.residual_penalty.size());
    }
    j["av"] = sol.av;
    j["ov"] = sol.ov;
    j["adjusted_ov"] = sol.adjusted_ov;
    j["cost_used"] = sol.cost_used;
    // Wall time goes to stderr, not the file, which stays byte-deterministic.
    j["stats"] = {{"nodes_explored", sol.nodes_explored}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

int run_cli(int argc, char** argv) {
    CLI::App app{"relplan: dependency-aware release planning toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = "out";
    std::uint64_t seed = 0;
    std::string config_path;
    app.add_option("--out-dir", out_dir, "output directory for `run`");
    auto* seed_opt = app.add_option("--seed", seed, "random seed (resampling)");
    app.add_option("--config", config_path, "pipeline config.json");

    // aggregate
    auto* aggregate = app.add_subcommand(
        "aggregate", "turn stakeholder estimates into a cost/value catalog");
    std::string agg_estimates, agg_out;
    double agg_scale = 20.0;
    aggregate->add_option("--estimates", agg_estimates, "estimates.json")->required();
    aggregate->add_option("--scale-max", agg_scale, "rescale medians so the maximum equals this");
    aggregate->add_option("--out", agg_out, "output catalog.json")->required();

    // mine
    auto* mine = app.add_subcommand("mine", "mine signed dependency strengths from a survey");
    std::string mine_prefs, mine_out;
    mine->add_option("--prefs", mine_prefs, "preferences.csv")->required();
    mine->add_option("--out", mine_out, "output eells.csv")->required();

    // resample
    auto* resample = app.add_subcommand("resample", "generate a moment-matched synthetic survey");
    std::string rs_prefs, rs_out, rs_report;
    Eigen::Index rs_count = 0;
    resample->add_option("--prefs", rs_prefs, "preferences.csv")->required();
    resample->add_option("--count", rs_count, "number of synthetic users")->required();
    resample->add_option("--out", rs_out, "output synthetic.csv")->required();
    resample->add_option("--report", rs_report, "optional fidelity.json");

    // graph
    auto* graph = app.add_subcommand("graph", "build the influence matrix from mined strengths");
    std::string g_eells, g_membership = "identity", g_precedence, g_out;
    bool g_transitive = false;
    graph->add_option("--eells", g_eells, "eells.csv")->required();
    graph->add_option("--membership", g_membership,
                      "identity | tl:LO:HI | concave:P | sc:LO:HI");
    graph->add_option("--precedence", g_precedence, "optional precedence.csv");
    graph->add_flag("--transitive", g_transitive, "close influence over dependency paths");
    graph->add_option("--out", g_out, "output influence.csv")->required();

    // plan
    auto* plan = app.add_subcommand("plan", "solve one model at one budget");
    std::string p_catalog, p_influence, p_model = "bkp", p_out;
    double p_beta = 0.0, p_budget = 0.0;
    plan->add_option("--catalog", p_catalog, "catalog.json")->required();
    plan->add_option("--influence", p_influence, "influence.csv")->required();
    plan->add_option("--model", p_model, "bkp | bkppc | dasrp")->required();
    plan->add_option("--beta", p_beta, "BKP-PC strength threshold");
    plan->add_option("--budget", p_budget, "available budget")->required();
    plan->add_option("--out", p_out, "output plan.json")->required();

    // sweep
    auto* sweep_cmd = app.add_subcommand("sweep", "solve every (budget, model) pair");
    std::string s_catalog, s_influence, s_models = "bkp,bkppc,dasrp", s_betas = "0,0.25,0.5,0.75";
    std::string s_out, s_svg;
    double s_bmin = -1.0, s_bmax = -1.0, s_bstep = 1.0;
    unsigned s_threads = 0;
    sweep_cmd->add_option("--catalog", s_catalog, "catalog.json")->required();
    sweep_cmd->add_option("--influence", s_influence, "influence.csv")->required();
    sweep_cmd->add_option("--models", s_models, "comma list of bkp,bkppc,dasrp");
    sweep_cmd->add_option("--beta-list", s_betas, "comma list of BKP-PC thresholds");
    sweep_cmd->add_option("--budget-min", s_bmin, "first budget (default 1)");
    sweep_cmd->add_option("--budget-max", s_bmax, "last budget (default total cost)");
    sweep_cmd->add_option("--budget-step", s_bstep, "budget step (default 1)");
    sweep_cmd->add_option("--threads", s_threads, "worker threads (0 = hardware)");
    sweep_cmd->add_option("--out", s_out, "output sweep.csv")->required();
    sweep_cmd->add_option("--svg", s_svg, "optional sweep.svg");

    // run
    auto* run = app.add_subcommand("run", "mine/resample/graph/sweep end to end");
    std::string r_prefs, r_catalog, r_precedence, r_membership;
    Eigen::Index r_count = 0;
    bool r_transitive = false;
    run->add_option("--prefs", r_prefs, "preferences.csv")->required();
    run->add_option("--catalog", r_catalog, "catalog.json")->required();
    run->add_option("--precedence", r_precedence, "optional precedence.csv");
    run->add_option("--membership", r_membership, "membership spec, overrides config");
    run->add_option("--resample-count", r_count, "synthetic user count, overrides config");
    run->add_flag("--transitive", r_transitive, "close influence over paths");

    CLI11_PARSE(app, argc, argv);

    if (aggregate->parsed()) {
        const EstimateSheet sheet = load_estimates(agg_estimates);
        const FeatureCatalog catalog = aggregate_estimates(sheet, agg_scale);
        save_catalog(catalog, agg_out);
        std::cerr << "aggregated " << catalog.size() << " features -> " << agg_out << "\n";
    } else if (mine->parsed()) {
        const PreferenceMatrix prefs = load_preferences(mine_prefs);
        const EellsMatrix eta = mine_eells(prefs);
        save_signed_matrix(eta.feature_ids, eta.eta, mine_out);
        std::cerr << "mined " << eta.size() << "x" << eta.size() << " strengths from "
                  << prefs.user_count() << " users -> " << mine_out << "\n";
    } else if (resample->parsed()) {
        const PreferenceMatrix prefs = load_preferences(rs_prefs);
        const MomentTargets targets = estimate_moments(prefs);
        const DichotomizedGaussianModel model =
            calibrate_latent(targets, seed, prefs.feature_ids);
        const PreferenceMatrix synthetic = generate(model, rs_count);
        save_preferences(synthetic, rs_out);
        const FidelityReport report = validate_moments(synthetic, targets, &model.diagnostics);
        if (!rs_report.empty()) {
            nlohmann::json j = nlohmann::json::parse(report.to_json());
            j["seed"] = seed;
            j["count"] = rs_count;
            std::ofstream rep(rs_report, std::ios::binary);
            if (!rep) throw ValidationError("cannot write '" + rs_report + "'");
            rep << j.dump(2) << '\n';
        }
        std::cerr << "generated " << rs_count << " samples (seed " << seed
                  << "), max mean dev " << report.max_mean_deviation << ", max cov dev "
                  << report.max_cov_deviation << ", clamped pairs " << report.clamp_count
                  << " -> " << rs_out << "\n";
    } else if (graph->parsed()) {
        const SignedMatrixCsv eta_csv = load_signed_matrix(g_eells);
        EellsMatrix eta{eta_csv.feature_ids, eta_csv.entries};
        InfluenceMatrix d = apply_membership(eta, MembershipFunction::parse(g_membership));
        if (!g_precedence.empty()) {
            d = apply_precedence(d, load_precedence(g_precedence));
        }
        if (g_transitive) d = transitive_influence(d);
        save_influence(d, g_out);
        std::cerr << "influence matrix -> " << g_out << "\n";
    } else if (plan->parsed()) {
        PlanningInstance inst;
        const InstanceBundle bundle =
            load_and_validate(p_catalog, std::nullopt, std::nullopt, p_influence);
        inst.catalog = bundle.catalog;
        inst.influence = bundle.influence;
        inst.model = parse_model(p_model);
        inst.beta = p_beta;
        inst.budget = p_budget;
        const PlanSolution sol = solve(inst);
        write_plan_json(inst, sol, p_out);
        std::cerr << to_string(inst.model) << " budget " << p_budget << ": AV " << sol.av
                  << ", OV " << sol.ov << ", cost " << sol.cost_used << ", "
                  << sol.nodes_explored << " nodes in " << sol.wall_ms << " ms -> " << p_out
                  << "\n";
    } else if (sweep_cmd->parsed()) {
        const InstanceBundle bundle =
            load_and_validate(s_catalog, std::nullopt, std::nullopt, s_influence);
        std::vector<ModelVariant> variants;
        std::stringstream ss(s_models);
        std::string name;
        while (std::getline(ss, name, ',')) {
            if (name.empty()) continue;
            const PlanModel model = parse_model(name);
            if (model == PlanModel::BkpPc) {
                for (double beta : parse_double_list(s_betas)) {
                    variants.push_back({model, beta});
                }
            } else {
                variants.push_back({model, 0.0});
            }
        }
        std::vector<double> budgets;
        const double lo = s_bmin >= 0.0 ? s_bmin : 1.0;
        const double hi = s_bmax >= 0.0 ? s_bmax : std::ceil(bundle.catalog.total_cost());
        if (!(s_bstep > 0.0)) throw ValidationError("sweep: --budget-step must be positive");
        for (double b = lo; b <= hi + 1e-9; b += s_bstep) budgets.push_back(b);
        const SweepResult result =
            sweep(bundle.catalog, bundle.influence, variants, budgets, s_threads);
        write_sweep_csv(result, s_out);
        if (!s_svg.empty()) write_sweep_svg(result, s_svg);
        std::cerr << result.rows.size() << " sweep rows -> " << s_out << "\n";
    } else if (run->parsed()) {
        PipelineConfig cfg;
        if (!config_path.empty()) cfg = PipelineConfig::from_json_file(config_path);
        if (!r_membership.empty()) cfg.membership = MembershipFunction::parse(r_membership);
        if (r_count > 0) cfg.resample_count = r_count;
        if (seed_opt->count() > 0) cfg.seed = seed;
        if (r_transitive) cfg.transitive = true;
        std::optional<std::filesystem::path> precedence;
        if (!r_precedence.empty()) precedence = r_precedence;
        const PipelineResult result =
            run_end_to_end(r_prefs, r_catalog, precedence, cfg, out_dir);
        for (const auto& artifact : result.artifacts) {
            std::cerr << "wrote " << artifact.string() << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const relplan::SolverGuardError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const relplan::CalibrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const relplan::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
