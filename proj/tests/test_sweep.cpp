#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "relplan/io.hpp"
#include "relplan/pipeline.hpp"
#include "relplan/sweep.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace relplan;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "relplan_sweep_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

InstanceBundle pms2() {
    return load_and_validate(std::filesystem::path(RELPLAN_DATA_DIR) / "pms2_catalog.json",
                             std::nullopt, std::nullopt,
                             std::filesystem::path(RELPLAN_DATA_DIR) / "pms2_influence.csv");
}

const std::vector<ModelVariant> kVariants = {
    {PlanModel::Bkp, 0.0},    {PlanModel::BkpPc, 0.0},  {PlanModel::BkpPc, 0.25},
    {PlanModel::BkpPc, 0.5},  {PlanModel::BkpPc, 0.75}, {PlanModel::Dasrp, 0.0},
};

} // namespace

TEST_CASE("ov normalizer equals the all-selected overall value") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Identity(2, 2);
    d(0, 1) = -0.5;
    InfluenceMatrix infl;
    infl.feature_ids = {"f1", "f2"};
    infl.entries = d;
    const FeatureCatalog catalog({{"f1", "", 1, 10}, {"f2", "", 1, 4}});
    // p_1 = 0.5 against the selected f2, p_2 = 0: 5 + 4.
    CHECK(ov_normalizer(catalog, infl) == 9.0);
}

TEST_CASE("sweep rows are ordered and complete") {
    const InstanceBundle bundle = pms2();
    const std::vector<double> budgets = {10, 20, 30};
    const SweepResult result =
        sweep(bundle.catalog, bundle.influence, kVariants, budgets, 2);
    REQUIRE(result.rows.size() == budgets.size() * kVariants.size());
    std::size_t idx = 0;
    for (double b : budgets) {
        for (const ModelVariant& v : kVariants) {
            const SweepRow& row = result.rows[idx++];
            CHECK(row.budget == b);
            CHECK(row.model == v.model);
            if (v.model == PlanModel::BkpPc) {
                REQUIRE(row.beta.has_value());
                CHECK(*row.beta == v.beta);
            }
        }
    }
}

TEST_CASE("sweep results do not depend on the worker count") {
    const InstanceBundle bundle = pms2();
    const std::vector<double> budgets = {15, 55, 95};
    const SweepResult a = sweep(bundle.catalog, bundle.influence, kVariants, budgets, 1);
    const SweepResult b = sweep(bundle.catalog, bundle.influence, kVariants, budgets, 4);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].av == b.rows[i].av);
        CHECK(a.rows[i].ov == b.rows[i].ov);
        CHECK(a.rows[i].selection == b.rows[i].selection);
    }
}

TEST_CASE("per-budget dominance and normalization on the case study") {
    const InstanceBundle bundle = pms2();
    const std::vector<double> budgets = {5, 37, 80, 140, 200, 222};
    const SweepResult result = sweep(bundle.catalog, bundle.influence, kVariants, budgets);
    for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
        const SweepRow* bkp = nullptr;
        const SweepRow* dasrp = nullptr;
        std::vector<const SweepRow*> rows;
        for (std::size_t vi = 0; vi < kVariants.size(); ++vi) {
            const SweepRow& r = result.rows[bi * kVariants.size() + vi];
            rows.push_back(&r);
            if (r.model == PlanModel::Bkp) bkp = &r;
            if (r.model == PlanModel::Dasrp) dasrp = &r;
        }
        for (const SweepRow* r : rows) {
            CHECK(r->pct_av >= 0.0);
            CHECK(r->pct_av <= 1.0);
            CHECK(r->pct_ov >= 0.0);
            CHECK(r->pct_ov <= 1.0);
            CHECK(bkp->pct_av >= r->pct_av - 1e-12);
            CHECK(dasrp->pct_ov >= r->pct_ov - 1e-12);
            if (r->model == PlanModel::BkpPc) CHECK(r->ov == r->av);
        }
    }
}

TEST_CASE("each model's own objective is nondecreasing along the budget axis") {
    const InstanceBundle bundle = pms2();
    const std::vector<double> budgets = {10, 35, 60, 85, 110, 160, 222};
    const SweepResult result = sweep(bundle.catalog, bundle.influence, kVariants, budgets);
    for (std::size_t vi = 0; vi < kVariants.size(); ++vi) {
        double prev = -1.0;
        for (std::size_t bi = 0; bi < budgets.size(); ++bi) {
            const SweepRow& r = result.rows[bi * kVariants.size() + vi];
            const double own = r.model == PlanModel::Dasrp ? r.pct_ov : r.pct_av;
            CHECK(own >= prev - 1e-12);
            prev = own;
        }
    }
}

TEST_CASE("budget zero only affords zero-cost features") {
    const InstanceBundle bundle = pms2();
    const SweepResult result = sweep(bundle.catalog, bundle.influence, kVariants, {0.0});
    for (const SweepRow& r : result.rows) {
        for (std::size_t i = 0; i < r.selection.size(); ++i) {
            if (r.selection[i] == '1') CHECK(bundle.catalog[i].cost == 0.0);
        }
    }
}

TEST_CASE("csv writer is byte-stable") {
    const InstanceBundle bundle = pms2();
    const SweepResult result =
        sweep(bundle.catalog, bundle.influence, kVariants, {12, 42});
    const auto dir = temp_dir();
    write_sweep_csv(result, dir / "a.csv");
    write_sweep_csv(result, dir / "b.csv");
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(a.rfind("budget,pct_budget,model,beta,av,ov,adjusted_ov,pct_av,pct_ov,selection\n", 0) ==
          0);
    // one header + 12 rows
    CHECK(std::count(a.begin(), a.end(), '\n') == 13);
}

TEST_CASE("svg writer emits one AV and one OV series per variant") {
    const InstanceBundle bundle = pms2();
    const SweepResult result = sweep(bundle.catalog, bundle.influence, kVariants, {30, 60});
    const auto dir = temp_dir();
    write_sweep_svg(result, dir / "chart.svg");
    const std::string svg = slurp(dir / "chart.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("viewBox=\"0 0 960 540\"") != std::string::npos);
    std::size_t polylines = 0;
    for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) {
        ++polylines;
    }
    CHECK(polylines == 2 * kVariants.size());
}

TEST_CASE("default budget grid matches the case-study definition") {
    const InstanceBundle bundle = pms2();
    const std::vector<double> budgets = default_budgets(bundle.catalog);
    REQUIRE(budgets.size() == 222);
    CHECK(budgets.front() == 1.0);
    CHECK(budgets.back() == 222.0);
}

TEST_CASE("pipeline config parses the json schema") {
    const auto dir = temp_dir();
    std::ofstream out(dir / "config.json");
    out << R"({"membership": {"kind": "thresholded_linear", "lo": 0.16, "hi": 0.83},
               "beta_list": [0.1, 0.9],
               "resample": {"count": 500, "seed": 11},
               "transitive": true,
               "budget": {"min": 2, "max": 6, "step": 2}})";
    out.close();
    const PipelineConfig cfg = PipelineConfig::from_json_file(dir / "config.json");
    CHECK(cfg.membership.kind() == MembershipFunction::Kind::ThresholdedLinear);
    CHECK(cfg.beta_list == std::vector<double>{0.1, 0.9});
    CHECK(cfg.resample_count == 500);
    CHECK(cfg.seed == 11);
    CHECK(cfg.transitive);
    CHECK(cfg.budgets(FeatureCatalog({{"f1", "", 10, 1}})) == std::vector<double>{2, 4, 6});
    // bkp + two betas + dasrp
    CHECK(cfg.variants().size() == 4);
}

TEST_CASE("end-to-end pipeline persists every artifact deterministically") {
    const auto dir = temp_dir();
    save_preferences(oracles::make_prefs({{1, 1, 0, 0, 1, 0},
                                          {1, 1, 1, 0, 1, 0},
                                          {0, 1, 1, 1, 0, 0}}),
                     dir / "prefs.csv");
    save_catalog(FeatureCatalog({{"f1", "", 2, 6}, {"f2", "", 3, 8}, {"f3", "", 1, 4}}),
                 dir / "catalog.json");

    PipelineConfig cfg;
    cfg.membership = MembershipFunction::thresholded_linear(0.16, 0.83);
    cfg.resample_count = 2000;
    cfg.seed = 31;
    cfg.threads = 2;

    const PipelineResult r1 =
        run_end_to_end(dir / "prefs.csv", dir / "catalog.json", std::nullopt, cfg, dir / "out1");
    const PipelineResult r2 =
        run_end_to_end(dir / "prefs.csv", dir / "catalog.json", std::nullopt, cfg, dir / "out2");
    for (const char* name :
         {"synthetic.csv", "fidelity.json", "eells.csv", "influence.csv", "sweep.csv",
          "sweep.svg", "metadata.json"}) {
        CHECK(std::filesystem::exists(dir / "out1" / name));
        CHECK(slurp(dir / "out1" / name) == slurp(dir / "out2" / name));
    }
    CHECK(r1.fidelity.has_value());
    CHECK(r1.sweep.rows.size() == r2.sweep.rows.size());

    // The thresholded membership zeroes every influence entry whose mined
    // strength sat below the cutoff.
    const InfluenceMatrix infl = load_influence(dir / "out1" / "influence.csv");
    const SignedMatrixCsv eta = load_signed_matrix(dir / "out1" / "eells.csv");
    for (Eigen::Index i = 0; i < infl.size(); ++i) {
        for (Eigen::Index j = 0; j < infl.size(); ++j) {
            if (i != j && std::abs(eta.entries(i, j)) < 0.16) {
                CHECK(infl.entries(i, j) == 0.0);
            }
        }
    }
}

TEST_CASE("pipeline applies precedence overrides") {
    const auto dir = temp_dir();
    save_preferences(oracles::make_prefs({{1, 1, 0, 1}, {1, 0, 1, 0}}), dir / "p2.csv");
    save_catalog(FeatureCatalog({{"f1", "", 1, 2}, {"f2", "", 1, 3}}), dir / "cat.json");
    PrecedenceMatrix gamma = PrecedenceMatrix::zero({"f1", "f2"});
    gamma.entries(0, 1) = -1;
    save_precedence(gamma, dir / "gamma.csv");

    PipelineConfig cfg;
    cfg.budget_step = 1.0;
    run_end_to_end(dir / "p2.csv", dir / "cat.json", dir / "gamma.csv", cfg, dir / "out_prec");
    const InfluenceMatrix infl = load_influence(dir / "out_prec" / "influence.csv");
    CHECK(infl.entries(0, 1) == -1.0);
}

TEST_CASE("stage failures carry the stage name") {
    const auto dir = temp_dir();
    save_preferences(oracles::make_prefs({{1, 0}}), dir / "p1.csv");
    save_catalog(FeatureCatalog({{"f1", "", 1, 1}, {"f2", "", 1, 1}}), dir / "cat2.json");
    PipelineConfig cfg;
    try {
        run_end_to_end(dir / "p1.csv", dir / "cat2.json", std::nullopt, cfg, dir / "out_err");
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("load") == 0);
    }
}
