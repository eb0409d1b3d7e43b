#include "relplan/sweep.hpp"

#include "relplan/io.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace relplan {

std::string ModelVariant::label() const {
    if (model == PlanModel::BkpPc) {
        std::ostringstream os;
        os << "bkppc(beta=" << beta << ")";
        return os.str();
    }
    return to_string(model);
}

double ov_normalizer(const FeatureCatalog& catalog, const InfluenceMatrix& influence) {
    std::vector<std::uint8_t> ones(catalog.size(), 1);
    return overall_value(catalog, influence, ones).second;
}

std::vector<double> default_budgets(const FeatureCatalog& catalog, double step) {
    if (!(step > 0.0)) {
        throw ValidationError("sweep: budget step must be positive");
    }
    std::vector<double> budgets;
    const double max = std::ceil(catalog.total_cost());
    for (double b = 1.0; b <= max + 1e-9; b += step) budgets.push_back(b);
    if (budgets.empty()) budgets.push_back(0.0);
    return budgets;
}

SweepResult sweep(const FeatureCatalog& catalog, const InfluenceMatrix& influence,
                  const std::vector<ModelVariant>& variants, const std::vector<double>& budgets,
                  unsigned threads) {
    if (budgets.empty() || variants.empty()) {
        throw ValidationError("sweep: needs at least one budget and one model");
    }
    SweepResult result;
    result.total_cost = catalog.total_cost();
    result.total_value = catalog.total_value();
    result.ov_denominator = ov_normalizer(catalog, influence);
    result.rows.resize(budgets.size() * variants.size());

    const std::size_t jobs = result.rows.size();
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t job = next.fetch_add(1);
            if (job >= jobs || failed.load()) return;
            const std::size_t bi = job / variants.size();
            const std::size_t vi = job % variants.size();
            const ModelVariant& variant = variants[vi];
            try {
                PlanningInstance inst;
                inst.catalog = catalog;
                inst.influence = influence;
                inst.budget = budgets[bi];
                inst.model = variant.model;
                inst.beta = variant.beta;
                const PlanSolution sol = solve(inst);

                SweepRow& row = result.rows[job];
                row.budget = budgets[bi];
                row.pct_budget = result.total_cost > 0.0 ? budgets[bi] / result.total_cost : 0.0;
                row.model = variant.model;
                if (variant.model == PlanModel::BkpPc) row.beta = variant.beta;
                row.av = sol.av;
                row.ov = sol.ov;
                row.adjusted_ov = sol.adjusted_ov;
                row.pct_av = result.total_value > 0.0 ? sol.av / result.total_value : 0.0;
                row.pct_ov =
                    result.ov_denominator > 0.0 ? sol.adjusted_ov / result.ov_denominator : 0.0;
                row.selection = sol.selection_bits();
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = std::string("sweep: budget ") + format_double(budgets[bi]) + ", model " +
                          variant.label() + ": " + e.what();
                failed.store(true);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (failed.load()) {
        throw SolverGuardError(failure);
    }
    return result;
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    out << "budget,pct_budget,model,beta,av,ov,adjusted_ov,pct_av,pct_ov,selection\n";
    for (const SweepRow& r : result.rows) {
        out << format_double(r.budget) << ',' << format_double(r.pct_budget) << ','
            << to_string(r.model) << ',' << (r.beta ? format_double(*r.beta) : std::string())
            << ',' << format_double(r.av) << ',' << format_double(r.ov) << ','
            << format_double(r.adjusted_ov) << ',' << format_double(r.pct_av) << ','
            << format_double(r.pct_ov) << ',' << r.selection << '\n';
    }
}

namespace {

struct Series {
    std::string label;
    std::string color;
    bool dashed = false;
    std::vector<std::pair<double, double>> points; // (pct_budget, pct)
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

} // namespace

void write_sweep_svg(const SweepResult& result, const std::filesystem::path& path) {
    // Group rows into one %AV and one %OV series per model variant,
    // keeping first-seen order.
    std::vector<std::string> keys;
    std::vector<Series> av_series, ov_series;
    for (const SweepRow& r : result.rows) {
        ModelVariant v{r.model, r.beta.value_or(0.0)};
        const std::string key = r.beta ? v.label() : to_string(r.model);
        std::size_t idx = keys.size();
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (keys[i] == key) {
                idx = i;
                break;
            }
        }
        if (idx == keys.size()) {
            keys.push_back(key);
            const std::string color = kPalette[idx % (sizeof(kPalette) / sizeof(kPalette[0]))];
            av_series.push_back({key + " %AV", color, false, {}});
            ov_series.push_back({key + " %OV", color, true, {}});
        }
        av_series[idx].points.emplace_back(r.pct_budget, r.pct_av);
        ov_series[idx].points.emplace_back(r.pct_budget, r.pct_ov);
    }

    double y_max = 1.0;
    for (const auto* group : {&av_series, &ov_series}) {
        for (const Series& s : *group) {
            for (const auto& [x, y] : s.points) y_max = std::max(y_max, y);
        }
    }

    const double width = 960.0, height = 540.0;
    const double ml = 60.0, mr = 180.0, mt = 30.0, mb = 50.0;
    const double pw = width - ml - mr, ph = height - mt - mb;
    auto sx = [&](double x) { return ml + x * pw; };
    auto sy = [&](double y) { return mt + ph - (y / y_max) * ph; };

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 960 540\" "
           "font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"960\" height=\"540\" fill=\"white\"/>\n";

    for (int t = 0; t <= 4; ++t) {
        const double fx = t / 4.0;
        out << "<line x1=\"" << svg_num(sx(fx)) << "\" y1=\"" << svg_num(mt) << "\" x2=\""
            << svg_num(sx(fx)) << "\" y2=\"" << svg_num(mt + ph)
            << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << svg_num(sx(fx)) << "\" y=\"" << svg_num(mt + ph + 18)
            << "\" text-anchor=\"middle\">" << svg_num(fx * 100) << "%</text>\n";
        const double fy = y_max * t / 4.0;
        out << "<line x1=\"" << svg_num(ml) << "\" y1=\"" << svg_num(sy(fy)) << "\" x2=\""
            << svg_num(ml + pw) << "\" y2=\"" << svg_num(sy(fy)) << "\" stroke=\"#dddddd\"/>\n";
        out << "<text x=\"" << svg_num(ml - 8) << "\" y=\"" << svg_num(sy(fy) + 4)
            << "\" text-anchor=\"end\">" << svg_num(fy * 100) << "%</text>\n";
    }
    out << "<text x=\"" << svg_num(ml + pw / 2) << "\" y=\"" << svg_num(height - 10)
        << "\" text-anchor=\"middle\">% budget</text>\n";

    double legend_y = mt + 10.0;
    for (const auto* group : {&av_series, &ov_series}) {
        for (const Series& s : *group) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\"";
            if (s.dashed) out << " stroke-dasharray=\"6 3\"";
            out << " stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.points) {
                out << svg_num(sx(x)) << ',' << svg_num(sy(y)) << ' ';
            }
            out << "\"/>\n";
            out << "<line x1=\"" << svg_num(ml + pw + 12) << "\" y1=\"" << svg_num(legend_y)
                << "\" x2=\"" << svg_num(ml + pw + 36) << "\" y2=\"" << svg_num(legend_y)
                << "\" stroke=\"" << s.color << "\""
                << (s.dashed ? " stroke-dasharray=\"6 3\"" : "") << " stroke-width=\"1.5\"/>\n";
            out << "<text x=\"" << svg_num(ml + pw + 42) << "\" y=\"" << svg_num(legend_y + 4)
                << "\">" << s.label << "</text>\n";
            legend_y += 18.0;
        }
    }
    out << "</svg>\n";
}

} // namespace relplan
