#include "relplan/io.hpp"

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace relplan {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_double_cell(const std::string& cell, const std::filesystem::path& path,
                         std::size_t row, std::size_t col) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    if (begin < end && *begin == '+') ++begin; // from_chars rejects a leading plus
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end || begin == end) {
        throw ValidationError(path.string() + ": row " + std::to_string(row) + ", column " +
                              std::to_string(col) + ": cannot parse '" + cell + "' as a number");
    }
    return v;
}

struct CsvMatrix {
    std::vector<std::string> row_ids;
    Eigen::MatrixXd entries;
};

// Reads a labeled matrix CSV: first header cell is ignored, remaining
// header cells are column labels; each data row starts with its label.
CsvMatrix load_csv_matrix(const std::filesystem::path& path, bool square) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError(path.string() + ": empty file");
    }
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() < 2) {
        throw ValidationError(path.string() + ": header must name at least one column");
    }
    const std::size_t cols = header.size() - 1;

    std::vector<std::string> row_ids;
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != cols + 1) {
            throw ValidationError(path.string() + ": row " + std::to_string(row_no) + " has " +
                                  std::to_string(cells.size() - 1) + " cells, expected " +
                                  std::to_string(cols));
        }
        row_ids.push_back(cells[0]);
        std::vector<double> vals(cols);
        for (std::size_t c = 0; c < cols; ++c) {
            vals[c] = parse_double_cell(cells[c + 1], path, row_no, c + 1);
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) {
        throw ValidationError(path.string() + ": no data rows");
    }
    if (square) {
        if (rows.size() != cols) {
            throw ValidationError(path.string() + ": expected a square matrix, got " +
                                  std::to_string(rows.size()) + " rows x " + std::to_string(cols) +
                                  " columns");
        }
        for (std::size_t i = 0; i < cols; ++i) {
            if (header[i + 1] != row_ids[i]) {
                throw ValidationError(path.string() + ": column label '" + header[i + 1] +
                                      "' does not match row label '" + row_ids[i] +
                                      "' at position " + std::to_string(i + 1));
            }
        }
    }

    CsvMatrix out;
    out.row_ids = std::move(row_ids);
    out.entries.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols; ++c)
            out.entries(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return out;
}

void write_csv_matrix_header(std::ofstream& out, const std::vector<std::string>& col_ids) {
    out << "feature";
    for (const std::string& id : col_ids) out << ',' << id;
    out << '\n';
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

FeatureCatalog load_catalog(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw ValidationError(path.string() + ": expected a JSON array of features");
    }
    std::vector<Feature> features;
    features.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& f = doc[i];
        if (!f.is_object() || !f.contains("id") || !f.contains("cost") || !f.contains("value")) {
            throw ValidationError(path.string() + ": feature " + std::to_string(i) +
                                  " must be an object with id, cost, value");
        }
        Feature feat;
        feat.id = f.at("id").get<std::string>();
        feat.name = f.value("name", feat.id);
        feat.cost = f.at("cost").get<double>();
        feat.value = f.at("value").get<double>();
        features.push_back(std::move(feat));
    }
    return FeatureCatalog(std::move(features));
}

void save_catalog(const FeatureCatalog& catalog, const std::filesystem::path& path) {
    json doc = json::array();
    for (const Feature& f : catalog.features()) {
        doc.push_back({{"id", f.id}, {"name", f.name}, {"cost", f.cost}, {"value", f.value}});
    }
    open_out(path) << doc.dump(2) << '\n';
}

PreferenceMatrix load_preferences(const std::filesystem::path& path) {
    CsvMatrix csv = load_csv_matrix(path, /*square=*/false);
    PreferenceMatrix m;
    m.feature_ids = csv.row_ids;
    m.entries.resize(csv.entries.rows(), csv.entries.cols());
    for (Eigen::Index i = 0; i < csv.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < csv.entries.cols(); ++j) {
            const double v = csv.entries(i, j);
            if (v != 0.0 && v != 1.0) {
                throw ValidationError(path.string() + ": entry for feature '" +
                                      m.feature_ids[static_cast<std::size_t>(i)] + "', user column " +
                                      std::to_string(j + 1) + " is not 0/1");
            }
            m.entries(i, j) = static_cast<std::uint8_t>(v);
        }
    }
    m.validate();
    return m;
}

void save_preferences(const PreferenceMatrix& m, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    out << "feature";
    for (Eigen::Index j = 0; j < m.user_count(); ++j) out << ",u" << (j + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < m.feature_count(); ++i) {
        out << m.feature_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.user_count(); ++j) out << ',' << int(m.entries(i, j));
        out << '\n';
    }
}

PrecedenceMatrix load_precedence(const std::filesystem::path& path) {
    CsvMatrix csv = load_csv_matrix(path, /*square=*/true);
    PrecedenceMatrix m;
    m.feature_ids = csv.row_ids;
    m.entries.resize(csv.entries.rows(), csv.entries.cols());
    for (Eigen::Index i = 0; i < csv.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < csv.entries.cols(); ++j) {
            const double v = csv.entries(i, j);
            if (v != -1.0 && v != 0.0 && v != 1.0) {
                throw ValidationError(path.string() + ": entry at row " + std::to_string(i + 1) +
                                      ", column " + std::to_string(j + 1) +
                                      " outside {-1, 0, 1}");
            }
            m.entries(i, j) = static_cast<int>(v);
        }
    }
    m.validate();
    return m;
}

void save_precedence(const PrecedenceMatrix& m, const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    write_csv_matrix_header(out, m.feature_ids);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        out << m.feature_ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m.size(); ++j) out << ',' << m.entries(i, j);
        out << '\n';
    }
}

InfluenceMatrix load_influence(const std::filesystem::path& path) {
    CsvMatrix csv = load_csv_matrix(path, /*square=*/true);
    InfluenceMatrix m;
    m.feature_ids = std::move(csv.row_ids);
    m.entries = std::move(csv.entries);
    try {
        m.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return m;
}

void save_influence(const InfluenceMatrix& m, const std::filesystem::path& path) {
    save_signed_matrix(m.feature_ids, m.entries, path);
}

SignedMatrixCsv load_signed_matrix(const std::filesystem::path& path) {
    CsvMatrix csv = load_csv_matrix(path, /*square=*/true);
    for (Eigen::Index i = 0; i < csv.entries.rows(); ++i) {
        for (Eigen::Index j = 0; j < csv.entries.cols(); ++j) {
            const double v = csv.entries(i, j);
            if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
                throw ValidationError(path.string() + ": entry at row " + std::to_string(i + 1) +
                                      ", column " + std::to_string(j + 1) + " outside [-1, 1]");
            }
        }
    }
    return SignedMatrixCsv{std::move(csv.row_ids), std::move(csv.entries)};
}

void save_signed_matrix(const std::vector<std::string>& ids, const Eigen::MatrixXd& entries,
                        const std::filesystem::path& path) {
    std::ofstream out = open_out(path);
    write_csv_matrix_header(out, ids);
    for (Eigen::Index i = 0; i < entries.rows(); ++i) {
        out << ids[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < entries.cols(); ++j) {
            out << ',' << format_double(entries(i, j));
        }
        out << '\n';
    }
}

EstimateSheet load_estimates(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw ValidationError(path.string() + ": expected a JSON array");
    }
    EstimateSheet sheet;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const json& r = doc[i];
        if (!r.is_object() || !r.contains("id") || !r.contains("cost_estimates") ||
            !r.contains("value_estimates")) {
            throw ValidationError(path.string() + ": entry " + std::to_string(i) +
                                  " must have id, cost_estimates, value_estimates");
        }
        EstimateSheet::Row row;
        row.id = r.at("id").get<std::string>();
        row.cost_estimates = r.at("cost_estimates").get<std::vector<double>>();
        row.value_estimates = r.at("value_estimates").get<std::vector<double>>();
        sheet.rows.push_back(std::move(row));
    }
    sheet.validate();
    return sheet;
}

namespace {

void check_id_alignment(const FeatureCatalog& catalog, const std::vector<std::string>& ids,
                        const char* what) {
    if (ids.size() != catalog.size()) {
        throw ValidationError(std::string(what) + ": has " + std::to_string(ids.size()) +
                              " features, catalog has " + std::to_string(catalog.size()));
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] != catalog[i].id) {
            throw ValidationError(std::string(what) + ": feature id '" + ids[i] + "' at row " +
                                  std::to_string(i + 1) + " does not match catalog id '" +
                                  catalog[i].id + "'");
        }
    }
}

} // namespace

InstanceBundle load_and_validate(const std::filesystem::path& catalog_path,
                                 const std::optional<std::filesystem::path>& preferences_path,
                                 const std::optional<std::filesystem::path>& precedence_path,
                                 const std::optional<std::filesystem::path>& influence_path) {
    InstanceBundle bundle;
    bundle.catalog = load_catalog(catalog_path);
    if (preferences_path) {
        bundle.preferences = load_preferences(*preferences_path);
        check_id_alignment(bundle.catalog, bundle.preferences.feature_ids, "preferences");
        bundle.has_preferences = true;
    }
    if (precedence_path) {
        bundle.precedence = load_precedence(*precedence_path);
        check_id_alignment(bundle.catalog, bundle.precedence.feature_ids, "precedence");
        bundle.has_precedence = true;
    } else {
        bundle.precedence = PrecedenceMatrix::zero(bundle.catalog.ids());
    }
    if (influence_path) {
        bundle.influence = load_influence(*influence_path);
        check_id_alignment(bundle.catalog, bundle.influence.feature_ids, "influence");
        bundle.has_influence = true;
    }
    return bundle;
}

} // namespace relplan
