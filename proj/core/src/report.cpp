#include "adequacy/report.hpp"

#include "adequacy/csv.hpp"
#include "adequacy/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace adequacy::report {
namespace {

constexpr std::string_view kLower = " CI_lower";
constexpr std::string_view kUpper = " CI_upper";
constexpr std::string_view kLevel = " CI_level";

std::string csv_number(double v) { return std::isnan(v) ? std::string("NA") : csv::format_double(v); }

std::string text_number(double v) { return std::isnan(v) ? std::string("NA") : fmt::format("{:.2f}", v); }

void write_csv(const MetricTable& t, std::ostream& out) {
    out << (t.corner.empty() ? "row" : t.corner);
    for (const auto& c : t.columns) out << ',' << c;
    out << '\n';
    const auto line = [&](const std::string& label, auto&& cell) {
        out << label;
        for (std::size_t j = 0; j < t.columns.size(); ++j) out << ',' << cell(j);
        out << '\n';
    };
    for (const auto& row : t.rows) {
        line(row.label, [&](std::size_t j) { return csv_number(row.values[j]); });
        if (!row.ci) continue;
        const auto& ci = *row.ci;
        line(row.label + std::string(kLower), [&](std::size_t j) { return csv_number(ci[j].lower); });
        line(row.label + std::string(kUpper), [&](std::size_t j) { return csv_number(ci[j].upper); });
        line(row.label + std::string(kLevel), [&](std::size_t j) { return csv_number(ci[j].level); });
    }
}

void write_text(const MetricTable& t, std::ostream& out) {
    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{t.corner};
    header.insert(header.end(), t.columns.begin(), t.columns.end());
    grid.push_back(std::move(header));
    for (const auto& row : t.rows) {
        std::vector<std::string> cells{row.label};
        for (double v : row.values) cells.push_back(text_number(v));
        grid.push_back(std::move(cells));
        if (row.ci) {
            const double level = row.ci->empty() ? 0.95 : row.ci->front().level;
            std::vector<std::string> ci_cells{fmt::format("{:g}% CI", level * 100.0)};
            for (const auto& ci : *row.ci) {
                ci_cells.push_back(std::isnan(ci.lower) ? std::string("NA")
                                                        : fmt::format("({:.2f},{:.2f})", ci.lower, ci.upper));
            }
            grid.push_back(std::move(ci_cells));
        }
    }
    std::vector<std::size_t> width(t.columns.size() + 1, 0);
    for (const auto& r : grid) {
        for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
    }
    for (const auto& r : grid) {
        std::string line = fmt::format("{:<{}}", r[0], width[0]);
        for (std::size_t j = 1; j < r.size(); ++j) line += fmt::format("  {:>{}}", r[j], width[j]);
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out << line << '\n';
    }
}

nlohmann::ordered_json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

void write_json(const MetricTable& t, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["title"] = t.title;
    doc["corner"] = t.corner;
    doc["columns"] = t.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json r;
        r["label"] = row.label;
        auto values = nlohmann::ordered_json::array();
        for (double v : row.values) values.push_back(json_number(v));
        r["values"] = std::move(values);
        if (row.ci) {
            auto ci = nlohmann::ordered_json::array();
            for (const auto& c : *row.ci) {
                ci.push_back({{"lower", json_number(c.lower)}, {"upper", json_number(c.upper)}, {"level", c.level}});
            }
            r["ci"] = std::move(ci);
        }
        rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << '\n';
}

void check_shape(const MetricTable& t) {
    for (const auto& row : t.rows) {
        if (row.values.size() != t.columns.size() || (row.ci && row.ci->size() != t.columns.size())) {
            throw ConfigError(fmt::format("table row '{}' does not match the {} columns", row.label, t.columns.size()));
        }
    }
}

}  // namespace

TableFormat parse_format(std::string_view text) {
    if (text == "csv") return TableFormat::csv;
    if (text == "json") return TableFormat::json;
    if (text == "txt" || text == "text") return TableFormat::text;
    throw ConfigError(fmt::format("unknown table format '{}'", text));
}

std::string_view extension(TableFormat format) {
    switch (format) {
        case TableFormat::csv: return "csv";
        case TableFormat::json: return "json";
        case TableFormat::text: return "txt";
    }
    return "txt";
}

void emit_table(const MetricTable& table, TableFormat format, std::ostream& out,
                const std::function<void(const std::string&)>& warn) {
    check_shape(table);
    if (table.empty() && warn) warn(fmt::format("table '{}' has no rows; writing header only", table.title));
    switch (format) {
        case TableFormat::csv: write_csv(table, out); break;
        case TableFormat::json: write_json(table, out); break;
        case TableFormat::text: write_text(table, out); break;
    }
}

void emit_table(const MetricTable& table, TableFormat format, const std::filesystem::path& path,
                const std::function<void(const std::string&)>& warn) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    emit_table(table, format, out, warn);
    out.flush();
    if (!out) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
}

MetricTable read_table_csv(std::istream& in, const std::string& source) {
    MetricTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    const auto number = [&](const std::string& field) {
        if (field == "NA") return std::numeric_limits<double>::quiet_NaN();
        return csv::parse_double(field, fmt::format("{}:{}", source, line_no));
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split(line);
        if (!have_header) {
            t.corner = fields.front();
            t.columns.assign(fields.begin() + 1, fields.end());
            have_header = true;
            continue;
        }
        if (fields.size() != t.columns.size() + 1) {
            throw DataError(fmt::format("{}:{}: expected {} fields, found {}", source, line_no, t.columns.size() + 1,
                                        fields.size()));
        }
        std::vector<double> values;
        for (std::size_t j = 1; j < fields.size(); ++j) values.push_back(number(fields[j]));
        const std::string& label = fields.front();
        const auto ends_with = [&](std::string_view suffix) {
            return label.size() > suffix.size() && std::string_view(label).substr(label.size() - suffix.size()) == suffix;
        };
        const bool is_ci = ends_with(kLower) || ends_with(kUpper) || ends_with(kLevel);
        if (!is_ci) {
            t.rows.push_back({label, std::move(values), std::nullopt});
            continue;
        }
        if (t.rows.empty()) throw DataError(fmt::format("{}:{}: interval row without a metric row", source, line_no));
        auto& row = t.rows.back();
        if (!row.ci) row.ci.emplace(t.columns.size());
        for (std::size_t j = 0; j < values.size(); ++j) {
            auto& ci = (*row.ci)[j];
            if (ends_with(kLower)) ci.lower = values[j];
            else if (ends_with(kUpper)) ci.upper = values[j];
            else ci.level = values[j];
        }
    }
    if (!have_header) throw DataError(fmt::format("{}: missing header", source));
    return t;
}

}  // namespace adequacy::report
