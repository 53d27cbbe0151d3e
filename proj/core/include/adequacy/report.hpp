#pragma once

#include "adequacy/uncertainty.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adequacy::report {

enum class TableFormat { csv, json, text };

/// "csv", "json", "txt"/"text". Throws ConfigError.
[[nodiscard]] TableFormat parse_format(std::string_view text);
/// File extension without the dot.
[[nodiscard]] std::string_view extension(TableFormat format);

struct TableRow {
    std::string label;
    std::vector<double> values;  ///< NaN marks a missing cell
    std::optional<std::vector<uncertainty::ConfidenceInterval>> ci;
};

/// Rows in display order; a row with intervals is followed by its CI row.
struct MetricTable {
    std::string title;
    std::string corner;  ///< header of the label column
    std::vector<std::string> columns;
    std::vector<TableRow> rows;

    [[nodiscard]] bool empty() const noexcept { return rows.empty(); }
};

/// text: two decimals, CI as "(lower,upper)".
/// csv:  shortest round-trip numbers; intervals as "<label> CI_lower",
///       "<label> CI_upper" and "<label> CI_level" rows; NA for missing cells.
/// json: {"title", "columns", "rows": [{"label", "values", "ci"}]}, null for missing cells.
/// An empty table produces the header alone and a warning.
void emit_table(const MetricTable& table, TableFormat format, std::ostream& out,
                const std::function<void(const std::string&)>& warn = {});

/// Writes to `path`. Throws ConfigError when the file cannot be written.
void emit_table(const MetricTable& table, TableFormat format, const std::filesystem::path& path,
                const std::function<void(const std::string&)>& warn = {});

/// Reads the csv layout back. Title is not stored in csv and comes back empty.
[[nodiscard]] MetricTable read_table_csv(std::istream& in, const std::string& source);

}  // namespace adequacy::report
