#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace adequacy::csv {

/// One data row with its 1-based line number in the source.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Minimal reader for plain comma-separated files: header row required, no
/// quoting, surrounding whitespace trimmed, blank lines and `#` comments skipped.
class Reader {
public:
    /// Reads the header and maps `required` columns to positions.
    /// Throws DataError naming the first missing column.
    Reader(std::istream& in, std::string source, std::vector<std::string> required);

    /// Next row with exactly the header's field count; false at end of input.
    bool next(Row& row);

    /// Field of `row` for required column `index` (position in `required`).
    [[nodiscard]] const std::string& field(const Row& row, std::size_t index) const;

    [[nodiscard]] const std::string& source() const noexcept { return source_; }

    /// Error message prefix "<source>:<line>: ".
    [[nodiscard]] std::string where(const Row& row) const;

private:
    std::istream& in_;
    std::string source_;
    std::size_t line_ = 0;
    std::size_t width_ = 0;
    std::vector<std::size_t> columns_;
};

[[nodiscard]] std::vector<std::string> split(std::string_view line, char sep = ',');
[[nodiscard]] std::string_view trim(std::string_view s);

/// Strict number parsing (whole field must be consumed). Throws DataError with `context`.
[[nodiscard]] double parse_double(std::string_view field, const std::string& context);
[[nodiscard]] long long parse_integer(std::string_view field, const std::string& context);

/// Shortest decimal representation that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

}  // namespace adequacy::csv
