#include "adequacy/csv.hpp"

#include "adequacy/error.hpp"

#include <array>
#include <charconv>
#include <fmt/format.h>

namespace adequacy::csv {

std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        const auto piece = line.substr(start, pos == std::string_view::npos ? line.npos : pos - start);
        out.emplace_back(trim(piece));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

Reader::Reader(std::istream& in, std::string source, std::vector<std::string> required)
    : in_(in), source_(std::move(source)) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        auto t = trim(line);
        if (line_ == 1 && t.substr(0, 3) == "\xEF\xBB\xBF") t.remove_prefix(3);
        if (t.empty() || t.front() == '#') continue;
        const auto header = split(t);
        width_ = header.size();
        for (const auto& name : required) {
            std::size_t found = header.size();
            for (std::size_t i = 0; i < header.size(); ++i) {
                if (header[i] == name) {
                    found = i;
                    break;
                }
            }
            if (found == header.size()) {
                throw DataError(fmt::format("{}:{}: missing required column '{}'", source_, line_, name));
            }
            columns_.push_back(found);
        }
        return;
    }
    throw DataError(fmt::format("{}: empty file (header row required)", source_));
}

bool Reader::next(Row& row) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        row.line = line_;
        row.fields = split(t);
        if (row.fields.size() != width_) {
            throw DataError(fmt::format("{}:{}: malformed row: expected {} fields, found {}", source_, line_,
                                        width_, row.fields.size()));
        }
        return true;
    }
    return false;
}

const std::string& Reader::field(const Row& row, std::size_t index) const {
    return row.fields.at(columns_.at(index));
}

std::string Reader::where(const Row& row) const { return fmt::format("{}:{}: ", source_, row.line); }

double parse_double(std::string_view field, const std::string& context) {
    const auto t = trim(field);
    double value = 0.0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, value);
    if (t.empty() || ec != std::errc{} || ptr != end) {
        throw DataError(fmt::format("{}malformed number '{}'", context, field));
    }
    return value;
}

long long parse_integer(std::string_view field, const std::string& context) {
    const auto t = trim(field);
    long long value = 0;
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(t.data(), end, value);
    if (t.empty() || ec != std::errc{} || ptr != end) {
        throw DataError(fmt::format("{}malformed integer '{}'", context, field));
    }
    return value;
}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) return fmt::format("{}", value);
    return {buf.data(), ptr};
}

}  // namespace adequacy::csv
