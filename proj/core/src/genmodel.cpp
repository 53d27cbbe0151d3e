#include "adequacy/genmodel.hpp"

#include "adequacy/csv.hpp"
#include "adequacy/error.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <ostream>

namespace adequacy::gen {

void validate(const GeneratingUnit& unit) {
    if (unit.capacity_mw < 1) {
        throw DataError(fmt::format("unit '{}': capacity must be at least 1 MW, got {}", unit.name, unit.capacity_mw));
    }
    if (!(unit.availability > 0.0 && unit.availability <= 1.0)) {
        throw DataError(fmt::format("unit '{}': availability {} outside (0, 1]", unit.name, unit.availability));
    }
}

DiscretePmf convolve_fleet(std::span<const GeneratingUnit> units, const ConvolutionOptions& options,
                           ConvolutionStats* stats) {
    if (units.empty()) throw DataError("cannot convolve an empty fleet");
    std::int64_t total = 0;
    for (const auto& u : units) {
        validate(u);
        total += u.capacity_mw;
    }

    // Dense grid over [0, total]; [lo, hi] is the live range after trimming.
    std::vector<double> p(static_cast<std::size_t>(total) + 1, 0.0);
    p[0] = 1.0;
    std::size_t lo = 0;
    std::size_t hi = 0;
    double trimmed = 0.0;

    for (const auto& unit : units) {
        const auto c = static_cast<std::size_t>(unit.capacity_mw);
        const double a = unit.availability;
        const double q = 1.0 - a;
        // In place, high to low: p'[k] = q p[k] + a p[k - c].
        const std::size_t new_hi = hi + c;
        for (std::size_t k = new_hi + 1; k-- > lo;) {
            const double shifted = (k >= lo + c && k - c <= hi) ? p[k - c] : 0.0;
            const double stay = k <= hi ? p[k] : 0.0;
            p[k] = q * stay + a * shifted;
        }
        hi = new_hi;

        double cut = 0.0;
        while (lo < hi && cut + p[lo] < options.tail_tolerance) {
            cut += p[lo];
            p[lo++] = 0.0;
        }
        double cut_top = 0.0;
        while (hi > lo && cut_top + p[hi] < options.tail_tolerance) {
            cut_top += p[hi];
            p[hi--] = 0.0;
        }
        trimmed += cut + cut_top;
    }

    DiscretePmf pmf;
    pmf.origin_mw = static_cast<std::int64_t>(lo);
    pmf.probabilities.assign(p.begin() + static_cast<std::ptrdiff_t>(lo), p.begin() + static_cast<std::ptrdiff_t>(hi) + 1);
    trim_zeros(pmf);
    normalize(pmf);
    if (stats) stats->trimmed_mass = trimmed;
    return pmf;
}

std::vector<GeneratingUnit> parse_fleet(std::istream& in, const std::string& source) {
    csv::Reader reader(in, source, {"name", "capacity_mw", "availability"});
    std::vector<GeneratingUnit> units;
    csv::Row row;
    while (reader.next(row)) {
        const auto where = reader.where(row);
        GeneratingUnit unit;
        unit.name = reader.field(row, 0);
        if (unit.name.empty()) throw DataError(where + "empty unit name");
        const double cap = csv::parse_double(reader.field(row, 1), where);
        if (!std::isfinite(cap) || cap != std::floor(cap)) {
            throw DataError(fmt::format("{}unit '{}': capacity {} is not a whole number of MW", where, unit.name,
                                        reader.field(row, 1)));
        }
        unit.capacity_mw = static_cast<std::int64_t>(cap);
        unit.availability = csv::parse_double(reader.field(row, 2), where);
        try {
            validate(unit);
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
        units.push_back(std::move(unit));
    }
    if (units.empty()) throw DataError(fmt::format("{}: fleet file lists no units", source));
    return units;
}

std::vector<GeneratingUnit> load_fleet(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open fleet file '{}'", path.string()));
    return parse_fleet(in, path.string());
}

void write_fleet(std::ostream& out, std::span<const GeneratingUnit> units) {
    out << "name,capacity_mw,availability\n";
    for (const auto& u : units) out << u.name << ',' << u.capacity_mw << ',' << csv::format_double(u.availability) << '\n';
}

FleetSummary summarize(std::span<const GeneratingUnit> units) {
    FleetSummary s;
    s.units = units.size();
    for (const auto& u : units) {
        s.total_capacity_mw += u.capacity_mw;
        s.mean_available_mw += static_cast<double>(u.capacity_mw) * u.availability;
    }
    return s;
}

}  // namespace adequacy::gen
