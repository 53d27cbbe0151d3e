#pragma once

#include "adequacy/pmf.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace adequacy::gen {

/// Two-state unit: full capacity with probability `availability`, else nothing.
struct GeneratingUnit {
    std::string name;
    std::int64_t capacity_mw = 0;
    double availability = 1.0;
};

/// Throws DataError naming the unit when capacity < 1 MW or availability is outside (0, 1].
void validate(const GeneratingUnit& unit);

struct ConvolutionOptions {
    /// Per unit, bins are trimmed from each end while their cumulative mass stays
    /// below this. 500 units trim at most 1e-12 in total.
    double tail_tolerance = 1e-15;
};

struct ConvolutionStats {
    double trimmed_mass = 0.0;
};

/// Distribution of total available capacity for independent two-state units on a
/// 1 MW grid, renormalized after trimming. Deterministic for a given unit order.
/// Throws DataError on an empty fleet or an invalid unit.
[[nodiscard]] DiscretePmf convolve_fleet(std::span<const GeneratingUnit> units, const ConvolutionOptions& options = {},
                                         ConvolutionStats* stats = nullptr);

/// Reads `name,capacity_mw,availability`. Capacities must be integral MW.
[[nodiscard]] std::vector<GeneratingUnit> load_fleet(const std::filesystem::path& path);
[[nodiscard]] std::vector<GeneratingUnit> parse_fleet(std::istream& in, const std::string& source);
void write_fleet(std::ostream& out, std::span<const GeneratingUnit> units);

struct FleetSummary {
    std::size_t units = 0;
    std::int64_t total_capacity_mw = 0;
    double mean_available_mw = 0.0;
};

[[nodiscard]] FleetSummary summarize(std::span<const GeneratingUnit> units);

}  // namespace adequacy::gen
