#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adequacy::ingest {

/// Calendar hour in UTC.
using Timestamp = std::chrono::sys_seconds;

struct HourlyObservation {
    Timestamp timestamp;
    double demand_mw = 0.0;
    double wind_mw = 0.0;
};

/// "last Sunday in October", "first Monday in November", ...
struct AnchorRule {
    bool last = true;
    std::chrono::weekday weekday = std::chrono::Sunday;
    std::chrono::month month = std::chrono::October;

    /// Throws ConfigError on unrecognized text.
    static AnchorRule parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::chrono::sys_days in_year(int year) const;
};

/// A peak season: `weeks` whole weeks starting at 00:00 UTC on the anchor day.
struct SeasonWindow {
    int weeks = 21;
    AnchorRule anchor;

    [[nodiscard]] std::size_t hours() const noexcept { return static_cast<std::size_t>(weeks) * 168; }
    [[nodiscard]] Timestamp start(int year) const;
    [[nodiscard]] Timestamp end(int year) const;  // exclusive
};

/// One historical season's hourly (demand, wind) trace, forward-mapped to the
/// study season by `rescale_factor`.
struct SeasonTrace {
    std::string season_label;
    std::vector<HourlyObservation> hours;
    double rescale_factor = 1.0;

    [[nodiscard]] std::vector<double> demand() const;
    [[nodiscard]] std::vector<double> wind() const;
    /// d_t - w_t for every hour.
    [[nodiscard]] std::vector<double> demand_net_of_wind() const;
};

using WarningSink = std::function<void(const std::string&)>;

struct LoadOptions {
    SeasonWindow window;
    /// Drop calendar days with missing hours instead of failing.
    bool allow_gaps = false;
    /// Installed wind capacity; exceeding it triggers a warning. <= 0 disables the check.
    double wind_capacity_mw = 0.0;
};

/// Reads `season,timestamp,demand_mw,wind_mw` rows. One trace per season label,
/// ordered by label, each restricted to its season window.
///
/// The window year is the four-digit prefix of the label ("2007-08" -> 2007);
/// labels without one use the year whose window holds the most rows.
std::vector<SeasonTrace> load_traces(const std::filesystem::path& path, const LoadOptions& options,
                                     const WarningSink& warn = {});
std::vector<SeasonTrace> parse_traces(std::istream& in, const std::string& source, const LoadOptions& options,
                                      const WarningSink& warn = {});

/// Restricts each trace to its window and validates completeness. Idempotent.
std::vector<SeasonTrace> apply_window(std::vector<SeasonTrace> traces, const LoadOptions& options);

/// Writes traces in the input CSV schema.
void write_traces(std::ostream& out, std::span<const SeasonTrace> traces);

/// ISO-8601 "YYYY-MM-DDTHH[:MM[:SS]]" with optional "Z" or "+HH:MM" offset; a space may
/// replace 'T'. Must land on a whole hour. Throws DataError.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

/// q-quantile (type 7) of the per-calendar-day maxima of demand.
double daily_peak_quantile(const SeasonTrace& trace, double q);

/// Cleveland's robust locally weighted linear regression (tricube weights,
/// bisquare robustness). `x` must be ascending. Returns fitted values at `x`.
std::vector<double> lowess_fit(std::span<const double> x, std::span<const double> y, double span = 2.0 / 3.0,
                               int iterations = 1);

struct SeasonQuantile {
    std::string season_label;
    double value_mw = 0.0;
};

/// Reads `season,quantile_mw`.
std::vector<SeasonQuantile> load_quantile_history(const std::filesystem::path& path);
std::vector<SeasonQuantile> parse_quantile_history(std::istream& in, const std::string& source);

/// Lowess-smooths the quantile series (season index as abscissa, seasons in label
/// order) and returns fitted(reference) / fitted(season) for every season.
std::map<std::string, double> compute_rescale_factors(std::span<const SeasonQuantile> quantiles,
                                                      std::string_view reference_label,
                                                      double span = 2.0 / 3.0, int iterations = 1);

/// Multiplies demand by `factor` (wind untouched) and records it. Throws on factor <= 0.
SeasonTrace apply_rescaling(SeasonTrace trace, double factor);

/// Concatenation of several seasons, labelled "All".
SeasonTrace pool(std::span<const SeasonTrace> traces);

}  // namespace adequacy::ingest
