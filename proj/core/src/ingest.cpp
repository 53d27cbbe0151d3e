#include "adequacy/ingest.hpp"

#include "adequacy/csv.hpp"
#include "adequacy/error.hpp"
#include "adequacy/stats.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <ostream>

namespace adequacy::ingest {

namespace chr = std::chrono;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

constexpr std::array<std::string_view, 7> kWeekdays{"sunday",   "monday", "tuesday", "wednesday",
                                                    "thursday", "friday", "saturday"};
constexpr std::array<std::string_view, 12> kMonths{"january", "february", "march",     "april",
                                                   "may",     "june",     "july",      "august",
                                                   "september", "october", "november", "december"};
constexpr std::array<std::string_view, 5> kOrdinals{"first", "second", "third", "fourth", "last"};

int leading_year(std::string_view label) {
    if (label.size() < 4) return -1;
    for (std::size_t i = 0; i < 4; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(label[i]))) return -1;
    }
    if (label.size() > 4 && std::isdigit(static_cast<unsigned char>(label[4]))) return -1;
    return std::stoi(std::string(label.substr(0, 4)));
}

int year_of(Timestamp t) {
    const chr::year_month_day ymd{chr::floor<chr::days>(t)};
    return static_cast<int>(ymd.year());
}

int window_year(const SeasonTrace& trace, const SeasonWindow& window) {
    if (const int y = leading_year(trace.season_label); y >= 0) return y;
    if (trace.hours.empty()) throw DataError(fmt::format("season '{}' has no observations", trace.season_label));
    const int y = year_of(trace.hours.front().timestamp);
    std::size_t best_count = 0;
    int best_year = y;
    for (int candidate : {y - 1, y}) {
        const auto lo = window.start(candidate);
        const auto hi = window.end(candidate);
        const auto count = static_cast<std::size_t>(std::count_if(
            trace.hours.begin(), trace.hours.end(), [&](const auto& h) { return h.timestamp >= lo && h.timestamp < hi; }));
        if (count > best_count) {
            best_count = count;
            best_year = candidate;
        }
    }
    return best_year;
}

void check_observation(double demand, double wind, const std::string& where) {
    if (!std::isfinite(demand) || demand < 0.0) throw DataError(fmt::format("{}demand_mw must be finite and >= 0", where));
    if (!std::isfinite(wind) || wind < 0.0) throw DataError(fmt::format("{}wind_mw must be finite and >= 0", where));
}

}  // namespace

AnchorRule AnchorRule::parse(std::string_view text) {
    std::vector<std::string> words;
    for (auto& w : csv::split(csv::trim(text), ' ')) {
        if (!w.empty()) words.push_back(lower(w));
    }
    if (words.size() != 4 || words[2] != "in") {
        throw ConfigError(fmt::format("unrecognized anchor rule '{}' (expected e.g. 'last Sunday in October')", text));
    }
    AnchorRule rule;
    const auto ord = std::find(kOrdinals.begin(), kOrdinals.end(), words[0]);
    const auto wd = std::find(kWeekdays.begin(), kWeekdays.end(), words[1]);
    const auto mo = std::find(kMonths.begin(), kMonths.end(), words[3]);
    if (ord == kOrdinals.end() || wd == kWeekdays.end() || mo == kMonths.end()) {
        throw ConfigError(fmt::format("unrecognized anchor rule '{}'", text));
    }
    if (*ord != "last") {
        throw ConfigError(fmt::format("anchor rule '{}': only 'last <weekday> in <month>' is supported", text));
    }
    rule.last = true;
    rule.weekday = chr::weekday{static_cast<unsigned>(wd - kWeekdays.begin())};
    rule.month = chr::month{static_cast<unsigned>(mo - kMonths.begin()) + 1};
    return rule;
}

std::string AnchorRule::to_string() const {
    std::string wd(kWeekdays[weekday.c_encoding()]);
    std::string mo(kMonths[static_cast<unsigned>(month) - 1]);
    wd[0] = static_cast<char>(std::toupper(wd[0]));
    mo[0] = static_cast<char>(std::toupper(mo[0]));
    return fmt::format("last {} in {}", wd, mo);
}

chr::sys_days AnchorRule::in_year(int year) const {
    return chr::sys_days{chr::year{year} / month / weekday[chr::last]};
}

Timestamp SeasonWindow::start(int year) const { return Timestamp{anchor.in_year(year)}; }

Timestamp SeasonWindow::end(int year) const { return start(year) + chr::hours{static_cast<long>(hours())}; }

std::vector<double> SeasonTrace::demand() const {
    std::vector<double> out;
    out.reserve(hours.size());
    for (const auto& h : hours) out.push_back(h.demand_mw);
    return out;
}

std::vector<double> SeasonTrace::wind() const {
    std::vector<double> out;
    out.reserve(hours.size());
    for (const auto& h : hours) out.push_back(h.wind_mw);
    return out;
}

std::vector<double> SeasonTrace::demand_net_of_wind() const {
    std::vector<double> out;
    out.reserve(hours.size());
    for (const auto& h : hours) out.push_back(h.demand_mw - h.wind_mw);
    return out;
}

Timestamp parse_timestamp(std::string_view text) {
    const auto t = csv::trim(text);
    const auto fail = [&] { return DataError(fmt::format("malformed timestamp '{}'", text)); };
    const auto digits = [&](std::size_t pos, std::size_t len) {
        if (pos + len > t.size()) throw fail();
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) throw fail();
            v = v * 10 + (t[i] - '0');
        }
        return v;
    };
    if (t.size() < 13 || t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ')) throw fail();
    const int y = digits(0, 4);
    const int mo = digits(5, 2);
    const int d = digits(8, 2);
    const int hh = digits(11, 2);
    int mm = 0;
    int ss = 0;
    std::size_t pos = 13;
    if (pos < t.size() && t[pos] == ':') {
        mm = digits(pos + 1, 2);
        pos += 3;
        if (pos < t.size() && t[pos] == ':') {
            ss = digits(pos + 1, 2);
            pos += 3;
        }
    }
    int offset_minutes = 0;
    if (pos < t.size()) {
        if (t[pos] == 'Z' && pos + 1 == t.size()) {
            ++pos;
        } else if ((t[pos] == '+' || t[pos] == '-') && pos + 6 == t.size() && t[pos + 3] == ':') {
            const int sign = t[pos] == '-' ? -1 : 1;
            offset_minutes = sign * (digits(pos + 1, 2) * 60 + digits(pos + 4, 2));
            pos += 6;
        } else {
            throw fail();
        }
    }
    const chr::year_month_day ymd{chr::year{y}, chr::month{static_cast<unsigned>(mo)},
                                  chr::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw fail();
    if (mm != 0 || ss != 0 || offset_minutes % 60 != 0) {
        throw DataError(fmt::format("timestamp '{}' is not on a whole UTC hour", text));
    }
    return Timestamp{chr::sys_days{ymd}} + chr::hours{hh} - chr::minutes{offset_minutes};
}

std::string format_timestamp(Timestamp t) {
    const auto day = chr::floor<chr::days>(t);
    const chr::year_month_day ymd{day};
    const auto hour = chr::duration_cast<chr::hours>(t - day).count();
    return fmt::format("{:04}-{:02}-{:02}T{:02}:00:00Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hour);
}

std::vector<SeasonTrace> parse_traces(std::istream& in, const std::string& source, const LoadOptions& options,
                                      const WarningSink& warn) {
    csv::Reader reader(in, source, {"season", "timestamp", "demand_mw", "wind_mw"});
    struct Located {
        HourlyObservation obs;
        std::size_t line;
    };
    std::map<std::string, std::vector<Located>> by_season;
    csv::Row row;
    while (reader.next(row)) {
        const auto where = reader.where(row);
        const auto& label = reader.field(row, 0);
        if (label.empty()) throw DataError(where + "empty season label");
        HourlyObservation obs;
        try {
            obs.timestamp = parse_timestamp(reader.field(row, 1));
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
        obs.demand_mw = csv::parse_double(reader.field(row, 2), where);
        obs.wind_mw = csv::parse_double(reader.field(row, 3), where);
        check_observation(obs.demand_mw, obs.wind_mw, where);
        if (options.wind_capacity_mw > 0.0 && obs.wind_mw > options.wind_capacity_mw && warn) {
            warn(fmt::format("{}wind_mw {} exceeds installed capacity {}", where, obs.wind_mw,
                             options.wind_capacity_mw));
        }
        by_season[label].push_back({obs, row.line});
    }

    std::vector<SeasonTrace> traces;
    for (auto& [label, rows] : by_season) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Located& a, const Located& b) { return a.obs.timestamp < b.obs.timestamp; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].obs.timestamp == rows[i - 1].obs.timestamp) {
                throw DataError(fmt::format("{}:{}: season '{}': duplicate timestamp {} (first seen on line {})", source,
                                            rows[i].line, label, format_timestamp(rows[i].obs.timestamp),
                                            rows[i - 1].line));
            }
        }
        SeasonTrace trace;
        trace.season_label = label;
        trace.hours.reserve(rows.size());
        for (const auto& r : rows) trace.hours.push_back(r.obs);
        traces.push_back(std::move(trace));
    }
    return apply_window(std::move(traces), options);
}

std::vector<SeasonTrace> load_traces(const std::filesystem::path& path, const LoadOptions& options,
                                     const WarningSink& warn) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open traces file '{}'", path.string()));
    return parse_traces(in, path.string(), options, warn);
}

std::vector<SeasonTrace> apply_window(std::vector<SeasonTrace> traces, const LoadOptions& options) {
    const auto& window = options.window;
    if (window.weeks <= 0) throw ConfigError("season window must span a positive number of weeks");
    for (auto& trace : traces) {
        auto& hours = trace.hours;
        std::stable_sort(hours.begin(), hours.end(),
                         [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
        for (std::size_t i = 1; i < hours.size(); ++i) {
            if (hours[i].timestamp == hours[i - 1].timestamp) {
                throw DataError(fmt::format("season '{}': duplicate timestamp {}", trace.season_label,
                                            format_timestamp(hours[i].timestamp)));
            }
        }
        const int year = window_year(trace, window);
        const auto lo = window.start(year);
        const auto hi = window.end(year);
        std::erase_if(hours, [&](const auto& h) { return h.timestamp < lo || h.timestamp >= hi; });
        if (hours.empty()) {
            throw DataError(fmt::format("season '{}': no observations inside the window {} .. {}", trace.season_label,
                                        format_timestamp(lo), format_timestamp(hi)));
        }

        if (options.allow_gaps) {
            std::map<chr::sys_days, int> per_day;
            for (const auto& h : hours) ++per_day[chr::floor<chr::days>(h.timestamp)];
            std::erase_if(hours, [&](const auto& h) { return per_day[chr::floor<chr::days>(h.timestamp)] < 24; });
            if (hours.empty()) {
                throw DataError(fmt::format("season '{}': no complete days inside the window", trace.season_label));
            }
            continue;
        }

        if (hours.front().timestamp != lo) {
            throw DataError(fmt::format("season '{}': missing hours at window start {} (first observation {})",
                                        trace.season_label, format_timestamp(lo),
                                        format_timestamp(hours.front().timestamp)));
        }
        for (std::size_t i = 1; i < hours.size(); ++i) {
            if (hours[i].timestamp - hours[i - 1].timestamp != chr::hours{1}) {
                throw DataError(fmt::format("season '{}': non-hourly gap between {} and {}", trace.season_label,
                                            format_timestamp(hours[i - 1].timestamp),
                                            format_timestamp(hours[i].timestamp)));
            }
        }
        if (hours.back().timestamp + chr::hours{1} != hi) {
            throw DataError(fmt::format("season '{}': missing hours at window end (last observation {}, window ends {})",
                                        trace.season_label, format_timestamp(hours.back().timestamp),
                                        format_timestamp(hi)));
        }
    }
    return traces;
}

void write_traces(std::ostream& out, std::span<const SeasonTrace> traces) {
    out << "season,timestamp,demand_mw,wind_mw\n";
    for (const auto& trace : traces) {
        for (const auto& h : trace.hours) {
            out << trace.season_label << ',' << format_timestamp(h.timestamp) << ','
                << csv::format_double(h.demand_mw) << ',' << csv::format_double(h.wind_mw) << '\n';
        }
    }
}

double daily_peak_quantile(const SeasonTrace& trace, double q) {
    if (trace.hours.empty()) throw DataError(fmt::format("season '{}': empty trace", trace.season_label));
    if (!(q > 0.0 && q < 1.0)) throw ConfigError(fmt::format("quantile level {} must lie in (0, 1)", q));
    std::map<chr::sys_days, double> peaks;
    for (const auto& h : trace.hours) {
        const auto day = chr::floor<chr::days>(h.timestamp);
        auto [it, inserted] = peaks.emplace(day, h.demand_mw);
        if (!inserted) it->second = std::max(it->second, h.demand_mw);
    }
    std::vector<double> maxima;
    maxima.reserve(peaks.size());
    for (const auto& [day, peak] : peaks) maxima.push_back(peak);
    return quantile_type7(maxima, q);
}

std::vector<SeasonQuantile> parse_quantile_history(std::istream& in, const std::string& source) {
    csv::Reader reader(in, source, {"season", "quantile_mw"});
    std::vector<SeasonQuantile> out;
    csv::Row row;
    while (reader.next(row)) {
        const auto where = reader.where(row);
        SeasonQuantile q{reader.field(row, 0), csv::parse_double(reader.field(row, 1), where)};
        if (q.season_label.empty()) throw DataError(where + "empty season label");
        if (!std::isfinite(q.value_mw) || q.value_mw <= 0.0) throw DataError(where + "quantile_mw must be positive");
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<SeasonQuantile> load_quantile_history(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open quantile history '{}'", path.string()));
    return parse_quantile_history(in, path.string());
}

std::map<std::string, double> compute_rescale_factors(std::span<const SeasonQuantile> quantiles,
                                                      std::string_view reference_label, double span, int iterations) {
    std::vector<SeasonQuantile> ordered(quantiles.begin(), quantiles.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.season_label < b.season_label; });
    for (std::size_t i = 1; i < ordered.size(); ++i) {
        if (ordered[i].season_label == ordered[i - 1].season_label) {
            throw DataError(fmt::format("quantile history lists season '{}' twice", ordered[i].season_label));
        }
    }
    const auto ref = std::find_if(ordered.begin(), ordered.end(),
                                  [&](const auto& q) { return q.season_label == reference_label; });
    if (ref == ordered.end()) {
        throw ConfigError(fmt::format("reference season '{}' is not in the quantile history", reference_label));
    }
    std::vector<double> x(ordered.size());
    std::vector<double> y(ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        x[i] = static_cast<double>(i);
        y[i] = ordered[i].value_mw;
    }
    const auto fitted = lowess_fit(x, y, span, iterations);
    const double ref_fit = fitted[static_cast<std::size_t>(ref - ordered.begin())];
    std::map<std::string, double> factors;
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        if (!(fitted[i] > 0.0)) {
            throw NumericalError(fmt::format("Lowess fit for season '{}' is not positive ({})", ordered[i].season_label,
                                             fitted[i]));
        }
        factors[ordered[i].season_label] = ref_fit / fitted[i];
    }
    return factors;
}

SeasonTrace apply_rescaling(SeasonTrace trace, double factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw DataError(fmt::format("season '{}': rescale factor must be positive, got {}", trace.season_label, factor));
    }
    for (auto& h : trace.hours) h.demand_mw *= factor;
    trace.rescale_factor *= factor;
    return trace;
}

SeasonTrace pool(std::span<const SeasonTrace> traces) {
    SeasonTrace all;
    all.season_label = "All";
    std::size_t n = 0;
    for (const auto& t : traces) n += t.hours.size();
    all.hours.reserve(n);
    for (const auto& t : traces) all.hours.insert(all.hours.end(), t.hours.begin(), t.hours.end());
    return all;
}

}  // namespace adequacy::ingest
