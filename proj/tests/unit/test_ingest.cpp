#include <adequacy/error.hpp>
#include <adequacy/ingest.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fmt/format.h>

#include <algorithm>
#include <iterator>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

using namespace adequacy;
using namespace adequacy::ingest;
using namespace std::chrono;

namespace {

std::string to_csv(const std::vector<SeasonTrace>& traces) {
    std::ostringstream out;
    write_traces(out, traces);
    return out.str();
}

std::vector<SeasonTrace> parse(const std::string& text, const LoadOptions& options = {},
                               const WarningSink& warn = {}) {
    std::istringstream in(text);
    return parse_traces(in, "traces.csv", options, warn);
}

}  // namespace

TEST(SeasonWindow, DefaultIsTwentyOneWeeksFromLastSundayInOctober) {
    SeasonWindow w;
    EXPECT_EQ(w.hours(), 3528U);
    EXPECT_EQ(w.start(2007), sys_days{2007y / October / 28});
    EXPECT_EQ(w.start(2013), sys_days{2013y / October / 27});
    EXPECT_EQ(w.end(2007) - w.start(2007), hours(3528));
}

TEST(AnchorRule, ParseAndErrors) {
    const auto r = AnchorRule::parse("last Saturday in November");
    EXPECT_EQ(r.weekday, Saturday);
    EXPECT_EQ(r.month, November);
    EXPECT_EQ(r.in_year(2014), sys_days{2014y / November / 29});
    EXPECT_THROW((void)AnchorRule::parse("sometime in autumn"), ConfigError);
}

TEST(Timestamp, ParseVariants) {
    const auto t = parse_timestamp("2007-10-28T05:00:00Z");
    EXPECT_EQ(t, sys_days{2007y / October / 28} + hours(5));
    EXPECT_EQ(parse_timestamp("2007-10-28 05:00"), t);
    EXPECT_EQ(parse_timestamp("2007-10-28T06:00+01:00"), t);
    EXPECT_EQ(format_timestamp(t), "2007-10-28T05:00:00Z");
    EXPECT_THROW((void)parse_timestamp("2007-10-28T05:30"), DataError);
    EXPECT_THROW((void)parse_timestamp("yesterday"), DataError);
}

TEST(LoadTraces, OneFullSeason) {
    const auto season = testsupport::synthetic_season("2007-08", 2007, 1);
    const auto traces = parse(to_csv({season}));
    ASSERT_EQ(traces.size(), 1U);
    EXPECT_EQ(traces[0].hours.size(), 3528U);
    EXPECT_EQ(traces[0].rescale_factor, 1.0);
    EXPECT_EQ(traces[0].hours[17].demand_mw, season.hours[17].demand_mw);
}

TEST(LoadTraces, SevenSeasons) {
    const auto traces = parse(to_csv(testsupport::synthetic_seasons(7, 3)));
    ASSERT_EQ(traces.size(), 7U);
    EXPECT_EQ(traces.front().season_label, "2007-08");
    EXPECT_EQ(traces.back().season_label, "2013-14");
    for (const auto& t : traces) EXPECT_EQ(t.hours.size(), 3528U);
}

TEST(LoadTraces, RowsOutsideWindowAreDropped) {
    auto season = testsupport::synthetic_season("2007-08", 2007, 1);
    auto early = season.hours.front();
    early.timestamp -= hours(30);
    season.hours.insert(season.hours.begin(), early);
    const auto traces = parse(to_csv({season}));
    EXPECT_EQ(traces[0].hours.size(), 3528U);
    EXPECT_EQ(traces[0].hours.front().timestamp, SeasonWindow{}.start(2007));
}

TEST(LoadTraces, DuplicateHourNamesTimestamp) {
    auto season = testsupport::synthetic_season("2007-08", 2007, 1);
    season.hours.insert(season.hours.begin() + 100, season.hours[100]);
    try {
        (void)parse(to_csv({season}));
        FAIL() << "expected duplicate error";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
        EXPECT_NE(msg.find(format_timestamp(season.hours[100].timestamp)), std::string::npos) << msg;
    }
}

TEST(LoadTraces, GapIsErrorUnlessAllowed) {
    auto season = testsupport::synthetic_season("2007-08", 2007, 1);
    const auto missing = season.hours[500].timestamp;
    season.hours.erase(season.hours.begin() + 500);
    try {
        (void)parse(to_csv({season}));
        FAIL() << "expected gap error";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("gap"), std::string::npos) << e.what();
    }
    LoadOptions opts;
    opts.allow_gaps = true;
    const auto traces = parse(to_csv({season}), opts);
    EXPECT_EQ(traces[0].hours.size(), 3528U - 24U);
    const auto day = floor<days>(missing);
    for (const auto& h : traces[0].hours) EXPECT_NE(floor<days>(h.timestamp), day);
}

TEST(LoadTraces, MalformedRowReportsLine) {
    const std::string text = "season,timestamp,demand_mw,wind_mw\n2007-08,2007-10-28T00:00Z,abc,10\n";
    try {
        (void)parse(text);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    }
    EXPECT_THROW((void)parse("season,timestamp,demand_mw\n"), DataError);
    EXPECT_THROW((void)parse("season,timestamp,demand_mw,wind_mw\n2007-08,2007-10-28T00:00Z,-5,10\n"), DataError);
}

TEST(LoadTraces, WindAboveCapacityWarns) {
    const auto season = testsupport::synthetic_season("2007-08", 2007, 1, 46000.0, 14000.0);
    LoadOptions opts;
    opts.wind_capacity_mw = 1000.0;
    std::vector<std::string> warnings;
    const auto traces = parse(to_csv({season}), opts, [&](const std::string& w) { warnings.push_back(w); });
    EXPECT_EQ(traces.size(), 1U);
    EXPECT_FALSE(warnings.empty());
}

TEST(ApplyWindow, Idempotent) {
    const auto once = parse(to_csv(testsupport::synthetic_seasons(2, 8)));
    const auto twice = apply_window(once, LoadOptions{});
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t s = 0; s < once.size(); ++s) {
        ASSERT_EQ(once[s].hours.size(), twice[s].hours.size());
        for (std::size_t i = 0; i < once[s].hours.size(); ++i) {
            EXPECT_EQ(once[s].hours[i].timestamp, twice[s].hours[i].timestamp);
            EXPECT_EQ(once[s].hours[i].demand_mw, twice[s].hours[i].demand_mw);
            EXPECT_EQ(once[s].hours[i].wind_mw, twice[s].hours[i].wind_mw);
        }
    }
}

TEST(DailyPeakQuantile, TenDaysOneToTenGw) {
    SeasonTrace t;
    t.season_label = "x";
    const auto start = sys_days{2007y / October / 28};
    for (int d = 0; d < 10; ++d) {
        const int peak = (d * 7) % 10 + 1;  // maxima 1..10 in scrambled order
        for (int h = 0; h < 24; ++h) {
            const double demand = h == 17 ? peak * 1000.0 : 500.0;
            t.hours.push_back({start + days(d) + hours(h), demand, 0.0});
        }
    }
    EXPECT_DOUBLE_EQ(daily_peak_quantile(t, 0.5), 5500.0);
    EXPECT_DOUBLE_EQ(daily_peak_quantile(t, 0.9), 9100.0);
}

TEST(DailyPeakQuantile, ConstantAndSingleDay) {
    SeasonTrace t;
    const auto start = sys_days{2010y / January / 1};
    for (int h = 0; h < 48; ++h) t.hours.push_back({start + hours(h), 42000.0, 0.0});
    EXPECT_DOUBLE_EQ(daily_peak_quantile(t, 0.1), 42000.0);
    EXPECT_DOUBLE_EQ(daily_peak_quantile(t, 0.9), 42000.0);
    t.hours.resize(24);
    t.hours[3].demand_mw = 50000.0;
    EXPECT_DOUBLE_EQ(daily_peak_quantile(t, 0.3), 50000.0);
    EXPECT_THROW((void)daily_peak_quantile(SeasonTrace{}, 0.5), DataError);
}

TEST(Rescale, FactorsFromConstantAndLinearSeries) {
    std::vector<SeasonQuantile> flat;
    std::vector<SeasonQuantile> declining;
    for (int i = 0; i < 10; ++i) {
        const auto label = fmt::format("{}-{:02d}", 2000 + i, (2001 + i) % 100);
        flat.push_back({label, 55000.0});
        declining.push_back({label, 60000.0 - 500.0 * i});
    }
    for (const auto& [label, f] : compute_rescale_factors(flat, "2009-10")) EXPECT_NEAR(f, 1.0, 1e-12) << label;

    // Values fall over time: older seasons sit higher, so their factors fall with age.
    const auto factors = compute_rescale_factors(declining, "2009-10");
    EXPECT_EQ(factors.at("2009-10"), 1.0);
    for (auto it = std::next(factors.begin()); it != factors.end(); ++it) {
        EXPECT_LT(std::prev(it)->second, it->second) << it->first;
    }
    // Lowess is exact on a line, so factors are the ratios of the line itself.
    EXPECT_NEAR(factors.at("2000-01"), 55500.0 / 60000.0, 1e-9);

    // Values rise over time: factors grow toward older seasons.
    std::vector<SeasonQuantile> rising;
    for (std::size_t i = 0; i < declining.size(); ++i) rising.push_back({declining[i].season_label, 50000.0 + 400.0 * i});
    const auto up = compute_rescale_factors(rising, "2009-10");
    for (auto it = std::next(up.begin()); it != up.end(); ++it) EXPECT_GT(std::prev(it)->second, it->second);
    EXPECT_NEAR(up.at("2000-01"), 53600.0 / 50000.0, 1e-9);

    EXPECT_THROW((void)compute_rescale_factors(flat, "1999-00"), ConfigError);
}

TEST(Rescale, FactorIsRatioOfFittedValues) {
    // Fitted 60 GW at the reference and 50 GW at x give 1.2 exactly when the fit is exact (linear data).
    std::vector<SeasonQuantile> q{{"a", 50000.0}, {"b", 55000.0}, {"c", 60000.0}};
    const auto f = compute_rescale_factors(q, "c", 1.0, 0);
    EXPECT_NEAR(f.at("a"), 1.2, 1e-12);
    EXPECT_NEAR(f.at("b"), 60.0 / 55.0, 1e-12);
}

TEST(Rescale, InvariantToUniformScaling) {
    std::vector<SeasonQuantile> q;
    std::vector<SeasonQuantile> scaled;
    for (int i = 0; i < 12; ++i) {
        const double v = 50000.0 + 800.0 * std::sin(i * 0.9) + 120.0 * i;
        q.push_back({fmt::format("s{:02d}", i), v});
        scaled.push_back({fmt::format("s{:02d}", i), 3.7 * v});
    }
    const auto a = compute_rescale_factors(q, "s11");
    const auto b = compute_rescale_factors(scaled, "s11");
    for (const auto& [label, f] : a) EXPECT_NEAR(b.at(label), f, 1e-12 * f) << label;
}

TEST(Rescale, ApplyArithmeticInverseAndOrder) {
    auto season = testsupport::synthetic_season("2007-08", 2007, 5);
    season.hours[0].demand_mw = 50000.0;
    const auto same = apply_rescaling(season, 1.0);
    for (std::size_t i = 0; i < season.hours.size(); ++i) EXPECT_EQ(same.hours[i].demand_mw, season.hours[i].demand_mw);

    const auto up = apply_rescaling(season, 1.05);
    EXPECT_DOUBLE_EQ(up.hours[0].demand_mw, 52500.0);
    EXPECT_EQ(up.rescale_factor, 1.05);
    EXPECT_EQ(up.hours[9].wind_mw, season.hours[9].wind_mw);

    const auto back = apply_rescaling(apply_rescaling(season, 1.37), 1.0 / 1.37);
    for (std::size_t i = 0; i < season.hours.size(); ++i) {
        EXPECT_NEAR(back.hours[i].demand_mw, season.hours[i].demand_mw, 1e-9 * season.hours[i].demand_mw);
    }

    std::vector<std::size_t> order(season.hours.size());
    std::vector<std::size_t> order_up(season.hours.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = order_up[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return season.hours[a].demand_mw < season.hours[b].demand_mw; });
    std::stable_sort(order_up.begin(), order_up.end(),
                     [&](auto a, auto b) { return up.hours[a].demand_mw < up.hours[b].demand_mw; });
    EXPECT_EQ(order, order_up);

    EXPECT_THROW((void)apply_rescaling(season, 0.0), DataError);
    EXPECT_THROW((void)apply_rescaling(season, -1.0), DataError);
}

TEST(QuantileHistory, ParseAndDuplicates) {
    std::istringstream good("season,quantile_mw\n2007-08,55000\n2008-09,54000.5\n");
    const auto q = parse_quantile_history(good, "q.csv");
    ASSERT_EQ(q.size(), 2U);
    EXPECT_EQ(q[1].value_mw, 54000.5);
    std::istringstream bad("season,quantile_mw\n2007-08,-1\n");
    EXPECT_THROW((void)parse_quantile_history(bad, "q.csv"), DataError);
}

TEST(Pool, ConcatenatesSeasons) {
    const auto seasons = testsupport::synthetic_seasons(3, 4);
    const auto all = pool(seasons);
    EXPECT_EQ(all.season_label, "All");
    EXPECT_EQ(all.hours.size(), 3U * 3528U);
    EXPECT_EQ(all.demand_net_of_wind()[3528 + 7],
              seasons[1].hours[7].demand_mw - seasons[1].hours[7].wind_mw);
}
