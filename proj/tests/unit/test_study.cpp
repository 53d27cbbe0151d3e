#include <adequacy/error.hpp>
#include <adequacy/genmodel.hpp>
#include <adequacy/ingest.hpp>
#include <adequacy/study.hpp>

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

using namespace adequacy;
using namespace adequacy::study;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

// Three synthetic seasons and a matching fleet written to a fresh directory.
class StudyFixture : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = fs::temp_directory_path() / "adequacy-study-test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        seasons_ = testsupport::synthetic_seasons(3, 600);
        {
            std::ofstream out(dir_ / "traces.csv", std::ios::binary);
            ingest::write_traces(out, seasons_);
        }
        units_ = testsupport::fleet_for_target(seasons_[0], 120, 601, 4.0);
        {
            std::ofstream out(dir_ / "fleet.csv", std::ios::binary);
            gen::write_fleet(out, units_);
        }
        spit(dir_ / "study.json", R"({
  "traces": "traces.csv",
  "fleet": "fleet.csv",
  "models": ["evt", "hindcast", "ind"],
  "threshold_quantiles": [0.9, 0.95],
  "bootstrap": {"replications": 200, "seed": 42},
  "scan": {"points": 6},
  "output_dir": "out"
})");
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    static RunConfig config() { return load_config(dir_ / "study.json"); }

    static inline fs::path dir_;
    static inline std::vector<ingest::SeasonTrace> seasons_;
    static inline std::vector<gen::GeneratingUnit> units_;
};

}  // namespace

TEST(Config, ParsesNestedKeysAndResolvesPaths) {
    const auto c = parse_config(R"({
        "traces": "t.csv", "fleet": "/abs/f.csv", "quantile_history": "q.csv",
        "rescale": true, "reference_season": "2013-14", "lowess_span": 0.5, "lowess_iterations": 2,
        "season": {"weeks": 20, "anchor": "last Saturday in October"},
        "models": ["hindcast", "independence"], "threshold_quantiles": [0.97],
        "pooled": false, "bootstrap": {"replications": 500, "seed": 7, "ci_level": 0.9},
        "scan": {"lo_quantile": 0.85, "hi_quantile": 0.99, "points": 10}, "qq_quantile": 0.96
    })", "/base");
    EXPECT_EQ(c.traces, fs::path("/base/t.csv"));
    EXPECT_EQ(c.fleet, fs::path("/abs/f.csv"));
    EXPECT_EQ(*c.quantile_history, fs::path("/base/q.csv"));
    EXPECT_TRUE(c.rescale);
    EXPECT_EQ(c.window.weeks, 20);
    EXPECT_EQ(c.window.anchor.weekday, std::chrono::Saturday);
    ASSERT_EQ(c.models.size(), 2U);
    EXPECT_EQ(c.models[1], dnw::ModelKind::independence);
    EXPECT_FALSE(c.pooled);
    EXPECT_EQ(c.bootstrap.replications, 500U);
    EXPECT_EQ(c.bootstrap.seed, 7U);
    EXPECT_TRUE(c.seed_set);
    EXPECT_EQ(c.scan_points, 10U);
    EXPECT_NO_THROW(c.validate(false));
}

TEST(Config, Errors) {
    EXPECT_THROW((void)parse_config("{", ""), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"trace": "x"})", ""), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"bootstrap": {"reps": 10}})", ""), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"pooled": "yes"})", ""), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"models": ["copula"]})", ""), ConfigError);
    EXPECT_THROW((void)parse_config(R"({"bootstrap": {"seed": -1}})", ""), ConfigError);

    const auto none = parse_config(R"({"traces": "t", "fleet": "f", "models": []})", "");
    EXPECT_THROW(none.validate(false), ConfigError);
    const auto low = parse_config(R"({"traces": "t", "fleet": "f", "threshold_quantiles": [0.4]})", "");
    EXPECT_THROW(low.validate(false), ConfigError);
    const auto reps = parse_config(R"({"traces": "t", "fleet": "f", "bootstrap": {"replications": 10}})", "");
    EXPECT_THROW(reps.validate(false), ConfigError);
    const auto missing = parse_config(R"({"traces": "/nonexistent/t.csv", "fleet": "/nonexistent/f.csv"})", "");
    EXPECT_NO_THROW(missing.validate(false));
    EXPECT_THROW(missing.validate(true), ConfigError);
    EXPECT_THROW((void)load_config("/nonexistent/study.json"), ConfigError);
}

TEST(Config, VariantsFollowModelsAndThresholds) {
    RunConfig c;
    c.threshold_quantiles = {0.9, 0.95, 0.98};
    const auto v = expand_variants(c);
    ASSERT_EQ(v.size(), 5U);
    EXPECT_EQ(v[0].name, "EVT - 90%");
    EXPECT_EQ(v[1].slug, "evt95");
    EXPECT_EQ(v[3].name, "Hindcast");
    EXPECT_EQ(v[4].name, "Ind");
    EXPECT_EQ(v[4].slug, "ind");
}

TEST_F(StudyFixture, ConfigHashTracksNumericSettingsAndInputs) {
    const auto base = config();
    const auto h = config_hash(base);
    EXPECT_EQ(h.size(), 16U);
    EXPECT_EQ(config_hash(config()), h);

    auto c = base;
    c.output_dir = "/elsewhere";
    EXPECT_EQ(config_hash(c), h);

    const auto differs = [&](auto mutate) {
        auto m = base;
        mutate(m);
        return config_hash(m) != h;
    };
    EXPECT_TRUE(differs([](RunConfig& m) { m.bootstrap.seed += 1; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.bootstrap.replications += 1; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.bootstrap.ci_level = 0.9; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.threshold_quantiles[0] = 0.91; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.pooled = false; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.rescale = true; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.lowess_span = 0.5; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.window.weeks = 20; }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.models.pop_back(); }));
    EXPECT_TRUE(differs([](RunConfig& m) { m.tail_tolerance = 1e-14; }));

    const auto copy = dir_ / "fleet-copy.csv";
    auto text = slurp(base.fleet);
    text += "extra,10,0.5\n";
    spit(copy, text);
    c = base;
    c.fleet = copy;
    EXPECT_NE(config_hash(c), h);
}

TEST_F(StudyFixture, PooledEvaluatorRoutesAgree) {
    const risk::ShortfallKernel kernel(gen::convolve_fleet(units_));
    RunConfig c;
    c.threshold_quantiles = {0.95};
    const std::vector<std::vector<std::size_t>> draws{{0, 1, 2}, {0, 0, 2}, {1, 1, 1}, {0, 2, 2}};
    for (const auto& v : expand_variants(c)) {
        const PooledEvaluator eval(seasons_, kernel, v);
        EXPECT_EQ(eval.season_count(), 3U);
        for (const auto& d : draws) {
            const auto fast = eval(d);
            const auto slow = eval.evaluate_direct(d);
            EXPECT_NEAR(fast.lole_hours, slow.lole_hours, 1e-9 * slow.lole_hours) << v.name;
            EXPECT_NEAR(fast.eeu_mwh, slow.eeu_mwh, 1e-9 * slow.eeu_mwh) << v.name;
            EXPECT_EQ(fast.n_hours, 3528.0);
        }
    }
}

TEST_F(StudyFixture, PooledHindcastEqualsSeasonMean) {
    const risk::ShortfallKernel kernel(gen::convolve_fleet(units_));
    RunConfig c;
    c.models = {dnw::ModelKind::hindcast};
    const auto variants = expand_variants(c);
    RiskOptions ro;
    uncertainty::BootstrapConfig b;
    b.replications = 2000;
    b.seed = 9;
    ro.bootstrap = b;
    const auto ev = evaluate_risk(seasons_, kernel, variants, ro);
    ASSERT_EQ(ev.pooled_metrics.size(), 1U);
    EXPECT_NEAR(ev.pooled_metrics[0].lole_hours, ev.mean_metrics[0].lole_hours, 1e-9 * ev.mean_metrics[0].lole_hours);
    EXPECT_NEAR(ev.pooled_metrics[0].eeu_mwh, ev.mean_metrics[0].eeu_mwh, 1e-9 * ev.mean_metrics[0].eeu_mwh);
    for (const auto& [a, b2] : {std::pair{ev.pooled_lole_ci[0], ev.mean_lole_ci[0]},
                                std::pair{ev.pooled_eeu_ci[0], ev.mean_eeu_ci[0]}}) {
        EXPECT_NEAR(a.lower, b2.lower, 0.02 * b2.lower);
        EXPECT_NEAR(a.upper, b2.upper, 0.02 * b2.upper);
    }
}

TEST_F(StudyFixture, EvaluateRiskTablesAndIntervals) {
    const risk::ShortfallKernel kernel(gen::convolve_fleet(units_));
    RunConfig c;
    c.threshold_quantiles = {0.95};
    const auto variants = expand_variants(c);
    RiskOptions ro;
    uncertainty::BootstrapConfig b;
    b.replications = 300;
    b.seed = 4;
    ro.bootstrap = b;
    const auto ev = evaluate_risk(seasons_, kernel, variants, ro);
    ASSERT_EQ(ev.season_metrics.size(), 3U);
    ASSERT_EQ(ev.season_metrics[0].size(), 3U);
    for (std::size_t j = 0; j < variants.size(); ++j) {
        EXPECT_LE(ev.pooled_lole_ci[j].lower, ev.pooled_metrics[j].lole_hours) << variants[j].name;
        EXPECT_GE(ev.pooled_lole_ci[j].upper, ev.pooled_metrics[j].lole_hours) << variants[j].name;
        EXPECT_LE(ev.mean_lole_ci[j].lower, ev.mean_lole_ci[j].upper);
    }
    const auto t = season_table(ev, Metric::lole);
    ASSERT_EQ(t.rows.size(), 4U);
    EXPECT_EQ(t.rows[0].label, seasons_[0].season_label);
    EXPECT_EQ(t.rows[3].label, "Mean");
    EXPECT_TRUE(t.rows[3].ci.has_value());
    EXPECT_EQ(t.columns.size(), 3U);
    const auto e = season_table(ev, Metric::eeu);
    EXPECT_NEAR(e.rows[1].values[1], ev.season_metrics[1][1].eeu_gwh(), 1e-12);
    const auto p = pooled_table(ev);
    EXPECT_EQ(p.rows.size(), 2U);

    RiskOptions plain;
    const auto no_ci = evaluate_risk(seasons_, kernel, variants, plain);
    EXPECT_TRUE(std::isnan(no_ci.mean_lole_ci[0].lower));
    EXPECT_EQ(no_ci.mean_metrics[1].lole_hours, ev.mean_metrics[1].lole_hours);
}

TEST_F(StudyFixture, FullStudyWritesEveryArtifactDeterministically) {
    auto c = config();
    c.output_dir = dir_ / "run1";
    const auto r1 = run_full_study(c);
    c.output_dir = dir_ / "run2";
    const auto r2 = run_full_study(c);
    EXPECT_EQ(r1.outputs, r2.outputs);
    EXPECT_EQ(r1.config_hash, r2.config_hash);

    const std::vector<std::string> expected{"lole_by_season.txt", "lole_by_season.csv", "lole_by_season.json",
                                            "eeu_by_season.csv",  "pooled.csv",         "pooled.json",
                                            "parameters.csv",     "scan/2007-08.csv",   "scan/All.csv",
                                            "qq/2009-10.csv",     "survivor/2008-09_evt95.csv",
                                            "survivor/All_ind.csv", "manifest.json"};
    for (const auto& name : expected) {
        EXPECT_NE(std::find(r1.outputs.begin(), r1.outputs.end(), name), r1.outputs.end()) << name;
    }
    for (const auto& name : r1.outputs) {
        ASSERT_TRUE(fs::is_regular_file(dir_ / "run1" / name)) << name;
        EXPECT_EQ(slurp(dir_ / "run1" / name), slurp(dir_ / "run2" / name)) << name;
    }

    const auto manifest = nlohmann::json::parse(slurp(dir_ / "run1" / "manifest.json"));
    EXPECT_EQ(manifest["status"], "ok");
    EXPECT_EQ(manifest["seed"], 42);
    EXPECT_EQ(manifest["replications"], 200);
    EXPECT_EQ(manifest["config_hash"], r1.config_hash);
    EXPECT_EQ(manifest["seasons"].size(), 3U);
    EXPECT_EQ(manifest["variants"].size(), 4U);
    EXPECT_TRUE(manifest["versions"].contains("adequacy"));

    std::istringstream csv(slurp(dir_ / "run1" / "lole_by_season.csv"));
    const auto table = report::read_table_csv(csv, "lole_by_season.csv");
    ASSERT_EQ(table.rows.size(), 4U);
    EXPECT_EQ(table.rows[2].values[2], r1.risk.season_metrics[2][2].lole_hours);

    const auto scan = slurp(dir_ / "run1" / "scan" / "2007-08.csv");
    EXPECT_EQ(scan.substr(0, scan.find('\n')),
              "threshold_mw,sigma,xi,sigma_star,se_sigma,se_xi,n_exceed,se_sigma_star,status");
}

TEST_F(StudyFixture, FailuresNameTheStageAndFlagTheManifest) {
    auto c = config();
    c.output_dir = dir_ / "bad";
    c.fleet = dir_ / "bad-fleet.csv";
    spit(c.fleet, "name,capacity_mw,availability\nA,0,0.9\n");
    try {
        (void)run_full_study(c);
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("stage 'ingest'"), std::string::npos) << e.what();
    }
    const auto manifest = nlohmann::json::parse(slurp(dir_ / "bad" / "manifest.json"));
    EXPECT_EQ(manifest["status"], "failed");
    EXPECT_EQ(manifest["failed_stage"], "ingest");
    EXPECT_TRUE(manifest["partial"].get<bool>());

    auto unseeded = config();
    unseeded.seed_set = false;
    unseeded.output_dir = dir_ / "unseeded";
    EXPECT_THROW((void)run_full_study(unseeded), ConfigError);
    auto empty = config();
    empty.models.clear();
    empty.output_dir = dir_ / "empty";
    EXPECT_THROW((void)run_full_study(empty), ConfigError);
    EXPECT_FALSE(fs::exists(dir_ / "empty"));
}

TEST_F(StudyFixture, RescalingUsesDailyPeaksWithoutHistory) {
    auto c = config();
    c.rescale = true;
    std::vector<std::string> warnings;
    const auto traces = prepare_traces(c, [&](const std::string& w) { warnings.push_back(w); });
    ASSERT_EQ(traces.size(), 3U);
    EXPECT_EQ(traces.back().rescale_factor, 1.0);
    for (const auto& t : traces) EXPECT_GT(t.rescale_factor, 0.0);
    EXPECT_EQ(traces[0].hours[5].wind_mw, seasons_[0].hours[5].wind_mw);
    EXPECT_NEAR(traces[0].hours[5].demand_mw, seasons_[0].hours[5].demand_mw * traces[0].rescale_factor, 1e-9 * 5e4);
}
