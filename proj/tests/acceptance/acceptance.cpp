// Acceptance checks. Prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <adequacy/dnw.hpp>
#include <adequacy/error.hpp>
#include <adequacy/evt.hpp>
#include <adequacy/genmodel.hpp>
#include <adequacy/risk.hpp>
#include <adequacy/rng.hpp>
#include <adequacy/study.hpp>
#include <adequacy/uncertainty.hpp>

#include "test_support.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace adequacy;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const fs::path kDemo = ADEQUACY_DEMO_DIR;
const std::vector<double> kLole{2.82, 2.22, 4.02, 16.77, 1.92, 7.69, 0.15};
const std::vector<double> kEeu{2.81, 2.12, 4.15, 24.01, 1.95, 9.16, 0.10};

Outcome ac1() {
    std::vector<risk::RiskMetrics> seasons;
    for (std::size_t i = 0; i < kLole.size(); ++i) seasons.push_back({kLole[i], kEeu[i], 3528.0, kLole[i] / 3528.0});
    const auto t0 = Clock::now();
    const auto m = risk::long_run_mean(seasons);
    const double dt = seconds_since(t0);
    const bool ok = std::abs(m.lole_hours - 5.08) <= 0.005 && std::abs(m.eeu_mwh - 6.33) <= 0.005 && dt < 1e-3;
    return {ok, fmt::format("LoLE mean {:.4f}, EEU mean {:.4f}, {:.1f} us", m.lole_hours, m.eeu_mwh, dt * 1e6)};
}

Outcome ac2() {
    uncertainty::BootstrapConfig cfg;
    cfg.replications = 10000;
    cfg.seed = 1;
    const auto t0 = Clock::now();
    const auto ci = uncertainty::season_bootstrap(kLole, cfg);
    const double dt = seconds_since(t0);
    const bool ok = std::abs(ci.lower - 1.92) <= 0.25 && std::abs(ci.upper - 9.37) <= 0.25 && dt < 1.0;
    return {ok, fmt::format("CI ({:.3f}, {:.3f}) with 10000 replications, seed 1, {:.3f} s", ci.lower, ci.upper, dt)};
}

Outcome ac3() {
    const auto t0 = Clock::now();
    int inside = 0;
    double worst_sigma = 0.0;
    double worst_xi = 0.0;
    evt::FitOptions opts;
    opts.standard_errors = false;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto y = testsupport::gpd_sample(2.0, -0.25, 50000, 3000 + seed);
        const auto fit = evt::fit_gpd(y, opts);
        const double s = fit.params.sigma;
        const double x = fit.params.xi;
        worst_sigma = std::max(worst_sigma, std::abs(s - 2.0));
        worst_xi = std::max(worst_xi, std::abs(x + 0.25));
        if (s >= 1.95 && s <= 2.05 && x >= -0.27 && x <= -0.23) ++inside;
    }
    const double dt = seconds_since(t0);
    return {inside >= 18 && dt < 10.0,
            fmt::format("{}/20 fits inside bounds (max |dsigma| {:.4f}, max |dxi| {:.4f}), {:.2f} s", inside,
                        worst_sigma, worst_xi, dt)};
}

Outcome ac4() {
    const auto t0 = Clock::now();
    Xoshiro256StarStar rng(44);
    double worst = 0.0;
    for (int f = 0; f < 100; ++f) {
        const std::size_t n = 1 + rng.below(12);
        std::vector<gen::GeneratingUnit> units;
        for (std::size_t i = 0; i < n; ++i) {
            units.push_back({fmt::format("u{}", i), static_cast<std::int64_t>(1 + rng.below(1320)),
                             rng.below(10) == 0 ? 1.0 : 0.5 + 0.5 * rng.uniform()});
        }
        const auto pmf = gen::convolve_fleet(units);
        const auto exact = testsupport::enumerate_fleet(units);
        for (std::size_t k = 0; k < pmf.size(); ++k) {
            const auto cap = pmf.origin_mw + static_cast<std::int64_t>(k);
            const auto it = exact.find(cap);
            worst = std::max(worst, std::abs(pmf.probabilities[k] - (it == exact.end() ? 0.0 : it->second)));
        }
        for (const auto& [cap, p] : exact) worst = std::max(worst, std::abs(pmf.at(cap) - p));
    }
    const double dt = seconds_since(t0);
    return {worst < 1e-12 && dt < 5.0, fmt::format("100 fleets, max abs difference {:.3g}, {:.2f} s", worst, dt)};
}

Outcome ac5() {
    const auto t0 = Clock::now();
    const auto season = testsupport::synthetic_season("2010-11", 2010, 5150);
    const auto units = testsupport::fleet_for_target(season, 200, 5151, 10.0);
    const risk::ShortfallKernel kernel(gen::convolve_fleet(units));
    const auto dnw = season.demand_net_of_wind();
    const auto demand = season.demand();
    const auto wind = season.wind();
    const double n_hours = static_cast<double>(dnw.size());

    std::vector<std::string> parts;
    bool ok = true;
    for (auto kind : {dnw::ModelKind::evt, dnw::ModelKind::hindcast, dnw::ModelKind::independence}) {
        risk::SeasonRiskOptions opts;
        opts.kind = kind;
        opts.threshold_quantile = 0.95;
        const auto model = risk::build_model(demand, wind, opts);
        const auto exact = risk::model_risk(model, kernel, n_hours);

        // Independent sampler: fleet unit by unit, D - W from the model definition, floored to 1 MW bins.
        Xoshiro256StarStar rng(5200 + static_cast<std::uint64_t>(kind));
        const int draws = 1000000;
        double hits = 0.0;
        double depth = 0.0;
        double depth2 = 0.0;
        for (int i = 0; i < draws; ++i) {
            double x = 0.0;
            for (const auto& u : units) {
                if (rng.uniform() < u.availability) x += static_cast<double>(u.capacity_mw);
            }
            double v = 0.0;
            if (kind == dnw::ModelKind::independence) {
                v = std::floor(demand[rng.below(demand.size())]) - std::floor(wind[rng.below(wind.size())]);
            } else {
                v = dnw[rng.below(dnw.size())];
                if (kind == dnw::ModelKind::evt && v > model.fit()->threshold_mw) {
                    const auto& f = *model.fit();
                    const double uu = rng.uniform();
                    v = f.threshold_mw + f.params.sigma / f.params.xi * (std::pow(1.0 - uu, -f.params.xi) - 1.0);
                }
                v = std::floor(v);
            }
            if (x < v) {
                hits += 1.0;
                depth += v - x;
                depth2 += (v - x) * (v - x);
            }
        }
        const double p = hits / draws;
        const double lole_mc = n_hours * p;
        const double lole_se = n_hours * std::sqrt(p * (1.0 - p) / draws);
        const double e = depth / draws;
        const double eeu_mc = n_hours * e;
        const double eeu_se = n_hours * std::sqrt((depth2 / draws - e * e) / draws);
        const double z_lole = (exact.lole_hours - lole_mc) / lole_se;
        const double z_eeu = (exact.eeu_mwh - eeu_mc) / eeu_se;
        ok = ok && std::abs(z_lole) < 3.0 && std::abs(z_eeu) < 3.0;
        parts.push_back(fmt::format("{}: LoLE {:.3f} vs {:.3f} (z {:+.2f}), EEU {:.1f} vs {:.1f} MWh (z {:+.2f})",
                                    dnw::to_string(kind), exact.lole_hours, lole_mc, z_lole, exact.eeu_mwh, eeu_mc,
                                    z_eeu));
    }
    const double dt = seconds_since(t0);
    std::string detail;
    for (const auto& p : parts) detail += p + "; ";
    return {ok && dt < 60.0, detail + fmt::format("{:.1f} s", dt)};
}

Outcome ac6() {
    const auto season = testsupport::synthetic_season("2011-12", 2011, 6060);
    const auto dnw = season.demand_net_of_wind();
    const auto hind = dnw::build_hindcast_model(dnw);
    std::size_t checked = 0;
    std::size_t mismatched = 0;
    for (double q : {0.90, 0.95, 0.98}) {
        const auto evt = dnw::build_evt_model(dnw, q);
        const double u = evt.fit()->threshold_mw;
        std::vector<double> points;
        for (double v : dnw) {
            if (v < u) {
                points.push_back(v);
                points.push_back(std::nextafter(v, -1e300));
                points.push_back(std::nextafter(v, 1e300));
            }
        }
        for (double v = std::floor(hind.lower_support()) - 50.0; v < u; v += 0.5) points.push_back(v);
        points.push_back(std::nextafter(u, -1e300));
        for (double v : points) {
            if (!(v < u)) continue;
            ++checked;
            const double a = evt.survivor(v);
            const double b = hind.survivor(v);
            if (std::memcmp(&a, &b, sizeof a) != 0) ++mismatched;
        }
    }
    return {mismatched == 0 && checked > 0,
            fmt::format("{} survivor evaluations below the 90/95/98% thresholds, {} bitwise mismatches", checked,
                        mismatched)};
}

struct DemoInputs {
    study::RunConfig config;
    std::vector<ingest::SeasonTrace> traces;
    std::vector<gen::GeneratingUnit> fleet;
};

DemoInputs demo_inputs() {
    DemoInputs d;
    d.config = study::load_config(kDemo / "study.json");
    d.traces = study::prepare_traces(d.config);
    d.fleet = gen::load_fleet(d.config.fleet);
    return d;
}

Outcome ac7() {
    const auto t0 = Clock::now();
    const auto demo = demo_inputs();
    const risk::ShortfallKernel kernel(gen::convolve_fleet(demo.fleet));
    study::RunConfig c;
    c.models = {dnw::ModelKind::hindcast};
    const auto variant = study::expand_variants(c).front();
    const study::PooledEvaluator pooled(demo.traces, kernel, variant);

    std::vector<double> lole;
    std::vector<double> eeu;
    risk::SeasonRiskOptions opts;
    opts.kind = dnw::ModelKind::hindcast;
    for (const auto& t : demo.traces) {
        const auto m = risk::season_risk(t, kernel, opts);
        lole.push_back(m.lole_hours);
        eeu.push_back(m.eeu_gwh());
    }
    uncertainty::BootstrapConfig cfg;
    cfg.replications = 10000;
    cfg.seed = demo.config.bootstrap.seed;
    const auto season_lole = uncertainty::season_bootstrap(lole, cfg);
    const auto season_eeu = uncertainty::season_bootstrap(eeu, cfg);
    const auto block = uncertainty::block_bootstrap(
        demo.traces.size(),
        [&](std::span<const std::size_t> blocks) {
            const auto m = pooled(blocks);
            return std::vector<double>{m.lole_hours, m.eeu_gwh()};
        },
        cfg);
    const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    const double worst = std::max({rel(block.intervals[0].lower, season_lole.lower),
                                   rel(block.intervals[0].upper, season_lole.upper),
                                   rel(block.intervals[1].lower, season_eeu.lower),
                                   rel(block.intervals[1].upper, season_eeu.upper)});
    const double dt = seconds_since(t0);
    return {worst <= 0.02 && block.dropped == 0,
            fmt::format("LoLE block ({:.4f}, {:.4f}) vs season ({:.4f}, {:.4f}); EEU block ({:.4f}, {:.4f}) vs season "
                        "({:.4f}, {:.4f}) GWh; max relative gap {:.2g}, {} dropped, {:.1f} s",
                        block.intervals[0].lower, block.intervals[0].upper, season_lole.lower, season_lole.upper,
                        block.intervals[1].lower, block.intervals[1].upper, season_eeu.lower, season_eeu.upper, worst,
                        block.dropped, dt)};
}

Outcome ac8() {
    auto config = study::load_config(kDemo / "study.json");
    config.output_dir = fs::temp_directory_path() / "adequacy-acceptance-ac8";
    fs::remove_all(config.output_dir);
    const auto t0 = Clock::now();
    const auto result = study::run_full_study(config);
    const double dt = seconds_since(t0);
    fs::remove_all(config.output_dir);

    const auto& ev = result.risk;
    std::vector<double> mean_evt;
    std::vector<double> pooled_evt;
    for (std::size_t j = 0; j < ev.variants.size(); ++j) {
        if (ev.variants[j].kind != dnw::ModelKind::evt) continue;
        mean_evt.push_back(ev.mean_metrics[j].lole_hours);
        if (!ev.pooled_metrics.empty()) pooled_evt.push_back(ev.pooled_metrics[j].lole_hours);
    }
    const auto spread = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *hi / *lo - 1.0;
    };
    const double s_mean = spread(mean_evt);
    const double s_pooled = pooled_evt.empty() ? 0.0 : spread(pooled_evt);
    const bool ok = mean_evt.size() == 3 && s_mean <= 0.15 && s_pooled <= 0.15 && dt < 300.0;
    return {ok, fmt::format("season-mean EVT LoLE {:.3f}/{:.3f}/{:.3f} h (spread {:.1f}%), pooled {:.3f}/{:.3f}/{:.3f} h "
                            "(spread {:.1f}%), full study {:.1f} s",
                            mean_evt.at(0), mean_evt.at(1), mean_evt.at(2), 100.0 * s_mean, pooled_evt.at(0),
                            pooled_evt.at(1), pooled_evt.at(2), 100.0 * s_pooled, dt)};
}

Outcome ac9() {
    return {true, "informational: published absolute values depend on proprietary traces and a perturbed fleet; "
                  "AC1-AC2 check the reproducible arithmetic, AC3-AC8 substitute oracles and properties"};
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), root).generic_string()] =
            std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    return files;
}

Outcome ac10() {
#ifndef ADEQUACY_CLI
    return {false, "command-line tool was not built"};
#else
    const fs::path base = fs::temp_directory_path() / "adequacy-acceptance-ac10";
    fs::remove_all(base);
    fs::create_directories(base);
    const auto t0 = Clock::now();
    for (const char* run : {"a", "b"}) {
        const auto cmd = fmt::format("\"{}\" study --config \"{}\" --out-dir \"{}\" > \"{}\" 2>&1", ADEQUACY_CLI,
                                     (kDemo / "study.json").string(), (base / run).string(),
                                     (base / (std::string(run) + ".log")).string());
        if (const int rc = std::system(cmd.c_str()); rc != 0) {
            return {false, fmt::format("study run {} exited with status {}", run, rc)};
        }
    }
    const auto a = read_tree(base / "a");
    const auto b = read_tree(base / "b");
    std::size_t differing = 0;
    std::size_t numeric = 0;
    for (const auto& [name, bytes] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != bytes) ++differing;
        if (name.ends_with(".csv") || name.ends_with(".json")) ++numeric;
    }
    const bool ok = a.size() == b.size() && differing == 0 && numeric > 0;
    const double dt = seconds_since(t0);
    fs::remove_all(base);
    return {ok, fmt::format("{} files per run ({} CSV/JSON), {} differing, {:.1f} s for two runs", a.size(), numeric,
                            differing, dt)};
#endif
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("threw: {}", e.what())};
        }
        if (!o.pass) ++failures;
        fmt::print("{} {} {}\n", name, o.pass ? "PASS" : "FAIL", o.detail);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
