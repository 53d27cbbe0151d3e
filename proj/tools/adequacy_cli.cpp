// Command-line front end: one subcommand per stage plus `study` for the whole run.

#include <adequacy/csv.hpp>
#include <adequacy/dnw.hpp>
#include <adequacy/error.hpp>
#include <adequacy/evt.hpp>
#include <adequacy/genmodel.hpp>
#include <adequacy/ingest.hpp>
#include <adequacy/report.hpp>
#include <adequacy/risk.hpp>
#include <adequacy/rng.hpp>
#include <adequacy/stats.hpp>
#include <adequacy/study.hpp>
#include <adequacy/uncertainty.hpp>
#include <adequacy/version.hpp>

#ifdef ADEQUACY_CLI11_SINGLE_HEADER
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using adequacy::ConfigError;
using adequacy::DataError;
using nlohmann::ordered_json;
namespace study = adequacy::study;

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

void print_warning(const std::string& message) { std::cerr << "warning: " << message << '\n'; }

ordered_json number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

// Input options shared by the data subcommands. Flags override the config file.
struct InputFlags {
    std::string config;
    std::string traces;
    std::string fleet;
    std::string quantiles;
    std::string reference;
    std::string anchor;
    int weeks = 21;
    double span = 2.0 / 3.0;
    int iterations = 1;
    double wind_capacity = 0.0;
    double rescale_quantile = 0.9;
    bool rescale = false;
    bool allow_gaps = false;

    CLI::Option* o_traces = nullptr;
    CLI::Option* o_fleet = nullptr;
    CLI::Option* o_quantiles = nullptr;
    CLI::Option* o_reference = nullptr;
    CLI::Option* o_anchor = nullptr;
    CLI::Option* o_weeks = nullptr;
    CLI::Option* o_span = nullptr;
    CLI::Option* o_iterations = nullptr;
    CLI::Option* o_wind = nullptr;
    CLI::Option* o_rescale_q = nullptr;
    CLI::Option* o_rescale = nullptr;
    CLI::Option* o_gaps = nullptr;

    void add(CLI::App* app, bool with_fleet) {
        app->add_option("--config", config, "JSON study config supplying defaults");
        o_traces = app->add_option("--traces", traces, "hourly CSV: season,timestamp,demand_mw,wind_mw");
        if (with_fleet) o_fleet = app->add_option("--fleet", fleet, "fleet CSV: name,capacity_mw,availability");
        o_quantiles = app->add_option("--quantiles", quantiles, "quantile history CSV (enables rescaling)");
        o_reference = app->add_option("--ref-season,--reference", reference, "reference season label for rescaling");
        o_rescale = app->add_flag("--rescale", rescale, "rescale demand to the reference season");
        o_rescale_q = app->add_option("--rescale-quantile", rescale_quantile,
                                      "daily-peak quantile used when no history file is given");
        o_weeks = app->add_option("--window-weeks,--weeks", weeks, "season length in weeks");
        o_span = app->add_option("--span", span, "Lowess span for the rescaling curve");
        o_iterations = app->add_option("--lowess-iterations", iterations, "Lowess robustness iterations");
        o_anchor = app->add_option("--anchor", anchor, "season start, e.g. \"last Sunday in October\"");
        o_wind = app->add_option("--wind-capacity", wind_capacity, "installed wind capacity (MW) for sanity checks");
        o_gaps = app->add_flag("--allow-gaps", allow_gaps, "drop incomplete days instead of failing");
    }

    [[nodiscard]] study::RunConfig resolve() const {
        study::RunConfig c = config.empty() ? study::RunConfig{} : study::load_config(config);
        if (o_traces->count()) c.traces = traces;
        if (o_fleet && o_fleet->count()) c.fleet = fleet;
        if (o_quantiles->count()) {
            c.quantile_history = fs::path(quantiles);
            c.rescale = true;
        }
        if (o_rescale->count()) c.rescale = true;
        if (o_reference->count()) c.reference_season = reference;
        if (o_rescale_q->count()) c.rescale_quantile = rescale_quantile;
        if (o_weeks->count()) c.window.weeks = weeks;
        if (o_span->count()) c.lowess_span = span;
        if (o_iterations->count()) c.lowess_iterations = iterations;
        if (o_anchor->count()) c.window.anchor = adequacy::ingest::AnchorRule::parse(anchor);
        if (o_wind->count()) c.wind_capacity_mw = wind_capacity;
        if (o_gaps->count()) c.allow_gaps = true;
        if (c.traces.empty()) throw ConfigError("no traces file given (--traces or config)");
        if (!fs::is_regular_file(c.traces)) throw ConfigError(fmt::format("traces file '{}' not found", c.traces.string()));
        return c;
    }
};

struct ModelFlags {
    std::vector<std::string> models;
    std::vector<double> quantiles;
    CLI::Option* o_models = nullptr;
    CLI::Option* o_quantiles = nullptr;

    void add(CLI::App* app) {
        o_models = app->add_option("--model", models, "evt, hindcast or ind (repeatable)");
        o_quantiles = app->add_option("--threshold-quantile", quantiles, "EVT threshold quantile (repeatable)");
    }

    void apply(study::RunConfig& c) const {
        if (o_models->count()) {
            c.models.clear();
            for (const auto& m : models) c.models.push_back(adequacy::dnw::parse_model_kind(m));
        }
        if (o_quantiles->count()) c.threshold_quantiles = quantiles;
    }
};

std::vector<adequacy::ingest::SeasonTrace> select_seasons(std::vector<adequacy::ingest::SeasonTrace> traces,
                                                          const std::string& season) {
    if (season.empty()) return traces;
    const auto it = std::find_if(traces.begin(), traces.end(), [&](const auto& t) { return t.season_label == season; });
    if (it == traces.end()) throw DataError(fmt::format("season '{}' not present in the traces", season));
    return {*it};
}

std::ofstream open_output(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", path.parent_path().string(), ec.message()));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    return out;
}

void write_pmf(const fs::path& path, const adequacy::DiscretePmf& pmf) {
    auto out = open_output(path);
    out << "v_mw,prob\n";
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        if (pmf.probabilities[k] == 0.0) continue;
        out << pmf.origin_mw + static_cast<std::int64_t>(k) << ',' << adequacy::csv::format_double(pmf.probabilities[k])
            << '\n';
    }
}

// Survivor P(D - W > v) at every integer v of the pmf support.
void write_survivor(const fs::path& path, const adequacy::DiscretePmf& pmf) {
    auto out = open_output(path);
    out << "v_mw,prob\n";
    std::vector<double> above(pmf.size(), 0.0);
    for (std::size_t k = pmf.size(); k-- > 1;) above[k - 1] = above[k] + pmf.probabilities[k];
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        out << pmf.origin_mw + static_cast<std::int64_t>(k) << ',' << adequacy::csv::format_double(above[k]) << '\n';
    }
}

void emit_tables(const std::vector<std::pair<std::string, adequacy::report::MetricTable>>& tables,
                 const std::string& out_dir) {
    namespace report = adequacy::report;
    for (const auto& [stem, table] : tables) {
        if (out_dir.empty()) {
            std::cout << table.title << '\n';
            report::emit_table(table, report::TableFormat::text, std::cout, print_warning);
            std::cout << '\n';
            continue;
        }
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", out_dir, ec.message()));
        for (auto format : {report::TableFormat::text, report::TableFormat::csv, report::TableFormat::json}) {
            report::emit_table(table, format, fs::path(out_dir) / fmt::format("{}.{}", stem, report::extension(format)),
                               print_warning);
        }
    }
}

adequacy::risk::ShortfallKernel fleet_kernel(const study::RunConfig& c) {
    if (c.fleet.empty()) throw ConfigError("no fleet file given (--fleet or config)");
    adequacy::gen::ConvolutionOptions conv;
    conv.tail_tolerance = c.tail_tolerance;
    return adequacy::risk::ShortfallKernel(adequacy::gen::convolve_fleet(adequacy::gen::load_fleet(c.fleet), conv));
}

// ---- subcommands -------------------------------------------------------------

struct IngestCmd {
    InputFlags in;
    std::string out;

    int run() const {
        const auto c = in.resolve();
        const auto traces = study::prepare_traces(c, print_warning);
        ordered_json doc = ordered_json::array();
        for (const auto& t : traces) {
            const auto d = t.demand();
            const auto w = t.wind();
            const auto net = t.demand_net_of_wind();
            doc.push_back({{"season", t.season_label},
                           {"hours", t.hours.size()},
                           {"first_hour", adequacy::ingest::format_timestamp(t.hours.front().timestamp)},
                           {"last_hour", adequacy::ingest::format_timestamp(t.hours.back().timestamp)},
                           {"rescale_factor", t.rescale_factor},
                           {"mean_demand_mw", adequacy::mean(d)},
                           {"peak_demand_mw", *std::max_element(d.begin(), d.end())},
                           {"mean_wind_mw", adequacy::mean(w)},
                           {"peak_dnw_mw", *std::max_element(net.begin(), net.end())}});
        }
        std::cout << doc.dump(2) << '\n';
        if (!out.empty()) {
            auto f = open_output(out);
            adequacy::ingest::write_traces(f, traces);
        }
        return 0;
    }
};

struct FitCmd {
    InputFlags in;
    std::string season;
    double quantile = 0.95;
    std::optional<double> threshold;
    std::string scan_out;
    std::string qq_out;
    std::string scan;  // lo:hi:step in MW
    std::size_t scan_points = 25;

    [[nodiscard]] std::vector<double> scan_grid(std::span<const double> sorted, const study::RunConfig& c) const {
        if (!scan.empty()) {
            const auto parts = adequacy::csv::split(scan, ':');
            if (parts.size() != 3) throw ConfigError(fmt::format("--scan expects lo:hi:step, got '{}'", scan));
            const auto value = [&](const std::string& f) {
                try {
                    return adequacy::csv::parse_double(f, "--scan");
                } catch (const DataError& e) {
                    throw ConfigError(e.what());
                }
            };
            return adequacy::evt::threshold_grid(value(parts[0]), value(parts[1]), value(parts[2]));
        }
        const double lo = adequacy::quantile_type7_sorted(sorted, c.scan_lo_quantile);
        const double hi = adequacy::quantile_type7_sorted(sorted, c.scan_hi_quantile);
        std::vector<double> grid;
        for (std::size_t i = 0; i < scan_points; ++i) {
            grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(scan_points - 1));
        }
        return grid;
    }

    static ordered_json fit_json(const std::string& label, const adequacy::evt::GpdFit& f) {
        return {{"season", label},
                {"threshold_mw", f.threshold_mw},
                {"sigma", f.params.sigma},
                {"xi", f.params.xi},
                {"se_sigma", number(f.se_sigma)},
                {"se_xi", number(f.se_xi)},
                {"sigma_star", f.sigma_star},
                {"n_exceedances", f.n_exceedances},
                {"n_total", f.n_total},
                {"log_likelihood", f.log_likelihood}};
    }

    int run() const {
        namespace evt = adequacy::evt;
        const auto c = in.resolve();
        auto traces = select_seasons(study::prepare_traces(c, print_warning), season);
        std::vector<std::pair<std::string, std::vector<double>>> samples;
        for (const auto& t : traces) samples.emplace_back(t.season_label, t.demand_net_of_wind());
        if (season.empty() && traces.size() > 1) samples.emplace_back("All", adequacy::ingest::pool(traces).demand_net_of_wind());

        ordered_json doc = ordered_json::array();
        for (auto& [label, x] : samples) {
            std::sort(x.begin(), x.end());
            const double u = threshold ? *threshold : evt::select_threshold(x, quantile);
            const auto f = evt::fit_above_threshold(x, u);
            doc.push_back(fit_json(label, f));
            if (!qq_out.empty()) {
                auto out = open_output(fs::path(qq_out) / fmt::format("{}.csv", label));
                out << "model_mw,empirical_mw\n";
                for (const auto& p : evt::qq_points(f, evt::excesses_over(x, u))) {
                    out << adequacy::csv::format_double(p.model_mw) << ',' << adequacy::csv::format_double(p.empirical_mw) << '\n';
                }
            }
            if (!scan_out.empty()) {
                auto out = open_output(fs::path(scan_out) / fmt::format("{}.csv", label));
                out << study::scan_csv(evt::threshold_scan(x, scan_grid(x, c)));
            }
        }
        std::cout << doc.dump(2) << '\n';
        return 0;
    }
};

struct DnwCmd {
    InputFlags in;
    std::string model = "evt";
    double quantile = 0.95;
    std::string season;
    bool per_season = false;
    std::string out;

    int run() const {
        namespace dnw = adequacy::dnw;
        const auto c = in.resolve();
        const auto traces = select_seasons(study::prepare_traces(c, print_warning), season);
        std::vector<adequacy::ingest::SeasonTrace> targets;
        if (per_season || traces.size() == 1) targets = traces;
        else targets.push_back(adequacy::ingest::pool(traces));

        adequacy::risk::SeasonRiskOptions opts;
        opts.kind = dnw::parse_model_kind(model);
        opts.threshold_quantile = quantile;
        ordered_json doc = ordered_json::array();
        for (const auto& trace : targets) {
            const auto d = trace.demand();
            const auto w = trace.wind();
            const auto m = adequacy::risk::build_model(d, w, opts);
            const auto pmf = m.kind() == dnw::ModelKind::independence ? m.pmf() : dnw::discretize(m);
            ordered_json entry{{"season", trace.season_label},
                               {"model", std::string(dnw::to_string(m.kind()))},
                               {"hours", trace.hours.size()},
                               {"support_lo_mw", pmf.origin_mw},
                               {"support_hi_mw", pmf.last_mw() + 1},
                               {"mean_mw", pmf.mean()}};
            if (m.fit()) {
                entry["threshold_mw"] = m.fit()->threshold_mw;
                entry["sigma"] = m.fit()->params.sigma;
                entry["xi"] = m.fit()->params.xi;
                entry["upper_endpoint_mw"] = number(m.upper_support());
            }
            doc.push_back(std::move(entry));
            if (!out.empty()) {
                write_survivor(fs::path(out) / fmt::format("{}_{}.csv", trace.season_label, dnw::to_string(m.kind())),
                               pmf);
            }
        }
        std::cout << doc.dump(2) << '\n';
        return 0;
    }
};

struct FleetCmd {
    std::string fleet;
    std::string out;
    double tolerance = 1e-15;

    int run() const {
        namespace gen = adequacy::gen;
        const auto units = gen::load_fleet(fleet);
        gen::ConvolutionOptions opts;
        opts.tail_tolerance = tolerance;
        gen::ConvolutionStats stats;
        const auto pmf = gen::convolve_fleet(units, opts, &stats);
        const auto s = gen::summarize(units);
        ordered_json doc{{"units", s.units},
                         {"total_capacity_mw", s.total_capacity_mw},
                         {"mean_available_mw", s.mean_available_mw},
                         {"pmf_lo_mw", pmf.origin_mw},
                         {"pmf_hi_mw", pmf.last_mw()},
                         {"pmf_mean_mw", pmf.mean()},
                         {"trimmed_mass", stats.trimmed_mass}};
        std::cout << doc.dump(2) << '\n';
        if (!out.empty()) write_pmf(out, pmf);
        return 0;
    }
};

struct BootstrapFlags {
    std::optional<std::uint64_t> seed;
    std::size_t reps = 10000;
    double level = 0.95;
    CLI::Option* o_reps = nullptr;
    CLI::Option* o_level = nullptr;

    void add(CLI::App* app) {
        app->add_option("--seed", seed, "bootstrap seed");
        o_reps = app->add_option("--reps", reps, "bootstrap replications");
        o_level = app->add_option("--level", level, "confidence level");
    }

    void apply(study::RunConfig& c) const {
        if (seed) {
            c.bootstrap.seed = *seed;
            c.seed_set = true;
        }
        if (o_reps->count()) c.bootstrap.replications = reps;
        if (o_level->count()) c.bootstrap.ci_level = level;
    }
};

struct RiskCmd {
    InputFlags in;
    ModelFlags models;
    BootstrapFlags boot;
    bool pooled = false;
    std::string out_dir;

    int run() const {
        auto c = in.resolve();
        models.apply(c);
        boot.apply(c);
        c.validate();
        const auto traces = study::prepare_traces(c, print_warning);
        const auto kernel = fleet_kernel(c);
        const auto variants = study::expand_variants(c);
        study::RiskOptions ro;
        ro.pooled = pooled;
        if (c.seed_set) ro.bootstrap = c.bootstrap;
        const auto ev = study::evaluate_risk(traces, kernel, variants, ro, print_warning);
        std::vector<std::pair<std::string, adequacy::report::MetricTable>> tables{
            {"lole_by_season", study::season_table(ev, study::Metric::lole)},
            {"eeu_by_season", study::season_table(ev, study::Metric::eeu)}};
        if (pooled) tables.emplace_back("pooled", study::pooled_table(ev));
        emit_tables(tables, out_dir);
        return 0;
    }
};

struct UncertaintyCmd {
    InputFlags in;
    ModelFlags models;
    BootstrapFlags boot;
    std::string metric = "lole";
    std::string mode = "season";
    std::vector<double> values;

    int run() const {
        namespace unc = adequacy::uncertainty;
        if (metric != "lole" && metric != "eeu") throw ConfigError(fmt::format("unknown metric '{}'", metric));
        if (mode != "season" && mode != "block") throw ConfigError(fmt::format("unknown mode '{}'", mode));

        study::RunConfig c;
        const bool from_values = !values.empty();
        if (!from_values) {
            c = in.resolve();
            models.apply(c);
        }
        boot.apply(c);
        if (!c.seed_set) throw ConfigError("--seed is required unless the config supplies one");
        c.bootstrap.validate();

        ordered_json doc{{"metric", metric}, {"mode", mode}};
        if (from_values) {
            if (mode != "season") throw ConfigError("--values supports --mode season only");
            const auto ci = unc::season_bootstrap(values, c.bootstrap);
            doc["point_estimate"] = adequacy::mean(values);
            doc["ci"] = {{"lower", ci.lower}, {"upper", ci.upper}, {"level", ci.level}};
        } else {
            c.validate();
            const auto traces = study::prepare_traces(c, print_warning);
            const auto kernel = fleet_kernel(c);
            study::RiskOptions ro;
            ro.pooled = mode == "block";
            ro.bootstrap = c.bootstrap;
            const auto ev = study::evaluate_risk(traces, kernel, study::expand_variants(c), ro, print_warning);
            auto results = ordered_json::array();
            for (std::size_t j = 0; j < ev.variants.size(); ++j) {
                const bool lole = metric == "lole";
                const auto& point = mode == "block" ? ev.pooled_metrics[j] : ev.mean_metrics[j];
                const auto& ci = mode == "block" ? (lole ? ev.pooled_lole_ci[j] : ev.pooled_eeu_ci[j])
                                                 : (lole ? ev.mean_lole_ci[j] : ev.mean_eeu_ci[j]);
                results.push_back({{"variant", ev.variants[j].name},
                                   {"point_estimate", lole ? point.lole_hours : point.eeu_gwh()},
                                   {"ci", {{"lower", number(ci.lower)}, {"upper", number(ci.upper)}, {"level", ci.level}}}});
            }
            doc["unit"] = metric == "lole" ? "hours per season" : "GWh per season";
            doc["results"] = std::move(results);
        }
        doc["replications"] = c.bootstrap.replications;
        doc["seed"] = c.bootstrap.seed;
        doc["rng"] = adequacy::Xoshiro256StarStar::kName;
        std::cout << doc.dump(2) << '\n';
        return 0;
    }
};

struct StudyCmd {
    std::string config;
    BootstrapFlags boot;
    std::string out_dir;

    int run() const {
        auto c = study::load_config(config);
        boot.apply(c);
        if (!out_dir.empty()) c.output_dir = out_dir;
        if (!c.seed_set) throw ConfigError("--seed is required unless the config supplies one");
        const auto result = study::run_full_study(c, print_warning);
        ordered_json doc{{"status", "ok"},
                         {"output_dir", c.output_dir.string()},
                         {"config_hash", result.config_hash},
                         {"outputs", result.outputs.size()}};
        std::cout << doc.dump(2) << '\n';
        return 0;
    }
};

int exit_code(const adequacy::Error& e) {
    switch (e.kind()) {
        case adequacy::ErrorKind::config: return kExitConfig;
        case adequacy::ErrorKind::data: return kExitData;
        case adequacy::ErrorKind::numerical: return kExitNumerical;
    }
    return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Capacity adequacy risk with extreme value models of demand net of wind", "adequacy"};
    app.set_version_flag("--version", std::string(adequacy::version()));
    app.require_subcommand(1);

    IngestCmd ingest;
    auto* s_ingest = app.add_subcommand("ingest", "window and rescale hourly traces, print a season summary");
    ingest.in.add(s_ingest, false);
    s_ingest->add_option("--out", ingest.out, "write the prepared traces as CSV");

    FitCmd fit;
    auto* s_fit = app.add_subcommand("fit", "fit the GPD above a threshold for each season and pooled");
    fit.in.add(s_fit, false);
    s_fit->add_option("--season", fit.season, "restrict to one season");
    s_fit->add_option("--threshold-quantile", fit.quantile, "threshold as a sample quantile");
    s_fit->add_option("--threshold", fit.threshold, "threshold in MW (overrides the quantile)");
    s_fit->add_option("--scan-out", fit.scan_out, "directory for threshold-scan CSVs");
    s_fit->add_option("--scan", fit.scan, "scan thresholds lo:hi:step in MW (default: quantile range)");
    s_fit->add_option("--scan-points", fit.scan_points, "thresholds per scan")->check(CLI::Range(2, 10000));
    s_fit->add_option("--qq-out", fit.qq_out, "directory for QQ CSVs");

    DnwCmd dnwc;
    auto* s_dnw = app.add_subcommand("dnw", "build and discretize a demand-net-of-wind model");
    dnwc.in.add(s_dnw, false);
    s_dnw->add_option("--model", dnwc.model, "evt, hindcast or ind");
    s_dnw->add_option("--threshold-quantile", dnwc.quantile, "EVT threshold quantile");
    s_dnw->add_option("--season", dnwc.season, "one season only");
    auto* f_per = s_dnw->add_flag("--per-season", dnwc.per_season, "one model per season");
    s_dnw->add_flag("--pooled", "one model on the pooled seasons (default)")->excludes(f_per);
    s_dnw->add_option("--out", dnwc.out, "directory for survivor CSVs (v_mw,prob)");

    FleetCmd fleet;
    auto* s_fleet = app.add_subcommand("fleet", "convolve the conventional fleet");
    s_fleet->add_option("--fleet", fleet.fleet, "fleet CSV")->required();
    s_fleet->add_option("--out", fleet.out, "write the capacity pmf as CSV");
    s_fleet->add_option("--tail-tolerance", fleet.tolerance, "per-unit trimming tolerance");
    s_fleet->add_flag("--summary", "print the fleet summary (always on)");

    RiskCmd riskc;
    auto* s_risk = app.add_subcommand("risk", "LoLE and EEU per season, mean and optional pooled estimate");
    riskc.in.add(s_risk, true);
    riskc.models.add(s_risk);
    riskc.boot.add(s_risk);
    s_risk->add_flag("--pooled", riskc.pooled, "add the pooled table");
    s_risk->add_option("--out-dir", riskc.out_dir, "write txt/csv/json tables here instead of stdout");

    UncertaintyCmd unc;
    auto* s_unc = app.add_subcommand("uncertainty", "bootstrap confidence intervals for long-run metrics");
    unc.in.add(s_unc, true);
    unc.models.add(s_unc);
    unc.boot.add(s_unc);
    s_unc->add_option("--metric", unc.metric, "lole or eeu");
    s_unc->add_option("--mode", unc.mode, "season or block");
    s_unc->add_option("--values", unc.values, "per-season values to bootstrap directly")->delimiter(',');

    StudyCmd studyc;
    auto* s_study = app.add_subcommand("study", "run the full study described by a config file");
    s_study->add_option("--config", studyc.config, "study config JSON")->required();
    studyc.boot.add(s_study);
    s_study->add_option("--out-dir", studyc.out_dir, "output directory (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (s_ingest->parsed()) return ingest.run();
        if (s_fit->parsed()) return fit.run();
        if (s_dnw->parsed()) return dnwc.run();
        if (s_fleet->parsed()) return fleet.run();
        if (s_risk->parsed()) return riskc.run();
        if (s_unc->parsed()) return unc.run();
        if (s_study->parsed()) return studyc.run();
    } catch (const adequacy::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
