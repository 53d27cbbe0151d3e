#include "adequacy/study.hpp"

#include "adequacy/csv.hpp"
#include "adequacy/error.hpp"
#include "adequacy/genmodel.hpp"
#include "adequacy/parallel.hpp"
#include "adequacy/report.hpp"
#include "adequacy/rng.hpp"
#include "adequacy/stats.hpp"
#include "adequacy/version.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace adequacy {

std::string_view version() noexcept { return ADEQUACY_VERSION; }

}  // namespace adequacy

namespace adequacy::study {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void rethrow_with(const Error& e, const std::string& prefix) {
    const std::string message = prefix + e.what();
    switch (e.kind()) {
        case ErrorKind::config: throw ConfigError(message);
        case ErrorKind::data: throw DataError(message);
        case ErrorKind::numerical: throw NumericalError(message);
    }
    throw NumericalError(message);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(fmt::format("cannot read '{}'", path.string()));
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

// ---- config ---------------------------------------------------------------

template <typename T>
T get_as(const json& value, std::string_view key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError(fmt::format("config key '{}' has the wrong type", key));
    }
}

void reject_unknown(const json& object, std::initializer_list<std::string_view> known, std::string_view where) {
    for (const auto& [key, _] : object.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(fmt::format("unknown config key '{}{}'", where, key));
        }
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

// ---- helpers for outputs ---------------------------------------------------

std::string file_label(std::string_view label) {
    std::string out;
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? std::string("_") : out;
}

std::string num(double v) { return std::isnan(v) ? std::string("NA") : csv::format_double(v); }

std::string percent(double q) { return fmt::format("{:g}%", q * 100.0); }

class OutputWriter {
public:
    explicit OutputWriter(fs::path root) : root_(std::move(root)) {}

    fs::path path(const std::string& relative) {
        const auto p = root_ / relative;
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", p.parent_path().string(), ec.message()));
        written_.push_back(relative);
        return p;
    }

    void text(const std::string& relative, const std::string& contents) {
        const auto p = path(relative);
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError(fmt::format("cannot write '{}'", p.string()));
        out << contents;
        if (!out.flush()) throw ConfigError(fmt::format("failed writing '{}'", p.string()));
    }

    void table(const std::string& stem, const report::MetricTable& t, const ingest::WarningSink& warn) {
        for (auto format : {report::TableFormat::text, report::TableFormat::csv, report::TableFormat::json}) {
            const auto rel = fmt::format("{}.{}", stem, report::extension(format));
            report::emit_table(t, format, path(rel), warn);
        }
    }

    [[nodiscard]] const std::vector<std::string>& written() const noexcept { return written_; }

private:
    fs::path root_;
    std::vector<std::string> written_;
};

}  // namespace

std::string scan_csv(const evt::ThresholdScan& scan) {
    std::ostringstream out;
    out << "threshold_mw,sigma,xi,sigma_star,se_sigma,se_xi,n_exceed,se_sigma_star,status\n";
    for (const auto& e : scan.entries) {
        out << num(e.threshold_mw) << ',';
        if (e.fit) {
            const auto& f = *e.fit;
            out << num(f.params.sigma) << ',' << num(f.params.xi) << ',' << num(f.sigma_star) << ','
                << num(f.se_sigma) << ',' << num(f.se_xi) << ',' << f.n_exceedances << ','
                << num(f.se_sigma_star()) << ",ok\n";
        } else {
            std::string reason = e.failure;
            std::replace(reason.begin(), reason.end(), ',', ';');
            out << "NA,NA,NA,NA,NA,NA,NA,failed: " << reason << '\n';
        }
    }
    return out.str();
}

namespace {

std::string qq_csv(std::span<const double> sorted_sample, double q) {
    const double u = evt::select_threshold(sorted_sample, q);
    const auto fit = evt::fit_above_threshold(sorted_sample, u);
    const auto points = evt::qq_points(fit, evt::excesses_over(sorted_sample, u));
    std::ostringstream out;
    out << "model_mw,empirical_mw\n";
    for (const auto& p : points) out << num(p.model_mw) << ',' << num(p.empirical_mw) << '\n';
    return out.str();
}

std::string survivor_csv(const dnw::TailModel& model, std::span<const double> sorted_dnw) {
    constexpr double kStep = 10.0;
    const double start = std::floor(quantile_type7_sorted(sorted_dnw, 0.8) / kStep) * kStep;
    const double stop = std::min(model.upper_support(), sorted_dnw.back() + 10000.0);
    std::ostringstream out;
    out << "v_mw,prob\n";
    for (double v = start; v <= stop + kStep; v += kStep) {
        const double s = model.survivor(v);
        out << num(v) << ',' << num(s) << '\n';
        if (s < 1e-10) break;
    }
    return out.str();
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return out;
}

}  // namespace

// ---- RunConfig ---------------------------------------------------------------

void RunConfig::validate(bool check_paths) const {
    if (traces.empty()) throw ConfigError("config needs a traces file");
    if (fleet.empty()) throw ConfigError("config needs a fleet file");
    if (models.empty()) throw ConfigError("config selects no model kinds");
    {
        std::set<dnw::ModelKind> unique(models.begin(), models.end());
        if (unique.size() != models.size()) throw ConfigError("config lists a model kind twice");
    }
    const bool has_evt = std::find(models.begin(), models.end(), dnw::ModelKind::evt) != models.end();
    if (has_evt && threshold_quantiles.empty()) throw ConfigError("evt model selected without threshold quantiles");
    for (double q : threshold_quantiles) {
        if (!(q > 0.5 && q < 1.0)) throw ConfigError(fmt::format("threshold quantile {} outside (0.5, 1)", q));
    }
    if (!(qq_quantile > 0.5 && qq_quantile < 1.0)) throw ConfigError("qq quantile must lie in (0.5, 1)");
    if (!(scan_lo_quantile > 0.0 && scan_lo_quantile < scan_hi_quantile && scan_hi_quantile < 1.0)) {
        throw ConfigError("scan quantiles must satisfy 0 < lo < hi < 1");
    }
    if (scan_points < 2) throw ConfigError("scan needs at least two thresholds");
    if (!(rescale_quantile > 0.0 && rescale_quantile < 1.0)) throw ConfigError("rescale quantile must lie in (0, 1)");
    if (!(lowess_span > 0.0 && lowess_span <= 1.0)) throw ConfigError("lowess span must lie in (0, 1]");
    if (lowess_iterations < 0) throw ConfigError("lowess iterations must be non-negative");
    if (window.weeks < 1) throw ConfigError("season must span at least one week");
    if (!(tail_tolerance >= 0.0 && tail_tolerance < 1e-6)) throw ConfigError("tail tolerance must lie in [0, 1e-6)");
    bootstrap.validate();
    if (check_paths) {
        for (const auto* p : {&traces, &fleet}) {
            if (!fs::is_regular_file(*p)) throw ConfigError(fmt::format("input file '{}' not found", p->string()));
        }
        if (quantile_history && !fs::is_regular_file(*quantile_history)) {
            throw ConfigError(fmt::format("input file '{}' not found", quantile_history->string()));
        }
    }
}

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("malformed config JSON: {}", e.what()));
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc,
                   {"traces", "fleet", "quantile_history", "output_dir", "rescale", "reference_season",
                    "rescale_quantile", "lowess_span", "lowess_iterations", "season", "allow_gaps", "wind_capacity_mw",
                    "models", "threshold_quantiles", "pooled", "bootstrap", "scan", "qq_quantile", "tail_tolerance"},
                   "");
    RunConfig c;
    const auto path_of = [&](const char* key) { return resolve(base_dir, get_as<std::string>(doc.at(key), key)); };
    if (doc.contains("traces")) c.traces = path_of("traces");
    if (doc.contains("fleet")) c.fleet = path_of("fleet");
    if (doc.contains("quantile_history")) c.quantile_history = path_of("quantile_history");
    if (doc.contains("output_dir")) c.output_dir = path_of("output_dir");
    if (doc.contains("rescale")) c.rescale = get_as<bool>(doc["rescale"], "rescale");
    if (doc.contains("reference_season")) c.reference_season = get_as<std::string>(doc["reference_season"], "reference_season");
    if (doc.contains("rescale_quantile")) c.rescale_quantile = get_as<double>(doc["rescale_quantile"], "rescale_quantile");
    if (doc.contains("lowess_span")) c.lowess_span = get_as<double>(doc["lowess_span"], "lowess_span");
    if (doc.contains("lowess_iterations")) c.lowess_iterations = get_as<int>(doc["lowess_iterations"], "lowess_iterations");
    if (doc.contains("season")) {
        const auto& s = doc["season"];
        if (!s.is_object()) throw ConfigError("config key 'season' must be an object");
        reject_unknown(s, {"weeks", "anchor"}, "season.");
        if (s.contains("weeks")) c.window.weeks = get_as<int>(s["weeks"], "season.weeks");
        if (s.contains("anchor")) c.window.anchor = ingest::AnchorRule::parse(get_as<std::string>(s["anchor"], "season.anchor"));
    }
    if (doc.contains("allow_gaps")) c.allow_gaps = get_as<bool>(doc["allow_gaps"], "allow_gaps");
    if (doc.contains("wind_capacity_mw")) c.wind_capacity_mw = get_as<double>(doc["wind_capacity_mw"], "wind_capacity_mw");
    if (doc.contains("models")) {
        c.models.clear();
        for (const auto& m : get_as<std::vector<std::string>>(doc["models"], "models")) c.models.push_back(dnw::parse_model_kind(m));
    }
    if (doc.contains("threshold_quantiles")) {
        c.threshold_quantiles = get_as<std::vector<double>>(doc["threshold_quantiles"], "threshold_quantiles");
    }
    if (doc.contains("pooled")) c.pooled = get_as<bool>(doc["pooled"], "pooled");
    if (doc.contains("bootstrap")) {
        const auto& b = doc["bootstrap"];
        if (!b.is_object()) throw ConfigError("config key 'bootstrap' must be an object");
        reject_unknown(b, {"replications", "seed", "ci_level"}, "bootstrap.");
        if (b.contains("replications")) c.bootstrap.replications = get_as<std::size_t>(b["replications"], "bootstrap.replications");
        if (b.contains("ci_level")) c.bootstrap.ci_level = get_as<double>(b["ci_level"], "bootstrap.ci_level");
        if (b.contains("seed")) {
            if (!b["seed"].is_number_integer()) throw ConfigError("bootstrap.seed must be a non-negative integer");
            if (b["seed"].is_number_unsigned()) c.bootstrap.seed = b["seed"].get<std::uint64_t>();
            else if (b["seed"].get<std::int64_t>() >= 0) c.bootstrap.seed = static_cast<std::uint64_t>(b["seed"].get<std::int64_t>());
            else throw ConfigError("bootstrap.seed must be a non-negative integer");
            c.seed_set = true;
        }
    }
    if (doc.contains("scan")) {
        const auto& s = doc["scan"];
        if (!s.is_object()) throw ConfigError("config key 'scan' must be an object");
        reject_unknown(s, {"lo_quantile", "hi_quantile", "points"}, "scan.");
        if (s.contains("lo_quantile")) c.scan_lo_quantile = get_as<double>(s["lo_quantile"], "scan.lo_quantile");
        if (s.contains("hi_quantile")) c.scan_hi_quantile = get_as<double>(s["hi_quantile"], "scan.hi_quantile");
        if (s.contains("points")) c.scan_points = get_as<std::size_t>(s["points"], "scan.points");
    }
    if (doc.contains("qq_quantile")) c.qq_quantile = get_as<double>(doc["qq_quantile"], "qq_quantile");
    if (doc.contains("tail_tolerance")) c.tail_tolerance = get_as<double>(doc["tail_tolerance"], "tail_tolerance");
    return c;
}

RunConfig load_config(const fs::path& path) {
    return parse_config(read_file(path), path.parent_path());
}

std::string config_hash(const RunConfig& c) {
    std::string canon;
    const auto add = [&](std::string_view key, const std::string& value) { canon += fmt::format("{}={}\n", key, value); };
    add("rescale", c.rescale ? "1" : "0");
    add("reference_season", c.reference_season);
    add("rescale_quantile", num(c.rescale_quantile));
    add("lowess_span", num(c.lowess_span));
    add("lowess_iterations", std::to_string(c.lowess_iterations));
    add("weeks", std::to_string(c.window.weeks));
    add("anchor", c.window.anchor.to_string());
    add("allow_gaps", c.allow_gaps ? "1" : "0");
    add("wind_capacity_mw", num(c.wind_capacity_mw));
    for (auto m : c.models) add("model", std::string(dnw::to_string(m)));
    for (double q : c.threshold_quantiles) add("threshold_quantile", num(q));
    add("pooled", c.pooled ? "1" : "0");
    add("replications", std::to_string(c.bootstrap.replications));
    add("seed", std::to_string(c.bootstrap.seed));
    add("ci_level", num(c.bootstrap.ci_level));
    add("scan", fmt::format("{} {} {}", num(c.scan_lo_quantile), num(c.scan_hi_quantile), c.scan_points));
    add("qq_quantile", num(c.qq_quantile));
    add("tail_tolerance", num(c.tail_tolerance));
    std::uint64_t h = fnv1a(canon);
    const auto add_file = [&](const char* key, const fs::path& p) {
        h = fnv1a(key, h);
        h = fnv1a(read_file(p), h);
    };
    add_file("traces", c.traces);
    add_file("fleet", c.fleet);
    if (c.quantile_history) add_file("quantile_history", *c.quantile_history);
    return fmt::format("{:016x}", h);
}

std::vector<Variant> expand_variants(const RunConfig& config) {
    std::vector<Variant> out;
    for (auto kind : config.models) {
        switch (kind) {
            case dnw::ModelKind::evt:
                for (double q : config.threshold_quantiles) {
                    out.push_back({kind, q, fmt::format("EVT - {}", percent(q)), fmt::format("evt{:g}", q * 100.0)});
                }
                break;
            case dnw::ModelKind::hindcast: out.push_back({kind, 0.0, "Hindcast", "hindcast"}); break;
            case dnw::ModelKind::independence: out.push_back({kind, 0.0, "Ind", "ind"}); break;
        }
    }
    return out;
}

std::vector<ingest::SeasonTrace> prepare_traces(const RunConfig& config, const ingest::WarningSink& warn) {
    ingest::LoadOptions options;
    options.window = config.window;
    options.allow_gaps = config.allow_gaps;
    options.wind_capacity_mw = config.wind_capacity_mw;
    auto traces = ingest::load_traces(config.traces, options, warn);
    if (traces.empty()) throw DataError(fmt::format("'{}' holds no season data", config.traces.string()));
    if (!config.rescale) return traces;

    std::vector<ingest::SeasonQuantile> history;
    if (config.quantile_history) {
        history = ingest::load_quantile_history(*config.quantile_history);
    } else {
        for (const auto& t : traces) {
            history.push_back({t.season_label, ingest::daily_peak_quantile(t, config.rescale_quantile)});
        }
    }
    const std::string reference = config.reference_season.empty() ? traces.back().season_label : config.reference_season;
    const auto factors =
        ingest::compute_rescale_factors(history, reference, config.lowess_span, config.lowess_iterations);
    for (auto& t : traces) {
        const auto it = factors.find(t.season_label);
        if (it == factors.end()) {
            throw DataError(fmt::format("quantile history has no entry for season '{}'", t.season_label));
        }
        t = ingest::apply_rescaling(std::move(t), it->second);
    }
    return traces;
}

// ---- PooledEvaluator ---------------------------------------------------------

PooledEvaluator::PooledEvaluator(std::span<const ingest::SeasonTrace> seasons, const risk::ShortfallKernel& kernel,
                                 Variant variant, evt::FitOptions fit)
    : kernel_(&kernel), variant_(std::move(variant)), fit_(fit) {
    if (seasons.empty()) throw DataError("pooled evaluation needs at least one season");
    for (const auto& s : seasons) {
        auto net = s.demand_net_of_wind();
        std::sort(net.begin(), net.end());
        dnw_.push_back(std::move(net));
        demand_.push_back(s.demand());
        wind_.push_back(s.wind());
        hours_.push_back(static_cast<double>(s.hours.size()));
    }
    if (variant_.kind != dnw::ModelKind::independence) return;

    const std::size_t n = seasons.size();
    std::vector<DiscretePmf> d_pmf;
    std::vector<DiscretePmf> w_pmf;
    for (std::size_t i = 0; i < n; ++i) {
        d_pmf.push_back(dnw::empirical_pmf(demand_[i]));
        w_pmf.push_back(dnw::empirical_pmf(wind_[i]));
    }
    pair_p_.assign(n * n, 0.0);
    pair_depth_.assign(n * n, 0.0);
    parallel_for(n * n, [&](std::size_t k) {
        const auto m = risk::independence_metrics(kernel, d_pmf[k / n], w_pmf[k % n], 1.0);
        pair_p_[k] = m.p_shortfall;
        pair_depth_[k] = m.eeu_mwh;
    });
}

dnw::TailModel PooledEvaluator::model(std::span<const std::size_t> blocks) const {
    if (blocks.empty()) throw DataError("pooled evaluation of an empty block set");
    if (variant_.kind == dnw::ModelKind::independence) {
        std::vector<double> d;
        std::vector<double> w;
        for (auto b : blocks) {
            d.insert(d.end(), demand_.at(b).begin(), demand_.at(b).end());
            w.insert(w.end(), wind_.at(b).begin(), wind_.at(b).end());
        }
        return dnw::build_independence_model(d, w);
    }
    std::vector<double> pooled;
    for (auto b : blocks) {
        const auto mid = static_cast<std::ptrdiff_t>(pooled.size());
        pooled.insert(pooled.end(), dnw_.at(b).begin(), dnw_.at(b).end());
        std::inplace_merge(pooled.begin(), pooled.begin() + mid, pooled.end());
    }
    if (variant_.kind == dnw::ModelKind::hindcast) return dnw::build_hindcast_model(std::move(pooled));
    return dnw::build_evt_model(std::move(pooled), variant_.threshold_quantile, fit_);
}

risk::RiskMetrics PooledEvaluator::evaluate_direct(std::span<const std::size_t> blocks) const {
    double hours = 0.0;
    for (auto b : blocks) hours += hours_.at(b);
    const double n_hours = hours / static_cast<double>(blocks.size());
    return risk::model_risk(model(blocks), *kernel_, n_hours);
}

risk::RiskMetrics PooledEvaluator::operator()(std::span<const std::size_t> blocks) const {
    if (variant_.kind != dnw::ModelKind::independence) return evaluate_direct(blocks);
    if (blocks.empty()) throw DataError("pooled evaluation of an empty block set");
    const std::size_t n = dnw_.size();
    std::vector<double> weight(n, 0.0);
    double total = 0.0;
    for (auto b : blocks) {
        weight.at(b) += hours_[b];
        total += hours_[b];
    }
    for (auto& w : weight) w /= total;
    double p = 0.0;
    double depth = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (weight[j] == 0.0) continue;
            p += weight[i] * weight[j] * pair_p_[i * n + j];
            depth += weight[i] * weight[j] * pair_depth_[i * n + j];
        }
    }
    risk::RiskMetrics m;
    m.n_hours = total / static_cast<double>(blocks.size());
    m.p_shortfall = p;
    m.lole_hours = m.n_hours * p;
    m.eeu_mwh = m.n_hours * depth;
    return m;
}

// ---- risk evaluation -----------------------------------------------------------

RiskEvaluation evaluate_risk(std::span<const ingest::SeasonTrace> traces, const risk::ShortfallKernel& kernel,
                             std::span<const Variant> variants, const RiskOptions& options,
                             const ingest::WarningSink& warn) {
    if (traces.empty()) throw DataError("risk evaluation needs at least one season");
    if (variants.empty()) throw ConfigError("risk evaluation needs at least one model variant");
    if (options.bootstrap) options.bootstrap->validate();

    RiskEvaluation ev;
    ev.variants.assign(variants.begin(), variants.end());
    for (const auto& t : traces) ev.seasons.push_back(t.season_label);
    const std::size_t ns = traces.size();
    const std::size_t nv = variants.size();
    const double level = options.bootstrap ? options.bootstrap->ci_level : 0.95;
    const uncertainty::ConfidenceInterval missing{kNaN, kNaN, level};
    const bool intervals = options.bootstrap && ns >= 2;
    if (options.bootstrap && ns < 2 && warn) warn("fewer than two seasons; bootstrap intervals are not available");

    std::vector<std::optional<dnw::TailModel>> models(ns * nv);
    ev.season_metrics.assign(ns, std::vector<risk::RiskMetrics>(nv));
    parallel_for(ns * nv, [&](std::size_t k) {
        const std::size_t s = k / nv;
        const auto& v = variants[k % nv];
        try {
            risk::SeasonRiskOptions opts;
            opts.kind = v.kind;
            opts.threshold_quantile = v.threshold_quantile;
            const auto d = traces[s].demand();
            const auto w = traces[s].wind();
            auto model = risk::build_model(d, w, opts);
            ev.season_metrics[s][k % nv] = risk::model_risk(model, kernel, static_cast<double>(traces[s].hours.size()));
            models[k] = std::move(model);
        } catch (const Error& e) {
            rethrow_with(e, fmt::format("season {} ({}): ", traces[s].season_label, v.name));
        }
    });
    for (auto& m : models) ev.season_models.push_back(std::move(*m));

    for (std::size_t j = 0; j < nv; ++j) {
        std::vector<risk::RiskMetrics> column;
        std::vector<double> lv;
        std::vector<double> evals;
        for (std::size_t s = 0; s < ns; ++s) {
            column.push_back(ev.season_metrics[s][j]);
            lv.push_back(column.back().lole_hours);
            evals.push_back(column.back().eeu_gwh());
        }
        ev.mean_metrics.push_back(risk::long_run_mean(column));
        ev.mean_lole_ci.push_back(intervals ? uncertainty::season_bootstrap(lv, *options.bootstrap) : missing);
        ev.mean_eeu_ci.push_back(intervals ? uncertainty::season_bootstrap(evals, *options.bootstrap) : missing);
    }

    if (!options.pooled) return ev;
    std::vector<std::size_t> all_blocks(ns);
    for (std::size_t s = 0; s < ns; ++s) all_blocks[s] = s;
    evt::FitOptions quick;
    quick.standard_errors = false;
    for (const auto& v : variants) {
        try {
            const PooledEvaluator point_eval(traces, kernel, v);
            ev.pooled_models.push_back(point_eval.model(all_blocks));
            ev.pooled_metrics.push_back(point_eval(all_blocks));
            if (!intervals) {
                ev.pooled_lole_ci.push_back(missing);
                ev.pooled_eeu_ci.push_back(missing);
                continue;
            }
            const PooledEvaluator eval(traces, kernel, v, quick);
            const auto boot = uncertainty::block_bootstrap(
                ns,
                [&](std::span<const std::size_t> blocks) {
                    const auto r = eval(blocks);
                    return std::vector<double>{r.lole_hours, r.eeu_gwh()};
                },
                *options.bootstrap);
            if (boot.dropped > 0 && warn) {
                warn(fmt::format("pooled {}: {} of {} bootstrap replications dropped", v.name, boot.dropped,
                                 options.bootstrap->replications));
            }
            ev.pooled_lole_ci.push_back(boot.intervals[0]);
            ev.pooled_eeu_ci.push_back(boot.intervals[1]);
        } catch (const Error& e) {
            rethrow_with(e, fmt::format("pooled {}: ", v.name));
        }
    }
    return ev;
}

report::MetricTable season_table(const RiskEvaluation& ev, Metric metric) {
    const bool lole = metric == Metric::lole;
    report::MetricTable t{lole ? "LoLE (hours per season)" : "EEU (GWh per season)", "Season", {}, {}};
    for (const auto& v : ev.variants) t.columns.push_back(v.name);
    const auto value = [&](const risk::RiskMetrics& m) { return lole ? m.lole_hours : m.eeu_gwh(); };
    for (std::size_t s = 0; s < ev.seasons.size(); ++s) {
        report::TableRow row{ev.seasons[s], {}, std::nullopt};
        for (const auto& m : ev.season_metrics[s]) row.values.push_back(value(m));
        t.rows.push_back(std::move(row));
    }
    report::TableRow mean{"Mean", {}, lole ? ev.mean_lole_ci : ev.mean_eeu_ci};
    for (const auto& m : ev.mean_metrics) mean.values.push_back(value(m));
    t.rows.push_back(std::move(mean));
    return t;
}

report::MetricTable pooled_table(const RiskEvaluation& ev) {
    if (ev.pooled_metrics.size() != ev.variants.size()) throw ConfigError("no pooled metrics were computed");
    report::MetricTable t{"Pooled LoLE (hours per season) and EEU (GWh per season)", "", {}, {}};
    for (const auto& v : ev.variants) t.columns.push_back(v.name);
    report::TableRow lole{"LoLE", {}, ev.pooled_lole_ci};
    report::TableRow eeu{"EEU", {}, ev.pooled_eeu_ci};
    for (const auto& m : ev.pooled_metrics) {
        lole.values.push_back(m.lole_hours);
        eeu.values.push_back(m.eeu_gwh());
    }
    t.rows.push_back(std::move(lole));
    t.rows.push_back(std::move(eeu));
    return t;
}

// ---- run_full_study ------------------------------------------------------------

StudyResult run_full_study(const RunConfig& config, const ingest::WarningSink& warn) {
    StudyResult result;
    std::mutex warn_mutex;
    const ingest::WarningSink collect = [&](const std::string& message) {
        std::lock_guard lock(warn_mutex);
        result.warnings.push_back(message);
        if (warn) warn(message);
    };

    std::string stage = "config";
    OutputWriter out(config.output_dir);
    std::vector<std::string> seasons;
    std::vector<Variant> variants;

    const auto write_manifest = [&](const std::string& status, const std::string& failed_stage,
                                    const std::string& message) {
        ordered_json m;
        m["status"] = status;
        if (!failed_stage.empty()) {
            m["failed_stage"] = failed_stage;
            m["message"] = message;
            m["partial"] = true;
        }
        m["config_hash"] = result.config_hash;
        m["seed"] = config.bootstrap.seed;
        m["replications"] = config.bootstrap.replications;
        m["ci_level"] = config.bootstrap.ci_level;
        m["rng"] = Xoshiro256StarStar::kName;
        m["versions"] = {{"adequacy", std::string(version())},
                         {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
                         {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR,
                                                       NLOHMANN_JSON_VERSION_MINOR, NLOHMANN_JSON_VERSION_PATCH)},
                         {"compiler", __VERSION__}};
        m["seasons"] = seasons;
        auto names = ordered_json::array();
        for (const auto& v : variants) names.push_back(v.name);
        m["variants"] = std::move(names);
        auto warnings = result.warnings;
        std::sort(warnings.begin(), warnings.end());
        m["warnings"] = warnings;
        m["outputs"] = out.written();
        std::ofstream f(config.output_dir / "manifest.json", std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError(fmt::format("cannot write manifest in '{}'", config.output_dir.string()));
        f << m.dump(2) << '\n';
    };

    try {
        config.validate();
        if (!config.seed_set) throw ConfigError("study needs a bootstrap seed");
        result.config_hash = config_hash(config);
        variants = expand_variants(config);
        std::error_code ec;
        fs::create_directories(config.output_dir, ec);
        if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", config.output_dir.string(), ec.message()));

        stage = "ingest";
        const auto traces = prepare_traces(config, collect);
        const auto fleet = gen::load_fleet(config.fleet);
        for (const auto& t : traces) seasons.push_back(t.season_label);

        stage = "fleet";
        gen::ConvolutionOptions conv;
        conv.tail_tolerance = config.tail_tolerance;
        const risk::ShortfallKernel kernel(gen::convolve_fleet(fleet, conv));

        stage = "risk";
        RiskOptions ro;
        ro.pooled = config.pooled;
        ro.bootstrap = config.bootstrap;
        result.risk = evaluate_risk(traces, kernel, variants, ro, collect);
        const auto& ev = result.risk;

        stage = "tables";
        out.table("lole_by_season", season_table(ev, Metric::lole), collect);
        out.table("eeu_by_season", season_table(ev, Metric::eeu), collect);
        if (config.pooled) out.table("pooled", pooled_table(ev), collect);

        const std::size_t ns = traces.size();
        const std::size_t nv = variants.size();
        const bool pooled_diagnostics = config.pooled && ns > 1;
        report::MetricTable params{"GPD threshold (GW), scale (GW) and shape", "GW", {}, {}};
        params.columns = seasons;
        if (config.pooled) params.columns.push_back("All");
        for (std::size_t j = 0; j < nv; ++j) {
            if (variants[j].kind != dnw::ModelKind::evt) continue;
            const auto q = percent(variants[j].threshold_quantile);
            report::TableRow u{fmt::format("u {}", q), {}, std::nullopt};
            report::TableRow sigma{fmt::format("sigma {}", q), {}, std::nullopt};
            report::TableRow xi{fmt::format("xi {}", q), {}, std::nullopt};
            const auto add = [&](const dnw::TailModel& m) {
                const auto& f = m.fit();
                u.values.push_back(f ? f->threshold_mw / 1000.0 : kNaN);
                sigma.values.push_back(f ? f->params.sigma / 1000.0 : kNaN);
                xi.values.push_back(f ? f->params.xi : kNaN);
            };
            for (std::size_t s = 0; s < ns; ++s) add(ev.season_models[s * nv + j]);
            if (config.pooled) add(ev.pooled_models[j]);
            params.rows.push_back(std::move(u));
            params.rows.push_back(std::move(sigma));
            params.rows.push_back(std::move(xi));
        }
        out.table("parameters", params, collect);

        stage = "diagnostics";
        std::vector<std::pair<std::string, std::vector<double>>> samples;
        for (const auto& t : traces) {
            auto x = t.demand_net_of_wind();
            std::sort(x.begin(), x.end());
            samples.emplace_back(t.season_label, std::move(x));
        }
        if (pooled_diagnostics) {
            std::vector<double> all;
            for (const auto& [_, x] : samples) all.insert(all.end(), x.begin(), x.end());
            std::sort(all.begin(), all.end());
            samples.emplace_back("All", std::move(all));
        }
        std::vector<std::string> scans(samples.size());
        std::vector<std::string> qqs(samples.size());
        parallel_for(samples.size(), [&](std::size_t i) {
            const auto& x = samples[i].second;
            const auto grid = linspace(quantile_type7_sorted(x, config.scan_lo_quantile),
                                       quantile_type7_sorted(x, config.scan_hi_quantile), config.scan_points);
            try {
                scans[i] = scan_csv(evt::threshold_scan(x, grid));
                qqs[i] = qq_csv(x, config.qq_quantile);
            } catch (const Error& e) {
                rethrow_with(e, fmt::format("season {}: ", samples[i].first));
            }
        });
        for (std::size_t i = 0; i < samples.size(); ++i) {
            out.text(fmt::format("scan/{}.csv", file_label(samples[i].first)), scans[i]);
            out.text(fmt::format("qq/{}.csv", file_label(samples[i].first)), qqs[i]);
        }

        std::vector<std::string> curves(ns * nv);
        parallel_for(ns * nv, [&](std::size_t k) { curves[k] = survivor_csv(ev.season_models[k], samples[k / nv].second); });
        for (std::size_t k = 0; k < ns * nv; ++k) {
            out.text(fmt::format("survivor/{}_{}.csv", file_label(seasons[k / nv]), variants[k % nv].slug), curves[k]);
        }
        if (pooled_diagnostics) {
            for (std::size_t j = 0; j < nv; ++j) {
                out.text(fmt::format("survivor/All_{}.csv", variants[j].slug),
                         survivor_csv(ev.pooled_models[j], samples.back().second));
            }
        }

        stage = "manifest";
        result.outputs = out.written();
        write_manifest("ok", "", "");
        result.outputs.push_back("manifest.json");
        return result;
    } catch (const Error& e) {
        if (stage != "config") {
            try {
                write_manifest("failed", stage, e.what());
            } catch (const Error&) {
                // The original failure is the one worth reporting.
            }
        }
        rethrow_with(e, fmt::format("stage '{}': ", stage));
    }
}

}  // namespace adequacy::study
