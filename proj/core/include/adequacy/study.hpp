#pragma once

#include "adequacy/dnw.hpp"
#include "adequacy/evt.hpp"
#include "adequacy/ingest.hpp"
#include "adequacy/report.hpp"
#include "adequacy/risk.hpp"
#include "adequacy/uncertainty.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace adequacy::study {

/// Declarative description of a full study. Loaded from JSON; relative paths are
/// resolved against the directory of the config file.
struct RunConfig {
    std::filesystem::path traces;
    std::filesystem::path fleet;
    std::optional<std::filesystem::path> quantile_history;
    std::filesystem::path output_dir = "adequacy-out";

    bool rescale = false;
    std::string reference_season;       ///< empty: latest season in the traces
    double rescale_quantile = 0.9;      ///< daily-peak quantile when no history file is given
    double lowess_span = 2.0 / 3.0;
    int lowess_iterations = 1;

    ingest::SeasonWindow window;
    bool allow_gaps = false;
    double wind_capacity_mw = 0.0;

    std::vector<dnw::ModelKind> models{dnw::ModelKind::evt, dnw::ModelKind::hindcast, dnw::ModelKind::independence};
    std::vector<double> threshold_quantiles{0.90, 0.95, 0.98};
    bool pooled = true;

    uncertainty::BootstrapConfig bootstrap;
    bool seed_set = false;

    double scan_lo_quantile = 0.80;
    double scan_hi_quantile = 0.995;
    std::size_t scan_points = 25;
    double qq_quantile = 0.95;
    double tail_tolerance = 1e-15;

    /// Throws ConfigError on the first invalid field. `check_paths` also
    /// requires the input files to exist.
    void validate(bool check_paths = true) const;
};

/// Throws ConfigError for unreadable files, malformed JSON, unknown keys or bad values.
[[nodiscard]] RunConfig load_config(const std::filesystem::path& path);
[[nodiscard]] RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);

/// FNV-1a 64 over every numerically relevant setting and the bytes of the input
/// files, as 16 hex digits. Output location does not take part.
[[nodiscard]] std::string config_hash(const RunConfig& config);

/// Threshold-scan CSV: threshold_mw,sigma,xi,sigma_star,se_sigma,se_xi,n_exceed,se_sigma_star,status.
[[nodiscard]] std::string scan_csv(const evt::ThresholdScan& scan);

/// One column of the result tables.
struct Variant {
    dnw::ModelKind kind = dnw::ModelKind::evt;
    double threshold_quantile = 0.0;  ///< evt only
    std::string name;                 ///< "EVT - 95%", "Hindcast", "Ind"
    std::string slug;                 ///< "evt95", "hindcast", "ind"
};

[[nodiscard]] std::vector<Variant> expand_variants(const RunConfig& config);

/// Traces after windowing and optional rescaling.
[[nodiscard]] std::vector<ingest::SeasonTrace> prepare_traces(const RunConfig& config,
                                                              const ingest::WarningSink& warn = {});

/// Evaluates the pooled pipeline on a multiset of seasons: the chosen seasons are
/// concatenated, the model is fitted to the pooled sample and the metrics use the
/// mean season length as n. For the independence model the pooled marginals are
/// mixtures of the season marginals, so the pooled result is assembled from
/// precomputed season-pair terms.
class PooledEvaluator {
public:
    PooledEvaluator(std::span<const ingest::SeasonTrace> seasons, const risk::ShortfallKernel& kernel, Variant variant,
                    evt::FitOptions fit = {});

    [[nodiscard]] risk::RiskMetrics operator()(std::span<const std::size_t> blocks) const;
    /// Always concatenates and rebuilds the model, whatever the variant.
    [[nodiscard]] risk::RiskMetrics evaluate_direct(std::span<const std::size_t> blocks) const;
    [[nodiscard]] dnw::TailModel model(std::span<const std::size_t> blocks) const;

    [[nodiscard]] std::size_t season_count() const noexcept { return dnw_.size(); }

private:
    const risk::ShortfallKernel* kernel_;
    Variant variant_;
    evt::FitOptions fit_;
    std::vector<std::vector<double>> dnw_;     // sorted per season
    std::vector<std::vector<double>> demand_;
    std::vector<std::vector<double>> wind_;
    std::vector<double> hours_;
    // Independence: per-hour shortfall probability and depth for demand season i, wind season j.
    std::vector<double> pair_p_;
    std::vector<double> pair_depth_;
};

struct RiskOptions {
    bool pooled = true;
    /// Intervals are computed only when set; otherwise they are NaN.
    std::optional<uncertainty::BootstrapConfig> bootstrap;
};

/// Per-season and pooled metrics for every variant.
struct RiskEvaluation {
    std::vector<std::string> seasons;
    std::vector<Variant> variants;
    std::vector<std::vector<risk::RiskMetrics>> season_metrics;  ///< [season][variant]
    std::vector<risk::RiskMetrics> mean_metrics;                 ///< [variant]
    std::vector<uncertainty::ConfidenceInterval> mean_lole_ci;
    std::vector<uncertainty::ConfidenceInterval> mean_eeu_ci;    ///< GWh
    std::vector<risk::RiskMetrics> pooled_metrics;               ///< empty unless pooled
    std::vector<uncertainty::ConfidenceInterval> pooled_lole_ci;
    std::vector<uncertainty::ConfidenceInterval> pooled_eeu_ci;  ///< GWh
    std::vector<dnw::TailModel> season_models;                   ///< [season * variants + variant]
    std::vector<dnw::TailModel> pooled_models;                   ///< [variant], empty unless pooled
};

/// Fits every variant to every season (and the pooled data), evaluates the
/// metrics through `kernel` and, when a bootstrap is configured, attaches
/// season-bootstrap intervals to the means and block-bootstrap intervals to the
/// pooled metrics. Every interval uses the same seed.
[[nodiscard]] RiskEvaluation evaluate_risk(std::span<const ingest::SeasonTrace> traces,
                                           const risk::ShortfallKernel& kernel, std::span<const Variant> variants,
                                           const RiskOptions& options, const ingest::WarningSink& warn = {});

enum class Metric { lole, eeu };

/// Seasons as rows, variants as columns, then a Mean row with intervals.
/// LoLE in hours per season, EEU in GWh per season.
[[nodiscard]] report::MetricTable season_table(const RiskEvaluation& evaluation, Metric metric);
/// LoLE and EEU rows with intervals, variants as columns. Requires pooled metrics.
[[nodiscard]] report::MetricTable pooled_table(const RiskEvaluation& evaluation);

struct StudyResult {
    RiskEvaluation risk;
    std::vector<std::string> outputs;  ///< relative to output_dir
    std::vector<std::string> warnings;
    std::string config_hash;
};

/// Runs the whole workflow and writes into config.output_dir:
///   lole_by_season.*, eeu_by_season.*   per-season metrics with Mean and CI rows
///   pooled.*                            pooled metrics with block-bootstrap CIs
///   parameters.*                        threshold, scale and shape per season and pooled
///   scan/<season>.csv                   threshold stability scan
///   qq/<season>.csv                     GPD quantile-quantile points
///   survivor/<season>_<variant>.csv     survivor function of D - W
///   manifest.json                       status, config hash, seed, versions and outputs
/// On failure the manifest records the failing stage and the error is rethrown.
StudyResult run_full_study(const RunConfig& config, const ingest::WarningSink& warn = {});

}  // namespace adequacy::study
