// Writes the bundled synthetic GB-like dataset: seven 21-week winter seasons of
// hourly demand and wind, a quantile history for rescaling, a 200-unit fleet
// calibrated to a hindcast LoLE of about 3 hours per season, and a study config.
//
// Usage: make_demo_data [output_dir]   (default data/demo)
//
// Everything derives from one fixed seed through xoshiro256**, so the files
// only change when this program does.

#include <adequacy/genmodel.hpp>
#include <adequacy/ingest.hpp>
#include <adequacy/risk.hpp>
#include <adequacy/rng.hpp>
#include <adequacy/stats.hpp>
#include <adequacy/study.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <vector>

namespace fs = std::filesystem;
namespace ingest = adequacy::ingest;

namespace {

constexpr std::uint64_t kSeed = 20140101;
constexpr int kFirstYear = 2007;
constexpr int kSeasons = 7;
constexpr double kWindCapacity = 14000.0;

double round1(double x) { return std::round(x * 10.0) / 10.0; }

// Relative demand by hour of day (UTC), winter weekday shape.
double daily_profile(int hour) {
    static constexpr double shape[24] = {0.70, 0.67, 0.65, 0.64, 0.64, 0.66, 0.74, 0.85, 0.91, 0.92, 0.92, 0.91,
                                         0.90, 0.89, 0.89, 0.91, 0.96, 1.00, 0.99, 0.95, 0.90, 0.85, 0.80, 0.74};
    return shape[hour];
}

ingest::SeasonTrace make_season(int year, adequacy::Xoshiro256StarStar& rng) {
    ingest::SeasonWindow window;
    ingest::SeasonTrace trace;
    trace.season_label = fmt::format("{}-{:02d}", year, (year + 1) % 100);

    const double level = 46000.0 * std::pow(0.99, year - kFirstYear);
    const auto start = window.start(year) - std::chrono::hours(24);  // one day before the window
    const std::size_t hours = window.hours() + 24;

    const double phi_temp = std::exp(-1.0 / 72.0);
    const double phi_wind = std::exp(-1.0 / 30.0);
    const double phi_noise = std::exp(-1.0 / 6.0);
    double temp_anomaly = 3.0 * rng.normal();
    double wind_own = rng.normal();
    double noise = 0.0;

    for (std::size_t t = 0; t < hours; ++t) {
        const auto ts = start + std::chrono::hours(t);
        const auto day = std::chrono::floor<std::chrono::days>(ts);
        const int hour = static_cast<int>((ts - day).count() / 3600);
        const std::chrono::weekday wd{day};
        const double season_day = static_cast<double>(t) / 24.0;

        temp_anomaly = phi_temp * temp_anomaly + std::sqrt(1.0 - phi_temp * phi_temp) * 3.0 * rng.normal();
        wind_own = phi_wind * wind_own + std::sqrt(1.0 - phi_wind * phi_wind) * rng.normal();
        noise = phi_noise * noise + std::sqrt(1.0 - phi_noise * phi_noise) * rng.normal();

        const double temperature = 8.0 - 6.0 * std::sin(std::numbers::pi * season_day / 147.0) + temp_anomaly;
        const bool weekend = wd == std::chrono::Saturday || wd == std::chrono::Sunday;
        const bool holiday = season_day > 58.0 && season_day < 68.0;
        double factor = daily_profile(hour) * (weekend ? 0.90 : 1.0) * (holiday ? 0.88 : 1.0);
        factor *= 1.0 + 0.012 * std::max(15.5 - temperature, 0.0);
        const double demand = level * factor + 450.0 * noise;

        // Cold anomalies come with settled, calm weather.
        const double latent = 0.5 * (temp_anomaly / 3.0) + std::sqrt(0.75) * wind_own;
        const double cf = std::clamp(1.0 / (1.0 + std::exp(0.6 - 1.4 * latent)), 0.0, 0.95);

        trace.hours.push_back({ts, round1(demand), round1(cf * kWindCapacity)});
    }
    return trace;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

struct BaseUnit {
    int count;
    double capacity;
    double availability;
};

std::vector<adequacy::gen::GeneratingUnit> scaled_fleet(const std::vector<double>& base,
                                                        const std::vector<double>& availability, double scale) {
    std::vector<adequacy::gen::GeneratingUnit> units;
    for (std::size_t i = 0; i < base.size(); ++i) {
        units.push_back({fmt::format("unit{:03d}", i + 1),
                         std::max<std::int64_t>(1, std::llround(base[i] * scale)), availability[i]});
    }
    return units;
}

double mean_hindcast_lole(const std::vector<adequacy::gen::GeneratingUnit>& units,
                          const std::vector<ingest::SeasonTrace>& traces) {
    const adequacy::risk::ShortfallKernel kernel(adequacy::gen::convolve_fleet(units));
    adequacy::risk::SeasonRiskOptions opts;
    opts.kind = adequacy::dnw::ModelKind::hindcast;
    std::vector<adequacy::risk::RiskMetrics> per_season;
    for (const auto& t : traces) per_season.push_back(adequacy::risk::season_risk(t, kernel, opts));
    return adequacy::risk::long_run_mean(per_season).lole_hours;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("data/demo");
        fs::create_directories(dir);
        adequacy::Xoshiro256StarStar rng(kSeed);

        std::vector<ingest::SeasonTrace> traces;
        for (int i = 0; i < kSeasons; ++i) traces.push_back(make_season(kFirstYear + i, rng));
        {
            std::ofstream out(dir / "traces.csv", std::ios::binary | std::ios::trunc);
            ingest::write_traces(out, traces);
        }

        // Daily-peak 90% quantiles: generated seasons first, then a drifting history behind them.
        ingest::LoadOptions load;
        const auto windowed = ingest::apply_window(traces, load);
        std::vector<double> recent;
        for (const auto& t : windowed) recent.push_back(ingest::daily_peak_quantile(t, 0.9));
        std::string history = "season,quantile_mw\n";
        for (int year = 1991; year < kFirstYear; ++year) {
            const double drift = year <= 2005 ? 1.0 - 0.008 * (2005 - year) : 1.01;
            const double value = recent.front() * drift * (1.0 + 0.004 * rng.normal());
            history += fmt::format("{}-{:02d},{:.1f}\n", year, (year + 1) % 100, value);
        }
        for (std::size_t i = 0; i < recent.size(); ++i) {
            history += fmt::format("{},{:.1f}\n", windowed[i].season_label, recent[i]);
        }
        write_text(dir / "quantile_history.csv", history);

        write_text(dir / "study.json", R"({
  "traces": "traces.csv",
  "fleet": "fleet.csv",
  "quantile_history": "quantile_history.csv",
  "rescale": true,
  "reference_season": "2013-14",
  "season": {"weeks": 21, "anchor": "last Sunday in October"},
  "wind_capacity_mw": 14000,
  "models": ["evt", "hindcast", "ind"],
  "threshold_quantiles": [0.90, 0.95, 0.98],
  "pooled": true,
  "bootstrap": {"replications": 10000, "seed": 20141015, "ci_level": 0.95},
  "scan": {"lo_quantile": 0.80, "hi_quantile": 0.995, "points": 25},
  "qq_quantile": 0.95,
  "output_dir": "study-output"
}
)");

        // Fleet: a fixed technology mix with perturbed capacities, scaled so the
        // rescaled hindcast gives about 3 hours of LoLE per season.
        const std::vector<BaseUnit> mix{{15, 1200.0, 0.85}, {60, 500.0, 0.88}, {70, 350.0, 0.90},
                                        {40, 150.0, 0.92}, {15, 60.0, 0.95}};
        std::vector<double> base;
        std::vector<double> availability;
        for (const auto& m : mix) {
            for (int i = 0; i < m.count; ++i) {
                base.push_back(m.capacity * (1.0 + 0.1 * (2.0 * rng.uniform() - 1.0)));
                availability.push_back(m.availability);
            }
        }
        const auto config = adequacy::study::load_config(dir / "study.json");
        const auto prepared = adequacy::study::prepare_traces(config, [](const std::string& w) {
            std::cerr << "warning: " << w << '\n';
        });
        double lo = 0.3;
        double hi = 2.0;
        for (int it = 0; it < 40; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mean_hindcast_lole(scaled_fleet(base, availability, mid), prepared) > 3.0) lo = mid;
            else hi = mid;
        }
        const auto fleet = scaled_fleet(base, availability, hi);
        {
            std::ofstream out(dir / "fleet.csv", std::ios::binary | std::ios::trunc);
            adequacy::gen::write_fleet(out, fleet);
        }
        const auto summary = adequacy::gen::summarize(fleet);
        std::cout << fmt::format("wrote {} seasons, {} units ({} MW installed), hindcast LoLE {:.3f} h\n",
                                 traces.size(), summary.units, summary.total_capacity_mw,
                                 mean_hindcast_lole(fleet, prepared));
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
