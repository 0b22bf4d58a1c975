#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavsim/engine.hpp"
#include "cavsim/simd/kernels.hpp"

namespace cavsim {

struct VehicleSeries {
  VehicleId vehicle = 0;
  std::uint32_t route = 0;
  std::vector<double> t;
  std::vector<double> p;
  std::vector<double> v;
};

// Throws LookupError when the vehicle never appears in the trace.
VehicleSeries extract_series(const RunResult& result, VehicleId vehicle);

// Seconds from the first sample until the vehicle first comes back within
// `threshold` metres (2D) of its starting point after `warmup` seconds.
// Once inside the threshold the closest approach of that visit is reported.
// nullopt when it never returns.
std::optional<double> loop_travel_time(const Route& route, std::span<const double> t, std::span<const double> p,
                                       double threshold, double warmup);
std::optional<double> loop_travel_time(const RunResult& result, const Network& network, VehicleId vehicle,
                                       double threshold, double warmup);

// Drops samples above `cutoff`, then a centred moving average over `window`
// seconds, truncated symmetrically at the edges. NaN where a window holds no
// kept sample. Throws UsageError when the window is shorter than one period.
std::vector<double> smooth_speed(std::span<const double> v, double period, double window, double cutoff);

// Maximal runs with v < stop_speed lasting at least min_dwell seconds.
std::size_t stop_count(std::span<const double> t, std::span<const double> v, double stop_speed, double min_dwell);
std::size_t stop_count(const RunResult& result, VehicleId vehicle, double stop_speed, double min_dwell);

struct SpeedStatRow {
  double t = 0.0;
  std::string route;
  std::size_t vehicles = 0;
  simd::Extrema speed;
};

// Per route per tick; ticks without vehicles on a route are skipped.
std::vector<SpeedStatRow> speed_stats(const RunResult& result, const ScenarioConfig& config, bool ego_only);

struct TravelTimeRow {
  VehicleId vehicle = 0;
  std::string loop;
  std::optional<double> baseline;  // nullopt: did not finish
  std::optional<double> optimal;
  // Exact when both finished; a bound otherwise (see `bound`).
  double saved = 0.0;
  double percent = 0.0;
  char bound = '=';  // '=' exact, '>' lower bound, '<' upper bound, '?' unknown
};

struct TravelTimeReport {
  double duration = 0.0;
  std::vector<TravelTimeRow> rows;
  // Means over all rows with a did-not-finish counted as the run duration.
  double mean_baseline = 0.0;
  double mean_optimal = 0.0;
  double mean_saved = 0.0;
  double mean_percent = 0.0;  // 100 (mean_baseline - mean_optimal) / mean_baseline
};

inline constexpr std::size_t kHistogramBins = 6;

struct Histogram {
  std::string mode;
  double lo = 0.0;
  double width = 0.0;
  std::array<std::size_t, kHistogramBins> counts{};
  std::size_t excluded = 0;  // did-not-finish
};

// 6 equal-width bins over [min, max] of the finite values.
Histogram make_histogram(const std::string& mode, std::span<const std::optional<double>> values);

struct Reports {
  TravelTimeReport travel;
  std::vector<SpeedStatRow> baseline_speed;
  std::vector<SpeedStatRow> optimal_speed;
  Histogram baseline_histogram;
  Histogram optimal_histogram;
};

// Joins the ego vehicles of two runs of the same fleet. Throws
// ComparisonError when the fleets differ.
Reports build_reports(const RunResult& baseline, const RunResult& optimal, const ScenarioConfig& config,
                      bool ego_only = false);

// Table layout: vehicle,baseline,optimal,loop,saved,pct_decrease. Times are
// printed to 9 significant digits and the percentage is computed from the
// printed values, so it can be recomputed exactly from the file.
void write_travel_table_csv(std::ostream& out, const TravelTimeReport& report);
void write_histogram_csv(std::ostream& out, const Reports& reports);
void write_speed_stats_csv(std::ostream& out, const std::vector<SpeedStatRow>& rows);
void write_summary_json(std::ostream& out, const Reports& reports, const std::string& config_hash);

// Conflict-zone occupancy as seen in the trace: [first tick inside, first
// tick after).
struct OccupancyInterval {
  std::string zone;
  std::string approach;
  VehicleId vehicle = 0;
  double enter = 0.0;
  double exit = 0.0;
};

std::vector<OccupancyInterval> realized_occupancy(const RunResult& result, const Network& network);

}  // namespace cavsim
