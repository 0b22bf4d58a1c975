#include "cavsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"

namespace cavsim {

VehicleSeries extract_series(const RunResult& result, VehicleId vehicle) {
  VehicleSeries s;
  s.vehicle = vehicle;
  bool seen = false;
  for (const auto& r : result.trace) {
    if (r.vehicle != vehicle) continue;
    if (!seen) s.route = r.route;
    seen = true;
    s.t.push_back(r.t);
    s.p.push_back(r.p);
    s.v.push_back(r.v);
  }
  if (!seen) throw LookupError("vehicle " + std::to_string(vehicle) + " not in trace");
  return s;
}

std::optional<double> loop_travel_time(const Route& route, std::span<const double> t, std::span<const double> p,
                                       double threshold, double warmup) {
  if (!(threshold > 0.0)) throw UsageError("loop_travel_time requires threshold > 0");
  if (t.empty()) return std::nullopt;
  const Vec2 origin = position_at(route, p[0]);
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (t[k] - t[0] <= warmup) continue;
    double d = distance(position_at(route, p[k]), origin);
    if (d > threshold) continue;
    while (k + 1 < t.size()) {
      const double next = distance(position_at(route, p[k + 1]), origin);
      if (!(next < d)) break;
      d = next;
      ++k;
    }
    return t[k] - t[0];
  }
  return std::nullopt;
}

std::optional<double> loop_travel_time(const RunResult& result, const Network& network, VehicleId vehicle,
                                       double threshold, double warmup) {
  const VehicleSeries s = extract_series(result, vehicle);
  return loop_travel_time(network.routes.at(s.route), s.t, s.p, threshold, warmup);
}

std::vector<double> smooth_speed(std::span<const double> v, double period, double window, double cutoff) {
  if (!(period > 0.0)) throw UsageError("smooth_speed requires a positive sample period");
  if (!(window >= period)) {
    throw UsageError("smoothing window " + format_g9(window) + " s is shorter than the sample period " +
                     format_g9(period) + " s");
  }
  const auto half = static_cast<std::size_t>(std::floor(window / (2.0 * period) + 1e-9));
  std::vector<std::uint8_t> keep(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) keep[i] = (std::isfinite(v[i]) && v[i] <= cutoff) ? 1 : 0;
  std::vector<double> out(v.size());
  simd::windowed_mean(v, keep, half, out);
  return out;
}

std::size_t stop_count(std::span<const double> t, std::span<const double> v, double stop_speed, double min_dwell) {
  if (t.size() != v.size()) throw UsageError("stop_count: time and speed series differ in length");
  const double period = t.size() > 1 ? t[1] - t[0] : 0.0;
  std::size_t count = 0;
  std::size_t k = 0;
  while (k < v.size()) {
    if (!(v[k] < stop_speed)) {
      ++k;
      continue;
    }
    const std::size_t start = k;
    while (k < v.size() && v[k] < stop_speed) ++k;
    // Each sample stands for one period.
    const double dwell = t[k - 1] - t[start] + period;
    if (dwell >= min_dwell - 1e-9) ++count;
  }
  return count;
}

std::size_t stop_count(const RunResult& result, VehicleId vehicle, double stop_speed, double min_dwell) {
  const VehicleSeries s = extract_series(result, vehicle);
  return stop_count(s.t, s.v, stop_speed, min_dwell);
}

std::vector<SpeedStatRow> speed_stats(const RunResult& result, const ScenarioConfig& config, bool ego_only) {
  std::vector<SpeedStatRow> rows;
  std::vector<std::vector<double>> by_route(result.route_ids.size());
  auto flush = [&](double t) {
    for (std::size_t r = 0; r < by_route.size(); ++r) {
      if (by_route[r].empty()) continue;
      rows.push_back({t, result.route_ids[r], by_route[r].size(), simd::min_max_mean(by_route[r])});
      by_route[r].clear();
    }
  };
  double current = std::numeric_limits<double>::quiet_NaN();
  for (const auto& rec : result.trace) {
    if (rec.t != current) {
      if (!std::isnan(current)) flush(current);
      current = rec.t;
    }
    if (ego_only && !config.is_ego(rec.vehicle)) continue;
    by_route[rec.route].push_back(rec.v);
  }
  if (!std::isnan(current)) flush(current);
  return rows;
}

Histogram make_histogram(const std::string& mode, std::span<const std::optional<double>> values) {
  Histogram h;
  h.mode = mode;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& v : values) {
    if (!v) {
      ++h.excluded;
      continue;
    }
    lo = std::min(lo, *v);
    hi = std::max(hi, *v);
  }
  if (!std::isfinite(lo)) return h;
  h.lo = lo;
  h.width = (hi - lo) / static_cast<double>(kHistogramBins);
  for (const auto& v : values) {
    if (!v) continue;
    std::size_t bin = 0;
    if (h.width > 0.0) {
      bin = static_cast<std::size_t>(std::floor((*v - lo) / h.width));
      bin = std::min(bin, kHistogramBins - 1);
    }
    ++h.counts[bin];
  }
  return h;
}

namespace {

std::map<VehicleId, std::uint32_t> fleet_of(const RunResult& r) {
  std::map<VehicleId, std::uint32_t> out;
  if (r.trace.empty()) return out;
  const double t0 = r.trace.front().t;
  for (const auto& rec : r.trace) {
    if (rec.t != t0) break;
    out[rec.vehicle] = rec.route;
  }
  return out;
}

std::optional<double> quantized(std::optional<double> x) {
  if (x) return round_g9(*x);
  return x;
}

}  // namespace

Reports build_reports(const RunResult& baseline, const RunResult& optimal, const ScenarioConfig& config,
                      bool ego_only) {
  const auto fb = fleet_of(baseline);
  const auto fo = fleet_of(optimal);
  if (fb != fo) throw ComparisonError("baseline and optimal traces do not cover the same fleet");
  if (baseline.route_ids != optimal.route_ids) throw ComparisonError("baseline and optimal runs use different routes");

  Reports rep;
  TravelTimeReport& tt = rep.travel;
  const double D = round_g9(config.duration);
  tt.duration = D;
  std::vector<VehicleId> egos = config.egos;
  std::sort(egos.begin(), egos.end());
  std::vector<std::optional<double>> base_times;
  std::vector<std::optional<double>> opt_times;
  double sum_b = 0.0;
  double sum_o = 0.0;
  for (VehicleId id : egos) {
    if (!fb.count(id)) throw ComparisonError("ego vehicle " + std::to_string(id) + " missing from the traces");
    const auto& m = config.metrics;
    TravelTimeRow row;
    row.vehicle = id;
    row.loop = baseline.route_ids[fb.at(id)];
    row.baseline = quantized(loop_travel_time(baseline, config.network, id, m.loop_threshold, m.warmup));
    row.optimal = quantized(loop_travel_time(optimal, config.network, id, m.loop_threshold, m.warmup));
    const double b = row.baseline.value_or(D);
    const double o = row.optimal.value_or(D);
    row.saved = b - o;
    row.percent = 100.0 * row.saved / b;
    if (row.baseline && row.optimal) {
      row.bound = '=';
    } else if (!row.baseline && row.optimal) {
      row.bound = '>';
    } else if (row.baseline && !row.optimal) {
      row.bound = '<';
    } else {
      row.bound = '?';
    }
    sum_b += b;
    sum_o += o;
    base_times.push_back(row.baseline);
    opt_times.push_back(row.optimal);
    tt.rows.push_back(row);
  }
  if (!tt.rows.empty()) {
    const double n = static_cast<double>(tt.rows.size());
    tt.mean_baseline = sum_b / n;
    tt.mean_optimal = sum_o / n;
    tt.mean_saved = tt.mean_baseline - tt.mean_optimal;
    tt.mean_percent = tt.mean_baseline > 0.0 ? 100.0 * tt.mean_saved / tt.mean_baseline : 0.0;
  }
  rep.baseline_speed = speed_stats(baseline, config, ego_only);
  rep.optimal_speed = speed_stats(optimal, config, ego_only);
  rep.baseline_histogram = make_histogram("baseline", base_times);
  rep.optimal_histogram = make_histogram("optimal", opt_times);
  return rep;
}

namespace {

std::string time_cell(const std::optional<double>& x, double duration) {
  return x ? format_g9(*x) : "> " + format_g9(duration);
}

std::string bounded_cell(char bound, double value) {
  switch (bound) {
    case '=': return format_g9(value);
    case '>': return "> " + format_g9(value);
    case '<': return "< " + format_g9(value);
    default: return "n/a";
  }
}

}  // namespace

void write_travel_table_csv(std::ostream& out, const TravelTimeReport& report) {
  out << "vehicle,baseline,optimal,loop,saved,pct_decrease\n";
  for (const auto& r : report.rows) {
    out << r.vehicle << ',' << time_cell(r.baseline, report.duration) << ',' << time_cell(r.optimal, report.duration)
        << ',' << r.loop << ',' << bounded_cell(r.bound, r.saved) << ',' << bounded_cell(r.bound, r.percent) << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const Reports& reports) {
  out << "mode,bin,lo,hi,count\n";
  for (const Histogram* h : {&reports.baseline_histogram, &reports.optimal_histogram}) {
    for (std::size_t b = 0; b < kHistogramBins; ++b) {
      const double lo = h->lo + h->width * static_cast<double>(b);
      const double hi = h->lo + h->width * static_cast<double>(b + 1);
      out << h->mode << ',' << b << ',' << format_g9(lo) << ',' << format_g9(hi) << ',' << h->counts[b] << '\n';
    }
  }
}

void write_speed_stats_csv(std::ostream& out, const std::vector<SpeedStatRow>& rows) {
  out << "t,route,vehicles,min,mean,max\n";
  for (const auto& r : rows) {
    out << format_g9(r.t) << ',' << r.route << ',' << r.vehicles << ',' << format_g9(r.speed.min) << ','
        << format_g9(r.speed.mean) << ',' << format_g9(r.speed.max) << '\n';
  }
}

void write_summary_json(std::ostream& out, const Reports& reports, const std::string& config_hash) {
  const auto& tt = reports.travel;
  std::size_t dnf_b = 0;
  std::size_t dnf_o = 0;
  for (const auto& r : tt.rows) {
    dnf_b += r.baseline ? 0 : 1;
    dnf_o += r.optimal ? 0 : 1;
  }
  out << "{\n"
      << "  \"config_hash\": \"" << json_escape(config_hash) << "\",\n"
      << "  \"duration\": " << format_g9(tt.duration) << ",\n"
      << "  \"ego_vehicles\": " << tt.rows.size() << ",\n"
      << "  \"did_not_finish\": {\"baseline\": " << dnf_b << ", \"optimal\": " << dnf_o << "},\n"
      << "  \"mean_travel_time\": {\"baseline\": " << format_g9(tt.mean_baseline)
      << ", \"optimal\": " << format_g9(tt.mean_optimal) << "},\n"
      << "  \"mean_saved\": " << format_g9(tt.mean_saved) << ",\n"
      << "  \"mean_pct_decrease\": " << format_g9(tt.mean_percent) << ",\n"
      << "  \"histogram_bins\": " << kHistogramBins << "\n"
      << "}\n";
}

std::vector<OccupancyInterval> realized_occupancy(const RunResult& result, const Network& network) {
  struct Open {
    std::int32_t crossing = -1;
    double enter = 0.0;
  };
  std::map<VehicleId, Open> open;
  std::map<VehicleId, std::uint32_t> routes;
  std::vector<OccupancyInterval> out;
  auto close = [&](VehicleId id, const Open& o, double t) {
    const auto& zc = network.routes[routes[id]].crossings[static_cast<std::size_t>(o.crossing)];
    out.push_back({zc.zone, zc.approach, id, o.enter, t});
  };
  for (const auto& rec : result.trace) {
    routes[rec.vehicle] = rec.route;
    Open& o = open[rec.vehicle];
    const bool inside = rec.context == ContextKind::conflict_zone;
    if (o.crossing >= 0 && (!inside || rec.crossing != o.crossing)) {
      close(rec.vehicle, o, rec.t);
      o.crossing = -1;
    }
    if (inside && o.crossing < 0) o = {rec.crossing, rec.t};
  }
  const double t_end = result.trace.empty() ? 0.0 : result.trace.back().t;
  for (const auto& [id, o] : open) {
    if (o.crossing >= 0) close(id, o, t_end + result.dt);
  }
  std::sort(out.begin(), out.end(), [](const OccupancyInterval& a, const OccupancyInterval& b) {
    if (a.zone != b.zone) return a.zone < b.zone;
    if (a.enter != b.enter) return a.enter < b.enter;
    return a.vehicle < b.vehicle;
  });
  return out;
}

}  // namespace cavsim
