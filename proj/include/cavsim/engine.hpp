#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavsim/coordinator.hpp"
#include "cavsim/scenario.hpp"

namespace cavsim {

enum TraceFlag : std::uint32_t {
  kSignalHeld = 1u << 0,
  kYieldHeld = 1u << 1,
  kPlanInfeasible = 1u << 2,
  kOccupancyHeld = 1u << 3,  // braking for a crossing vehicle inside the zone
  kCollision = 1u << 4,
};

// "signal_held|yield_held", empty for no flags.
std::string flags_to_string(std::uint32_t flags);

struct TraceRecord {
  double t = 0.0;
  VehicleId vehicle = 0;
  std::uint32_t route = 0;  // index into Network::routes
  double p = 0.0;           // odometer, not wrapped
  double v = 0.0;
  double u = 0.0;           // command applied over [t, t + dt)
  ContextKind context = ContextKind::open_road;
  std::int32_t crossing = -1;  // index into the route's crossings, -1 on open road
  int queue_index = 0;         // 0 when not queued
  double t_zm = std::nan("");  // scheduled conflict entry, NaN when not queued
  std::uint32_t flags = 0;
};

struct Event {
  double t = 0.0;
  std::string type;
  VehicleId vehicle = 0;
  std::string zone;
  std::string approach;
  std::vector<std::pair<std::string, double>> values;
  std::string detail;
};

// Spacing to the previous vehicle of the same approach when a queued vehicle
// enters the conflict zone.
struct EntrySpacing {
  std::string zone;
  std::string approach;
  VehicleId follower = 0;
  VehicleId leader = 0;
  double t_m = 0.0;
  double spacing = 0.0;   // front to front, metres
  double required = 0.0;  // gamma + h v^z
};

struct RunStats {
  std::size_t ticks = 0;
  std::size_t collisions = 0;
  std::size_t rear_end_tick_violations = 0;      // realised, inside control zones
  std::size_t rear_end_forecast_violations = 0;  // verify_rear_end samples at planning time
  double min_control_zone_speed = std::numeric_limits<double>::infinity();
  double max_tracking_error = 0.0;
  std::size_t plans = 0;
  std::vector<EntrySpacing> entry_spacings;
};

struct AbortInfo {
  double t = 0.0;
  VehicleId vehicle = 0;
  std::string zone;
  std::string bound;
  std::string message;
};

struct RunResult {
  Mode mode = Mode::optimal;
  double dt = 0.0;
  std::vector<std::string> route_ids;
  std::vector<TraceRecord> trace;  // ordered by (t, vehicle)
  std::vector<OccupancyLedger> ledgers;
  std::vector<Event> events;
  RunStats stats;
  std::optional<AbortInfo> abort;
};

// Runs the scenario to completion or to the first infeasible plan, which is
// reported in RunResult::abort. Throws ConfigError for an invalid scenario.
RunResult simulate(const ScenarioConfig& config);

// Like simulate, but an aborted run raises InfeasiblePlanError.
RunResult run(const ScenarioConfig& config);

// Leader resolution over a frozen snapshot.
struct SnapshotVehicle {
  VehicleId id = 0;
  std::size_t route = 0;
  double p = 0.0;  // odometer
  double v = 0.0;
  double body_length = 0.0;
};

struct LeaderInfo {
  VehicleId id = 0;        // 0 for a virtual leader
  double distance = 0.0;   // front to front (to the line for a virtual leader)
  double gap = 0.0;        // net: distance - leader body length
  double speed = 0.0;
  bool is_virtual = false;
};

// Nearest vehicle ahead on the same lane within `lookahead` metres of
// front-to-front distance, across loop wraparound and shared lanes. A
// virtual leader wins when its gap is smaller.
std::optional<LeaderInfo> snapshot_leader(std::size_t self, std::span<const SnapshotVehicle> all,
                                          const Network& network, double lookahead,
                                          const std::optional<LeaderInfo>& virtual_leader = std::nullopt);

// "open", "control:<zone>:<approach>" or "conflict:<zone>:<approach>".
std::string context_label(const TraceRecord& record, const Network& network);

void write_trace_csv(std::ostream& out, const RunResult& result, const Network& network);
void write_events_jsonl(std::ostream& out, const RunResult& result);
void write_ledger_jsonl(std::ostream& out, const RunResult& result);

}  // namespace cavsim
