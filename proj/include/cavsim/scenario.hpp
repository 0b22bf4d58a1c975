#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cavsim/baseline.hpp"
#include "cavsim/dynamics.hpp"
#include "cavsim/network.hpp"

namespace cavsim {

enum class Mode { baseline, optimal };

const char* to_string(Mode mode);
Mode parse_mode(const std::string& text);  // ConfigError on anything else

struct FleetVehicle {
  VehicleId id = 0;
  std::string route;
  double s = 0.0;  // initial arc length on the route
  double v = 0.0;
  VehicleParams params;
  DriverParams driver;
  std::optional<double> z;  // fixed driver factor; drawn from the seed when absent
};

struct MetricsConfig {
  double loop_threshold = 2.5;  // m
  double warmup = 5.0;          // s
  double stop_speed = 0.1;      // m/s
  double stop_dwell = 0.5;      // s
  double smooth_window = 0.45;  // s
  double outlier_cutoff = 20.0; // m/s
};

struct ScenarioConfig {
  std::string name;
  Network network;
  std::vector<FleetVehicle> fleet;
  std::vector<VehicleId> egos;
  Mode mode = Mode::optimal;
  VehicleParams vehicle;  // defaults the fleet entries were built from
  DriverParams driver;
  std::vector<SignalPlan> signals;
  double dt = 0.02;
  double duration = 80.0;
  std::uint64_t seed = 1;
  std::string car_following = "wiedemann74";
  double driver_factor_mean = 0.5;
  double driver_factor_sd = 0.15;
  double position_jitter = 0.0;  // uniform +- metres on initial positions
  MetricsConfig metrics;

  bool is_ego(VehicleId id) const;
  const FleetVehicle& vehicle_spec(VehicleId id) const;  // LookupError when absent
  const SignalPlan* signal_for(const std::string& zone) const;
};

// Network, parameter, signal and fleet checks. Empty when the scenario can run.
std::vector<Violation> validate_scenario(const ScenarioConfig& config);

// Throws ParseError with line/column for malformed text and with the field
// path for missing or mistyped fields.
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin = "<scenario>");
ScenarioConfig load_scenario(const std::string& path);

// Canonical JSON of the effective configuration (sorted keys, geometry
// expanded to explicit segments). Reloading it reproduces the config.
std::string scenario_to_json(const ScenarioConfig& config);

// FNV-1a 64 of the canonical JSON, as 16 hex digits.
std::string config_hash(const ScenarioConfig& config);

// Rounded rectangle loop, counterclockwise from (x + r, y).
std::vector<Segment> rounded_rectangle(Vec2 origin, double width, double height, double radius);

}  // namespace cavsim
