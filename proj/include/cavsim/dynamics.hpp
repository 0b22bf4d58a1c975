#pragma once

#include <string>

namespace cavsim {

using VehicleId = int;

// Longitudinal state along a route. p is the front-bumper odometer reading
// (metres travelled along the route, not wrapped at loop boundaries).
struct VehicleState {
  VehicleId id = 0;
  std::string route;
  double p = 0.0;
  double v = 0.0;
  double u = 0.0;
  double t = 0.0;
};

struct VehicleParams {
  double u_min = -3.0;
  double u_max = 3.0;
  double v_min = 2.0;
  double v_max = 8.33;
  double desired_speed = 7.0;
  double standstill_distance = 6.0;  // gamma, front-to-front at rest
  double time_gap = 0.5;             // h
  double body_length = 4.0;
};

// Empty when the invariants hold, else a description of the first failure.
std::string check_params(const VehicleParams& params);

// Exact double-integrator step. If the speed would cross zero the vehicle
// stops at the crossing instant and stays put for the rest of the step.
// Throws NumericError on non-finite input, UsageError when dt <= 0.
VehicleState step(const VehicleState& state, double u, double dt);

// gamma + h * v.
double safe_distance(double v, const VehicleParams& params);

struct GapCheck {
  double margin = 0.0;  // (p_leader - p_follower) - safe_distance(v_follower)
  bool ok = false;      // margin >= 0
};

// Rear-end constraint between a follower and the vehicle immediately ahead
// of it in the same lane. The caller asserts the same-lane relation; a
// leader that is not ahead is a UsageError.
GapCheck rear_end_gap_ok(const VehicleState& follower, const VehicleState& leader,
                         const VehicleParams& params);

}  // namespace cavsim
