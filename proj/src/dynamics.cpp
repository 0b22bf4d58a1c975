#include "cavsim/dynamics.hpp"

#include <cmath>

#include "cavsim/errors.hpp"

namespace cavsim {

std::string check_params(const VehicleParams& p) {
  if (!(p.u_min < 0.0 && 0.0 < p.u_max)) return "u_min < 0 < u_max violated";
  if (!(0.0 <= p.v_min)) return "v_min must be >= 0";
  if (!(p.v_min <= p.v_max)) return "v_min must not exceed v_max";
  if (!(p.v_min < p.desired_speed)) return "v_min must be below desired_speed";
  if (!(p.desired_speed <= p.v_max)) return "desired_speed must not exceed v_max";
  if (!(p.standstill_distance >= 0.0)) return "standstill_distance must be >= 0";
  if (!(p.time_gap > 0.0)) return "time_gap must be > 0";
  if (!(p.body_length >= 0.0)) return "body_length must be >= 0";
  return {};
}

VehicleState step(const VehicleState& state, double u, double dt) {
  if (!std::isfinite(state.p) || !std::isfinite(state.v) || !std::isfinite(u) || !std::isfinite(dt)) {
    throw NumericError("non-finite input to step for vehicle " + std::to_string(state.id));
  }
  if (!(dt > 0.0)) throw UsageError("step requires dt > 0");

  VehicleState next = state;
  next.u = u;
  next.t = state.t + dt;
  const double v_end = state.v + u * dt;
  if (v_end < 0.0 && u < 0.0) {
    // Stops at t* = -v/u, then holds.
    const double t_stop = -state.v / u;
    next.p = state.p + state.v * t_stop + 0.5 * u * t_stop * t_stop;
    next.v = 0.0;
    return next;
  }
  next.p = state.p + state.v * dt + 0.5 * u * dt * dt;
  next.v = v_end;
  return next;
}

double safe_distance(double v, const VehicleParams& params) {
  return params.standstill_distance + params.time_gap * v;
}

GapCheck rear_end_gap_ok(const VehicleState& follower, const VehicleState& leader,
                         const VehicleParams& params) {
  if (leader.p < follower.p) {
    throw UsageError("rear_end_gap_ok: vehicle " + std::to_string(leader.id) + " is not ahead of vehicle " +
                     std::to_string(follower.id));
  }
  GapCheck check;
  check.margin = (leader.p - follower.p) - safe_distance(follower.v, params);
  check.ok = check.margin >= 0.0;
  return check;
}

}  // namespace cavsim
