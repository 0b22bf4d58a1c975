#include "cavsim/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"

namespace cavsim {

std::string check_driver(const DriverParams& d) {
  if (!(d.desired_speed > 0.0)) return "desired_speed must be > 0";
  if (!(d.ax >= 0.0 && d.bx_add >= 0.0 && d.bx_mult >= 0.0)) return "ax, bx_add, bx_mult must be >= 0";
  if (!(d.ex >= 1.0)) return "ex must be >= 1";
  if (!(d.cx > 0.0)) return "cx must be > 0";
  if (!(d.perception_range > 0.0)) return "perception_range must be > 0";
  if (!(d.z >= 0.0 && d.z <= 1.0)) return "z must lie in [0, 1]";
  if (!(d.max_accel > 0.0)) return "max_accel must be > 0";
  if (!(d.comfortable_decel > 0.0)) return "comfortable_decel must be > 0";
  if (!(d.emergency_decel >= d.comfortable_decel)) return "emergency_decel must be >= comfortable_decel";
  if (!(d.b_null >= 0.0)) return "b_null must be >= 0";
  if (!(d.critical_gap >= 0.0)) return "critical_gap must be >= 0";
  return {};
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::free: return "free";
    case Regime::approaching: return "approaching";
    case Regime::following: return "following";
    case Regime::emergency: return "emergency";
    case Regime::standstill: return "standstill";
  }
  return "?";
}

namespace {

double free_accel(double v, const DriverParams& d) {
  return std::max(-d.comfortable_decel, d.max_accel * (1.0 - v / d.desired_speed));
}

FollowResult finish(FollowResult r, double v, const DriverParams& d, double dt) {
  r.u = std::clamp(r.u, -d.emergency_decel, d.max_accel);
  // v + u dt >= 0
  r.u = std::max(r.u, -v / dt);
  return r;
}

}  // namespace

FollowResult follow_accel(const VehicleState& follower, const std::optional<LeaderView>& leader,
                          const DriverParams& d, double dt) {
  const double v = follower.v;
  FollowResult r;
  if (!leader || leader->gap > d.perception_range) {
    r.regime = Regime::free;
    r.u = free_accel(v, d);
    return finish(r, v, d, dt);
  }
  const double gap = leader->gap;
  const double dv = v - leader->speed;  // closing speed
  if (gap <= 0.0) {
    r.collision = !leader->is_virtual;
    r.regime = Regime::emergency;
    r.u = -d.emergency_decel;
    return finish(r, v, d, dt);
  }

  const double bx = (d.bx_add + d.bx_mult * d.z) * std::sqrt(std::max(0.0, std::min(v, leader->speed)));
  const double abx = d.ax + bx;
  const double sdx = d.ax + d.ex * bx;
  const double sdv = std::pow(std::max(0.0, gap - d.ax) / d.cx, 2);

  if (v <= 0.0 && gap <= abx) {
    r.regime = Regime::standstill;
    r.u = 0.0;
    return finish(r, v, d, dt);
  }
  if (gap < abx) {
    r.regime = Regime::emergency;
    r.u = dv > 0.0 ? -d.emergency_decel : -d.b_null;
    return finish(r, v, d, dt);
  }
  if (dv > sdv) {
    r.regime = Regime::approaching;
    const double room = gap - abx;
    r.u = room > 0.0 ? std::max(-d.comfortable_decel, -dv * dv / (2.0 * room)) : -d.comfortable_decel;
    return finish(r, v, d, dt);
  }
  if (gap <= sdx) {
    r.regime = Regime::following;
    if (dv > 0.0) {
      r.u = -d.b_null;
    } else if (dv < -sdv) {
      r.u = d.b_null;
    } else {
      r.u = follower.u > 0.0 ? d.b_null : -d.b_null;
    }
    r.u = std::min(r.u, std::max(0.0, free_accel(v, d)));
    return finish(r, v, d, dt);
  }
  r.regime = Regime::free;
  r.u = free_accel(v, d);
  return finish(r, v, d, dt);
}

FollowResult IdmModel::accel(const VehicleState& follower, const std::optional<LeaderView>& leader,
                             const DriverParams& d, double dt) const {
  const double v = follower.v;
  const double v0 = d.desired_speed;
  double u = d.max_accel * (1.0 - std::pow(v / v0, 4));
  FollowResult r;
  r.regime = Regime::free;
  if (leader && leader->gap <= d.perception_range) {
    if (leader->gap <= 0.0) {
      r.collision = !leader->is_virtual;
      r.regime = Regime::emergency;
      r.u = -d.emergency_decel;
      return finish(r, v, d, dt);
    }
    const double headway = (d.bx_add + d.bx_mult * d.z) / std::sqrt(v0);
    const double dv = v - leader->speed;
    const double s_star =
        d.ax + std::max(0.0, v * headway + v * dv / (2.0 * std::sqrt(d.max_accel * d.comfortable_decel)));
    u -= d.max_accel * std::pow(s_star / leader->gap, 2);
    r.regime = Regime::following;
  }
  r.u = u;
  return finish(r, v, d, dt);
}

std::unique_ptr<CarFollowingModel> make_car_following(const std::string& name) {
  if (name == "wiedemann74") return std::make_unique<Wiedemann74Model>();
  if (name == "idm") return std::make_unique<IdmModel>();
  throw ConfigError("unknown car-following model '" + name + "'");
}

double SignalPlan::cycle() const {
  double c = 0.0;
  for (const auto& ph : phases) c += ph.green + ph.inter_green;
  return c;
}

SignalState signal_state(const SignalPlan& plan, const std::string& approach, double t) {
  const double cycle = plan.cycle();
  if (!(cycle > 0.0)) throw ConfigError("signal plan for zone " + plan.zone + " has zero cycle length");
  std::size_t phase = plan.phases.size();
  for (std::size_t k = 0; k < plan.phases.size() && phase == plan.phases.size(); ++k) {
    const auto& a = plan.phases[k].approaches;
    if (std::find(a.begin(), a.end(), approach) != a.end()) phase = k;
  }
  if (phase == plan.phases.size()) {
    throw ConfigError("approach '" + approach + "' not in signal plan for zone " + plan.zone);
  }
  double local = std::fmod(t - plan.offset, cycle);
  if (local < 0.0) local += cycle;

  double start = 0.0;
  for (std::size_t k = 0; k < phase; ++k) start += plan.phases[k].green + plan.phases[k].inter_green;
  const double green_end = start + plan.phases[phase].green;

  SignalState s;
  if (local >= start && local < green_end) {
    s.green = true;
    s.time_to_change = green_end - local;
  } else {
    s.green = false;
    s.time_to_change = local < start ? start - local : cycle - local + start;
  }
  return s;
}

std::vector<Violation> validate_signal_plan(const SignalPlan& plan, const ZoneSpec& zone) {
  std::vector<Violation> out;
  const std::string subject = "signal plan " + plan.zone;
  if (plan.phases.empty()) out.push_back({subject, "no phases"});
  std::multiset<std::string> seen;
  for (std::size_t k = 0; k < plan.phases.size(); ++k) {
    const auto& ph = plan.phases[k];
    if (!(ph.green > 0.0)) out.push_back({subject, "phase " + std::to_string(k) + " green must be > 0"});
    if (!(ph.inter_green >= 0.0)) out.push_back({subject, "phase " + std::to_string(k) + " inter-green must be >= 0"});
    for (const auto& a : ph.approaches) {
      if (zone.find_approach(a) == ZoneSpec::npos) out.push_back({subject, "unknown approach '" + a + "'"});
      seen.insert(a);
    }
  }
  for (const auto& ap : zone.approaches) {
    const auto n = seen.count(ap.id);
    if (n != 1) {
      out.push_back({subject, "approach '" + ap.id + "' appears in " + std::to_string(n) + " phases (expected 1)"});
    }
  }
  return out;
}

YieldDecision yield_decision(std::span<const ConflictingVehicle> majors, const DriverParams& driver) {
  for (const auto& m : majors) {
    if (m.inside) return YieldDecision::hold;
    const double arrival = m.distance / std::max(m.speed, 1e-6);
    if (arrival <= driver.critical_gap) return YieldDecision::hold;
  }
  return YieldDecision::proceed;
}

}  // namespace cavsim
