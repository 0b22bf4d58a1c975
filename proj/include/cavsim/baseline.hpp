#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cavsim/dynamics.hpp"
#include "cavsim/network.hpp"

namespace cavsim {

// Psycho-physical driver parameters. Distances are net (bumper to bumper).
struct DriverParams {
  double desired_speed = 7.0;
  double ax = 2.0;        // standstill gap
  double bx_add = 2.0;
  double bx_mult = 3.0;
  double ex = 2.0;        // following threshold: SDX = ax + ex * BX
  double cx = 25.0;       // perception: SDV = ((gap - ax) / cx)^2
  double perception_range = 150.0;
  double z = 0.5;         // driver random factor in [0, 1]
  double max_accel = 3.0;
  double comfortable_decel = 3.0;
  double emergency_decel = 6.0;
  double b_null = 0.2;
  double critical_gap = 3.0;  // seconds, for yield decisions
};

// Empty when valid, else the first broken invariant.
std::string check_driver(const DriverParams& driver);

struct LeaderView {
  double gap = 0.0;    // net gap to the leader's rear, metres
  double speed = 0.0;  // leader speed
  bool is_virtual = false;  // stop bar / yield line
};

enum class Regime { free, approaching, following, emergency, standstill };

const char* to_string(Regime regime);

struct FollowResult {
  double u = 0.0;
  Regime regime = Regime::free;
  bool collision = false;  // gap <= 0 to a real leader
};

// Wiedemann-74 style regime model:
//   free         no leader in range, or opening beyond the following band:
//                accelerate towards the desired speed;
//   approaching  closing faster than the perception threshold SDV:
//                u = -dv^2 / (2 (gap - ABX)), bounded by comfortable braking;
//   following    inside ABX..SDX: +-b_null with hysteresis on the sign of the
//                previous command;
//   emergency    gap < ABX: brake hard while still closing.
// ABX = ax + (bx_add + bx_mult z) sqrt(min(v_f, v_l)). The result is
// clamped to [-emergency_decel, max_accel] and never reverses the vehicle
// within dt.
FollowResult follow_accel(const VehicleState& follower, const std::optional<LeaderView>& leader,
                          const DriverParams& driver, double dt);

// Car-following models are pluggable so a simpler one can isolate
// coordination effects in tests.
class CarFollowingModel {
 public:
  virtual ~CarFollowingModel() = default;
  virtual std::string name() const = 0;
  virtual FollowResult accel(const VehicleState& follower, const std::optional<LeaderView>& leader,
                             const DriverParams& driver, double dt) const = 0;
};

class Wiedemann74Model final : public CarFollowingModel {
 public:
  std::string name() const override { return "wiedemann74"; }
  FollowResult accel(const VehicleState& follower, const std::optional<LeaderView>& leader,
                     const DriverParams& driver, double dt) const override {
    return follow_accel(follower, leader, driver, dt);
  }
};

// Intelligent-driver model with time headway taken from the driver's ax/bx
// at desired speed.
class IdmModel final : public CarFollowingModel {
 public:
  std::string name() const override { return "idm"; }
  FollowResult accel(const VehicleState& follower, const std::optional<LeaderView>& leader,
                     const DriverParams& driver, double dt) const override;
};

// "wiedemann74" or "idm"; ConfigError otherwise.
std::unique_ptr<CarFollowingModel> make_car_following(const std::string& name);

struct SignalPhase {
  std::vector<std::string> approaches;
  double green = 0.0;
  double inter_green = 0.0;
};

struct SignalPlan {
  std::string zone;
  double offset = 0.0;
  std::vector<SignalPhase> phases;

  double cycle() const;
};

struct SignalState {
  bool green = false;
  double time_to_change = 0.0;
};

// Inter-green time counts as red for every approach.
// Throws ConfigError for an approach not in the plan.
SignalState signal_state(const SignalPlan& plan, const std::string& approach, double t);

std::vector<Violation> validate_signal_plan(const SignalPlan& plan, const ZoneSpec& zone);

struct ConflictingVehicle {
  double distance = 0.0;  // to the conflict-zone entry; ignored when inside
  double speed = 0.0;
  bool inside = false;    // currently occupying the conflict zone
};

enum class YieldDecision { proceed, hold };

// Gap acceptance at a yield line. Proceed only if the conflict zone is
// clear and every conflicting major-road vehicle is more than the critical
// gap (distance / speed) away.
YieldDecision yield_decision(std::span<const ConflictingVehicle> majors, const DriverParams& driver);

}  // namespace cavsim
