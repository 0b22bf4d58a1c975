#include <cmath>
#include <random>
#include <vector>

#include "cavsim/baseline.hpp"
#include "cavsim/dynamics.hpp"
#include "cavsim/errors.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cavsim;
using namespace cavsim::testing;

namespace {
VehicleState veh(double v, double u = 0.0) {
  VehicleState s;
  s.id = 1;
  s.v = v;
  s.u = u;
  return s;
}
}  // namespace

TEST_CASE("free flow at desired speed holds speed") {
  DriverParams d;
  auto r = follow_accel(veh(7.0), std::nullopt, d, 0.02);
  CHECK(r.regime == Regime::free);
  CHECK(r.u == 0.0);
  CHECK(follow_accel(veh(3.0), std::nullopt, d, 0.02).u > 0.0);
  // Leader beyond perception range is ignored.
  CHECK(follow_accel(veh(7.0), LeaderView{200.0, 0.0, false}, d, 0.02).u == 0.0);
}

TEST_CASE("standstill equilibrium") {
  DriverParams d;
  auto r = follow_accel(veh(0.0), LeaderView{d.ax, 0.0, false}, d, 0.02);
  CHECK(r.regime == Regime::standstill);
  CHECK(r.u == 0.0);
  CHECK_FALSE(r.collision);
}

TEST_CASE("approaching a stop bar") {
  DriverParams d;  // ax 2, bx 2 + 3z, z 0.5, comfortable decel 3
  auto r = follow_accel(veh(7.0), LeaderView{20.0, 0.0, true}, d, 0.02);
  CHECK(r.regime == Regime::approaching);
  CHECK(r.u == doctest::Approx(-49.0 / 36.0));
  // Constant deceleration stops within gap - ax.
  CHECK(49.0 / (2.0 * -r.u) <= 20.0 - d.ax + 1e-9);
}

TEST_CASE("non-positive gap") {
  DriverParams d;
  auto r = follow_accel(veh(5.0), LeaderView{-0.5, 5.0, false}, d, 0.02);
  CHECK(r.collision);
  CHECK(r.regime == Regime::emergency);
  r = follow_accel(veh(5.0), LeaderView{0.0, 0.0, true}, d, 0.02);
  CHECK_FALSE(r.collision);
}

TEST_CASE("following band uses hysteresis on the previous command") {
  DriverParams d;
  // v = 7, leader 7: ABX = 2 + 3.5 sqrt 7 ~ 11.26, SDX ~ 20.52.
  auto up = follow_accel(veh(6.9, 0.2), LeaderView{15.0, 6.9, false}, d, 0.02);
  auto down = follow_accel(veh(6.9, -0.2), LeaderView{15.0, 6.9, false}, d, 0.02);
  CHECK(up.regime == Regime::following);
  CHECK(down.regime == Regime::following);
  CHECK(up.u > 0.0);
  CHECK(down.u == doctest::Approx(-d.b_null));
}

TEST_CASE("follow_accel never reverses and respects the envelope") {
  DriverParams d;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> v(0.0, 9.0), gap(-2.0, 160.0), lv(0.0, 9.0), u(-3.0, 3.0), z(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    d.z = z(rng);
    const double dt = 0.02;
    auto s = veh(v(rng), u(rng));
    auto r = follow_accel(s, LeaderView{gap(rng), lv(rng), false}, d, dt);
    CHECK(r.u >= -d.emergency_decel - 1e-12);
    CHECK(r.u <= d.max_accel + 1e-12);
    CHECK(step(s, r.u, dt).v >= 0.0);
    IdmModel idm;
    auto q = idm.accel(s, LeaderView{gap(rng), lv(rng), false}, d, dt);
    CHECK(step(s, q.u, dt).v >= 0.0);
  }
}

TEST_CASE("car-following factory") {
  CHECK(make_car_following("wiedemann74")->name() == "wiedemann74");
  CHECK(make_car_following("idm")->name() == "idm");
  CHECK_THROWS_AS(make_car_following("gipps"), ConfigError);
}

TEST_CASE("signal_state") {
  SignalPlan plan{"I", 0.0, {{{"n", "s"}, 30.0, 0.0}, {{"e", "w"}, 30.0, 0.0}}};
  auto s = signal_state(plan, "n", 10.0);
  CHECK(s.green);
  CHECK(s.time_to_change == doctest::Approx(20.0));
  s = signal_state(plan, "n", 45.0);
  CHECK_FALSE(s.green);
  CHECK(s.time_to_change == doctest::Approx(15.0));
  CHECK(signal_state(plan, "e", 45.0).green);
  CHECK_THROWS_AS(signal_state(plan, "x", 1.0), ConfigError);
  for (double t = 0.0; t < 200.0; t += 0.37) {
    for (const char* a : {"n", "e"}) {
      auto p = signal_state(plan, a, t);
      auto q = signal_state(plan, a, t + plan.cycle());
      CHECK(p.green == q.green);
      CHECK(p.time_to_change == doctest::Approx(q.time_to_change));
    }
  }
  CHECK(signal_state(plan, "n", plan.cycle()).green == signal_state(plan, "n", 0.0).green);
}

TEST_CASE("inter-green is red for everyone") {
  SignalPlan plan{"I", 5.0, {{{"n"}, 10.0, 3.0}, {{"e"}, 10.0, 3.0}}};
  CHECK_FALSE(signal_state(plan, "n", 16.0).green);
  CHECK_FALSE(signal_state(plan, "e", 16.0).green);
  CHECK(signal_state(plan, "e", 18.5).green);
  CHECK(signal_state(plan, "n", 5.0).green);
  CHECK_FALSE(signal_state(plan, "n", 4.9).green);
}

TEST_CASE("validate_signal_plan") {
  ZoneSpec z = zone("I", {approach("n"), approach("e")});
  CHECK(validate_signal_plan({"I", 0.0, {{{"n"}, 10, 2}, {{"e"}, 10, 2}}}, z).empty());
  CHECK_FALSE(validate_signal_plan({"I", 0.0, {{{"n"}, 10, 2}}}, z).empty());
  CHECK_FALSE(validate_signal_plan({"I", 0.0, {{{"n", "e"}, 10, 2}, {{"e"}, 10, 2}}}, z).empty());
  CHECK_FALSE(validate_signal_plan({"I", 0.0, {{{"n", "q"}, 10, 2}, {{"e"}, 10, 2}}}, z).empty());
}

TEST_CASE("yield_decision") {
  DriverParams d;
  CHECK(yield_decision({}, d) == YieldDecision::proceed);
  std::vector<ConflictingVehicle> near = {{10.0, 7.0, false}};
  CHECK(yield_decision(near, d) == YieldDecision::hold);
  std::vector<ConflictingVehicle> far = {{70.0, 7.0, false}};
  CHECK(yield_decision(far, d) == YieldDecision::proceed);
  std::vector<ConflictingVehicle> inside = {{0.0, 7.0, true}};
  CHECK(yield_decision(inside, d) == YieldDecision::hold);
  std::vector<ConflictingVehicle> stopped = {{30.0, 0.0, false}};
  CHECK(yield_decision(stopped, d) == YieldDecision::proceed);
}

TEST_CASE("check_driver") {
  DriverParams d;
  CHECK(check_driver(d).empty());
  d.z = 1.5;
  CHECK_FALSE(check_driver(d).empty());
  d = DriverParams{};
  d.emergency_decel = 1.0;
  CHECK_FALSE(check_driver(d).empty());
}
