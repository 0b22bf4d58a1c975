#pragma once

#include <string>
#include <vector>

#include "cavsim/dynamics.hpp"
#include "cavsim/simd/kernels.hpp"

namespace cavsim {

struct BoundaryConditions {
  double t0 = 0.0;
  double tm = 0.0;
  double p0 = 0.0;
  double pf = 0.0;
  double v0 = 0.0;
  double vf = 0.0;
};

struct PlanPoint {
  double p = 0.0;
  double v = 0.0;
  double u = 0.0;
};

// Unconstrained minimum-effort trajectory: u(t) = a t + b,
// v(t) = a t^2/2 + b t + c, p(t) = a t^3/6 + b t^2/2 + c t + d on [t0, tm].
//
// Internally the plan is held in local time s = t - t0, which keeps the
// evaluation well conditioned far from t = 0. coefficients() returns the
// absolute-time constants.
class TrajectoryPlan {
 public:
  struct Coefficients {
    double a = 0.0;  // m/s^3
    double b = 0.0;  // m/s^2
    double c = 0.0;  // m/s
    double d = 0.0;  // m
  };

  TrajectoryPlan() = default;
  TrajectoryPlan(const BoundaryConditions& boundary, double jerk, double u0);

  double t0() const { return boundary_.t0; }
  double tm() const { return boundary_.tm; }
  const BoundaryConditions& boundary() const { return boundary_; }
  double jerk() const { return local_.jerk; }
  double initial_accel() const { return local_.u0; }
  const simd::Cubic& local() const { return local_; }

  Coefficients coefficients() const;

  // Throws RangeError outside [t0, tm] (with 1e-9 s slack).
  PlanPoint eval(double t) const;
  // No window check; used for continuation past tm.
  PlanPoint eval_unchecked(double t) const;

  // 1/2 * integral of u^2 over the window, analytically.
  double cost() const;

 private:
  BoundaryConditions boundary_;
  simd::Cubic local_;
};

// Solves p(t0)=p0, v(t0)=v0, p(tm)=pf, v(tm)=vf in closed form.
// Throws NumericError for a horizon below 1e-6 s or non-finite input.
TrajectoryPlan solve_boundary(const BoundaryConditions& bc);

struct BoundExcursion {
  std::string quantity;  // "speed" | "acceleration"
  std::string bound;     // "v_min" | "v_max" | "u_min" | "u_max"
  double t = 0.0;        // where the extreme value occurs
  double value = 0.0;
  double limit = 0.0;
  double magnitude = 0.0;  // |value - limit|
};

struct FeasibilityReport {
  bool feasible = true;
  double v_min_value = 0.0;
  double v_min_time = 0.0;
  double v_max_value = 0.0;
  double v_max_time = 0.0;
  double u_min_value = 0.0;
  double u_max_value = 0.0;
  std::vector<BoundExcursion> excursions;
};

// Analytic extrema of v (quadratic vertex) and u (linear endpoints).
// `slack` loosens each bound, for round-off at the boundary values.
FeasibilityReport check_feasibility(const TrajectoryPlan& plan, const VehicleParams& params,
                                    double slack = 1e-9);

struct RearEndSample {
  double t = 0.0;
  double margin = 0.0;
};

struct RearEndCheck {
  std::vector<RearEndSample> violations;
  double min_margin = 0.0;
  double min_margin_time = 0.0;
  bool overlap = false;  // false when the two windows do not intersect
};

// Samples both plans every sample_dt over the intersection of their windows
// (both ends included). Positions must be in a common frame, e.g. metres
// into the same control zone. Margins above -tolerance are not violations.
RearEndCheck verify_rear_end(const TrajectoryPlan& follower, const TrajectoryPlan& leader,
                             const VehicleParams& params, double sample_dt, double tolerance = 1e-9);

}  // namespace cavsim
