#include "cavsim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"

namespace cavsim {

namespace {

constexpr double kMinHorizon = 1e-6;
constexpr double kWindowSlack = 1e-9;

}  // namespace

TrajectoryPlan::TrajectoryPlan(const BoundaryConditions& boundary, double jerk, double u0)
    : boundary_(boundary), local_{boundary.p0, boundary.v0, u0, jerk} {}

TrajectoryPlan::Coefficients TrajectoryPlan::coefficients() const {
  const double t0 = boundary_.t0;
  const double j = local_.jerk;
  const double u0 = local_.u0;
  const double v0 = local_.v0;
  const double p0 = local_.p0;
  Coefficients k;
  k.a = j;
  k.b = u0 - j * t0;
  k.c = v0 - u0 * t0 + 0.5 * j * t0 * t0;
  k.d = p0 - v0 * t0 + 0.5 * u0 * t0 * t0 - j * t0 * t0 * t0 / 6.0;
  return k;
}

PlanPoint TrajectoryPlan::eval_unchecked(double t) const {
  const double s = t - boundary_.t0;
  PlanPoint pt;
  pt.p = local_.p0 + s * (local_.v0 + s * (0.5 * local_.u0 + s * (local_.jerk / 6.0)));
  pt.v = local_.v0 + s * (local_.u0 + s * (0.5 * local_.jerk));
  pt.u = local_.u0 + s * local_.jerk;
  return pt;
}

PlanPoint TrajectoryPlan::eval(double t) const {
  if (!(t >= boundary_.t0 - kWindowSlack && t <= boundary_.tm + kWindowSlack)) {
    throw RangeError("plan evaluated at t=" + format_g9(t) + " outside [" + format_g9(boundary_.t0) + ", " +
                     format_g9(boundary_.tm) + "]");
  }
  return eval_unchecked(t);
}

double TrajectoryPlan::cost() const {
  const double T = boundary_.tm - boundary_.t0;
  const double j = local_.jerk;
  const double u0 = local_.u0;
  return 0.5 * (j * j * T * T * T / 3.0 + j * u0 * T * T + u0 * u0 * T);
}

TrajectoryPlan solve_boundary(const BoundaryConditions& bc) {
  for (double x : {bc.t0, bc.tm, bc.p0, bc.pf, bc.v0, bc.vf}) {
    if (!std::isfinite(x)) throw NumericError("non-finite boundary condition");
  }
  const double T = bc.tm - bc.t0;
  if (!(T >= kMinHorizon)) {
    throw NumericError("degenerate horizon: tm - t0 = " + format_g9(T) + " s");
  }
  // Local-time elimination of the 4x4 system. With s = t - t0 the
  // conditions at s = 0 fix p0 and v0 directly, leaving
  //   u0 T   + j T^2/2 = vf - v0
  //   u0 T^2/2 + j T^3/6 = pf - p0 - v0 T
  const double dv = bc.vf - bc.v0;
  const double excess = (bc.pf - bc.p0) - bc.v0 * T;
  const double det = T * T * T * T / 12.0;  // of [[T, T^2/2], [T^2/2, T^3/6]], up to sign
  if (!(det > 0.0) || !std::isfinite(det)) throw NumericError("singular boundary system");
  const double jerk = (6.0 * dv * T - 12.0 * excess) / (T * T * T);
  const double u0 = (dv - 0.5 * jerk * T * T) / T;
  if (!std::isfinite(jerk) || !std::isfinite(u0)) throw NumericError("boundary solve produced non-finite values");
  return TrajectoryPlan(bc, jerk, u0);
}

FeasibilityReport check_feasibility(const TrajectoryPlan& plan, const VehicleParams& params, double slack) {
  const double t0 = plan.t0();
  const double tm = plan.tm();
  const double T = tm - t0;
  const double j = plan.jerk();
  const double u0 = plan.initial_accel();

  // Candidate times for speed extrema: both ends and the interior vertex.
  double times[3] = {t0, tm, t0};
  int n = 2;
  if (j != 0.0) {
    const double s_vertex = -u0 / j;
    if (s_vertex > 0.0 && s_vertex < T) times[n++] = t0 + s_vertex;
  }

  FeasibilityReport rep;
  rep.v_min_value = std::numeric_limits<double>::infinity();
  rep.v_max_value = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double v = plan.eval_unchecked(times[k]).v;
    if (v < rep.v_min_value) {
      rep.v_min_value = v;
      rep.v_min_time = times[k];
    }
    if (v > rep.v_max_value) {
      rep.v_max_value = v;
      rep.v_max_time = times[k];
    }
  }
  const double u_start = u0;
  const double u_end = u0 + j * T;
  rep.u_min_value = std::min(u_start, u_end);
  rep.u_max_value = std::max(u_start, u_end);
  const double u_min_time = u_start <= u_end ? t0 : tm;
  const double u_max_time = u_start >= u_end ? t0 : tm;

  if (rep.v_min_value < params.v_min - slack) {
    rep.excursions.push_back({"speed", "v_min", rep.v_min_time, rep.v_min_value, params.v_min,
                              params.v_min - rep.v_min_value});
  }
  if (rep.v_max_value > params.v_max + slack) {
    rep.excursions.push_back({"speed", "v_max", rep.v_max_time, rep.v_max_value, params.v_max,
                              rep.v_max_value - params.v_max});
  }
  if (rep.u_min_value < params.u_min - slack) {
    rep.excursions.push_back({"acceleration", "u_min", u_min_time, rep.u_min_value, params.u_min,
                              params.u_min - rep.u_min_value});
  }
  if (rep.u_max_value > params.u_max + slack) {
    rep.excursions.push_back({"acceleration", "u_max", u_max_time, rep.u_max_value, params.u_max,
                              rep.u_max_value - params.u_max});
  }
  rep.feasible = rep.excursions.empty();
  return rep;
}

RearEndCheck verify_rear_end(const TrajectoryPlan& follower, const TrajectoryPlan& leader,
                             const VehicleParams& params, double sample_dt, double tolerance) {
  if (!(sample_dt > 0.0)) throw UsageError("verify_rear_end requires sample_dt > 0");
  RearEndCheck out;
  const double lo = std::max(follower.t0(), leader.t0());
  const double hi = std::min(follower.tm(), leader.tm());
  if (hi < lo) return out;
  out.overlap = true;

  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / sample_dt + 1e-9));
  std::vector<double> times;
  times.reserve(steps + 2);
  for (std::size_t k = 0; k <= steps; ++k) times.push_back(lo + static_cast<double>(k) * sample_dt);
  if (hi - times.back() > 1e-12) times.push_back(hi);

  const std::size_t n = times.size();
  std::vector<double> s_f(n), s_l(n);
  for (std::size_t k = 0; k < n; ++k) {
    s_f[k] = times[k] - follower.t0();
    s_l[k] = times[k] - leader.t0();
  }
  std::vector<double> pf(n), vf(n), uf(n), pl(n), vl(n), ul(n);
  simd::eval_cubic(follower.local(), s_f, pf, vf, uf);
  simd::eval_cubic(leader.local(), s_l, pl, vl, ul);

  out.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const double margin = (pl[k] - pf[k]) - safe_distance(vf[k], params);
    if (margin < out.min_margin) {
      out.min_margin = margin;
      out.min_margin_time = times[k];
    }
    if (margin < -tolerance) out.violations.push_back({times[k], margin});
  }
  return out;
}

}  // namespace cavsim
