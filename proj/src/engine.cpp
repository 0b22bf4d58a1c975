#include "cavsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <utility>

#include "cavsim/baseline.hpp"
#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"
#include "cavsim/planner.hpp"
#include "cavsim/rng.hpp"

namespace cavsim {

std::string flags_to_string(std::uint32_t flags) {
  static constexpr std::pair<std::uint32_t, const char*> kNames[] = {
      {kSignalHeld, "signal_held"},       {kYieldHeld, "yield_held"}, {kPlanInfeasible, "plan_infeasible"},
      {kOccupancyHeld, "occupancy_held"}, {kCollision, "collision"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if (flags & bit) {
      if (!out.empty()) out += '|';
      out += name;
    }
  }
  return out;
}

namespace {

double wrap(double x, double length) {
  double w = std::fmod(x, length);
  if (w < 0.0) w += length;
  return w;
}

bool same_line(double held, double boundary) { return std::isfinite(held) && std::abs(held - boundary) < 1e-3; }

// Odometer value of boundary b crossed in (prev, now], or NaN.
double crossed(double prev, double now, double b, double length) {
  const double n = std::floor((now - b) / length);
  const double val = b + n * length;
  return (val > prev && val <= now) ? val : std::nan("");
}

// Box-Muller on the portable uniform.
double standard_normal(Rng& rng) {
  const double u1 = 1.0 - unit_uniform(rng);  // (0, 1]
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

enum class Boundary { conflict_exit = 0, conflict_entry = 1, control_entry = 2 };

const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::conflict_exit: return "conflict_exit";
    case Boundary::conflict_entry: return "conflict_entry";
    case Boundary::control_entry: return "control_entry";
  }
  return "?";
}

struct Crossing {
  Boundary kind;
  std::size_t vehicle;  // index into vehicles
  std::size_t crossing;
  double odometer;
  double t;
  double v;
};

struct Vehicle {
  FleetVehicle spec;
  std::size_t route = 0;
  double p = 0.0;
  double v = 0.0;
  double u = 0.0;
  double prev_p = 0.0;
  double prev_v = 0.0;
  std::uint32_t flags = 0;

  // Optimal mode, while queued in a zone.
  bool planned = false;
  TrajectoryPlan plan;
  double base = 0.0;  // odometer of the control-zone entry
  std::size_t zone = 0;
  std::size_t crossing = 0;
  int queue_index = 0;
  double t_m = 0.0;
  double v_z = 0.0;
  double control_length = 0.0;

  // Baseline memory, keyed by the odometer of the line concerned.
  double signal_hold = std::nan("");
  double occupancy_hold = std::nan("");
  double yield_commit = std::nan("");
};

struct SpacingMark {
  std::size_t vehicle;
  double conflict_base;  // odometer of the leader's conflict entry
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg)
      : cfg_(cfg), net_(cfg.network), model_(make_car_following(cfg.car_following)), coord_rng_(cfg.seed ^ 0x9E3779B97F4A7C15ull) {
    result_.mode = cfg.mode;
    result_.dt = cfg.dt;
    for (const auto& r : net_.routes) result_.route_ids.push_back(r.id);
    Rng fleet_rng(cfg.seed);
    std::vector<FleetVehicle> fleet = cfg.fleet;
    std::sort(fleet.begin(), fleet.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& fv : fleet) {
      Vehicle veh;
      veh.spec = fv;
      veh.route = net_.find_route(fv.route);
      const double z = std::clamp(cfg.driver_factor_mean + cfg.driver_factor_sd * standard_normal(fleet_rng), 0.0, 1.0);
      const double jitter = uniform(fleet_rng, -cfg.position_jitter, cfg.position_jitter);
      veh.spec.driver.z = fv.z.value_or(z);
      veh.p = fv.s + jitter;
      veh.v = fv.v;
      vehicles_.push_back(std::move(veh));
    }
    if (cfg.mode == Mode::optimal) {
      for (const auto& z : net_.zones) coordinators_.emplace_back(z);
    }
  }

  RunResult run() {
    const auto ticks = static_cast<long long>(std::llround(cfg_.duration / cfg_.dt));
    for (long long k = 0; k <= ticks; ++k) {
      const double t = static_cast<double>(k) * cfg_.dt;
      if (k > 0) {
        detect_and_fire(t);
        if (result_.abort) {
          record(t);
          break;
        }
      }
      compute_controls(t);
      record(t);
      ++result_.stats.ticks;
      if (k == ticks) break;
      integrate(t);
    }
    for (const auto& c : coordinators_) result_.ledgers.push_back(c.ledger());
    return std::move(result_);
  }

 private:
  const Route& route_of(const Vehicle& v) const { return net_.routes[v.route]; }

  void log(double t, std::string type, const Vehicle& veh, std::string zone, std::string approach,
           std::vector<std::pair<std::string, double>> values = {}, std::string detail = {}) {
    result_.events.push_back({t, std::move(type), veh.spec.id, std::move(zone), std::move(approach), std::move(values),
                              std::move(detail)});
  }

  // --- events --------------------------------------------------------------

  void detect_and_fire(double t) {
    now_ = t;
    const double t_prev = t - cfg_.dt;
    std::vector<Crossing> found;
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      const Vehicle& veh = vehicles_[i];
      const Route& r = route_of(veh);
      if (!(veh.p > veh.prev_p)) continue;
      for (std::size_t c = 0; c < r.crossings.size(); ++c) {
        const auto& zc = r.crossings[c];
        const std::pair<Boundary, double> bounds[] = {{Boundary::conflict_exit, zc.conflict_exit},
                                                      {Boundary::conflict_entry, zc.conflict_entry},
                                                      {Boundary::control_entry, zc.control_entry}};
        for (const auto& [kind, offset] : bounds) {
          const double val = crossed(veh.prev_p, veh.p, offset, r.total_length);
          if (std::isnan(val)) continue;
          const double frac = (val - veh.prev_p) / (veh.p - veh.prev_p);
          found.push_back({kind, i, c, val, t_prev + frac * cfg_.dt, veh.prev_v + frac * (veh.v - veh.prev_v)});
        }
      }
    }
    // Exits, then conflict entries, then control entries; within a kind by
    // route id, position along the route and vehicle id.
    std::sort(found.begin(), found.end(), [&](const Crossing& a, const Crossing& b) {
      if (a.kind != b.kind) return a.kind < b.kind;
      const Vehicle& va = vehicles_[a.vehicle];
      const Vehicle& vb = vehicles_[b.vehicle];
      const std::string& ra = route_of(va).id;
      const std::string& rb = route_of(vb).id;
      if (ra != rb) return ra < rb;
      const double oa = wrap(a.odometer, route_of(va).total_length);
      const double ob = wrap(b.odometer, route_of(vb).total_length);
      if (oa != ob) return oa < ob;
      return va.spec.id < vb.spec.id;
    });

    std::map<std::size_t, std::vector<const Crossing*>> entries_by_zone;
    for (const auto& ev : found) {
      Vehicle& veh = vehicles_[ev.vehicle];
      const auto& zc = route_of(veh).crossings[ev.crossing];
      log(ev.t, boundary_name(ev.kind), veh, zc.zone, zc.approach, {{"v", ev.v}});
      if (cfg_.mode != Mode::optimal) continue;
      switch (ev.kind) {
        case Boundary::conflict_exit: on_conflict_exit(ev, veh); break;
        case Boundary::conflict_entry: on_conflict_entry(ev, veh); break;
        case Boundary::control_entry: entries_by_zone[net_.find_zone(zc.zone)].push_back(&ev); break;
      }
    }
    for (auto& [zone, evs] : entries_by_zone) {
      on_control_entries(t, zone, evs);
      if (result_.abort) return;
    }
  }

  void on_conflict_exit(const Crossing& ev, Vehicle& veh) {
    if (!veh.planned || veh.crossing != ev.crossing) return;
    auto& coord = coordinators_[veh.zone];
    const auto& entry = coord.release(veh.spec.id, ev.t, 1e-6);
    std::vector<std::pair<std::string, double>> values = {{"t_f", entry.t_f}, {"realized", ev.t}};
    log(ev.t, "release", veh, coord.zone().id, entry.approach, std::move(values), entry.warning.value_or(""));
    veh.planned = false;
    veh.queue_index = 0;
  }

  void on_conflict_entry(const Crossing& ev, Vehicle& veh) {
    if (!veh.planned || veh.crossing != ev.crossing) return;
    const auto& zc = route_of(veh).crossings[ev.crossing];
    const ZoneSpec& zone = net_.zones[veh.zone];
    const std::size_t ai = zone.approach_index(zc.approach);
    const auto key = std::make_pair(veh.zone, ai);
    if (auto it = last_entry_.find(key); it != last_entry_.end()) {
      const Vehicle& lead = vehicles_[it->second.vehicle];
      // Spacing at the scheduled entry, stepped back from the current tick:
      // the follower has moved at v^z since t_m, the leader at its own speed.
      const double now_gap = (lead.p - it->second.conflict_base) - (veh.p - ev.odometer);
      const double x_lead = now_gap - (lead.v - veh.v_z) * (now_ - veh.t_m);
      EntrySpacing sp;
      sp.zone = zone.id;
      sp.approach = zc.approach;
      sp.follower = veh.spec.id;
      sp.leader = lead.spec.id;
      sp.t_m = veh.t_m;
      sp.spacing = x_lead;
      sp.required = safe_distance(veh.v_z, veh.spec.params);
      result_.stats.entry_spacings.push_back(sp);
      log(ev.t, "entry_spacing", veh, zone.id, zc.approach,
          {{"leader", static_cast<double>(lead.spec.id)}, {"spacing", sp.spacing}, {"required", sp.required}});
    }
    last_entry_[key] = {static_cast<std::size_t>(&veh - vehicles_.data()), ev.odometer};
  }

  void on_control_entries(double t, std::size_t zone_index, const std::vector<const Crossing*>& evs) {
    auto& coord = coordinators_[zone_index];
    std::vector<Arrival> arrivals;
    std::map<VehicleId, const Crossing*> by_id;
    for (const Crossing* ev : evs) {
      const Vehicle& veh = vehicles_[ev->vehicle];
      const auto& zc = route_of(veh).crossings[ev->crossing];
      arrivals.push_back({veh.spec.id, zc.approach, ev->t, ev->v, veh.spec.params});
      by_id[veh.spec.id] = ev;
    }
    std::vector<QueueEntry> queued;
    try {
      queued = coord.register_simultaneous(arrivals, coord_rng_);
    } catch (const ProtocolError& e) {
      abort_run(t, vehicles_[evs.front()->vehicle], coord.zone().id, "entry_speed", e.what());
      return;
    }
    for (const QueueEntry& entry : queued) {
      const Crossing* ev = by_id.at(entry.vehicle);
      Vehicle& veh = vehicles_[ev->vehicle];
      const Approach& ap = coord.zone().approaches[entry.approach_index];
      BoundaryConditions bc{entry.t0, entry.t_m, 0.0, ap.control_length, entry.v0, ap.imposed_speed};
      TrajectoryPlan plan;
      try {
        plan = solve_boundary(bc);
      } catch (const NumericError& e) {
        abort_run(t, veh, coord.zone().id, "horizon", e.what());
        return;
      }
      const FeasibilityReport rep = check_feasibility(plan, veh.spec.params);
      if (!rep.feasible) {
        const BoundExcursion& x = rep.excursions.front();
        abort_run(t, veh, coord.zone().id, x.bound,
                  "vehicle " + std::to_string(veh.spec.id) + " in zone " + coord.zone().id + ": planned " + x.quantity +
                      " " + format_g9(x.value) + " at t=" + format_g9(x.t) + " violates " + x.bound + "=" +
                      format_g9(x.limit));
        return;
      }
      veh.planned = true;
      veh.plan = plan;
      veh.base = ev->odometer;
      veh.zone = zone_index;
      veh.crossing = ev->crossing;
      veh.queue_index = entry.index;
      veh.t_m = entry.t_m;
      veh.v_z = ap.imposed_speed;
      veh.control_length = ap.control_length;
      ++result_.stats.plans;
      log(t, "registered", veh, coord.zone().id, entry.approach,
          {{"index", static_cast<double>(entry.index)},
           {"t0", entry.t0},
           {"v0", entry.v0},
           {"t_m", entry.t_m},
           {"t_f", entry.t_f},
           {"cost", plan.cost()}});
      forecast_rear_end(t, veh, entry, coord);

      // Position authority from here on.
      const PlanPoint pt = plan.eval(t);
      result_.stats.max_tracking_error = std::max(result_.stats.max_tracking_error, std::abs(veh.base + pt.p - veh.p));
      veh.p = veh.base + pt.p;
      veh.v = pt.v;
      veh.u = pt.u;
    }
  }

  void forecast_rear_end(double t, const Vehicle& veh, const QueueEntry& entry, const Coordinator& coord) {
    const QueueEntry* pred = nullptr;
    for (const auto& q : coord.queue()) {
      if (q.vehicle == entry.vehicle) break;
      if (q.approach_index == entry.approach_index) pred = &q;
    }
    if (pred == nullptr) return;
    for (const auto& other : vehicles_) {
      if (other.spec.id != pred->vehicle || !other.planned) continue;
      const RearEndCheck chk = verify_rear_end(veh.plan, other.plan, veh.spec.params, cfg_.dt);
      if (!chk.violations.empty()) {
        result_.stats.rear_end_forecast_violations += chk.violations.size();
        log(t, "rear_end_forecast", veh, coord.zone().id, entry.approach,
            {{"leader", static_cast<double>(other.spec.id)},
             {"samples", static_cast<double>(chk.violations.size())},
             {"min_margin", chk.min_margin},
             {"at", chk.min_margin_time}});
      }
    }
  }

  void abort_run(double t, Vehicle& veh, const std::string& zone, const std::string& bound, const std::string& message) {
    veh.flags |= kPlanInfeasible;
    result_.abort = AbortInfo{t, veh.spec.id, zone, bound, message};
    log(t, "plan_infeasible", veh, zone, "", {}, message);
  }

  // --- control -------------------------------------------------------------

  std::vector<SnapshotVehicle> snapshot() const {
    std::vector<SnapshotVehicle> snap;
    snap.reserve(vehicles_.size());
    for (const auto& v : vehicles_) snap.push_back({v.spec.id, v.route, v.p, v.v, v.spec.params.body_length});
    return snap;
  }

  struct NextLine {
    std::size_t crossing = 0;
    double distance = 0.0;
    bool found = false;
  };

  // Nearest conflict entry strictly ahead.
  NextLine next_line(const Vehicle& veh) const {
    const Route& r = route_of(veh);
    NextLine best;
    for (std::size_t c = 0; c < r.crossings.size(); ++c) {
      double d = wrap(r.crossings[c].conflict_entry - veh.p, r.total_length);
      if (d <= 0.0) d = r.total_length;
      if (!best.found || d < best.distance) best = {c, d, true};
    }
    return best;
  }

  bool inside_conflict(const Vehicle& veh, const ZoneCrossing& zc) const {
    const double s = wrap(veh.p, route_of(veh).total_length);
    return s >= zc.conflict_entry && s < zc.conflict_exit;
  }

  std::optional<LeaderInfo> virtual_leader(Vehicle& veh, double t) {
    const NextLine nl = next_line(veh);
    if (!nl.found) return std::nullopt;
    const DriverParams& d = veh.spec.driver;
    if (nl.distance > d.perception_range) return std::nullopt;
    const ZoneCrossing& zc = route_of(veh).crossings[nl.crossing];
    const ZoneSpec& zone = net_.zone(zc.zone);
    const std::size_t ai = zone.approach_index(zc.approach);
    const Approach& ap = zone.approaches[ai];
    const double line = veh.p + nl.distance;
    const bool can_stop = veh.v * veh.v / (2.0 * d.comfortable_decel) + d.ax <= nl.distance;
    bool hold = false;

    if (ap.priority == Priority::signalized) {
      const SignalPlan* plan = cfg_.signal_for(zone.id);
      const SignalState st = signal_state(*plan, ap.id, t);
      if (!st.green && (same_line(veh.signal_hold, line) || can_stop)) {
        veh.signal_hold = line;
        veh.flags |= kSignalHeld;
        hold = true;
      } else {
        veh.signal_hold = std::nan("");
      }
    }

    if (nl.distance <= ap.control_length) {
      bool occupied = false;
      std::vector<ConflictingVehicle> majors;
      for (const auto& other : vehicles_) {
        if (&other == &veh) continue;
        for (const auto& oc : route_of(other).crossings) {
          if (oc.zone != zone.id) continue;
          const std::size_t oi = zone.approach_index(oc.approach);
          if (conflict_relation(zone, ai, oi) != Relation::crossing) continue;
          const bool inside = inside_conflict(other, oc);
          occupied = occupied || inside;
          if (zone.approaches[oi].priority == Priority::minor) continue;
          const double dist = wrap(oc.conflict_entry - other.p, route_of(other).total_length);
          if (inside || dist <= d.perception_range) majors.push_back({dist, other.v, inside});
        }
      }
      if (occupied && (same_line(veh.occupancy_hold, line) || can_stop)) {
        veh.occupancy_hold = line;
        veh.flags |= kOccupancyHeld;
        hold = true;
      } else {
        veh.occupancy_hold = std::nan("");
      }
      if (ap.priority == Priority::minor && !same_line(veh.yield_commit, line)) {
        if (yield_decision(majors, d) == YieldDecision::hold) {
          veh.flags |= kYieldHeld;
          hold = true;
        } else if (!can_stop) {
          veh.yield_commit = line;
        }
      }
    }
    if (!hold) return std::nullopt;
    return LeaderInfo{0, nl.distance, nl.distance, 0.0, true};
  }

  void compute_controls(double t) {
    const auto snap = snapshot();
    for (std::size_t i = 0; i < vehicles_.size(); ++i) {
      Vehicle& veh = vehicles_[i];
      veh.flags &= kPlanInfeasible;
      const DriverParams& d = veh.spec.driver;
      const auto real = snapshot_leader(i, snap, net_, d.perception_range);
      if (real && real->gap <= 0.0) {
        veh.flags |= kCollision;
        if (colliding_.insert({veh.spec.id, real->id}).second) {
          ++result_.stats.collisions;
          log(t, "collision", veh, "", "", {{"leader", static_cast<double>(real->id)}, {"gap", real->gap}});
        }
      } else if (real) {
        colliding_.erase({veh.spec.id, real->id});
      }

      if (veh.planned) {
        if (t < veh.t_m) {
          veh.u = veh.plan.eval_unchecked(t).u;
          result_.stats.min_control_zone_speed = std::min(result_.stats.min_control_zone_speed, veh.v);
          if (real) {
            const double margin = real->distance - safe_distance(veh.v, veh.spec.params);
            if (margin < -1e-9) {
              ++result_.stats.rear_end_tick_violations;
              const auto& zc = route_of(veh).crossings[veh.crossing];
              log(t, "rear_end_warning", veh, zc.zone, zc.approach,
                  {{"leader", static_cast<double>(real->id)}, {"margin", margin}});
            }
          }
        } else {
          veh.u = 0.0;
        }
        continue;
      }

      std::optional<LeaderInfo> virt;
      if (cfg_.mode == Mode::baseline) virt = virtual_leader(veh, t);
      std::optional<LeaderInfo> lead = real;
      if (virt && (!lead || virt->gap < lead->gap)) lead = virt;
      std::optional<LeaderView> view;
      if (lead) view = LeaderView{lead->gap, lead->speed, lead->is_virtual};
      VehicleState st{veh.spec.id, route_of(veh).id, veh.p, veh.v, veh.u, t};
      veh.u = model_->accel(st, view, d, cfg_.dt).u;
    }
  }

  void integrate(double t) {
    const double t_next = t + cfg_.dt;
    for (auto& veh : vehicles_) {
      veh.prev_p = veh.p;
      veh.prev_v = veh.v;
      if (veh.planned) {
        if (t_next <= veh.t_m) {
          const PlanPoint pt = veh.plan.eval_unchecked(t_next);
          veh.p = veh.base + pt.p;
          veh.v = pt.v;
        } else {
          veh.p = veh.base + veh.control_length + veh.v_z * (t_next - veh.t_m);
          veh.v = veh.v_z;
        }
        continue;
      }
      VehicleState st{veh.spec.id, route_of(veh).id, veh.p, veh.v, veh.u, t};
      const VehicleState next = step(st, veh.u, cfg_.dt);
      veh.p = next.p;
      veh.v = next.v;
    }
  }

  void record(double t) {
    for (const auto& veh : vehicles_) {
      TraceRecord rec;
      rec.t = t;
      rec.vehicle = veh.spec.id;
      rec.route = static_cast<std::uint32_t>(veh.route);
      rec.p = veh.p;
      rec.v = veh.v;
      rec.u = veh.u;
      const ZoneContext ctx = zone_context(route_of(veh), veh.p);
      rec.context = ctx.kind;
      rec.crossing = ctx.kind == ContextKind::open_road ? -1 : static_cast<std::int32_t>(ctx.crossing);
      if (veh.planned) {
        rec.queue_index = veh.queue_index;
        rec.t_zm = veh.t_m;
      }
      rec.flags = veh.flags;
      result_.trace.push_back(rec);
    }
  }

  const ScenarioConfig& cfg_;
  const Network& net_;
  std::unique_ptr<CarFollowingModel> model_;
  Rng coord_rng_;
  std::vector<Vehicle> vehicles_;
  std::vector<Coordinator> coordinators_;
  std::map<std::pair<std::size_t, std::size_t>, SpacingMark> last_entry_;
  std::set<std::pair<VehicleId, VehicleId>> colliding_;
  RunResult result_;
  double now_ = 0.0;
};

}  // namespace

RunResult simulate(const ScenarioConfig& config) {
  const auto violations = validate_scenario(config);
  if (!violations.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& v : violations) msg += "\n  " + v.subject + ": " + v.message;
    throw ConfigError(msg);
  }
  Simulation sim(config);
  return sim.run();
}

RunResult run(const ScenarioConfig& config) {
  RunResult r = simulate(config);
  if (r.abort) throw InfeasiblePlanError(r.abort->message, r.abort->vehicle, r.abort->zone, r.abort->bound);
  return r;
}

std::optional<LeaderInfo> snapshot_leader(std::size_t self, std::span<const SnapshotVehicle> all,
                                          const Network& network, double lookahead,
                                          const std::optional<LeaderInfo>& virtual_leader) {
  const SnapshotVehicle& me = all[self];
  const Route& my_route = network.routes[me.route];
  std::optional<LeaderInfo> best;
  auto consider = [&](const SnapshotVehicle& w, double d) {
    if (!(d > 0.0) || d > lookahead) return;
    if (best && (d > best->distance || (d == best->distance && w.id > best->id))) return;
    best = LeaderInfo{w.id, d, d - w.body_length, w.v, false};
  };
  for (std::size_t j = 0; j < all.size(); ++j) {
    if (j == self) continue;
    const SnapshotVehicle& w = all[j];
    if (w.route == me.route) {
      consider(w, my_route.loop ? wrap(w.p - me.p, my_route.total_length) : w.p - me.p);
      continue;
    }
    const Route& w_route = network.routes[w.route];
    for (const auto& lane : network.shared_lanes) {
      const SharedLaneMember* mine = nullptr;
      const SharedLaneMember* theirs = nullptr;
      for (const auto& m : lane.members) {
        if (m.route == my_route.id) mine = &m;
        if (m.route == w_route.id) theirs = &m;
      }
      if (mine == nullptr || theirs == nullptr) continue;
      const double x_w = wrap(w.p - theirs->start, w_route.total_length);
      if (x_w >= lane.length) continue;
      double x_me = wrap(me.p - mine->start, my_route.total_length);
      if (x_me >= lane.length) x_me = -wrap(mine->start - me.p, my_route.total_length);
      consider(w, x_w - x_me);
    }
  }
  if (virtual_leader && (!best || virtual_leader->gap < best->gap)) return virtual_leader;
  return best;
}

std::string context_label(const TraceRecord& rec, const Network& network) {
  if (rec.context == ContextKind::open_road || rec.crossing < 0) return "open";
  const auto& zc = network.routes[rec.route].crossings[static_cast<std::size_t>(rec.crossing)];
  return std::string(rec.context == ContextKind::control_zone ? "control:" : "conflict:") + zc.zone + ":" + zc.approach;
}

void write_trace_csv(std::ostream& out, const RunResult& result, const Network& network) {
  out << "t,vehicle,route,p,v,u,zone,queue_index,t_zm,flags\n";
  for (const auto& r : result.trace) {
    out << format_g9(r.t) << ',' << r.vehicle << ',' << result.route_ids[r.route] << ',' << format_g9(r.p) << ','
        << format_g9(r.v) << ',' << format_g9(r.u) << ',' << context_label(r, network) << ',';
    if (r.queue_index > 0) out << r.queue_index;
    out << ',';
    if (!std::isnan(r.t_zm)) out << format_g9(r.t_zm);
    out << ',' << flags_to_string(r.flags) << '\n';
  }
}

namespace {

std::string json_number(double x) { return std::isfinite(x) ? format_g9(x) : "null"; }

}  // namespace

void write_events_jsonl(std::ostream& out, const RunResult& result) {
  for (const auto& e : result.events) {
    out << "{\"t\":" << json_number(e.t) << ",\"type\":\"" << json_escape(e.type) << "\",\"vehicle\":" << e.vehicle;
    if (!e.zone.empty()) out << ",\"zone\":\"" << json_escape(e.zone) << '"';
    if (!e.approach.empty()) out << ",\"approach\":\"" << json_escape(e.approach) << '"';
    for (const auto& [k, v] : e.values) out << ",\"" << json_escape(k) << "\":" << json_number(v);
    if (!e.detail.empty()) out << ",\"detail\":\"" << json_escape(e.detail) << '"';
    out << "}\n";
  }
}

void write_ledger_jsonl(std::ostream& out, const RunResult& result) {
  for (const auto& ledger : result.ledgers) {
    for (const auto& e : ledger.entries) {
      out << "{\"zone\":\"" << json_escape(ledger.zone) << "\",\"vehicle\":" << e.vehicle << ",\"approach\":\""
          << json_escape(e.approach) << "\",\"t_m\":" << json_number(e.t_m) << ",\"t_f\":" << json_number(e.t_f)
          << ",\"realized_exit\":" << (e.realized_exit ? json_number(*e.realized_exit) : "null");
      if (e.warning) out << ",\"warning\":\"" << json_escape(*e.warning) << '"';
      out << "}\n";
    }
  }
}

}  // namespace cavsim
