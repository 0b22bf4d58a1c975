#include "cavsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"

namespace cavsim {

using nlohmann::json;

const char* to_string(Mode mode) { return mode == Mode::baseline ? "baseline" : "optimal"; }

Mode parse_mode(const std::string& text) {
  if (text == "baseline") return Mode::baseline;
  if (text == "optimal") return Mode::optimal;
  throw ConfigError("mode must be 'baseline' or 'optimal', got '" + text + "'");
}

bool ScenarioConfig::is_ego(VehicleId id) const { return std::find(egos.begin(), egos.end(), id) != egos.end(); }

const FleetVehicle& ScenarioConfig::vehicle_spec(VehicleId id) const {
  for (const auto& v : fleet) {
    if (v.id == id) return v;
  }
  throw LookupError("vehicle " + std::to_string(id) + " not in fleet");
}

const SignalPlan* ScenarioConfig::signal_for(const std::string& zone) const {
  for (const auto& s : signals) {
    if (s.zone == zone) return &s;
  }
  return nullptr;
}

std::vector<Segment> rounded_rectangle(Vec2 o, double w, double h, double r) {
  const double q = std::numbers::pi / 2.0;
  std::vector<Segment> segs;
  segs.push_back(Segment::line({o.x + r, o.y}, {o.x + w - r, o.y}));
  segs.push_back(Segment::arc({o.x + w - r, o.y}, {o.x + w - r, o.y + r}, q));
  segs.push_back(Segment::line({o.x + w, o.y + r}, {o.x + w, o.y + h - r}));
  segs.push_back(Segment::arc({o.x + w, o.y + h - r}, {o.x + w - r, o.y + h - r}, q));
  segs.push_back(Segment::line({o.x + w - r, o.y + h}, {o.x + r, o.y + h}));
  segs.push_back(Segment::arc({o.x + r, o.y + h}, {o.x + r, o.y + h - r}, q));
  segs.push_back(Segment::line({o.x, o.y + h - r}, {o.x, o.y + r}));
  segs.push_back(Segment::arc({o.x, o.y + r}, {o.x + r, o.y + r}, q));
  return segs;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ParseError(path + ": " + what); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(path + "." + it.key(), "unknown field");
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing required field");
  return *it;
}

double as_num(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double num(const json& obj, const char* key, const std::string& path, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_num(*it, path + "." + key);
}

double req_num(const json& obj, const char* key, const std::string& path) {
  return as_num(require(obj, key, path), path + "." + key);
}

std::string as_str(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

std::string str(const json& obj, const char* key, const std::string& path, const std::string& fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_str(*it, path + "." + key);
}

std::string req_str(const json& obj, const char* key, const std::string& path) {
  return as_str(require(obj, key, path), path + "." + key);
}

const json& req_array(const json& obj, const char* key, const std::string& path) {
  const json& a = require(obj, key, path);
  if (!a.is_array()) fail(path + "." + key, "expected an array");
  return a;
}

Vec2 as_point(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) fail(path, "expected [x, y]");
  return {as_num(j[0], path + "[0]"), as_num(j[1], path + "[1]")};
}

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

VehicleParams parse_vehicle(const json& j, VehicleParams p, const std::string& path) {
  check_keys(j, path, {"u_min", "u_max", "v_min", "v_max", "desired_speed", "standstill_distance", "time_gap",
                       "body_length"});
  p.u_min = num(j, "u_min", path, p.u_min);
  p.u_max = num(j, "u_max", path, p.u_max);
  p.v_min = num(j, "v_min", path, p.v_min);
  p.v_max = num(j, "v_max", path, p.v_max);
  p.desired_speed = num(j, "desired_speed", path, p.desired_speed);
  p.standstill_distance = num(j, "standstill_distance", path, p.standstill_distance);
  p.time_gap = num(j, "time_gap", path, p.time_gap);
  p.body_length = num(j, "body_length", path, p.body_length);
  return p;
}

DriverParams parse_driver(const json& j, DriverParams d, const std::string& path) {
  check_keys(j, path, {"ax", "bx_add", "bx_mult", "ex", "cx", "perception_range", "max_accel", "comfortable_decel",
                       "emergency_decel", "b_null", "critical_gap"});
  d.ax = num(j, "ax", path, d.ax);
  d.bx_add = num(j, "bx_add", path, d.bx_add);
  d.bx_mult = num(j, "bx_mult", path, d.bx_mult);
  d.ex = num(j, "ex", path, d.ex);
  d.cx = num(j, "cx", path, d.cx);
  d.perception_range = num(j, "perception_range", path, d.perception_range);
  d.max_accel = num(j, "max_accel", path, d.max_accel);
  d.comfortable_decel = num(j, "comfortable_decel", path, d.comfortable_decel);
  d.emergency_decel = num(j, "emergency_decel", path, d.emergency_decel);
  d.b_null = num(j, "b_null", path, d.b_null);
  d.critical_gap = num(j, "critical_gap", path, d.critical_gap);
  return d;
}

ZoneKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "intersection") return ZoneKind::intersection;
  if (s == "roundabout") return ZoneKind::roundabout;
  if (s == "merge") return ZoneKind::merge;
  fail(path, "unknown zone kind '" + s + "'");
}

Relation parse_relation(const std::string& s, const std::string& path) {
  if (s == "same_lane") return Relation::same_lane;
  if (s == "crossing") return Relation::crossing;
  if (s == "disjoint") return Relation::disjoint;
  fail(path, "unknown relation '" + s + "'");
}

Priority parse_priority(const std::string& s, const std::string& path) {
  if (s == "major") return Priority::major;
  if (s == "minor") return Priority::minor;
  if (s == "signalized") return Priority::signalized;
  fail(path, "unknown priority '" + s + "'");
}

ZoneSpec parse_zone(const json& j, const std::string& path) {
  check_keys(j, path, {"id", "kind", "approaches", "default_relation", "relations"});
  ZoneSpec z;
  z.id = req_str(j, "id", path);
  z.kind = parse_kind(req_str(j, "kind", path), path + ".kind");
  const json& aps = req_array(j, "approaches", path);
  for (std::size_t i = 0; i < aps.size(); ++i) {
    const std::string ap_path = idx(path + ".approaches", i);
    check_keys(aps[i], ap_path, {"id", "control_length", "conflict_length", "imposed_speed", "priority"});
    Approach a;
    a.id = req_str(aps[i], "id", ap_path);
    a.control_length = req_num(aps[i], "control_length", ap_path);
    a.conflict_length = req_num(aps[i], "conflict_length", ap_path);
    a.imposed_speed = req_num(aps[i], "imposed_speed", ap_path);
    a.priority = parse_priority(str(aps[i], "priority", ap_path, "major"), ap_path + ".priority");
    z.approaches.push_back(a);
  }
  const std::size_t n = z.approaches.size();
  const Relation def = parse_relation(str(j, "default_relation", path, "crossing"), path + ".default_relation");
  z.relations.assign(n, std::vector<Relation>(n, def));
  for (std::size_t i = 0; i < n; ++i) z.relations[i][i] = Relation::same_lane;
  if (auto it = j.find("relations"); it != j.end()) {
    if (!it->is_array()) fail(path + ".relations", "expected an array of [a, b, relation]");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string rp = idx(path + ".relations", k);
      const json& r = (*it)[k];
      if (!r.is_array() || r.size() != 3) fail(rp, "expected [approach, approach, relation]");
      const std::string a = as_str(r[0], rp + "[0]");
      const std::string b = as_str(r[1], rp + "[1]");
      const std::size_t ia = z.find_approach(a);
      const std::size_t ib = z.find_approach(b);
      if (ia == ZoneSpec::npos) fail(rp + "[0]", "unknown approach '" + a + "'");
      if (ib == ZoneSpec::npos) fail(rp + "[1]", "unknown approach '" + b + "'");
      const Relation rel = parse_relation(as_str(r[2], rp + "[2]"), rp + "[2]");
      z.relations[ia][ib] = rel;
      z.relations[ib][ia] = rel;
    }
  }
  return z;
}

std::vector<Segment> parse_segments(const json& j, const std::string& path) {
  std::vector<Segment> segs;
  if (auto g = j.find("geometry"); g != j.end()) {
    const std::string gp = path + ".geometry";
    check_keys(*g, gp, {"rounded_rect"});
    const json& rr = require(*g, "rounded_rect", gp);
    const std::string rp = gp + ".rounded_rect";
    check_keys(rr, rp, {"origin", "width", "height", "radius"});
    const Vec2 o = as_point(require(rr, "origin", rp), rp + ".origin");
    const double w = req_num(rr, "width", rp);
    const double h = req_num(rr, "height", rp);
    const double r = req_num(rr, "radius", rp);
    if (!(r > 0.0 && 2.0 * r < w && 2.0 * r < h)) fail(rp, "need 0 < 2 radius < width, height");
    return rounded_rectangle(o, w, h, r);
  }
  const json& arr = req_array(j, "segments", path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string sp = idx(path + ".segments", i);
    const std::string type = req_str(arr[i], "type", sp);
    if (type == "line") {
      check_keys(arr[i], sp, {"type", "from", "to"});
      segs.push_back(Segment::line(as_point(require(arr[i], "from", sp), sp + ".from"),
                                   as_point(require(arr[i], "to", sp), sp + ".to")));
    } else if (type == "arc") {
      check_keys(arr[i], sp, {"type", "from", "center", "sweep_deg"});
      const double sweep = req_num(arr[i], "sweep_deg", sp) * std::numbers::pi / 180.0;
      segs.push_back(Segment::arc(as_point(require(arr[i], "from", sp), sp + ".from"),
                                  as_point(require(arr[i], "center", sp), sp + ".center"), sweep));
    } else {
      fail(sp + ".type", "expected 'line' or 'arc'");
    }
  }
  return segs;
}

Route parse_route(const json& j, const std::vector<ZoneSpec>& zones, const std::string& path) {
  check_keys(j, path, {"id", "loop", "geometry", "segments", "crossings"});
  const std::string id = req_str(j, "id", path);
  bool loop = true;
  if (auto it = j.find("loop"); it != j.end()) {
    if (!it->is_boolean()) fail(path + ".loop", "expected true or false");
    loop = it->get<bool>();
  }
  std::vector<Segment> segs = parse_segments(j, path);
  std::vector<ZoneCrossing> crossings;
  if (auto it = j.find("crossings"); it != j.end()) {
    if (!it->is_array()) fail(path + ".crossings", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string cp = idx(path + ".crossings", i);
      const json& c = (*it)[i];
      check_keys(c, cp, {"zone", "approach", "control_entry", "conflict_entry", "conflict_exit"});
      ZoneCrossing zc;
      zc.zone = req_str(c, "zone", cp);
      zc.approach = req_str(c, "approach", cp);
      zc.control_entry = req_num(c, "control_entry", cp);
      const Approach* ap = nullptr;
      for (const auto& z : zones) {
        if (z.id != zc.zone) continue;
        const auto ai = z.find_approach(zc.approach);
        if (ai != ZoneSpec::npos) ap = &z.approaches[ai];
      }
      if (ap == nullptr && (!c.contains("conflict_entry") || !c.contains("conflict_exit"))) {
        fail(cp, "unknown zone/approach '" + zc.zone + "/" + zc.approach + "'");
      }
      zc.conflict_entry = num(c, "conflict_entry", cp, ap ? zc.control_entry + ap->control_length : 0.0);
      zc.conflict_exit = num(c, "conflict_exit", cp, ap ? zc.conflict_entry + ap->conflict_length : 0.0);
      crossings.push_back(zc);
    }
  }
  return Route::build(id, std::move(segs), loop, std::move(crossings));
}

SignalPlan parse_signal(const json& j, const std::string& path) {
  check_keys(j, path, {"zone", "offset", "phases"});
  SignalPlan plan;
  plan.zone = req_str(j, "zone", path);
  plan.offset = num(j, "offset", path, 0.0);
  const json& phases = req_array(j, "phases", path);
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string pp = idx(path + ".phases", i);
    check_keys(phases[i], pp, {"approaches", "green", "inter_green"});
    SignalPhase ph;
    const json& aps = req_array(phases[i], "approaches", pp);
    for (std::size_t k = 0; k < aps.size(); ++k) ph.approaches.push_back(as_str(aps[k], idx(pp + ".approaches", k)));
    ph.green = req_num(phases[i], "green", pp);
    ph.inter_green = num(phases[i], "inter_green", pp, 0.0);
    plan.phases.push_back(ph);
  }
  return plan;
}

std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": malformed scenario at " + locate(text, e.byte) + ": " + e.what());
  }
  const std::string p = "scenario";
  check_keys(root, p, {"name", "description", "mode", "seed", "dt", "duration", "car_following", "vehicle", "driver",
                       "driver_factor", "position_jitter", "metrics", "network", "signals", "fleet"});
  ScenarioConfig cfg;
  cfg.name = str(root, "name", p, "scenario");
  cfg.mode = Mode::optimal;
  if (root.contains("mode")) {
    const std::string m = req_str(root, "mode", p);
    if (m != "baseline" && m != "optimal") fail(p + ".mode", "expected 'baseline' or 'optimal'");
    cfg.mode = parse_mode(m);
  }
  if (auto it = root.find("seed"); it != root.end()) {
    if (!it->is_number_integer() || (it->is_number_integer() && !it->is_number_unsigned() && it->get<std::int64_t>() < 0)) {
      fail(p + ".seed", "expected a non-negative integer");
    }
    cfg.seed = it->get<std::uint64_t>();
  }
  cfg.dt = num(root, "dt", p, cfg.dt);
  cfg.duration = num(root, "duration", p, cfg.duration);
  cfg.car_following = str(root, "car_following", p, cfg.car_following);
  if (auto it = root.find("vehicle"); it != root.end()) cfg.vehicle = parse_vehicle(*it, cfg.vehicle, p + ".vehicle");
  if (auto it = root.find("driver"); it != root.end()) cfg.driver = parse_driver(*it, cfg.driver, p + ".driver");
  cfg.driver.desired_speed = cfg.vehicle.desired_speed;
  if (auto it = root.find("driver_factor"); it != root.end()) {
    check_keys(*it, p + ".driver_factor", {"mean", "sd"});
    cfg.driver_factor_mean = num(*it, "mean", p + ".driver_factor", cfg.driver_factor_mean);
    cfg.driver_factor_sd = num(*it, "sd", p + ".driver_factor", cfg.driver_factor_sd);
  }
  cfg.position_jitter = num(root, "position_jitter", p, cfg.position_jitter);
  if (auto it = root.find("metrics"); it != root.end()) {
    const std::string mp = p + ".metrics";
    check_keys(*it, mp, {"loop_threshold", "warmup", "stop_speed", "stop_dwell", "smooth_window", "outlier_cutoff"});
    auto& m = cfg.metrics;
    m.loop_threshold = num(*it, "loop_threshold", mp, m.loop_threshold);
    m.warmup = num(*it, "warmup", mp, m.warmup);
    m.stop_speed = num(*it, "stop_speed", mp, m.stop_speed);
    m.stop_dwell = num(*it, "stop_dwell", mp, m.stop_dwell);
    m.smooth_window = num(*it, "smooth_window", mp, m.smooth_window);
    m.outlier_cutoff = num(*it, "outlier_cutoff", mp, m.outlier_cutoff);
  }

  const json& net = require(root, "network", p);
  const std::string np = p + ".network";
  check_keys(net, np, {"routes", "zones", "shared_lanes"});
  if (auto it = net.find("zones"); it != net.end()) {
    if (!it->is_array()) fail(np + ".zones", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) cfg.network.zones.push_back(parse_zone((*it)[i], idx(np + ".zones", i)));
  }
  const json& routes = req_array(net, "routes", np);
  for (std::size_t i = 0; i < routes.size(); ++i) {
    cfg.network.routes.push_back(parse_route(routes[i], cfg.network.zones, idx(np + ".routes", i)));
  }
  if (auto it = net.find("shared_lanes"); it != net.end()) {
    if (!it->is_array()) fail(np + ".shared_lanes", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string sp = idx(np + ".shared_lanes", i);
      const json& s = (*it)[i];
      check_keys(s, sp, {"id", "length", "members"});
      SharedLane lane;
      lane.id = req_str(s, "id", sp);
      lane.length = req_num(s, "length", sp);
      const json& members = req_array(s, "members", sp);
      for (std::size_t k = 0; k < members.size(); ++k) {
        const std::string mp = idx(sp + ".members", k);
        check_keys(members[k], mp, {"route", "start"});
        lane.members.push_back({req_str(members[k], "route", mp), req_num(members[k], "start", mp)});
      }
      cfg.network.shared_lanes.push_back(lane);
    }
  }
  if (auto it = root.find("signals"); it != root.end()) {
    if (!it->is_array()) fail(p + ".signals", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) cfg.signals.push_back(parse_signal((*it)[i], idx(p + ".signals", i)));
  }

  const json& fleet = require(root, "fleet", p);
  const std::string fp = p + ".fleet";
  check_keys(fleet, fp, {"vehicles", "egos"});
  const json& vehicles = req_array(fleet, "vehicles", fp);
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const std::string vp = idx(fp + ".vehicles", i);
    const json& vj = vehicles[i];
    check_keys(vj, vp, {"id", "route", "s", "v", "z", "vehicle", "driver"});
    FleetVehicle fv;
    const json& id = require(vj, "id", vp);
    if (!id.is_number_integer()) fail(vp + ".id", "expected an integer");
    fv.id = id.get<int>();
    fv.route = req_str(vj, "route", vp);
    fv.s = req_num(vj, "s", vp);
    fv.v = num(vj, "v", vp, 0.0);
    if (vj.contains("z")) fv.z = req_num(vj, "z", vp);
    fv.params = vj.contains("vehicle") ? parse_vehicle(vj["vehicle"], cfg.vehicle, vp + ".vehicle") : cfg.vehicle;
    fv.driver = vj.contains("driver") ? parse_driver(vj["driver"], cfg.driver, vp + ".driver") : cfg.driver;
    fv.driver.desired_speed = fv.params.desired_speed;
    cfg.fleet.push_back(fv);
  }
  if (auto it = fleet.find("egos"); it != fleet.end()) {
    if (!it->is_array()) fail(fp + ".egos", "expected an array of vehicle ids");
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_number_integer()) fail(idx(fp + ".egos", i), "expected an integer");
      cfg.egos.push_back((*it)[i].get<int>());
    }
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

// ---------------------------------------------------------------------------
// Validation

std::vector<Violation> validate_scenario(const ScenarioConfig& cfg) {
  std::vector<Violation> out = validate_network(cfg.network);
  auto add = [&](const std::string& subject, const std::string& message) { out.push_back({subject, message}); };

  if (!(cfg.dt > 0.0 && cfg.dt <= 0.1)) add("dt", "must lie in (0, 0.1] s, got " + format_g9(cfg.dt));
  if (!(cfg.duration > 0.0)) add("duration", "must be > 0");
  if (auto e = check_params(cfg.vehicle); !e.empty()) add("vehicle", e);
  if (auto e = check_driver(cfg.driver); !e.empty()) add("driver", e);
  if (!(cfg.driver_factor_sd >= 0.0)) add("driver_factor.sd", "must be >= 0");
  if (!(cfg.driver_factor_mean >= 0.0 && cfg.driver_factor_mean <= 1.0)) add("driver_factor.mean", "must lie in [0, 1]");
  if (!(cfg.position_jitter >= 0.0)) add("position_jitter", "must be >= 0");
  if (cfg.car_following != "wiedemann74" && cfg.car_following != "idm") {
    add("car_following", "unknown model '" + cfg.car_following + "'");
  }
  const auto& m = cfg.metrics;
  if (!(m.loop_threshold > 0.0)) add("metrics.loop_threshold", "must be > 0");
  if (!(m.warmup >= 0.0)) add("metrics.warmup", "must be >= 0");
  if (!(m.stop_speed > 0.0)) add("metrics.stop_speed", "must be > 0");
  if (!(m.stop_dwell >= 0.0)) add("metrics.stop_dwell", "must be >= 0");
  if (!(m.smooth_window > 0.0)) add("metrics.smooth_window", "must be > 0");
  if (!(m.outlier_cutoff > 0.0)) add("metrics.outlier_cutoff", "must be > 0");

  for (const auto& zone : cfg.network.zones) {
    bool signalized = false;
    for (const auto& ap : zone.approaches) {
      const std::string subject = "zone " + zone.id + " approach " + ap.id;
      if (ap.imposed_speed < cfg.vehicle.v_min || ap.imposed_speed > cfg.vehicle.v_max) {
        add(subject, "imposed_speed must lie in [v_min, v_max]");
      }
      const double step = cfg.vehicle.v_max * cfg.dt;
      if (ap.conflict_length <= step || ap.control_length <= step) {
        add(subject, "control and conflict lengths must exceed v_max * dt");
      }
      signalized = signalized || ap.priority == Priority::signalized;
    }
    const SignalPlan* plan = cfg.signal_for(zone.id);
    if (signalized && plan == nullptr) add("zone " + zone.id, "has signalized approaches but no signal plan");
    if (plan != nullptr) {
      for (auto& v : validate_signal_plan(*plan, zone)) out.push_back(v);
    }
  }
  for (const auto& plan : cfg.signals) {
    if (cfg.network.find_zone(plan.zone) == Network::npos) add("signal plan " + plan.zone, "unknown zone");
  }

  std::set<VehicleId> ids;
  std::map<std::string, std::vector<const FleetVehicle*>> by_route;
  for (const auto& fv : cfg.fleet) {
    const std::string subject = "vehicle " + std::to_string(fv.id);
    if (!ids.insert(fv.id).second) add(subject, "duplicate vehicle id");
    if (auto e = check_params(fv.params); !e.empty()) add(subject, e);
    if (auto e = check_driver(fv.driver); !e.empty()) add(subject, e);
    if (fv.z && !(*fv.z >= 0.0 && *fv.z <= 1.0)) add(subject + ".z", "must lie in [0, 1]");
    if (!(fv.v >= 0.0 && fv.v <= fv.params.v_max)) add(subject + ".v", "initial speed must lie in [0, v_max]");
    const auto ri = cfg.network.find_route(fv.route);
    if (ri == Network::npos) {
      add(subject + ".route", "unknown route '" + fv.route + "'");
      continue;
    }
    const Route& route = cfg.network.routes[ri];
    if (!route.loop) add(subject + ".route", "fleet vehicles must run on loop routes");
    if (!(fv.s >= 0.0 && fv.s < route.total_length)) {
      add(subject + ".s", "initial position must lie in [0, route length)");
      continue;
    }
    for (const auto& c : route.crossings) {
      if (fv.s + cfg.position_jitter >= c.control_entry && fv.s - cfg.position_jitter < c.conflict_exit) {
        add(subject + ".s", "initial position (with jitter) inside zone " + c.zone);
      }
    }
    by_route[fv.route].push_back(&fv);
  }
  for (auto& [route_id, vs] : by_route) {
    const Route& route = cfg.network.route(route_id);
    std::sort(vs.begin(), vs.end(), [](const FleetVehicle* a, const FleetVehicle* b) { return a->s < b->s; });
    for (std::size_t i = 0; i < vs.size(); ++i) {
      const FleetVehicle* follower = vs[i];
      const FleetVehicle* leader = vs[(i + 1) % vs.size()];
      if (vs.size() == 1) break;
      double gap = leader->s - follower->s;
      if (i + 1 == vs.size()) gap += route.total_length;
      if (!(gap - 2.0 * cfg.position_jitter > follower->params.standstill_distance)) {
        add("vehicle " + std::to_string(follower->id) + ".s",
            "spacing to vehicle " + std::to_string(leader->id) + " on route " + route_id + " must exceed gamma");
      }
    }
  }
  // Vehicles from different routes that start on the same shared lane.
  for (const auto& lane : cfg.network.shared_lanes) {
    std::vector<std::pair<double, const FleetVehicle*>> on_lane;
    for (const auto& m : lane.members) {
      auto it = by_route.find(m.route);
      if (it == by_route.end()) continue;
      for (const FleetVehicle* fv : it->second) {
        const double off = fv->s - m.start;
        if (off >= -cfg.position_jitter && off < lane.length + cfg.position_jitter) on_lane.emplace_back(off, fv);
      }
    }
    std::sort(on_lane.begin(), on_lane.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i + 1 < on_lane.size(); ++i) {
      const FleetVehicle* follower = on_lane[i].second;
      const FleetVehicle* leader = on_lane[i + 1].second;
      if (follower->route == leader->route) continue;
      const double gap = on_lane[i + 1].first - on_lane[i].first;
      if (!(gap - 2.0 * cfg.position_jitter > follower->params.standstill_distance)) {
        add("vehicle " + std::to_string(follower->id) + ".s",
            "spacing to vehicle " + std::to_string(leader->id) + " on shared lane " + lane.id + " must exceed gamma");
      }
    }
  }
  for (VehicleId e : cfg.egos) {
    if (!ids.count(e)) add("fleet.egos", "ego vehicle " + std::to_string(e) + " not in fleet");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical form

namespace {

json point(Vec2 p) { return json::array({p.x, p.y}); }

json vehicle_json(const VehicleParams& p) {
  return {{"u_min", p.u_min},
          {"u_max", p.u_max},
          {"v_min", p.v_min},
          {"v_max", p.v_max},
          {"desired_speed", p.desired_speed},
          {"standstill_distance", p.standstill_distance},
          {"time_gap", p.time_gap},
          {"body_length", p.body_length}};
}

json driver_json(const DriverParams& d) {
  return {{"ax", d.ax},
          {"bx_add", d.bx_add},
          {"bx_mult", d.bx_mult},
          {"ex", d.ex},
          {"cx", d.cx},
          {"perception_range", d.perception_range},
          {"max_accel", d.max_accel},
          {"comfortable_decel", d.comfortable_decel},
          {"emergency_decel", d.emergency_decel},
          {"b_null", d.b_null},
          {"critical_gap", d.critical_gap}};
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json root;
  root["name"] = cfg.name;
  root["mode"] = to_string(cfg.mode);
  root["seed"] = cfg.seed;
  root["dt"] = cfg.dt;
  root["duration"] = cfg.duration;
  root["car_following"] = cfg.car_following;
  root["vehicle"] = vehicle_json(cfg.vehicle);
  root["driver"] = driver_json(cfg.driver);
  root["driver_factor"] = {{"mean", cfg.driver_factor_mean}, {"sd", cfg.driver_factor_sd}};
  root["position_jitter"] = cfg.position_jitter;
  const auto& m = cfg.metrics;
  root["metrics"] = {{"loop_threshold", m.loop_threshold}, {"warmup", m.warmup},
                     {"stop_speed", m.stop_speed},         {"stop_dwell", m.stop_dwell},
                     {"smooth_window", m.smooth_window},   {"outlier_cutoff", m.outlier_cutoff}};

  json zones = json::array();
  for (const auto& z : cfg.network.zones) {
    json aps = json::array();
    for (const auto& a : z.approaches) {
      aps.push_back({{"id", a.id},
                     {"control_length", a.control_length},
                     {"conflict_length", a.conflict_length},
                     {"imposed_speed", a.imposed_speed},
                     {"priority", to_string(a.priority)}});
    }
    json rels = json::array();
    for (std::size_t i = 0; i < z.approaches.size(); ++i) {
      for (std::size_t j = i + 1; j < z.approaches.size(); ++j) {
        rels.push_back(json::array({z.approaches[i].id, z.approaches[j].id, to_string(z.relations[i][j])}));
      }
    }
    zones.push_back({{"id", z.id}, {"kind", to_string(z.kind)}, {"approaches", aps}, {"relations", rels}});
  }
  json routes = json::array();
  for (const auto& r : cfg.network.routes) {
    json segs = json::array();
    for (const auto& s : r.segments) {
      if (s.kind == SegmentKind::line) {
        segs.push_back({{"type", "line"}, {"from", point(s.start)}, {"to", point(s.end)}});
      } else {
        segs.push_back({{"type", "arc"},
                        {"from", point(s.start)},
                        {"center", point(s.center)},
                        {"sweep_deg", s.sweep * 180.0 / std::numbers::pi}});
      }
    }
    json crossings = json::array();
    for (const auto& c : r.crossings) {
      crossings.push_back({{"zone", c.zone},
                           {"approach", c.approach},
                           {"control_entry", c.control_entry},
                           {"conflict_entry", c.conflict_entry},
                           {"conflict_exit", c.conflict_exit}});
    }
    routes.push_back({{"id", r.id}, {"loop", r.loop}, {"segments", segs}, {"crossings", crossings}});
  }
  json lanes = json::array();
  for (const auto& l : cfg.network.shared_lanes) {
    json members = json::array();
    for (const auto& mbr : l.members) members.push_back({{"route", mbr.route}, {"start", mbr.start}});
    lanes.push_back({{"id", l.id}, {"length", l.length}, {"members", members}});
  }
  root["network"] = {{"routes", routes}, {"zones", zones}, {"shared_lanes", lanes}};

  json signals = json::array();
  for (const auto& s : cfg.signals) {
    json phases = json::array();
    for (const auto& ph : s.phases) {
      phases.push_back({{"approaches", ph.approaches}, {"green", ph.green}, {"inter_green", ph.inter_green}});
    }
    signals.push_back({{"zone", s.zone}, {"offset", s.offset}, {"phases", phases}});
  }
  root["signals"] = signals;

  json vehicles = json::array();
  for (const auto& fv : cfg.fleet) {
    json v = {{"id", fv.id},
              {"route", fv.route},
              {"s", fv.s},
              {"v", fv.v},
              {"vehicle", vehicle_json(fv.params)},
              {"driver", driver_json(fv.driver)}};
    if (fv.z) v["z"] = *fv.z;
    vehicles.push_back(v);
  }
  root["fleet"] = {{"vehicles", vehicles}, {"egos", cfg.egos}};
  return root.dump(2) + "\n";
}

std::string config_hash(const ScenarioConfig& cfg) { return hex64(fnv1a64(scenario_to_json(cfg))); }

}  // namespace cavsim
