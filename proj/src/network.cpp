#include "cavsim/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"

namespace cavsim {

namespace {

constexpr double kContinuityTol = 1e-6;
constexpr double kLengthTol = 1e-9;
constexpr double kOffsetTol = 1e-6;

}  // namespace

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

Segment Segment::line(Vec2 from, Vec2 to) {
  Segment seg;
  seg.kind = SegmentKind::line;
  seg.start = from;
  seg.end = to;
  seg.length = distance(from, to);
  return seg;
}

Segment Segment::arc(Vec2 from, Vec2 center, double sweep) {
  Segment seg;
  seg.kind = SegmentKind::arc;
  seg.start = from;
  seg.center = center;
  seg.radius = distance(from, center);
  seg.sweep = sweep;
  seg.length = seg.radius * std::abs(sweep);
  seg.end = seg.point_at(seg.length);
  return seg;
}

Vec2 Segment::point_at(double s) const {
  s = std::clamp(s, 0.0, length);
  if (kind == SegmentKind::line) {
    if (length <= 0.0) return start;
    const double f = s / length;
    return {start.x + f * (end.x - start.x), start.y + f * (end.y - start.y)};
  }
  const double theta0 = std::atan2(start.y - center.y, start.x - center.x);
  const double dir = sweep >= 0.0 ? 1.0 : -1.0;
  const double theta = theta0 + dir * s / radius;
  return {center.x + radius * std::cos(theta), center.y + radius * std::sin(theta)};
}

Route Route::build(std::string id, std::vector<Segment> segments, bool loop,
                   std::vector<ZoneCrossing> crossings) {
  Route route;
  route.id = std::move(id);
  route.segments = std::move(segments);
  route.loop = loop;
  route.crossings = std::move(crossings);
  route.segment_offsets.reserve(route.segments.size());
  double acc = 0.0;
  for (const auto& seg : route.segments) {
    route.segment_offsets.push_back(acc);
    acc += seg.length;
  }
  route.total_length = acc;
  return route;
}

std::size_t ZoneSpec::find_approach(const std::string& approach_id) const {
  for (std::size_t i = 0; i < approaches.size(); ++i) {
    if (approaches[i].id == approach_id) return i;
  }
  return npos;
}

std::size_t ZoneSpec::approach_index(const std::string& approach_id) const {
  const auto idx = find_approach(approach_id);
  if (idx == npos) throw ConfigError("zone '" + id + "' has no approach '" + approach_id + "'");
  return idx;
}

const Approach& ZoneSpec::approach(const std::string& approach_id) const {
  return approaches[approach_index(approach_id)];
}

std::size_t Network::find_route(const std::string& id) const {
  for (std::size_t i = 0; i < routes.size(); ++i) {
    if (routes[i].id == id) return i;
  }
  return npos;
}

std::size_t Network::find_zone(const std::string& id) const {
  for (std::size_t i = 0; i < zones.size(); ++i) {
    if (zones[i].id == id) return i;
  }
  return npos;
}

const Route& Network::route(const std::string& id) const {
  const auto idx = find_route(id);
  if (idx == npos) throw ConfigError("unknown route '" + id + "'");
  return routes[idx];
}

const ZoneSpec& Network::zone(const std::string& id) const {
  const auto idx = find_zone(id);
  if (idx == npos) throw ConfigError("unknown zone '" + id + "'");
  return zones[idx];
}

double wrap_arc_length(const Route& route, double s) {
  if (!route.loop || route.total_length <= 0.0) return s;
  double w = std::fmod(s, route.total_length);
  if (w < 0.0) w += route.total_length;
  return w;
}

Vec2 position_at(const Route& route, double s) {
  if (route.segments.empty()) throw RangeError("route '" + route.id + "' has no segments");
  if (!std::isfinite(s)) throw RangeError("non-finite arc length on route '" + route.id + "'");
  if (route.loop) {
    s = wrap_arc_length(route, s);
  } else if (s < -kLengthTol || s > route.total_length + kLengthTol) {
    throw RangeError("arc length " + format_g9(s) + " outside [0, " + format_g9(route.total_length) +
                     "] on route '" + route.id + "'");
  }
  auto it = std::upper_bound(route.segment_offsets.begin(), route.segment_offsets.end(), s);
  const std::size_t k = it == route.segment_offsets.begin()
                            ? 0
                            : static_cast<std::size_t>(it - route.segment_offsets.begin()) - 1;
  return route.segments[k].point_at(s - route.segment_offsets[k]);
}

ZoneContext zone_context(const Route& route, double s) {
  s = wrap_arc_length(route, s);
  ZoneContext ctx;
  for (std::size_t i = 0; i < route.crossings.size(); ++i) {
    const auto& c = route.crossings[i];
    if (s < c.control_entry) break;  // crossings are sorted
    if (s < c.conflict_entry) {
      ctx.kind = ContextKind::control_zone;
      ctx.crossing = i;
      ctx.distance = s - c.control_entry;
      return ctx;
    }
    if (s < c.conflict_exit) {
      ctx.kind = ContextKind::conflict_zone;
      ctx.crossing = i;
      ctx.distance = s - c.conflict_entry;
      return ctx;
    }
  }
  return ctx;
}

Relation conflict_relation(const ZoneSpec& zone, std::size_t approach_i, std::size_t approach_j) {
  if (approach_i >= zone.approaches.size() || approach_j >= zone.approaches.size()) {
    throw ConfigError("approach index out of range for zone '" + zone.id + "'");
  }
  if (approach_i == approach_j) return Relation::same_lane;
  return zone.relations.at(approach_i).at(approach_j);
}

Relation conflict_relation(const ZoneSpec& zone, const std::string& approach_i,
                           const std::string& approach_j) {
  return conflict_relation(zone, zone.approach_index(approach_i), zone.approach_index(approach_j));
}

namespace {

void check_segments(const Route& route, std::vector<Violation>& out) {
  const std::string subject = "route " + route.id;
  if (route.segments.empty()) {
    out.push_back({subject, "route has no segments"});
    return;
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < route.segments.size(); ++k) {
    const auto& seg = route.segments[k];
    const std::string where = subject + " segment " + std::to_string(k);
    if (!(seg.length > 0.0)) out.push_back({where, "segment length must be positive"});
    if (seg.kind == SegmentKind::arc) {
      if (!(seg.radius > 0.0)) out.push_back({where, "arc radius must be positive"});
      const double r = distance(seg.start, seg.center);
      if (std::abs(r - seg.radius) > kLengthTol) out.push_back({where, "arc radius does not match start point"});
      if (std::abs(seg.radius * std::abs(seg.sweep) - seg.length) > kLengthTol) {
        out.push_back({where, "arc length differs from radius * |sweep|"});
      }
    } else if (std::abs(distance(seg.start, seg.end) - seg.length) > kLengthTol) {
      out.push_back({where, "line length differs from chord length"});
    }
    if (k + 1 < route.segments.size()) {
      const double gap = distance(seg.end_point(), route.segments[k + 1].start);
      if (gap > kContinuityTol) {
        out.push_back({where, "discontinuous with next segment (gap " + format_g9(gap) + " m)"});
      }
    }
    sum += seg.length;
  }
  if (route.loop) {
    const double gap = distance(route.segments.back().end_point(), route.segments.front().start);
    if (gap > kContinuityTol) {
      out.push_back({subject, "loop does not close (gap " + format_g9(gap) + " m)"});
    }
  }
  if (std::abs(sum - route.total_length) > kLengthTol * static_cast<double>(route.segments.size())) {
    out.push_back({subject, "total length differs from sum of segment lengths"});
  }
}

void check_crossings(const Network& net, const Route& route, std::vector<Violation>& out) {
  double prev_exit = -1.0;
  for (std::size_t k = 0; k < route.crossings.size(); ++k) {
    const auto& c = route.crossings[k];
    const std::string where = "route " + route.id + " crossing " + std::to_string(k) + " (" + c.zone + ")";
    const auto zi = net.find_zone(c.zone);
    if (zi == Network::npos) {
      out.push_back({where, "unknown zone '" + c.zone + "'"});
      continue;
    }
    const auto& zone = net.zones[zi];
    const auto ai = zone.find_approach(c.approach);
    if (ai == ZoneSpec::npos) {
      out.push_back({where, "zone has no approach '" + c.approach + "'"});
      continue;
    }
    const auto& ap = zone.approaches[ai];
    if (c.control_entry < prev_exit - kOffsetTol) {
      out.push_back({where, "crossings overlap or are not sorted by offset"});
    }
    if (std::abs((c.conflict_entry - c.control_entry) - ap.control_length) > kOffsetTol) {
      out.push_back({where, "conflict entry - control entry = " + format_g9(c.conflict_entry - c.control_entry) +
                                " differs from control length " + format_g9(ap.control_length)});
    }
    if (std::abs((c.conflict_exit - c.conflict_entry) - ap.conflict_length) > kOffsetTol) {
      out.push_back({where, "conflict exit - conflict entry = " + format_g9(c.conflict_exit - c.conflict_entry) +
                                " differs from conflict length " + format_g9(ap.conflict_length)});
    }
    if (c.control_entry < 0.0 || c.conflict_exit > route.total_length + kOffsetTol) {
      out.push_back({where, "crossing extends outside the route"});
    }
    prev_exit = c.conflict_exit;
  }
}

void check_zone(const ZoneSpec& zone, std::vector<Violation>& out) {
  const std::string subject = "zone " + zone.id;
  const std::size_t n = zone.approaches.size();
  if (n == 0) out.push_back({subject, "zone has no approaches"});
  std::set<std::string> ids;
  for (const auto& ap : zone.approaches) {
    const std::string where = subject + " approach " + ap.id;
    if (!ids.insert(ap.id).second) out.push_back({where, "duplicate approach id"});
    if (!(ap.control_length > 0.0)) out.push_back({where, "control length must be positive"});
    if (!(ap.conflict_length > 0.0)) out.push_back({where, "conflict length must be positive"});
    if (!(ap.imposed_speed > 0.0)) out.push_back({where, "imposed speed must be positive"});
  }
  if (zone.relations.size() != n) {
    out.push_back({subject, "conflict matrix must be " + std::to_string(n) + "x" + std::to_string(n)});
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (zone.relations[i].size() != n) {
      out.push_back({subject, "conflict matrix row " + std::to_string(i) + " has wrong length"});
      return;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (zone.relations[i][i] != Relation::same_lane) {
      out.push_back({subject, "approach " + zone.approaches[i].id + " must be same-lane with itself"});
    }
    for (std::size_t j = i + 1; j < n; ++j) {
      if (zone.relations[i][j] != zone.relations[j][i]) {
        out.push_back({subject, "conflict matrix not symmetric for " + zone.approaches[i].id + "/" +
                                    zone.approaches[j].id});
      }
    }
  }
}

void check_shared_lanes(const Network& net, std::vector<Violation>& out) {
  for (const auto& lane : net.shared_lanes) {
    const std::string subject = "shared lane " + lane.id;
    if (!(lane.length > 0.0)) out.push_back({subject, "length must be positive"});
    if (lane.members.size() < 2) out.push_back({subject, "needs at least two member routes"});
    std::set<std::string> seen;
    for (const auto& m : lane.members) {
      if (!seen.insert(m.route).second) out.push_back({subject, "route " + m.route + " listed twice"});
      const auto ri = net.find_route(m.route);
      if (ri == Network::npos) {
        out.push_back({subject, "unknown route '" + m.route + "'"});
        continue;
      }
      const auto& route = net.routes[ri];
      if (m.start < 0.0 || m.start + lane.length > route.total_length + kOffsetTol) {
        out.push_back({subject, "stretch on route " + m.route + " extends outside the route"});
      }
    }
  }
}

}  // namespace

std::vector<Violation> validate_network(const Network& network) {
  std::vector<Violation> out;
  std::set<std::string> route_ids;
  for (const auto& route : network.routes) {
    if (!route_ids.insert(route.id).second) out.push_back({"route " + route.id, "duplicate route id"});
    check_segments(route, out);
    check_crossings(network, route, out);
  }
  std::set<std::string> zone_ids;
  for (const auto& zone : network.zones) {
    if (!zone_ids.insert(zone.id).second) out.push_back({"zone " + zone.id, "duplicate zone id"});
    check_zone(zone, out);
  }
  check_shared_lanes(network, out);
  return out;
}

const char* to_string(ZoneKind kind) {
  switch (kind) {
    case ZoneKind::intersection: return "intersection";
    case ZoneKind::roundabout: return "roundabout";
    case ZoneKind::merge: return "merge";
  }
  return "?";
}

const char* to_string(Relation relation) {
  switch (relation) {
    case Relation::same_lane: return "same-lane";
    case Relation::crossing: return "crossing";
    case Relation::disjoint: return "disjoint";
  }
  return "?";
}

const char* to_string(Priority priority) {
  switch (priority) {
    case Priority::major: return "major";
    case Priority::minor: return "minor";
    case Priority::signalized: return "signalized";
  }
  return "?";
}

}  // namespace cavsim
