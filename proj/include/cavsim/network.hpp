#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace cavsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

double distance(Vec2 a, Vec2 b);

enum class SegmentKind { line, arc };

// A piece of road centreline. Lines carry an end point; arcs carry a centre
// and a signed sweep (counterclockwise positive). Length is computed on
// construction.
struct Segment {
  SegmentKind kind = SegmentKind::line;
  Vec2 start;
  Vec2 end;
  Vec2 center;
  double radius = 0.0;
  double sweep = 0.0;
  double length = 0.0;

  static Segment line(Vec2 from, Vec2 to);
  static Segment arc(Vec2 from, Vec2 center, double sweep);

  // s is clamped to [0, length].
  Vec2 point_at(double s) const;
  Vec2 end_point() const { return point_at(length); }
};

// One pass of a route through a zone. Offsets are arc length from the
// route start.
struct ZoneCrossing {
  std::string zone;
  std::string approach;
  double control_entry = 0.0;
  double conflict_entry = 0.0;
  double conflict_exit = 0.0;
};

struct Route {
  std::string id;
  std::vector<Segment> segments;
  std::vector<double> segment_offsets;  // arc length at each segment start
  double total_length = 0.0;
  bool loop = false;
  std::vector<ZoneCrossing> crossings;

  // Fills segment_offsets and total_length from the segments.
  static Route build(std::string id, std::vector<Segment> segments, bool loop,
                     std::vector<ZoneCrossing> crossings = {});
};

enum class ZoneKind { intersection, roundabout, merge };
enum class Relation { same_lane, crossing, disjoint };

// Right of way in the human-driver baseline.
enum class Priority { major, minor, signalized };

struct Approach {
  std::string id;
  double control_length = 0.0;   // L^z
  double conflict_length = 0.0;  // S^z
  double imposed_speed = 0.0;    // v^z
  Priority priority = Priority::major;
};

struct ZoneSpec {
  std::string id;
  ZoneKind kind = ZoneKind::intersection;
  std::vector<Approach> approaches;
  // relations[i][j] for approaches i, j in declaration order.
  std::vector<std::vector<Relation>> relations;

  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  // npos when absent.
  std::size_t find_approach(const std::string& approach_id) const;
  // Throws ConfigError when absent.
  std::size_t approach_index(const std::string& approach_id) const;
  const Approach& approach(const std::string& approach_id) const;
};

// Stretches of different routes that are the same physical lane, e.g. the
// road downstream of a merge. Leader search looks across these.
struct SharedLaneMember {
  std::string route;
  double start = 0.0;
};

struct SharedLane {
  std::string id;
  std::vector<SharedLaneMember> members;
  double length = 0.0;
};

struct Network {
  std::vector<Route> routes;
  std::vector<ZoneSpec> zones;
  std::vector<SharedLane> shared_lanes;

  std::size_t find_route(const std::string& id) const;  // npos when absent
  std::size_t find_zone(const std::string& id) const;   // npos when absent
  const Route& route(const std::string& id) const;      // throws ConfigError
  const ZoneSpec& zone(const std::string& id) const;    // throws ConfigError

  static constexpr std::size_t npos = ZoneSpec::npos;
};

// Map s onto [0, total_length) for loops; identity otherwise.
double wrap_arc_length(const Route& route, double s);

// Throws RangeError for s outside [0, total_length] on a non-loop route.
Vec2 position_at(const Route& route, double s);

enum class ContextKind { open_road, control_zone, conflict_zone };

struct ZoneContext {
  ContextKind kind = ContextKind::open_road;
  std::size_t crossing = ZoneSpec::npos;  // index into Route::crossings
  double distance = 0.0;                  // metres into the control or conflict zone
};

// Control zones are [control_entry, conflict_entry), conflict zones are
// [conflict_entry, conflict_exit).
ZoneContext zone_context(const Route& route, double s);

Relation conflict_relation(const ZoneSpec& zone, const std::string& approach_i,
                           const std::string& approach_j);
Relation conflict_relation(const ZoneSpec& zone, std::size_t approach_i, std::size_t approach_j);

struct Violation {
  std::string subject;  // route / zone / shared lane / field path
  std::string message;
};

std::vector<Violation> validate_network(const Network& network);

const char* to_string(ZoneKind kind);
const char* to_string(Relation relation);
const char* to_string(Priority priority);

}  // namespace cavsim
