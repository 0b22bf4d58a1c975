#include <cmath>
#include <numbers>

#include "cavsim/errors.hpp"
#include "cavsim/network.hpp"
#include "cavsim/scenario.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cavsim;
using namespace cavsim::testing;

TEST_CASE("position_at on a line") {
  Route r = Route::build("r", {Segment::line({0, 0}, {10, 0})}, false);
  CHECK(position_at(r, 0.0).x == doctest::Approx(0.0));
  CHECK(position_at(r, 4.0).x == doctest::Approx(4.0));
  CHECK(position_at(r, 4.0).y == doctest::Approx(0.0));
  CHECK_THROWS_AS(position_at(r, 10.5), RangeError);
  CHECK_THROWS_AS(position_at(r, -0.1), RangeError);
}

TEST_CASE("position_at on an arc") {
  Route r = Route::build("r", {Segment::arc({2, 0}, {0, 0}, std::numbers::pi / 2)}, false);
  const Vec2 q = position_at(r, std::numbers::pi);
  // Independent: angle s/r = pi/2 from (2, 0).
  const double ang = std::numbers::pi / 2.0;
  CHECK(q.x == doctest::Approx(2.0 * std::cos(ang)).epsilon(1e-12));
  CHECK(q.y == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(q.x) < 1e-12);
}

TEST_CASE("loop positions wrap") {
  Route r = loop_route("loop", 100, 50, 10);
  const double len = 2 * 100 + 2 * 50 - 8 * 10 + 2 * std::numbers::pi * 10;
  CHECK(r.total_length == doctest::Approx(len));
  CHECK(wrap_arc_length(r, len + 3.0) == doctest::Approx(3.0));
  const Vec2 a = position_at(r, 3.0);
  const Vec2 b = position_at(r, len + 3.0);
  CHECK(distance(a, b) < 1e-9);
  CHECK(validate_network(Network{{r}, {}, {}}).empty());
}

TEST_CASE("position_at is 1-Lipschitz along every route") {
  Route r = loop_route("loop", 120, 90, 10);
  const double eps = 1e-3;
  for (double s = 0.0; s < r.total_length; s += 0.37) {
    CHECK(distance(position_at(r, s), position_at(r, s + eps)) <= eps * (1 + 1e-6));
  }
}

TEST_CASE("zone_context offsets") {
  ZoneSpec z = zone("Z", {approach("a", 45, 7), approach("b", 45, 7)});
  Route r = Route::build("r", {Segment::line({0, 0}, {300, 0})}, false, {crossing("Z", "a", 100)});
  CHECK(zone_context(r, 50).kind == ContextKind::open_road);
  auto c = zone_context(r, 120);
  CHECK(c.kind == ContextKind::control_zone);
  CHECK(c.distance == doctest::Approx(20));
  CHECK(c.crossing == 0);
  c = zone_context(r, 147);
  CHECK(c.kind == ContextKind::conflict_zone);
  CHECK(c.distance == doctest::Approx(2));
  CHECK(zone_context(r, 152).kind == ContextKind::open_road);
}

TEST_CASE("zone_context changes only at configured offsets") {
  Route r = loop_route("loop", 120, 90, 10, {crossing("Z", "a", 30), crossing("Y", "a", 200, 45, 12)});
  std::vector<double> edges = {30, 75, 82, 200, 245, 257};
  ContextKind prev = zone_context(r, 0.0).kind;
  std::size_t prev_crossing = zone_context(r, 0.0).crossing;
  for (double s = 0.01; s < r.total_length; s += 0.01) {
    auto c = zone_context(r, s);
    if (c.kind != prev || c.crossing != prev_crossing) {
      bool near_edge = false;
      for (double e : edges) near_edge |= std::abs(s - e) <= 0.011;
      CHECK_MESSAGE(near_edge, "context changed at s=" << s);
    }
    prev = c.kind;
    prev_crossing = c.crossing;
  }
}

TEST_CASE("conflict_relation") {
  ZoneSpec z = zone("I", {approach("n"), approach("e"), approach("s"), approach("w")});
  z.relations[0][2] = z.relations[2][0] = Relation::disjoint;
  CHECK(conflict_relation(z, "n", "e") == Relation::crossing);
  CHECK(conflict_relation(z, "n", "n") == Relation::same_lane);
  CHECK(conflict_relation(z, "n", "s") == Relation::disjoint);
  CHECK_THROWS_AS(conflict_relation(z, "n", "x"), ConfigError);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      auto r = conflict_relation(z, i, j);
      if (r != Relation::same_lane) CHECK(conflict_relation(z, j, i) == r);
    }
  }
  ZoneSpec m = zone("M", {approach("major"), approach("minor")}, Relation::crossing, ZoneKind::merge);
  CHECK(conflict_relation(m, "major", "minor") == Relation::crossing);
}

namespace {
Network merge_network() {
  ZoneSpec z = zone("M", {approach("a"), approach("b")}, Relation::crossing, ZoneKind::merge);
  Route ra = loop_route("A", 100, 80, 10, {crossing("M", "a", 20)});
  Route rb = loop_route("B", 100, 60, 10, {crossing("M", "b", 40)}, {0, -100});
  SharedLane lane{"after_M", {{"A", 72}, {"B", 92}}, 20};
  return Network{{ra, rb}, {z}, {lane}};
}
}  // namespace

TEST_CASE("validate_network accepts a well-formed merge") { CHECK(validate_network(merge_network()).empty()); }

TEST_CASE("validate_network reports a wrong control length") {
  Network n = merge_network();
  n.routes[0].crossings[0].conflict_entry += 1.0;
  n.routes[0].crossings[0].conflict_exit += 1.0;
  auto v = validate_network(n);
  REQUIRE(v.size() == 1);
  CHECK(v[0].subject.find("A") != std::string::npos);
  CHECK(v[0].message.find("conflict entry") != std::string::npos);
}

TEST_CASE("validate_network reports a discontinuous chain") {
  Route r = Route::build("r", {Segment::line({0, 0}, {10, 0}), Segment::line({10.5, 0}, {20, 0})}, false);
  auto v = validate_network(Network{{r}, {}, {}});
  REQUIRE(v.size() == 1);
  CHECK(v[0].message.find("discontinuous") != std::string::npos);
}

TEST_CASE("validate_network rejects asymmetric matrices and unknown references") {
  Network n = merge_network();
  n.zones[0].relations[0][1] = Relation::disjoint;
  CHECK_FALSE(validate_network(n).empty());
  n = merge_network();
  n.routes[0].crossings[0].zone = "nope";
  CHECK_FALSE(validate_network(n).empty());
  n = merge_network();
  n.shared_lanes[0].members[1].route = "C";
  CHECK_FALSE(validate_network(n).empty());
}

TEST_CASE("lookups") {
  Network n = merge_network();
  CHECK(n.find_route("B") == 1);
  CHECK(n.find_route("C") == Network::npos);
  CHECK_THROWS_AS(n.zone("Q"), ConfigError);
  CHECK(n.zone("M").approach("b").imposed_speed == 7.0);
}
