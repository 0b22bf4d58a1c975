#pragma once

#include <string>
#include <vector>

#include "cavsim/network.hpp"
#include "cavsim/scenario.hpp"

namespace cavsim::testing {

inline Approach approach(std::string id, double control = 45.0, double conflict = 7.0, double vz = 7.0,
                         Priority pri = Priority::major) {
  return Approach{std::move(id), control, conflict, vz, pri};
}

// Relations default to `rel` off the diagonal, same-lane on it.
inline ZoneSpec zone(std::string id, std::vector<Approach> approaches, Relation rel = Relation::crossing,
                     ZoneKind kind = ZoneKind::intersection) {
  ZoneSpec z;
  z.id = std::move(id);
  z.kind = kind;
  z.approaches = std::move(approaches);
  const std::size_t n = z.approaches.size();
  z.relations.assign(n, std::vector<Relation>(n, rel));
  for (std::size_t i = 0; i < n; ++i) z.relations[i][i] = Relation::same_lane;
  return z;
}

inline ZoneCrossing crossing(std::string zone_id, std::string approach_id, double control_entry,
                             double control = 45.0, double conflict = 7.0) {
  return ZoneCrossing{std::move(zone_id), std::move(approach_id), control_entry, control_entry + control,
                      control_entry + control + conflict};
}

inline Route loop_route(std::string id, double width, double height, double radius,
                        std::vector<ZoneCrossing> crossings = {}, Vec2 origin = {0.0, 0.0}) {
  return Route::build(std::move(id), rounded_rectangle(origin, width, height, radius), true, std::move(crossings));
}

inline FleetVehicle fleet_vehicle(VehicleId id, std::string route, double s, double v,
                                  const ScenarioConfig& cfg) {
  FleetVehicle fv;
  fv.id = id;
  fv.route = std::move(route);
  fv.s = s;
  fv.v = v;
  fv.params = cfg.vehicle;
  fv.driver = cfg.driver;
  return fv;
}

inline std::string source_path(const std::string& rel) { return std::string(CAVSIM_SOURCE_DIR) + "/" + rel; }

}  // namespace cavsim::testing

namespace cavsim::testing {

// Two loops meeting in zone X: loop A on approach "a", loop B on approach "b".
// Each loop gets one vehicle per entry of `a_positions` / `b_positions`, all
// at 7 m/s; ids count up from 1 over A then B.
inline ScenarioConfig two_loop_scenario(Mode mode, std::vector<double> a_positions, std::vector<double> b_positions,
                                        Priority a_priority = Priority::major, Priority b_priority = Priority::minor,
                                        Relation relation = Relation::crossing) {
  ScenarioConfig cfg;
  cfg.name = "two-loop";
  cfg.mode = mode;
  cfg.duration = 40.0;
  cfg.seed = 3;
  ZoneSpec z = zone("X", {approach("a", 45, 7, 7, a_priority), approach("b", 45, 7, 7, b_priority)}, relation);
  Route ra = loop_route("A", 100, 80, 10, {crossing("X", "a", 50)});
  Route rb = loop_route("B", 100, 80, 10, {crossing("X", "b", 50)}, {200, 0});
  cfg.network = Network{{ra, rb}, {z}, {}};
  VehicleId id = 1;
  for (double s : a_positions) cfg.fleet.push_back(fleet_vehicle(id++, "A", s, 7.0, cfg));
  for (double s : b_positions) cfg.fleet.push_back(fleet_vehicle(id++, "B", s, 7.0, cfg));
  for (const auto& fv : cfg.fleet) cfg.egos.push_back(fv.id);
  return cfg;
}

}  // namespace cavsim::testing
