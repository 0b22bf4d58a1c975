#include "cavsim/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cavsim/errors.hpp"
#include "cavsim/format.hpp"

namespace cavsim {

namespace {

bool contains(const std::vector<VehicleId>& ids, VehicleId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

double schedule_entry_time(const QueueEntry& entry, const QueueEntry* predecessor, const ZoneSpec& zone,
                           const VehicleParams& params) {
  if (!(entry.v0 > 0.0) || !std::isfinite(entry.v0)) {
    throw ProtocolError("invalid entry state: vehicle " + std::to_string(entry.vehicle) + " entered zone " +
                        zone.id + " with speed " + format_g9(entry.v0));
  }
  const Approach& ap = zone.approaches.at(entry.approach_index);
  const double length = ap.control_length;
  const double fastest = length / params.v_max;
  const double slowest = params.v_min > 0.0 ? length / params.v_min : std::numeric_limits<double>::infinity();
  const double cruise = std::clamp(length / entry.v0, fastest, slowest);

  if (predecessor == nullptr) return entry.t0 + cruise;

  double headway = 0.0;
  if (contains(entry.info.same_lane, predecessor->vehicle)) {
    const double vz = ap.imposed_speed;
    headway = (entry.standstill_distance + entry.time_gap * vz) / vz;
  } else if (contains(entry.info.crossing, predecessor->vehicle)) {
    const Approach& pred_ap = zone.approaches.at(predecessor->approach_index);
    headway = pred_ap.conflict_length / pred_ap.imposed_speed;
  }
  const double catch_up = std::min(predecessor->t_m + headway, entry.t0 + slowest);
  return std::max({catch_up, entry.t0 + cruise, entry.t0 + fastest});
}

Coordinator::Coordinator(ZoneSpec zone) : zone_(std::move(zone)) { ledger_.zone = zone_.id; }

const QueueEntry* Coordinator::find(VehicleId vehicle) const {
  for (const auto& e : queue_) {
    if (e.vehicle == vehicle) return &e;
  }
  return nullptr;
}

const QueueEntry& Coordinator::register_vehicle(const Arrival& arrival) {
  if (find(arrival.vehicle) != nullptr) {
    throw ProtocolError("vehicle " + std::to_string(arrival.vehicle) + " registered twice in zone " + zone_.id);
  }
  QueueEntry entry;
  entry.index = next_index_;
  entry.vehicle = arrival.vehicle;
  entry.approach = arrival.approach;
  entry.approach_index = zone_.approach_index(arrival.approach);
  entry.t0 = arrival.t0;
  entry.v0 = arrival.v0;
  entry.standstill_distance = arrival.params.standstill_distance;
  entry.time_gap = arrival.params.time_gap;
  entry.info.p = 0.0;
  entry.info.v = arrival.v0;
  for (const auto& other : queue_) {
    switch (conflict_relation(zone_, entry.approach_index, other.approach_index)) {
      case Relation::same_lane: entry.info.same_lane.push_back(other.vehicle); break;
      case Relation::crossing: entry.info.crossing.push_back(other.vehicle); break;
      case Relation::disjoint: break;
    }
  }
  const QueueEntry* predecessor = queue_.empty() ? nullptr : &queue_.back();
  entry.t_m = schedule_entry_time(entry, predecessor, zone_, arrival.params);
  const Approach& ap = zone_.approaches[entry.approach_index];
  entry.t_f = entry.t_m + ap.conflict_length / ap.imposed_speed;
  entry.info.t_m = entry.t_m;

  ++next_index_;
  queue_.push_back(entry);
  ledger_.entries.push_back({entry.vehicle, entry.approach, entry.approach_index, entry.t_m, entry.t_f, {}, {}});
  return queue_.back();
}

std::vector<QueueEntry> Coordinator::register_simultaneous(std::vector<Arrival> arrivals, Rng& rng) {
  portable_shuffle(std::span<Arrival>(arrivals), rng);
  std::vector<QueueEntry> out;
  out.reserve(arrivals.size());
  for (const auto& a : arrivals) out.push_back(register_vehicle(a));
  return out;
}

void Coordinator::update_info(VehicleId vehicle, double p, double v) {
  for (auto& e : queue_) {
    if (e.vehicle == vehicle) {
      e.info.p = p;
      e.info.v = v;
      return;
    }
  }
  throw ProtocolError("vehicle " + std::to_string(vehicle) + " is not queued in zone " + zone_.id);
}

const LedgerEntry& Coordinator::release(VehicleId vehicle, double t_exit, double tolerance) {
  auto it = std::find_if(queue_.begin(), queue_.end(), [&](const QueueEntry& e) { return e.vehicle == vehicle; });
  if (it == queue_.end()) {
    throw ProtocolError("release of unregistered vehicle " + std::to_string(vehicle) + " in zone " + zone_.id);
  }
  queue_.erase(it);
  if (queue_.empty()) next_index_ = 1;

  // Latest open interval for this vehicle.
  for (auto rit = ledger_.entries.rbegin(); rit != ledger_.entries.rend(); ++rit) {
    if (rit->vehicle == vehicle && !rit->realized_exit) {
      rit->realized_exit = t_exit;
      if (t_exit > rit->t_f + tolerance) {
        rit->warning = "exit " + format_g9(t_exit - rit->t_f) + " s later than scheduled";
      }
      return *rit;
    }
  }
  throw ProtocolError("ledger has no open interval for vehicle " + std::to_string(vehicle));
}

std::vector<ExclusionViolation> audit_ledger(const OccupancyLedger& ledger, const ZoneSpec& zone, double tolerance) {
  std::vector<ExclusionViolation> out;
  const auto& e = ledger.entries;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      if (conflict_relation(zone, e[i].approach, e[j].approach) != Relation::crossing) continue;
      const double overlap = std::min(e[i].end(), e[j].end()) - std::max(e[i].t_m, e[j].t_m);
      if (overlap > tolerance) {
        out.push_back({e[i].vehicle, e[j].vehicle, e[i].approach, e[j].approach, overlap});
      }
    }
  }
  return out;
}

}  // namespace cavsim
