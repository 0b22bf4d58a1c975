#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cavsim/dynamics.hpp"
#include "cavsim/network.hpp"
#include "cavsim/rng.hpp"

namespace cavsim {

// What a queued vehicle shares with the vehicles behind it.
struct InfoSet {
  double p = 0.0;  // metres into the control zone
  double v = 0.0;
  std::vector<VehicleId> same_lane;  // queued vehicles on the same lane
  std::vector<VehicleId> crossing;   // queued vehicles on crossing approaches
  double t_m = 0.0;                  // scheduled conflict-zone entry
};

struct QueueEntry {
  int index = 0;  // FIFO identity, 1-based
  VehicleId vehicle = 0;
  std::string approach;
  std::size_t approach_index = 0;
  double t0 = 0.0;  // control-zone entry time
  double v0 = 0.0;  // speed at control-zone entry
  double t_m = 0.0;
  double t_f = 0.0;  // t_m + S/v^z
  double standstill_distance = 0.0;
  double time_gap = 0.0;
  InfoSet info;
};

struct LedgerEntry {
  VehicleId vehicle = 0;
  std::string approach;
  std::size_t approach_index = 0;
  double t_m = 0.0;
  double t_f = 0.0;
  std::optional<double> realized_exit;
  std::optional<std::string> warning;

  // Realised occupancy when closed, scheduled otherwise.
  double end() const { return realized_exit.value_or(t_f); }
};

struct OccupancyLedger {
  std::string zone;
  std::vector<LedgerEntry> entries;
};

// Entry time into the conflict zone for a vehicle that has just registered.
//
// The predecessor is the queue entry immediately ahead (index i-1) or null for
// the first vehicle. Its relation to `entry` is read from entry.info: a
// same-lane predecessor imposes a headway of (gamma + h v^z)/v^z, a crossing
// predecessor its own conflict-zone occupancy S/v^z, a disjoint one only
// keeps the FIFO order. The result is always inside
// t0 + [L/v_max, L/v_min].
double schedule_entry_time(const QueueEntry& entry, const QueueEntry* predecessor, const ZoneSpec& zone,
                           const VehicleParams& params);

struct Arrival {
  VehicleId vehicle = 0;
  std::string approach;
  double t0 = 0.0;
  double v0 = 0.0;
  VehicleParams params;
};

// FIFO bookkeeping for one conflict zone. It sequences and relays; it never
// chooses anybody's control input.
class Coordinator {
 public:
  explicit Coordinator(ZoneSpec zone);

  const ZoneSpec& zone() const { return zone_; }
  const std::vector<QueueEntry>& queue() const { return queue_; }
  const OccupancyLedger& ledger() const { return ledger_; }

  // Appends at N(t)+1, builds the info set against everything queued and
  // schedules t_m. Throws ProtocolError on double registration and for
  // v0 <= 0; ConfigError for an unknown approach.
  const QueueEntry& register_vehicle(const Arrival& arrival);

  // Arrivals detected in the same tick, queued in a seeded random order.
  std::vector<QueueEntry> register_simultaneous(std::vector<Arrival> arrivals, Rng& rng);

  void update_info(VehicleId vehicle, double p, double v);

  // Removes the vehicle and closes its ledger interval with the realised exit
  // time. Exits later than the schedule by more than `tolerance` are flagged
  // in the ledger. Indices of the remaining vehicles are untouched.
  const LedgerEntry& release(VehicleId vehicle, double t_exit, double tolerance);

  const QueueEntry* find(VehicleId vehicle) const;

 private:
  ZoneSpec zone_;
  std::vector<QueueEntry> queue_;
  OccupancyLedger ledger_;
  int next_index_ = 1;
};

struct ExclusionViolation {
  VehicleId first = 0;
  VehicleId second = 0;
  std::string first_approach;
  std::string second_approach;
  double overlap = 0.0;  // seconds
};

// Pairs on crossing approaches whose occupancy intervals intersect, with
// intervals taken closed-open so back-to-back occupancy is allowed.
std::vector<ExclusionViolation> audit_ledger(const OccupancyLedger& ledger, const ZoneSpec& zone,
                                             double tolerance = 1e-9);

}  // namespace cavsim
