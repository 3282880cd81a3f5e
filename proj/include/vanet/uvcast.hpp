#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "vanet/rng.hpp"
#include "vanet/snapshot.hpp"

namespace vanet {

struct Roi {
  Vec2 center;
  double side_m = 1000;
  bool contains(const Vec2& p) const {
    return std::abs(p.x - center.x) <= side_m / 2 && std::abs(p.y - center.y) <= side_m / 2;
  }
};

struct ProtocolParams {
  double beacon_interval_s = 1.0;
  double ema_alpha = 0.1;
  double k_low = 3;   // below: disconnected regime
  double k_high = 4;  // above: well-connected regime
  double t_max_wait_s = 0.5;
  double intersection_factor = 0.5;
  double los_range_m = 250;  // normalizes the distance-based wait slot
  // Cap on SCF retransmissions per carried message (negative = unbounded;
  // spray is already bounded by the covered-neighbor rule).
  int scf_retx_limit = -1;
  bool enable_p = false;
  bool enable_s = false;
  Roi roi;
  bool roi_auto_center = true;  // center the ROI on the map when running a simulation
};

struct WarningMessage {
  int id = 0;
  Vec2 origin_pos;  // accident scene
  Vec2 relay_pos;   // last transmitter
  int hop_count = 0;
  double created_s = 0;
};

// Duplicate-suppression strength in sparse networks: rebroadcast survives a
// redundant reception with probability 1 - s. Rises linearly from 0.5 at
// k_med = 0 to 1 at k_med = 3 (the 0.5 floor mirrors the ~0.5 urban
// clustering coefficient: half the neighbors have the message already).
inline double s_value(double k_med) {
  if (k_med < 0) throw std::domain_error("k_med must be >= 0");
  if (k_med < 3.0) return 0.5 + 0.5 * k_med / 3.0;
  return 1.0;
}

// Rebroadcast/SCF-assignment probability in dense networks: 1 up to
// k_med = 4, then decays toward the 0.5 floor as density grows.
inline double p_value(double k_med) {
  if (k_med < 0) throw std::domain_error("k_med must be >= 0");
  if (k_med > 4.0) return 0.5 + 0.5 / (k_med - 4.0 + 1.0);
  return 1.0;
}

enum class Regime { disconnected, intermediate, well_connected };

struct MessageRecord {
  WarningMessage msg;  // as held by this vehicle
  double first_rx_time = 0;
  Vec2 first_rx_pos;
  double first_rx_distance_m = 0;  // to the accident scene at first reception
  int duplicate_count = 0;
  bool originated = false;
  bool relayed = false;
  std::set<int> covered;  // neighbors present at any of our own transmissions
};

struct PendingTimer {
  double expiry = 0;
  bool survival_resolved = false;  // one-shot draw taken at the first duplicate
  bool survivor = false;
};

struct VehicleProtocolState {
  double k_med = 0;
  bool k_med_initialized = false;
  std::map<int, double> neighbor_table;  // id -> last heard
  std::map<int, MessageRecord> received;
  std::map<int, PendingTimer> pending_timers;
  std::set<int> scf_carrying;
  std::map<int, int> scf_retx_done;
  std::map<int, int> scf_events;  // detection events seen per carried message
  long tx_count = 0;
  long rx_count = 0;
};

// Exponential moving average of the observed neighbor count; the first
// observation initializes it.
inline void update_k_med(VehicleProtocolState& st, int observed, const ProtocolParams& pp) {
  if (observed < 0) throw std::domain_error("neighbor count must be >= 0");
  if (!st.k_med_initialized) {
    st.k_med = observed;
    st.k_med_initialized = true;
  } else {
    st.k_med = (1.0 - pp.ema_alpha) * st.k_med + pp.ema_alpha * observed;
  }
}

inline Regime regime(const VehicleProtocolState& st, const ProtocolParams& pp) {
  if (st.k_med < pp.k_low) return Regime::disconnected;
  if (st.k_med > pp.k_high) return Regime::well_connected;
  return Regime::intermediate;
}

// Distance-proportional wait slot: receivers farther from the relay wait
// less; intersection vehicles get priority.
inline double wait_time(double dist_to_relay_m, bool at_intersection, const ProtocolParams& pp) {
  const double d = std::min(std::max(dist_to_relay_m, 0.0), pp.los_range_m);
  double w = pp.t_max_wait_s * (1.0 - d / pp.los_range_m);
  if (at_intersection) w *= pp.intersection_factor;
  return w;
}

struct ReceiveOutcome {
  enum class Kind {
    outside_roi,         // discarded, nothing recorded
    first_rx_timer,      // rebroadcast timer scheduled at timer_expiry
    first_rx_scf,        // disconnected regime: evaluate SCF assignment now
    duplicate_cancelled, // pending timer cancelled
    duplicate_survived,  // s mechanism kept the timer alive
    duplicate,           // duplicate with no pending timer
  };
  Kind kind = Kind::duplicate;
  double timer_expiry = 0;
  bool s_draw_taken = false;  // the cancellation went through the s gate
};

inline ReceiveOutcome on_receive(VehicleProtocolState& st, const WarningMessage& msg, double now,
                                 const Vec2& my_pos, bool at_intersection,
                                 const ProtocolParams& pp, Rng& rng) {
  ReceiveOutcome out;
  if (!pp.roi.contains(my_pos)) {
    out.kind = ReceiveOutcome::Kind::outside_roi;
    return out;
  }
  auto it = st.received.find(msg.id);
  if (it == st.received.end()) {
    ++st.rx_count;
    MessageRecord rec;
    rec.msg = msg;
    rec.first_rx_time = now;
    rec.first_rx_pos = my_pos;
    rec.first_rx_distance_m = dist(my_pos, msg.origin_pos);
    st.received.emplace(msg.id, rec);
    if (regime(st, pp) == Regime::disconnected) {
      out.kind = ReceiveOutcome::Kind::first_rx_scf;
      return out;
    }
    PendingTimer t;
    t.expiry = now + wait_time(dist(my_pos, msg.relay_pos), at_intersection, pp);
    st.pending_timers[msg.id] = t;
    out.kind = ReceiveOutcome::Kind::first_rx_timer;
    out.timer_expiry = t.expiry;
    return out;
  }

  ++st.rx_count;
  ++it->second.duplicate_count;
  auto timer_it = st.pending_timers.find(msg.id);
  if (timer_it == st.pending_timers.end()) {
    out.kind = ReceiveOutcome::Kind::duplicate;
    return out;
  }
  PendingTimer& timer = timer_it->second;
  if (timer.survival_resolved && timer.survivor) {
    out.kind = ReceiveOutcome::Kind::duplicate_survived;
    return out;
  }
  if (pp.enable_s && st.k_med < pp.k_low) {
    timer.survival_resolved = true;
    timer.survivor = rng.next_double() < 1.0 - s_value(st.k_med);
    out.s_draw_taken = true;
    if (timer.survivor) {
      out.kind = ReceiveOutcome::Kind::duplicate_survived;
      return out;
    }
  }
  st.pending_timers.erase(timer_it);
  out.kind = ReceiveOutcome::Kind::duplicate_cancelled;
  return out;
}

enum class TimerDecision { transmit, suppress_p, stale };

inline TimerDecision on_timer_expiry(VehicleProtocolState& st, int msg_id,
                                     const ProtocolParams& pp, Rng& rng) {
  auto it = st.pending_timers.find(msg_id);
  if (it == st.pending_timers.end()) return TimerDecision::stale;
  st.pending_timers.erase(it);
  if (pp.enable_p && st.k_med > pp.k_high) {
    if (!(rng.next_double() < p_value(st.k_med))) return TimerDecision::suppress_p;
  }
  auto rec = st.received.find(msg_id);
  if (rec != st.received.end()) rec->second.relayed = true;
  ++st.tx_count;
  return TimerDecision::transmit;
}

// SCF assignment for a vehicle that fulfilled the eligibility conditions
// (disconnected regime, or no rebroadcast overheard after its reception).
inline bool scf_assign(VehicleProtocolState& st, int msg_id, const ProtocolParams& pp, Rng& rng) {
  if (st.received.find(msg_id) == st.received.end())
    throw std::logic_error("scf_assign requires the message");
  const double p = pp.enable_p ? p_value(st.k_med) : 1.0;
  const bool agent = p >= 1.0 || rng.next_double() < p;
  if (agent) st.scf_carrying.insert(msg_id);
  return agent;
}

// The copy a relay puts on air.
inline WarningMessage relay_copy(const MessageRecord& rec, const Vec2& my_pos) {
  WarningMessage out = rec.msg;
  ++out.hop_count;
  out.relay_pos = my_pos;
  return out;
}

// Messages this agent should retransmit given its current in-ROI neighbors
// (receivers outside the ROI discard, so they are not targets): those
// carried messages with at least one such neighbor not yet covered by one
// of our own transmissions. Covering the same neighborhood again adds
// nothing.
inline std::vector<int> scf_due(const VehicleProtocolState& st,
                                const std::vector<int>& roi_neighbors) {
  std::vector<int> due;
  for (int id : st.scf_carrying) {
    const auto it = st.received.find(id);
    if (it == st.received.end()) continue;
    for (int nb : roi_neighbors) {
      if (!it->second.covered.count(nb)) {
        due.push_back(id);
        break;
      }
    }
  }
  return due;
}

// One retransmission of a carried message (new-contact detection); the
// agent retires from the message when it hits the retransmission cap.
inline WarningMessage scf_retransmit(VehicleProtocolState& st, int msg_id, const Vec2& my_pos,
                                     const ProtocolParams& pp) {
  auto it = st.received.find(msg_id);
  if (it == st.received.end() || !st.scf_carrying.count(msg_id))
    throw std::logic_error("scf_retransmit without carrying the message");
  ++st.tx_count;
  const int done = ++st.scf_retx_done[msg_id];
  if (pp.scf_retx_limit >= 0 && done >= pp.scf_retx_limit) st.scf_carrying.erase(msg_id);
  return relay_copy(it->second, my_pos);
}

// One beacon epoch: refresh the neighbor table from the beacons heard,
// drop entries that have gone stale, update k_med from the table size.
// Returns true when some sender was absent from the table beforehand.
inline bool process_beacon_epoch(VehicleProtocolState& st, const std::vector<int>& heard,
                                 double now, const ProtocolParams& pp) {
  const double stale = 2.0 * pp.beacon_interval_s;
  for (auto it = st.neighbor_table.begin(); it != st.neighbor_table.end();) {
    if (now - it->second >= stale) {
      it = st.neighbor_table.erase(it);
    } else {
      ++it;
    }
  }
  bool new_neighbor = false;
  for (int id : heard) {
    if (st.neighbor_table.insert_or_assign(id, now).second) new_neighbor = true;
  }
  update_k_med(st, static_cast<int>(st.neighbor_table.size()), pp);
  return new_neighbor;
}

enum class TraceKind { rx, tx, timer_set, timer_cancel, scf_on, scf_tx, suppress_p, suppress_s };

inline const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::rx: return "rx";
    case TraceKind::tx: return "tx";
    case TraceKind::timer_set: return "timer_set";
    case TraceKind::timer_cancel: return "timer_cancel";
    case TraceKind::scf_on: return "scf_on";
    case TraceKind::scf_tx: return "scf_tx";
    case TraceKind::suppress_p: return "suppress_p";
    case TraceKind::suppress_s: return "suppress_s";
  }
  return "?";
}

struct TraceEvent {
  double time_s = 0;
  int vehicle = 0;
  TraceKind kind = TraceKind::rx;
  int msg_id = 0;
  double k_med = 0;
};

inline std::string trace_csv(const std::vector<TraceEvent>& events) {
  std::string out = "time_s,vehicle,event,msg_id,k_med\n";
  for (const auto& e : events) {
    out += detail::fmt_g(e.time_s);
    out += ',';
    out += std::to_string(e.vehicle);
    out += ',';
    out += trace_kind_name(e.kind);
    out += ',';
    out += std::to_string(e.msg_id);
    out += ',';
    out += detail::fmt_g(e.k_med);
    out += '\n';
  }
  return out;
}

}  // namespace vanet
