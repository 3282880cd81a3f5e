#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vanet/comm_graph.hpp"
#include "vanet/scenario.hpp"
#include "vanet/uvcast.hpp"

namespace vanet {

enum class Mechanism { baseline, p_only, s_only, p_and_s, flooding_oracle };

inline const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::baseline: return "baseline";
    case Mechanism::p_only: return "p";
    case Mechanism::s_only: return "s";
    case Mechanism::p_and_s: return "ps";
    case Mechanism::flooding_oracle: return "oracle";
  }
  return "?";
}

inline Mechanism mechanism_from_name(const std::string& s) {
  if (s == "baseline") return Mechanism::baseline;
  if (s == "p") return Mechanism::p_only;
  if (s == "s") return Mechanism::s_only;
  if (s == "ps") return Mechanism::p_and_s;
  if (s == "oracle") return Mechanism::flooding_oracle;
  throw std::invalid_argument("unknown mechanism: " + s);
}

struct SimConfig {
  UrbanConfig scenario;
  RangeModel range;
  ProtocolParams protocol;
  double warmup_s = 900;
  double collect_s = 120;
  int runs = 10;
  std::uint64_t base_seed = 1;
  bool static_mobility = false;  // freeze positions after placement
  bool record_trace = false;
};

struct RunMetrics {
  double reachability = 0;
  double avg_received_distance_m = 0;
  double avg_msgs_received = 0;
  double avg_msgs_transmitted = 0;
  double mean_duplicates = 0;
  int informed = 0;
  int ever_in_roi = 0;
  int n = 0;
  bool discarded = false;
  long long deliveries = 0;       // all receptions, including out-of-ROI discards
  long long tx_neighbor_sum = 0;  // sum over transmissions of the neighbor count
  std::uint64_t protocol_draws = 0;
  std::vector<TraceEvent> trace;
};

struct SimMetrics {
  double reachability = 0;
  double avg_received_distance_m = 0;
  double avg_msgs_received = 0;
  double avg_msgs_transmitted = 0;
  double sd_reachability = 0;
  double sd_avg_received_distance_m = 0;
  double sd_avg_msgs_received = 0;
  double sd_avg_msgs_transmitted = 0;
  int discarded_runs = 0;
  std::vector<RunMetrics> per_run;
};

// Epidemic closure over an explicit graph sequence: the source is informed
// in the first frame; at every frame any node adjacent to an informed node
// becomes informed. On a single static frame this is exactly the source's
// connected component.
inline std::vector<bool> run_flooding_oracle(const std::vector<CommGraph>& frames, int source) {
  if (frames.empty()) throw std::invalid_argument("flooding oracle needs at least one frame");
  std::vector<bool> informed(static_cast<std::size_t>(frames.front().n()), false);
  if (source < 0 || source >= frames.front().n()) throw std::invalid_argument("bad source");
  informed[source] = true;
  for (const auto& g : frames) {
    std::vector<int> stack;
    for (int v = 0; v < g.n(); ++v)
      if (informed[v]) stack.push_back(v);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : g.neighbors(u)) {
        if (!informed[w]) {
          informed[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  return informed;
}

namespace detail {

enum EventKind : int {
  kEvMobility = 0,
  kEvBeacon = 1,
  kEvSource = 2,
  kEvTimer = 3,
  kEvScfCheck = 4,
};

struct Event {
  double time = 0;
  int kind = 0;
  int vehicle = -1;
  long seq = 0;
  int msg_id = 0;
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.vehicle != b.vehicle) return a.vehicle > b.vehicle;
    return a.seq > b.seq;
  }
};

// One seeded simulation run. Placement and mobility draw from streams that
// do not depend on the mechanism, so runs with the same seed are paired.
class UvcastRun {
 public:
  UvcastRun(const SimConfig& cfg, Mechanism mech, std::uint64_t run_seed)
      : cfg_(cfg),
        mech_(mech),
        grid_(cfg.scenario.area_km2, cfg.scenario.block_size_m, cfg.scenario.ca.cell_len_m),
        mobility_rng_(derive_seed(run_seed, kStreamMobility)),
        protocol_seed_(derive_seed(run_seed, kStreamProtocol)),
        run_seed_(run_seed) {
    params_ = cfg.protocol;
    params_.enable_p = mech == Mechanism::p_only || mech == Mechanism::p_and_s;
    params_.enable_s = mech == Mechanism::s_only || mech == Mechanism::p_and_s;
    if (params_.roi_auto_center)
      params_.roi.center = {grid_.side_m() / 2.0, grid_.side_m() / 2.0};
  }

  RunMetrics run() {
    place_vehicles();
    const int n = static_cast<int>(snap_.vehicles.size());
    states_.assign(static_cast<std::size_t>(n), VehicleProtocolState{});
    informed_.assign(static_cast<std::size_t>(n), false);
    oracle_first_rx_.assign(static_cast<std::size_t>(n), OracleRx{});
    ever_in_roi_.assign(static_cast<std::size_t>(n), false);
    rebuild_graph();

    const double t_source = cfg_.warmup_s;
    const double t_end = cfg_.warmup_s + cfg_.collect_s;
    if (!cfg_.static_mobility) {
      for (double t = cfg_.scenario.ca.step_s; t <= t_end + 1e-9; t += cfg_.scenario.ca.step_s)
        push({t, kEvMobility, -1, seq_++, 0});
    }
    if (mech_ != Mechanism::flooding_oracle) {
      for (double t = 0; t <= t_end + 1e-9; t += params_.beacon_interval_s)
        push({t, kEvBeacon, -1, seq_++, 0});
    }
    push({t_source, kEvSource, -1, seq_++, 0});

    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      if (e.time > t_end + 1e-9) break;
      switch (e.kind) {
        case kEvMobility:
          step_mobility();
          if (e.time >= t_source) {
            sample_roi();
            if (mech_ == Mechanism::flooding_oracle && started_) oracle_spread(e.time);
          }
          break;
        case kEvBeacon:
          beacon_epoch(e.time);
          break;
        case kEvSource:
          sample_roi();
          start_message(e.time);
          break;
        case kEvTimer:
          handle_timer(e);
          break;
        case kEvScfCheck:
          handle_scf_check(e);
          break;
        default:
          break;
      }
      if (discarded_) break;
    }
    return finish();
  }

 private:
  struct OracleRx {
    bool set = false;
    double time = 0;
    double distance_m = 0;
  };

  enum DrawPurpose : std::uint64_t { kDrawS = 1, kDrawP = 2, kDrawScf = 3 };

  // Every protocol coin flip gets its own stream keyed by (purpose, vehicle,
  // message, attempt). Decisions never shift each other's draws, so paired
  // runs of different mechanisms stay maximally correlated.
  Rng decision_rng(DrawPurpose purpose, int vehicle, int msg, int attempt = 0) {
    const std::uint64_t key =
        mix64(purpose) ^ mix64(0x1000 + static_cast<std::uint64_t>(vehicle)) ^
        mix64(0x2000000 + static_cast<std::uint64_t>(msg)) ^
        mix64(0x40000000 + static_cast<std::uint64_t>(attempt));
    return Rng(derive_seed(protocol_seed_, key));
  }

  void place_vehicles() {
    if (cfg_.static_mobility) {
      snap_ = generate_urban(cfg_.scenario, run_seed_);
      for (auto& v : snap_.vehicles) v.speed_mps = 0;
      return;
    }
    if (cfg_.scenario.placement != UrbanPlacement::ca_warmed)
      throw std::invalid_argument("mobile simulation requires ca_warmed placement");
    const int count =
        static_cast<int>(std::llround(cfg_.scenario.density_veh_km2 * cfg_.scenario.area_km2));
    Rng place(derive_seed(run_seed_, kStreamPlacement));
    ca_ = CaState::place_random(grid_, cfg_.scenario.ca, count, place);
    snap_ = ca_->snapshot(0.0, cfg_.scenario.density_veh_km2, run_seed_);
  }

  void step_mobility() {
    if (!ca_) return;
    ca_->step(mobility_rng_);
    const double t = snap_.time_s + cfg_.scenario.ca.step_s;
    snap_ = ca_->snapshot(t, snap_.density, run_seed_);
    rebuild_graph();
  }

  void rebuild_graph() { graph_ = build_graph(snap_, cfg_.range); }

  void sample_roi() {
    for (const auto& v : snap_.vehicles)
      if (params_.roi.contains(v.pos)) ever_in_roi_[v.id] = true;
  }

  void push(Event e) { queue_.push(e); }

  void trace(double t, int vehicle, TraceKind kind, int msg, double k_med) {
    if (cfg_.record_trace) trace_.push_back({t, vehicle, kind, msg, k_med});
  }

  void start_message(double now) {
    int source = -1;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& v : snap_.vehicles) {
      if (!params_.roi.contains(v.pos)) continue;
      const double d = dist(v.pos, params_.roi.center);
      if (d < best) {
        best = d;
        source = v.id;
      }
    }
    if (source < 0) {
      discarded_ = true;
      return;
    }
    started_ = true;
    WarningMessage msg;
    msg.id = 0;
    msg.origin_pos = snap_.vehicles[source].pos;
    msg.relay_pos = snap_.vehicles[source].pos;
    msg.hop_count = 0;
    msg.created_s = now;

    if (mech_ == Mechanism::flooding_oracle) {
      informed_[source] = true;
      oracle_first_rx_[source] = {true, now, 0.0};
      oracle_transmit(source);
      origin_pos_ = msg.origin_pos;
      source_ = source;
      oracle_spread(now);
      return;
    }

    auto& st = states_[source];
    MessageRecord rec;
    rec.msg = msg;
    rec.first_rx_time = now;
    rec.first_rx_pos = msg.origin_pos;
    rec.first_rx_distance_m = 0;
    rec.originated = true;
    rec.relayed = true;
    st.received.emplace(msg.id, rec);
    ++st.tx_count;
    source_ = source;
    origin_pos_ = msg.origin_pos;
    transmit(source, msg, now, TraceKind::tx);
    // the source listens for echoes like any other holder
    push({now + 2.0 * params_.t_max_wait_s, kEvScfCheck, source, seq_++, msg.id});
  }

  void transmit(int v, const WarningMessage& out, double now, TraceKind kind) {
    trace(now, v, kind, out.id, states_[v].k_med);
    const auto& nb = graph_.neighbors(v);
    tx_neighbor_sum_ += static_cast<long long>(nb.size());
    const auto rec = states_[v].received.find(out.id);
    for (int u : nb) {
      ++deliveries_;
      if (deliver(u, out, now) && rec != states_[v].received.end())
        rec->second.covered.insert(u);
    }
  }

  // Returns true when the receiver was inside the ROI (the copy counted).
  bool deliver(int u, const WarningMessage& msg, double now) {
    auto& st = states_[u];
    const auto& pos = snap_.vehicles[u].pos;
    const bool at_x = near_intersection(pos, snap_.topology, cfg_.range.axis_tol_m);
    Rng rng = decision_rng(kDrawS, u, msg.id);
    const auto outcome = on_receive(st, msg, now, pos, at_x, params_, rng);
    protocol_draws_ += rng.draw_count();
    switch (outcome.kind) {
      case ReceiveOutcome::Kind::outside_roi:
        return false;
      case ReceiveOutcome::Kind::first_rx_timer:
        trace(now, u, TraceKind::rx, msg.id, st.k_med);
        trace(now, u, TraceKind::timer_set, msg.id, st.k_med);
        push({outcome.timer_expiry, kEvTimer, u, seq_++, msg.id});
        push({now + 2.0 * params_.t_max_wait_s, kEvScfCheck, u, seq_++, msg.id});
        break;
      case ReceiveOutcome::Kind::first_rx_scf: {
        trace(now, u, TraceKind::rx, msg.id, st.k_med);
        Rng scf_rng = decision_rng(kDrawScf, u, msg.id, 0);
        const bool agent = scf_assign(st, msg.id, params_, scf_rng);
        protocol_draws_ += scf_rng.draw_count();
        if (agent) trace(now, u, TraceKind::scf_on, msg.id, st.k_med);
        push({now + 2.0 * params_.t_max_wait_s, kEvScfCheck, u, seq_++, msg.id});
        break;
      }
      case ReceiveOutcome::Kind::duplicate_cancelled:
        trace(now, u, TraceKind::rx, msg.id, st.k_med);
        trace(now, u, outcome.s_draw_taken ? TraceKind::suppress_s : TraceKind::timer_cancel,
              msg.id, st.k_med);
        break;
      case ReceiveOutcome::Kind::duplicate_survived:
      case ReceiveOutcome::Kind::duplicate:
        trace(now, u, TraceKind::rx, msg.id, st.k_med);
        break;
    }
    return true;
  }

  void handle_timer(const Event& e) {
    auto& st = states_[e.vehicle];
    Rng rng = decision_rng(kDrawP, e.vehicle, e.msg_id);
    const auto decision = on_timer_expiry(st, e.msg_id, params_, rng);
    protocol_draws_ += rng.draw_count();
    if (decision == TimerDecision::stale) return;
    if (decision == TimerDecision::suppress_p) {
      trace(e.time, e.vehicle, TraceKind::suppress_p, e.msg_id, st.k_med);
      return;
    }
    const auto rec = st.received.find(e.msg_id);
    transmit(e.vehicle, relay_copy(rec->second, snap_.vehicles[e.vehicle].pos), e.time,
             TraceKind::tx);
  }

  void handle_scf_check(const Event& e) {
    auto& st = states_[e.vehicle];
    if (st.scf_carrying.count(e.msg_id)) return;
    const auto rec = st.received.find(e.msg_id);
    if (rec == st.received.end()) return;
    if (rec->second.duplicate_count > 0) return;  // overheard a rebroadcast: not a boundary holder
    Rng rng = decision_rng(kDrawScf, e.vehicle, e.msg_id, 1);
    const bool agent = scf_assign(st, e.msg_id, params_, rng);
    protocol_draws_ += rng.draw_count();
    if (agent) trace(e.time, e.vehicle, TraceKind::scf_on, e.msg_id, st.k_med);
  }

  void beacon_epoch(double now) {
    const int n = static_cast<int>(snap_.vehicles.size());
    std::vector<std::pair<int, int>> due;  // (vehicle, message)
    std::vector<int> roi_neighbors;
    for (int v = 0; v < n; ++v) {
      process_beacon_epoch(states_[v], graph_.neighbors(v), now, params_);
      if (!states_[v].scf_carrying.empty()) {
        roi_neighbors.clear();
        for (int u : graph_.neighbors(v))
          if (params_.roi.contains(snap_.vehicles[u].pos)) roi_neighbors.push_back(u);
        for (int msg : scf_due(states_[v], roi_neighbors)) due.emplace_back(v, msg);
      }
    }
    for (const auto& [v, msg] : due) {
      auto& st = states_[v];
      const int attempt = 2 + st.scf_events[msg]++;
      if (params_.enable_p && st.k_med > params_.k_high) {
        // agenthood is re-evaluated at each detection event
        Rng rng = decision_rng(kDrawScf, v, msg, attempt);
        const bool act = rng.next_double() < p_value(st.k_med);
        protocol_draws_ += rng.draw_count();
        if (!act) {
          // skip this contact batch for good; retrying would undo the gate
          auto rec = st.received.find(msg);
          if (rec != st.received.end())
            for (int u : graph_.neighbors(v))
              if (params_.roi.contains(snap_.vehicles[u].pos)) rec->second.covered.insert(u);
          trace(now, v, TraceKind::suppress_p, msg, st.k_med);
          continue;
        }
      }
      const auto out = scf_retransmit(states_[v], msg, snap_.vehicles[v].pos, params_);
      transmit(v, out, now, TraceKind::scf_tx);
    }
  }

  // Counted once per vehicle: the single ideal transmission it spends when
  // it becomes informed.
  void oracle_transmit(int v) {
    const auto& nb = graph_.neighbors(v);
    ++states_[v].tx_count;
    tx_neighbor_sum_ += static_cast<long long>(nb.size());
    for (int u : nb) {
      ++deliveries_;
      ++states_[u].rx_count;
    }
  }

  // Ideal epidemic step on the current graph: new contacts of informed
  // vehicles become informed (their own single transmission fires then).
  void oracle_spread(double now) {
    std::vector<int> stack;
    const int n = static_cast<int>(snap_.vehicles.size());
    for (int v = 0; v < n; ++v)
      if (informed_[v]) stack.push_back(v);
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int w : graph_.neighbors(u)) {
        if (informed_[w]) continue;
        informed_[w] = true;
        oracle_first_rx_[w] = {true, now, dist(snap_.vehicles[w].pos, origin_pos_)};
        oracle_transmit(w);
        stack.push_back(w);
      }
    }
  }

  RunMetrics finish() {
    RunMetrics m;
    m.n = static_cast<int>(snap_.vehicles.size());
    m.discarded = discarded_ || !started_;
    m.deliveries = deliveries_;
    m.tx_neighbor_sum = tx_neighbor_sum_;
    m.protocol_draws = protocol_draws_;
    m.trace = std::move(trace_);
    if (m.discarded) return m;

    long long roi_count = 0, informed_count = 0;
    double dist_sum = 0;
    long long dist_n = 0;
    double rx_sum = 0, tx_sum = 0, dup_sum = 0;
    long long dup_n = 0;
    for (int v = 0; v < m.n; ++v) {
      const bool informed = mech_ == Mechanism::flooding_oracle
                                ? static_cast<bool>(informed_[v])
                                : states_[v].received.count(0) > 0;
      if (ever_in_roi_[v]) {
        ++roi_count;
        rx_sum += static_cast<double>(states_[v].rx_count);
        tx_sum += static_cast<double>(states_[v].tx_count);
        if (informed) {
          ++informed_count;
          if (v != source_) {
            if (mech_ == Mechanism::flooding_oracle) {
              dist_sum += oracle_first_rx_[v].distance_m;
              dup_sum += std::max(0L, states_[v].rx_count - 1);
            } else {
              dist_sum += states_[v].received.at(0).first_rx_distance_m;
              dup_sum += states_[v].received.at(0).duplicate_count;
            }
            ++dist_n;
            ++dup_n;
          }
        }
      }
    }
    if (roi_count == 0) {
      m.discarded = true;
      return m;
    }
    m.ever_in_roi = static_cast<int>(roi_count);
    m.informed = static_cast<int>(informed_count);
    m.reachability = static_cast<double>(informed_count) / static_cast<double>(roi_count);
    m.avg_received_distance_m = dist_n > 0 ? dist_sum / static_cast<double>(dist_n) : 0.0;
    m.avg_msgs_received = rx_sum / static_cast<double>(roi_count);
    m.avg_msgs_transmitted = tx_sum / static_cast<double>(roi_count);
    m.mean_duplicates = dup_n > 0 ? dup_sum / static_cast<double>(dup_n) : 0.0;
    return m;
  }

  SimConfig cfg_;
  Mechanism mech_;
  ManhattanGrid grid_;
  ProtocolParams params_;
  Rng mobility_rng_;
  std::uint64_t protocol_seed_;
  std::uint64_t protocol_draws_ = 0;
  std::uint64_t run_seed_;

  std::optional<CaState> ca_;
  Snapshot snap_;
  CommGraph graph_;
  std::vector<VehicleProtocolState> states_;
  std::vector<char> informed_;
  std::vector<OracleRx> oracle_first_rx_;
  std::vector<char> ever_in_roi_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::vector<TraceEvent> trace_;
  long seq_ = 0;
  long long deliveries_ = 0;
  long long tx_neighbor_sum_ = 0;
  int source_ = -1;
  Vec2 origin_pos_;
  bool started_ = false;
  bool discarded_ = false;
};

inline void accumulate(SimMetrics& agg) {
  auto mean_sd = [&](auto getter, double& mean, double& sd) {
    double sum = 0;
    int n = 0;
    for (const auto& r : agg.per_run)
      if (!r.discarded) {
        sum += getter(r);
        ++n;
      }
    mean = n > 0 ? sum / n : 0.0;
    double var = 0;
    for (const auto& r : agg.per_run)
      if (!r.discarded) var += (getter(r) - mean) * (getter(r) - mean);
    sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  };
  mean_sd([](const RunMetrics& r) { return r.reachability; }, agg.reachability,
          agg.sd_reachability);
  mean_sd([](const RunMetrics& r) { return r.avg_received_distance_m; },
          agg.avg_received_distance_m, agg.sd_avg_received_distance_m);
  mean_sd([](const RunMetrics& r) { return r.avg_msgs_received; }, agg.avg_msgs_received,
          agg.sd_avg_msgs_received);
  mean_sd([](const RunMetrics& r) { return r.avg_msgs_transmitted; }, agg.avg_msgs_transmitted,
          agg.sd_avg_msgs_transmitted);
  agg.discarded_runs = 0;
  for (const auto& r : agg.per_run)
    if (r.discarded) ++agg.discarded_runs;
}

}  // namespace detail

// Runs `cfg.runs` seeded simulations of one mechanism and aggregates the
// four dissemination metrics. Runs are independent and execute in parallel.
inline SimMetrics run_simulation(const SimConfig& cfg, Mechanism mech) {
  if (cfg.runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (cfg.warmup_s < 0 || cfg.collect_s <= 0) throw std::invalid_argument("bad sim window");
  SimMetrics agg;
  agg.per_run.resize(static_cast<std::size_t>(cfg.runs));

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(cfg.runs));
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.runs) return;
      try {
        detail::UvcastRun run(cfg, mech, cfg.base_seed + static_cast<std::uint64_t>(i));
        agg.per_run[static_cast<std::size_t>(i)] = run.run();
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  detail::accumulate(agg);
  return agg;
}

// Mean duplicate receptions over informed vehicles, from an event trace.
// A vehicle that transmitted before its first reception originated the
// message, so every one of its receptions is a duplicate.
inline double duplicate_statistics(const std::vector<TraceEvent>& trace) {
  struct PerVehicle {
    long rx = 0;
    double first_rx = std::numeric_limits<double>::infinity();
    double first_tx = std::numeric_limits<double>::infinity();
  };
  std::map<int, PerVehicle> stats;
  for (const auto& e : trace) {
    auto& s = stats[e.vehicle];
    if (e.kind == TraceKind::rx) {
      ++s.rx;
      s.first_rx = std::min(s.first_rx, e.time_s);
    } else if (e.kind == TraceKind::tx || e.kind == TraceKind::scf_tx) {
      s.first_tx = std::min(s.first_tx, e.time_s);
    }
  }
  double dup = 0;
  long informed = 0;
  for (const auto& [v, s] : stats) {
    const bool originated = s.first_tx < s.first_rx;
    if (s.rx == 0 && !originated) continue;
    ++informed;
    dup += static_cast<double>(originated ? s.rx : s.rx - 1);
  }
  if (informed == 0) return 0.0;
  return dup / static_cast<double>(informed);
}

}  // namespace vanet
