#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vanet/snapshot.hpp"

namespace vanet {

struct RangeModel {
  double los_range_m = 250;      // along a shared street axis
  double nlos_range_m = 140;     // across blocks
  double highway_range_m = 250;  // 1-D scenario
  // Half of the street gap: a vehicle this close to a grid line counts as
  // being on it, which also puts vehicles near a crossing on both streets.
  double axis_tol_m = 2.5;
};

// Undirected 1-hop communication graph with its component partition.
class CommGraph {
 public:
  CommGraph() = default;

  static CommGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    CommGraph g;
    g.adj_.resize(static_cast<std::size_t>(n));
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("edge endpoint out of range");
      if (u == v) throw std::invalid_argument("self-loop");
      g.adj_[u].push_back(v);
      g.adj_[v].push_back(u);
    }
    g.finalize();
    return g;
  }

  int n() const { return static_cast<int>(adj_.size()); }
  const std::vector<int>& neighbors(int i) const { return adj_[i]; }
  int degree(int i) const { return static_cast<int>(adj_[i].size()); }
  bool has_edge(int u, int v) const {
    return std::binary_search(adj_[u].begin(), adj_[u].end(), v);
  }
  std::size_t edge_count() const {
    std::size_t deg_sum = 0;
    for (const auto& a : adj_) deg_sum += a.size();
    return deg_sum / 2;
  }

  int component_of(int i) const { return comp_id_[i]; }
  const std::vector<int>& component_sizes() const { return comp_sizes_; }
  int component_count() const { return static_cast<int>(comp_sizes_.size()); }

 private:
  void finalize() {
    for (auto& a : adj_) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
    comp_id_.assign(adj_.size(), -1);
    comp_sizes_.clear();
    std::vector<int> queue;
    for (std::size_t s = 0; s < adj_.size(); ++s) {
      if (comp_id_[s] >= 0) continue;
      const int id = static_cast<int>(comp_sizes_.size());
      int size = 0;
      queue.assign(1, static_cast<int>(s));
      comp_id_[s] = id;
      while (!queue.empty()) {
        const int u = queue.back();
        queue.pop_back();
        ++size;
        for (int v : adj_[u]) {
          if (comp_id_[v] < 0) {
            comp_id_[v] = id;
            queue.push_back(v);
          }
        }
      }
      comp_sizes_.push_back(size);
    }
  }

  std::vector<std::vector<int>> adj_;
  std::vector<int> comp_id_;
  std::vector<int> comp_sizes_;
};

namespace detail {

// Both coordinates sit on the same grid line, within tol.
inline bool shares_axis(double c1, double c2, double block_m, double tol) {
  const double g1 = std::round(c1 / block_m);
  if (std::abs(c1 - g1 * block_m) > tol) return false;
  const double g2 = std::round(c2 / block_m);
  if (std::abs(c2 - g2 * block_m) > tol) return false;
  return g1 == g2;
}

}  // namespace detail

// 1-hop link predicate. Urban: receive over los_range_m along a shared
// street axis (building rows block everything else) or over nlos_range_m
// regardless. Highway: plain distance along the road. Deterministic and
// lossless.
inline bool is_link(const VehicleState& a, const VehicleState& b, const RangeModel& m,
                    const Topology& topo) {
  if (topo.kind == ScenarioKind::highway) {
    return std::abs(a.pos.x - b.pos.x) <= m.highway_range_m;
  }
  const double d = dist(a.pos, b.pos);
  if (d <= m.nlos_range_m) return true;
  if (d > m.los_range_m) return false;
  return detail::shares_axis(a.pos.y, b.pos.y, topo.block_m, m.axis_tol_m) ||
         detail::shares_axis(a.pos.x, b.pos.x, topo.block_m, m.axis_tol_m);
}

inline CommGraph build_graph_bruteforce(const Snapshot& s, const RangeModel& m) {
  const int n = static_cast<int>(s.vehicles.size());
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (is_link(s.vehicles[i], s.vehicles[j], m, s.topology)) edges.emplace_back(i, j);
    }
  }
  return CommGraph::from_edges(n, edges);
}

// Grid-bucket build, bucket edge = max link range. Output is identical to
// the brute-force pass.
inline CommGraph build_graph(const Snapshot& s, const RangeModel& m) {
  const int n = static_cast<int>(s.vehicles.size());
  const double bucket = std::max(
      s.topology.kind == ScenarioKind::highway ? m.highway_range_m : m.los_range_m, 1.0);
  std::unordered_map<std::int64_t, std::vector<int>> cells;
  auto key = [&](double x, double y) {
    const auto cx = static_cast<std::int64_t>(std::floor(x / bucket));
    const auto cy = static_cast<std::int64_t>(std::floor(y / bucket));
    return cx * 0x100000 + cy;  // coordinates are bounded, no collisions at map scale
  };
  for (int i = 0; i < n; ++i) cells[key(s.vehicles[i].pos.x, s.vehicles[i].pos.y)].push_back(i);

  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    const auto& vi = s.vehicles[i];
    const auto cx = static_cast<std::int64_t>(std::floor(vi.pos.x / bucket));
    const auto cy = static_cast<std::int64_t>(std::floor(vi.pos.y / bucket));
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = cells.find((cx + dx) * 0x100000 + cy + dy);
        if (it == cells.end()) continue;
        for (int j : it->second) {
          if (j <= i) continue;
          if (is_link(vi, s.vehicles[j], m, s.topology)) edges.emplace_back(i, j);
        }
      }
    }
  }
  return CommGraph::from_edges(n, edges);
}

// Maximal connected node sets, each sorted, ordered by first member.
inline std::vector<std::vector<int>> components(const CommGraph& g) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(g.component_count()));
  for (int i = 0; i < g.n(); ++i) out[g.component_of(i)].push_back(i);
  return out;
}

// Canonical edge list: `u,v` rows with u < v, sorted.
inline std::string edges_csv(const CommGraph& g) {
  std::string out = "u,v\n";
  for (int u = 0; u < g.n(); ++u) {
    for (int v : g.neighbors(u)) {
      if (v <= u) continue;
      out += std::to_string(u);
      out += ',';
      out += std::to_string(v);
      out += '\n';
    }
  }
  return out;
}

}  // namespace vanet
