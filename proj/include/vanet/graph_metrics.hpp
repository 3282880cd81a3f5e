#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "vanet/comm_graph.hpp"

namespace vanet {

struct DegreeHistogram {
  std::map<int, int> counts;
  std::map<int, double> probs;
  int n = 0;
};

inline DegreeHistogram degree_distribution(const CommGraph& g) {
  if (g.n() == 0) throw std::domain_error("degree distribution of an empty graph");
  DegreeHistogram h;
  h.n = g.n();
  for (int i = 0; i < g.n(); ++i) ++h.counts[g.degree(i)];
  for (const auto& [k, c] : h.counts) h.probs[k] = static_cast<double>(c) / h.n;
  return h;
}

// Fraction of neighbor pairs of `node` that are themselves linked; 0 when
// fewer than two neighbors.
inline double node_clustering(const CommGraph& g, int node) {
  const auto& nb = g.neighbors(node);
  const int deg = static_cast<int>(nb.size());
  if (deg < 2) return 0.0;
  long long closed = 0;
  for (int i = 0; i < deg; ++i)
    for (int j = i + 1; j < deg; ++j)
      if (g.has_edge(nb[i], nb[j])) ++closed;
  return static_cast<double>(closed) / (static_cast<double>(deg) * (deg - 1) / 2.0);
}

enum class ClusteringMode { node_average, transitivity };

// node_average: mean local coefficient over nodes of degree >= 2.
// transitivity: 3 * triangles / connected triples (the probability that two
// neighbors of a common node are themselves neighbors).
inline double network_clustering(const CommGraph& g, ClusteringMode mode) {
  long long triples = 0;
  long long closed = 0;
  double local_sum = 0;
  int eligible = 0;
  for (int u = 0; u < g.n(); ++u) {
    const auto& nb = g.neighbors(u);
    const int deg = static_cast<int>(nb.size());
    if (deg < 2) continue;
    ++eligible;
    long long closed_u = 0;
    for (int i = 0; i < deg; ++i)
      for (int j = i + 1; j < deg; ++j)
        if (g.has_edge(nb[i], nb[j])) ++closed_u;
    const long long triples_u = static_cast<long long>(deg) * (deg - 1) / 2;
    triples += triples_u;
    closed += closed_u;
    local_sum += static_cast<double>(closed_u) / triples_u;
  }
  if (eligible == 0) throw std::domain_error("clustering undefined: no node has degree >= 2");
  if (mode == ClusteringMode::node_average) return local_sum / eligible;
  return static_cast<double>(closed) / triples;
}

namespace detail {

// BFS hop counts from src; unreachable nodes get -1.
inline void bfs_hops(const CommGraph& g, int src, std::vector<int>& dist) {
  dist.assign(static_cast<std::size_t>(g.n()), -1);
  std::vector<int> frontier{src};
  dist[src] = 0;
  std::vector<int> next;
  int d = 0;
  while (!frontier.empty()) {
    ++d;
    next.clear();
    for (int u : frontier) {
      for (int v : g.neighbors(u)) {
        if (dist[v] < 0) {
          dist[v] = d;
          next.push_back(v);
        }
      }
    }
    frontier.swap(next);
  }
}

}  // namespace detail

// Mean hop count over connected unordered pairs; pairs in different
// components are excluded.
inline double average_shortest_path(const CommGraph& g) {
  long long hop_sum = 0;
  long long pairs = 0;
  std::vector<int> dist;
  for (int s = 0; s < g.n(); ++s) {
    detail::bfs_hops(g, s, dist);
    for (int t = 0; t < g.n(); ++t) {
      if (t != s && dist[t] > 0) {
        hop_sum += dist[t];
        ++pairs;
      }
    }
  }
  if (pairs == 0) throw std::domain_error("average shortest path undefined: no connected pair");
  return static_cast<double>(hop_sum) / static_cast<double>(pairs);
}

// Fraction of node pairs joined by some multi-hop path.
inline double connectivity_fraction(const CommGraph& g) {
  const long long n = g.n();
  if (n < 2) throw std::domain_error("connectivity undefined for n < 2");
  long long connected_pairs = 0;
  for (int s : g.component_sizes()) connected_pairs += static_cast<long long>(s) * (s - 1);
  return static_cast<double>(connected_pairs) / static_cast<double>(n * (n - 1));
}

inline double node_connectivity(const CommGraph& g, int node) {
  const long long n = g.n();
  if (n < 2) throw std::domain_error("connectivity undefined for n < 2");
  const int size = g.component_sizes()[g.component_of(node)];
  return static_cast<double>(size - 1) / static_cast<double>(n - 1);
}

struct MetricReport {
  double aspl = std::numeric_limits<double>::quiet_NaN();
  double clustering_network = std::numeric_limits<double>::quiet_NaN();  // transitivity
  double clustering_node_avg = std::numeric_limits<double>::quiet_NaN();
  double connectivity = std::numeric_limits<double>::quiet_NaN();
  int component_count = 0;
  int n = 0;
  double scale_param = 0;  // area_km2 or length_km of the generating scenario
};

// All metrics in one pass; undefined ones stay NaN instead of throwing.
inline MetricReport compute_metrics(const CommGraph& g, double scale_param) {
  MetricReport r;
  r.n = g.n();
  r.scale_param = scale_param;
  r.component_count = g.component_count();
  if (g.n() >= 2) r.connectivity = connectivity_fraction(g);
  try {
    r.clustering_network = network_clustering(g, ClusteringMode::transitivity);
    r.clustering_node_avg = network_clustering(g, ClusteringMode::node_average);
  } catch (const std::domain_error&) {
  }
  try {
    r.aspl = average_shortest_path(g);
  } catch (const std::domain_error&) {
  }
  return r;
}

}  // namespace vanet
