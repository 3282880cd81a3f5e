#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "vanet/graph_metrics.hpp"
#include "vanet/scenario.hpp"

using namespace vanet;

namespace {

Snapshot urban_snapshot(double area, double density, std::uint64_t seed) {
  UrbanConfig cfg;
  cfg.area_km2 = area;
  cfg.density_veh_km2 = density;
  cfg.placement = UrbanPlacement::uniform_on_streets;
  return generate_urban(cfg, seed);
}

CommGraph relabel(const CommGraph& g, const std::vector<int>& perm) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < g.n(); ++u)
    for (int v : g.neighbors(u))
      if (v > u) edges.emplace_back(perm[u], perm[v]);
  return CommGraph::from_edges(g.n(), edges);
}

const CommGraph kTriangle = CommGraph::from_edges(3, {{0, 1}, {1, 2}, {0, 2}});
const CommGraph kStar3 = CommGraph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}});
const CommGraph kPath3 = CommGraph::from_edges(3, {{0, 1}, {1, 2}});
const CommGraph kK4 =
    CommGraph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});

}  // namespace

TEST_CASE("degree distribution on small graphs") {
  const auto tri = degree_distribution(kTriangle);
  REQUIRE(tri.probs.at(2) == 1.0);
  const auto star = degree_distribution(kStar3);
  REQUIRE(star.probs.at(1) == 0.75);
  REQUIRE(star.probs.at(3) == 0.25);
  double total = 0;
  for (const auto& [k, p] : star.probs) total += p;
  REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("degree distribution equals a brute-force recount") {
  const auto s = urban_snapshot(4, 75, 9);  // 300 nodes
  REQUIRE(s.vehicles.size() == 300);
  const auto g = build_graph(s, RangeModel{});
  const auto hist = degree_distribution(g);
  const auto deg = oracles::degree_recount(g);
  std::map<int, int> expect;
  for (int d : deg) ++expect[d];
  REQUIRE(hist.counts == expect);
}

TEST_CASE("degree distribution of an empty graph is an error") {
  REQUIRE_THROWS_AS(degree_distribution(CommGraph{}), std::domain_error);
}

TEST_CASE("node clustering on hand-checked shapes") {
  REQUIRE(node_clustering(kTriangle, 0) == 1.0);
  REQUIRE(node_clustering(kStar3, 0) == 0.0);
  // node 0 with neighbors {1,2,3}, only 1-2 connected
  const auto g = CommGraph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}});
  REQUIRE(node_clustering(g, 0) == Catch::Approx(1.0 / 3.0));
  REQUIRE(node_clustering(g, 3) == 0.0);  // degree 1
}

TEST_CASE("network clustering on complete and path graphs") {
  REQUIRE(network_clustering(kK4, ClusteringMode::node_average) == 1.0);
  REQUIRE(network_clustering(kK4, ClusteringMode::transitivity) == 1.0);
  REQUIRE(network_clustering(kPath3, ClusteringMode::node_average) == 0.0);
  REQUIRE(network_clustering(kPath3, ClusteringMode::transitivity) == 0.0);
}

TEST_CASE("transitivity of the chorded square matches triple enumeration") {
  const auto g = CommGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}});
  const double expect = oracles::transitivity_bruteforce(g);
  REQUIRE(expect == Catch::Approx(0.75));  // 3*2 triangles / 8 connected triples
  REQUIRE(network_clustering(g, ClusteringMode::transitivity) == Catch::Approx(expect));
}

TEST_CASE("clustering without any degree-2 node is an error") {
  const auto g = CommGraph::from_edges(4, {{0, 1}, {2, 3}});
  REQUIRE_THROWS_AS(network_clustering(g, ClusteringMode::transitivity), std::domain_error);
}

TEST_CASE("clustering matches brute force on a random geometric graph") {
  const auto s = urban_snapshot(1, 120, 13);
  const auto g = build_graph(s, RangeModel{});
  REQUIRE(network_clustering(g, ClusteringMode::transitivity) ==
          Catch::Approx(oracles::transitivity_bruteforce(g)).margin(1e-12));
  double sum = 0;
  int eligible = 0;
  for (int v = 0; v < g.n(); ++v)
    if (g.degree(v) >= 2) {
      sum += oracles::node_clustering_bruteforce(g, v);
      ++eligible;
    }
  REQUIRE(network_clustering(g, ClusteringMode::node_average) ==
          Catch::Approx(sum / eligible).margin(1e-12));
}

TEST_CASE("clustering is invariant under node relabeling") {
  const auto s = urban_snapshot(1, 80, 29);
  const auto g = build_graph(s, RangeModel{});
  std::vector<int> perm(static_cast<std::size_t>(g.n()));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(77);
  for (int i = g.n() - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(0, i)]);
  const auto h = relabel(g, perm);
  REQUIRE(network_clustering(g, ClusteringMode::transitivity) ==
          Catch::Approx(network_clustering(h, ClusteringMode::transitivity)).margin(1e-12));
  REQUIRE(network_clustering(g, ClusteringMode::node_average) ==
          Catch::Approx(network_clustering(h, ClusteringMode::node_average)).margin(1e-12));
}

TEST_CASE("average shortest path on hand-checked shapes") {
  REQUIRE(average_shortest_path(kPath3) == Catch::Approx(4.0 / 3.0));
  REQUIRE(average_shortest_path(kStar3) == Catch::Approx(1.5));
}

TEST_CASE("average shortest path matches Floyd-Warshall") {
  const auto s = urban_snapshot(1, 150, 41);  // 150 nodes
  const auto g = build_graph(s, RangeModel{});
  bool defined = false;
  const double expect = oracles::aspl_bruteforce(g, &defined);
  REQUIRE(defined);
  REQUIRE(average_shortest_path(g) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("average shortest path needs a connected pair") {
  REQUIRE_THROWS_AS(average_shortest_path(CommGraph::from_edges(3, {})), std::domain_error);
}

TEST_CASE("isolated nodes do not change the average shortest path") {
  const auto s = urban_snapshot(1, 90, 53);
  const auto g = build_graph(s, RangeModel{});
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < g.n(); ++u)
    for (int v : g.neighbors(u))
      if (v > u) edges.emplace_back(u, v);
  const auto padded = CommGraph::from_edges(g.n() + 7, edges);
  REQUIRE(average_shortest_path(g) ==
          Catch::Approx(average_shortest_path(padded)).margin(1e-12));
}

TEST_CASE("connectivity fraction on hand-checked partitions") {
  // components {2, 3} in n = 5
  const auto g = CommGraph::from_edges(5, {{0, 1}, {2, 3}, {3, 4}});
  REQUIRE(connectivity_fraction(g) == Catch::Approx(0.4));
  REQUIRE(connectivity_fraction(kK4) == 1.0);
  REQUIRE(connectivity_fraction(CommGraph::from_edges(4, {})) == 0.0);
}

TEST_CASE("node connectivity on hand-checked partitions") {
  const auto g = CommGraph::from_edges(5, {{0, 1}, {0, 2}});  // component {0,1,2}, singletons 3,4
  REQUIRE(node_connectivity(g, 1) == Catch::Approx(0.5));
  REQUIRE(node_connectivity(g, 3) == 0.0);
  REQUIRE(node_connectivity(kK4, 2) == 1.0);
  REQUIRE_THROWS_AS(node_connectivity(CommGraph::from_edges(1, {}), 0), std::domain_error);
}

TEST_CASE("connectivity fraction equals the mean node connectivity") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = urban_snapshot(1, 60, seed);
    const auto g = build_graph(s, RangeModel{});
    double mean = 0;
    for (int v = 0; v < g.n(); ++v) mean += node_connectivity(g, v);
    mean /= g.n();
    REQUIRE(connectivity_fraction(g) == Catch::Approx(mean).margin(1e-12));
    REQUIRE(connectivity_fraction(g) ==
            Catch::Approx(oracles::connectivity_bruteforce(g)).margin(1e-12));
  }
}

TEST_CASE("torus geometric graphs reproduce the theoretical clustering") {
  Rng rng2(2024);
  const int n = 2000;
  const double r2 = std::sqrt(20.0 / (3.14159265358979323846 * n));
  const auto g2 = oracles::torus_disc_graph_2d(n, r2, rng2);
  REQUIRE(network_clustering(g2, ClusteringMode::transitivity) ==
          Catch::Approx(0.5865).margin(0.02));
  Rng rng1(2025);
  const auto g1 = oracles::torus_disc_graph_1d(n, 10.0 / n, rng1);
  REQUIRE(network_clustering(g1, ClusteringMode::transitivity) ==
          Catch::Approx(0.75).margin(0.02));
}

TEST_CASE("compute_metrics leaves undefined metrics as NaN") {
  const auto r = compute_metrics(CommGraph::from_edges(3, {}), 1.0);
  REQUIRE(r.n == 3);
  REQUIRE(r.component_count == 3);
  REQUIRE(r.connectivity == 0.0);
  REQUIRE(std::isnan(r.aspl));
  REQUIRE(std::isnan(r.clustering_network));
}
