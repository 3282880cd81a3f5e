#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "oracles.hpp"
#include "vanet/comm_graph.hpp"
#include "vanet/scenario.hpp"

using namespace vanet;

namespace {

VehicleState at(double x, double y) {
  VehicleState v;
  v.pos = {x, y};
  return v;
}

Topology urban_topo() {
  Topology t;
  t.kind = ScenarioKind::urban;
  t.side_m = 2000;
  t.block_m = 125;
  return t;
}

Snapshot urban_snapshot(double area, double density, std::uint64_t seed) {
  UrbanConfig cfg;
  cfg.area_km2 = area;
  cfg.density_veh_km2 = density;
  cfg.placement = UrbanPlacement::uniform_on_streets;
  return generate_urban(cfg, seed);
}

bool same_adjacency(const CommGraph& a, const CommGraph& b) {
  if (a.n() != b.n()) return false;
  for (int i = 0; i < a.n(); ++i)
    if (a.neighbors(i) != b.neighbors(i)) return false;
  return true;
}

}  // namespace

TEST_CASE("line of sight along a shared street reaches 250 m") {
  const RangeModel m;
  const auto topo = urban_topo();
  REQUIRE(is_link(at(250, 100), at(250, 300), m, topo));       // same vertical street, 200 m
  REQUIRE_FALSE(is_link(at(250, 100), at(250, 360), m, topo)); // 260 m, out of range
}

TEST_CASE("no shared axis limits the link to the NLOS range") {
  const RangeModel m;
  const auto topo = urban_topo();
  // one on y=0, the other on y=125, neither x on a grid line: ~150 m apart
  const auto a = at(62.5, 0);
  const auto b = at(145.5, 125);
  REQUIRE(dist(a.pos, b.pos) > 140);
  REQUIRE(dist(a.pos, b.pos) < 160);
  REQUIRE_FALSE(is_link(a, b, m, topo));
  // the same geometry within 140 m connects
  REQUIRE(is_link(at(62.5, 0), at(100.5, 125), m, topo));
}

TEST_CASE("coincident positions always link") {
  const RangeModel m;
  REQUIRE(is_link(at(300, 62.5), at(300, 62.5), m, urban_topo()));
  Topology hw;
  hw.kind = ScenarioKind::highway;
  REQUIRE(is_link(at(100, 0), at(100, 0), m, hw));
}

TEST_CASE("vehicles near a crossing belong to both streets") {
  const RangeModel m;
  const auto topo = urban_topo();
  // a sits 2 m from the crossing (250, 250) along the horizontal street;
  // b is 200 m down the vertical street: LOS through the intersection zone
  const auto a = at(248, 250);
  const auto b = at(250, 450);
  REQUIRE(is_link(a, b, m, topo));
  // 10 m from the crossing the zone no longer applies
  REQUIRE_FALSE(is_link(at(240, 250), at(250, 450), m, topo));
}

TEST_CASE("three collinear highway vehicles form a path") {
  Snapshot s;
  s.topology.kind = ScenarioKind::highway;
  s.topology.length_m = 1000;
  for (int i = 0; i < 3; ++i) {
    VehicleState v;
    v.id = i;
    v.pos = {i * 200.0, 0};
    s.vehicles.push_back(v);
  }
  const auto g = build_graph(s, RangeModel{});
  REQUIRE(g.n() == 3);
  REQUIRE(g.has_edge(0, 1));
  REQUIRE(g.has_edge(1, 2));
  REQUIRE_FALSE(g.has_edge(0, 2));
  REQUIRE(g.component_count() == 1);
  REQUIRE(g.component_sizes()[0] == 3);
}

TEST_CASE("empty snapshot gives an empty graph") {
  Snapshot s;
  const auto g = build_graph(s, RangeModel{});
  REQUIRE(g.n() == 0);
  REQUIRE(g.component_count() == 0);
}

TEST_CASE("spatial index equals brute force on urban snapshots") {
  const RangeModel m;
  const auto s = urban_snapshot(1, 200, 17);
  REQUIRE(same_adjacency(build_graph(s, m), build_graph_bruteforce(s, m)));
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto snap = urban_snapshot(4, 120, seed);  // n = 480
    REQUIRE(same_adjacency(build_graph(snap, m), build_graph_bruteforce(snap, m)));
  }
  HighwayConfig h;
  h.length_km = 25;
  h.density_veh_km = 20;
  const auto hw = generate_highway(h, 3);
  REQUIRE(same_adjacency(build_graph(hw, m), build_graph_bruteforce(hw, m)));
}

TEST_CASE("adjacency is symmetric and irreflexive") {
  const auto s = urban_snapshot(1, 150, 23);
  const auto g = build_graph(s, RangeModel{});
  for (int u = 0; u < g.n(); ++u) {
    for (int v : g.neighbors(u)) {
      REQUIRE(v != u);
      REQUIRE(g.has_edge(v, u));
    }
  }
}

TEST_CASE("enlarging a range never removes an edge") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto s = urban_snapshot(1, 100, seed);
    RangeModel small;
    RangeModel big;
    big.los_range_m = 300;
    big.nlos_range_m = 180;
    const auto gs = build_graph(s, small);
    const auto gb = build_graph(s, big);
    for (int u = 0; u < gs.n(); ++u)
      for (int v : gs.neighbors(u)) REQUIRE(gb.has_edge(u, v));
  }
}

TEST_CASE("components partition the nodes") {
  const auto edgeless = CommGraph::from_edges(5, {});
  REQUIRE(components(edgeless).size() == 5);
  const auto path4 = CommGraph::from_edges(4, {{0, 1}, {1, 2}, {2, 3}});
  const auto comps = components(path4);
  REQUIRE(comps.size() == 1);
  REQUIRE(comps[0] == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("component partition equals brute-force reachability") {
  const auto s = urban_snapshot(1, 100, 31);
  REQUIRE(s.vehicles.size() == 100);
  const auto g = build_graph(s, RangeModel{});
  const auto expect = oracles::components_bruteforce(g);
  const auto got = components(g);
  REQUIRE(got.size() == expect.size());
  int total = 0;
  for (const auto& comp : got) {
    total += static_cast<int>(comp.size());
    const std::set<int> as_set(comp.begin(), comp.end());
    REQUIRE(std::find(expect.begin(), expect.end(), as_set) != expect.end());
  }
  REQUIRE(total == g.n());
}

TEST_CASE("from_edges rejects self-loops and bad endpoints") {
  REQUIRE_THROWS_AS(CommGraph::from_edges(3, {{1, 1}}), std::invalid_argument);
  REQUIRE_THROWS_AS(CommGraph::from_edges(3, {{0, 3}}), std::invalid_argument);
}

TEST_CASE("edge list export is canonical") {
  const auto g = CommGraph::from_edges(4, {{2, 3}, {0, 2}, {1, 0}});
  REQUIRE(edges_csv(g) == "u,v\n0,1\n0,2\n2,3\n");
}
