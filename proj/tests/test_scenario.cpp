#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <tuple>

#include "oracles.hpp"
#include "vanet/scenario.hpp"

using namespace vanet;

namespace {

UrbanConfig urban_cfg(double area, double density, UrbanPlacement mode) {
  UrbanConfig cfg;
  cfg.area_km2 = area;
  cfg.density_veh_km2 = density;
  cfg.placement = mode;
  return cfg;
}

void require_on_streets(const Snapshot& s) {
  for (const auto& v : s.vehicles) {
    const bool on_h = grid_offset(v.pos.y, s.topology.block_m) < 1e-6;
    const bool on_v = grid_offset(v.pos.x, s.topology.block_m) < 1e-6;
    REQUIRE((on_h || on_v));
    REQUIRE(v.pos.x >= 0);
    REQUIRE(v.pos.x < s.topology.side_m + 1e-9);
    REQUIRE(v.pos.y >= 0);
    REQUIRE(v.pos.y < s.topology.side_m + 1e-9);
  }
}

}  // namespace

TEST_CASE("urban vehicle count is round(density * area)") {
  const auto s = generate_urban(urban_cfg(4, 10, UrbanPlacement::uniform_on_streets), 7);
  REQUIRE(s.vehicles.size() == 40);
  const auto s2 = generate_urban(urban_cfg(4, 0, UrbanPlacement::uniform_on_streets), 7);
  REQUIRE(s2.vehicles.empty());
}

TEST_CASE("uniform placement lands on grid lines 125 m apart") {
  const auto s = generate_urban(urban_cfg(1, 100, UrbanPlacement::uniform_on_streets), 3);
  REQUIRE(s.vehicles.size() == 100);
  require_on_streets(s);
  std::set<int> ids;
  for (const auto& v : s.vehicles) ids.insert(v.id);
  REQUIRE(ids.size() == s.vehicles.size());
}

TEST_CASE("ca placement respects cell capacity") {
  auto cfg = urban_cfg(0.0625, 50000, UrbanPlacement::ca_warmed);  // 3125 vehicles, 250 m map
  cfg.warmup_s = 0;
  REQUIRE_THROWS_AS(generate_urban(cfg, 1), std::invalid_argument);
}

TEST_CASE("lone vehicle at v_max advances exactly v_max cells") {
  auto cfg = urban_cfg(1, 0, UrbanPlacement::ca_warmed);
  cfg.ca.slowdown_prob = 0;
  Snapshot s;
  s.topology = ManhattanGrid(cfg.area_km2, cfg.block_size_m, cfg.ca.cell_len_m).topology();
  VehicleState v;
  v.id = 0;
  v.pos = {50, 0};  // horizontal street 0, cell 10
  v.street = 0;
  v.heading = {1, 0};
  v.speed_mps = 3 * 5.0;  // v_max cells per second
  s.vehicles.push_back(v);
  Rng rng(1);
  const auto next = step_urban(s, cfg, rng);
  REQUIRE(next.vehicles[0].pos.x == Catch::Approx(50 + 3 * 5.0));
  REQUIRE(next.vehicles[0].pos.y == 0);
}

TEST_CASE("follower brakes to the gap and never collides") {
  auto cfg = urban_cfg(1, 0, UrbanPlacement::ca_warmed);
  cfg.ca.slowdown_prob = 0;
  Snapshot s;
  s.topology = ManhattanGrid(cfg.area_km2, cfg.block_size_m, cfg.ca.cell_len_m).topology();
  VehicleState leader;
  leader.id = 0;
  leader.pos = {55, 0};
  leader.street = 0;
  leader.heading = {1, 0};
  leader.speed_mps = 0;
  VehicleState follower;
  follower.id = 1;
  follower.pos = {50, 0};
  follower.street = 0;
  follower.heading = {1, 0};
  follower.speed_mps = 15;
  s.vehicles = {leader, follower};
  Rng rng(1);
  const auto next = step_urban(s, cfg, rng);
  // gap was zero: the follower must stay put while the leader pulls away
  REQUIRE(next.vehicles[1].pos.x == 50);
  REQUIRE(next.vehicles[1].speed_mps == 0);
  REQUIRE(next.vehicles[0].pos.x > 55);
}

TEST_CASE("1000 CA steps conserve vehicles, stay on streets, one per cell") {
  auto cfg = urban_cfg(1, 60, UrbanPlacement::ca_warmed);
  cfg.warmup_s = 0;
  Snapshot s = generate_urban(cfg, 11);
  const auto count = s.vehicles.size();
  REQUIRE(count == 60);
  Rng rng(derive_seed(11, kStreamMobility));
  for (int step = 0; step < 1000; ++step) {
    s = step_urban(s, cfg, rng);
    REQUIRE(s.vehicles.size() == count);
    if (step % 100 == 0) require_on_streets(s);
    std::set<std::tuple<int, int, int>> cells;  // (street, dir, cell)
    for (const auto& v : s.vehicles) {
      const bool vertical = v.street >= 8;  // 1 km -> 8 blocks
      const double along = vertical ? v.pos.y : v.pos.x;
      const int cell = static_cast<int>(std::lround(along / 5.0));
      const int dir = (vertical ? v.heading.y : v.heading.x) > 0 ? 0 : 1;
      REQUIRE(cells.insert({v.street, dir, cell}).second);
    }
  }
  REQUIRE(s.time_s == Catch::Approx(1000.0));
}

TEST_CASE("highway count is Poisson with the configured mean") {
  HighwayConfig cfg;
  cfg.length_km = 25;
  cfg.density_veh_km = 3.9;
  double total = 0;
  const int seeds = 1000;
  for (int i = 0; i < seeds; ++i)
    total += static_cast<double>(generate_highway(cfg, 1000 + i).vehicles.size());
  const double mean = total / seeds;  // expectation 97.5
  REQUIRE(mean >= 92.0);
  REQUIRE(mean <= 103.0);
}

TEST_CASE("highway density zero yields no vehicles") {
  HighwayConfig cfg;
  cfg.length_km = 10;
  cfg.density_veh_km = 0;
  REQUIRE(generate_highway(cfg, 5).vehicles.empty());
}

TEST_CASE("highway spacings pass a KS test against the exponential law") {
  HighwayConfig cfg;
  cfg.length_km = 25;
  cfg.density_veh_km = 44.9;
  const auto s = generate_highway(cfg, 21);
  REQUIRE(s.vehicles.size() > 900);
  std::vector<double> spacings;
  double prev = 0;
  for (const auto& v : s.vehicles) {
    REQUIRE(v.pos.x >= 0);
    REQUIRE(v.pos.x <= 25000.0);
    REQUIRE(v.pos.x > prev);
    spacings.push_back(v.pos.x - prev);
    prev = v.pos.x;
  }
  const double d = oracles::ks_statistic_exponential(spacings, 1000.0 / 44.9);
  const double critical_1pct = 1.628 / std::sqrt(static_cast<double>(spacings.size()));
  REQUIRE(d < critical_1pct);
}

TEST_CASE("identical config and seed give byte-identical serialized snapshots") {
  for (auto mode : {UrbanPlacement::uniform_on_streets, UrbanPlacement::ca_warmed}) {
    auto cfg = urban_cfg(1, 40, mode);
    cfg.warmup_s = 30;
    const auto a = generate_urban(cfg, 99);
    const auto b = generate_urban(cfg, 99);
    REQUIRE(snapshot_csv(a) == snapshot_csv(b));
    REQUIRE(snapshot_sidecar(a) == snapshot_sidecar(b));
  }
  HighwayConfig h;
  h.length_km = 10;
  h.density_veh_km = 26;
  REQUIRE(snapshot_csv(generate_highway(h, 4)) == snapshot_csv(generate_highway(h, 4)));
}

TEST_CASE("density sweeps share a placement prefix for the same seed") {
  const auto lo = generate_urban(urban_cfg(4, 10, UrbanPlacement::uniform_on_streets), 5);
  const auto hi = generate_urban(urban_cfg(4, 20, UrbanPlacement::uniform_on_streets), 5);
  REQUIRE(lo.vehicles.size() == 40);
  REQUIRE(hi.vehicles.size() == 80);
  for (std::size_t i = 0; i < lo.vehicles.size(); ++i) {
    REQUIRE(lo.vehicles[i].pos.x == hi.vehicles[i].pos.x);
    REQUIRE(lo.vehicles[i].pos.y == hi.vehicles[i].pos.y);
  }
}

TEST_CASE("snapshot CSV round-trips through parse") {
  auto cfg = urban_cfg(1, 25, UrbanPlacement::ca_warmed);
  cfg.warmup_s = 10;
  const auto s = generate_urban(cfg, 13);
  const auto back = parse_snapshot(snapshot_csv(s), snapshot_sidecar(s));
  REQUIRE(back.vehicles.size() == s.vehicles.size());
  REQUIRE(back.topology.side_m == s.topology.side_m);
  REQUIRE(back.seed == s.seed);
  for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
    REQUIRE(back.vehicles[i].id == s.vehicles[i].id);
    REQUIRE(back.vehicles[i].pos.x == Catch::Approx(s.vehicles[i].pos.x).margin(1e-9));
    REQUIRE(back.vehicles[i].pos.y == Catch::Approx(s.vehicles[i].pos.y).margin(1e-9));
    REQUIRE(back.vehicles[i].street == s.vehicles[i].street);
    REQUIRE(back.vehicles[i].heading.x == Catch::Approx(s.vehicles[i].heading.x).margin(1e-9));
    REQUIRE(back.vehicles[i].speed_mps == Catch::Approx(s.vehicles[i].speed_mps).margin(1e-9));
  }
  Rng rng(1);
  REQUIRE_NOTHROW(step_urban(back, cfg, rng));
}

TEST_CASE("invalid configs are rejected") {
  REQUIRE_THROWS_AS(generate_urban(urban_cfg(0, 10, UrbanPlacement::uniform_on_streets), 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(generate_urban(urban_cfg(1, -5, UrbanPlacement::uniform_on_streets), 1),
                    std::invalid_argument);
  HighwayConfig h;
  h.length_km = -1;
  REQUIRE_THROWS_AS(generate_highway(h, 1), std::invalid_argument);
}
