#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vanet/rng.hpp"
#include "vanet/snapshot.hpp"

namespace vanet {

// Nagel-Schreckenberg parameters. Cells are cell_len_m long, speeds are in
// cells per step, one step lasts step_s seconds.
struct CaParams {
  double cell_len_m = 5;
  int v_max_cells = 3;
  double slowdown_prob = 0.2;
  double step_s = 1;
};

enum class UrbanPlacement { uniform_on_streets, ca_warmed };

struct UrbanConfig {
  double area_km2 = 1;
  double block_size_m = 125;
  double density_veh_km2 = 0;
  CaParams ca;
  UrbanPlacement placement = UrbanPlacement::uniform_on_streets;
  double warmup_s = 900;
};

struct HighwayConfig {
  double length_km = 25;
  double density_veh_km = 0;
  int lanes = 1;
};

// Square Manhattan grid wrapped as a torus: `blocks` streets per axis,
// each of length side_m, crossing every block_size_m meters. Streets are
// indexed horizontal-first: h in [0, blocks), vertical = blocks + v.
// Each street carries two directional CA lanes.
class ManhattanGrid {
 public:
  ManhattanGrid(double area_km2, double block_m, double cell_len_m) {
    if (area_km2 <= 0) throw std::invalid_argument("area_km2 must be > 0");
    if (block_m <= 0) throw std::invalid_argument("block_size_m must be > 0");
    if (cell_len_m <= 0) throw std::invalid_argument("cell_len_m must be > 0");
    const double side = std::sqrt(area_km2) * 1000.0;
    blocks_ = std::max(1, static_cast<int>(std::lround(side / block_m)));
    block_m_ = block_m;
    cells_per_block_ = std::max(1, static_cast<int>(std::lround(block_m / cell_len_m)));
    cell_len_m_ = block_m / cells_per_block_;
    cells_ = blocks_ * cells_per_block_;
  }

  int blocks() const { return blocks_; }
  double block_m() const { return block_m_; }
  double side_m() const { return blocks_ * block_m_; }
  double cell_len_m() const { return cell_len_m_; }
  int cells_per_street() const { return cells_; }
  int streets() const { return 2 * blocks_; }
  int lane_count() const { return 2 * streets(); }
  double total_street_len_m() const { return streets() * side_m(); }
  int capacity_cells() const { return lane_count() * cells_; }

  bool is_vertical_street(int street) const { return street >= blocks_; }
  double street_coord(int street) const {
    return (is_vertical_street(street) ? street - blocks_ : street) * block_m_;
  }
  bool is_intersection_cell(int cell) const { return cell % cells_per_block_ == 0; }
  int crossing_line(int cell) const { return cell / cells_per_block_; }
  int cell_of_line(int line) const { return line * cells_per_block_; }

  // lane = street * 2 + dir, dir 0 increases the along-street coordinate
  static int lane_of(int street, int dir) { return street * 2 + dir; }
  static int street_of_lane(int lane) { return lane / 2; }
  static int dir_of_lane(int lane) { return lane & 1; }

  Vec2 position(int street, int cell) const {
    const double along = cell * cell_len_m_;
    if (is_vertical_street(street)) return {street_coord(street), along};
    return {along, street_coord(street)};
  }

  Vec2 heading(int street, int dir) const {
    const double sign = dir == 0 ? 1.0 : -1.0;
    if (is_vertical_street(street)) return {0, sign};
    return {sign, 0};
  }

  Topology topology() const {
    Topology t;
    t.kind = ScenarioKind::urban;
    t.side_m = side_m();
    t.block_m = block_m_;
    return t;
  }

 private:
  int blocks_ = 1;
  double block_m_ = 125;
  int cells_per_block_ = 25;
  double cell_len_m_ = 5;
  int cells_ = 25;
};

namespace detail {

inline void validate(const UrbanConfig& cfg) {
  if (cfg.area_km2 <= 0) throw std::invalid_argument("area_km2 must be > 0");
  if (cfg.density_veh_km2 < 0) throw std::invalid_argument("density must be >= 0");
  if (cfg.block_size_m <= 0) throw std::invalid_argument("block_size_m must be > 0");
  if (cfg.ca.cell_len_m <= 0 || cfg.ca.step_s <= 0) throw std::invalid_argument("bad CA params");
  if (cfg.ca.v_max_cells < 1) throw std::invalid_argument("v_max_cells must be >= 1");
  if (cfg.ca.slowdown_prob < 0 || cfg.ca.slowdown_prob > 1)
    throw std::invalid_argument("slowdown_prob must be in [0,1]");
  if (cfg.warmup_s < 0) throw std::invalid_argument("warmup_s must be >= 0");
}

inline void validate(const HighwayConfig& cfg) {
  if (cfg.length_km <= 0) throw std::invalid_argument("length_km must be > 0");
  if (cfg.density_veh_km < 0) throw std::invalid_argument("density must be >= 0");
  if (cfg.lanes < 1) throw std::invalid_argument("lanes must be >= 1");
}

}  // namespace detail

// Nagel-Schreckenberg traffic state on a ManhattanGrid. Lanes are
// independent rings; a vehicle that lands on a street crossing picks its
// next direction uniformly among straight-through and the two directions
// of the crossing street (turn skipped if the target cell is taken).
class CaState {
 public:
  struct Car {
    int lane = 0;
    int cell = 0;
    int v = 0;
  };

  CaState(ManhattanGrid grid, CaParams params) : grid_(grid), params_(params) {}

  static CaState place_random(const ManhattanGrid& grid, const CaParams& params, int count,
                              Rng& rng) {
    if (count > grid.capacity_cells())
      throw std::invalid_argument("vehicle count exceeds CA cell capacity");
    CaState st(grid, params);
    // partial Fisher-Yates over the flat (lane, cell) space
    std::vector<int> slots(static_cast<std::size_t>(grid.capacity_cells()));
    for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = static_cast<int>(i);
    st.cars_.reserve(count);
    for (int i = 0; i < count; ++i) {
      const int j = rng.uniform_int(i, static_cast<int>(slots.size()) - 1);
      std::swap(slots[i], slots[j]);
      Car c;
      c.lane = slots[i] / grid.cells_per_street();
      c.cell = slots[i] % grid.cells_per_street();
      c.v = rng.uniform_int(0, params.v_max_cells);
      st.cars_.push_back(c);
    }
    return st;
  }

  static CaState from_snapshot(const Snapshot& snap, const UrbanConfig& cfg) {
    ManhattanGrid grid(cfg.area_km2, cfg.block_size_m, cfg.ca.cell_len_m);
    CaState st(grid, cfg.ca);
    st.cars_.reserve(snap.vehicles.size());
    for (const auto& veh : snap.vehicles) {
      Car c;
      const bool vertical = grid.is_vertical_street(veh.street);
      const double along = vertical ? veh.pos.y : veh.pos.x;
      const double cell_f = along / grid.cell_len_m();
      c.cell = static_cast<int>(std::lround(cell_f));
      const double axis = vertical ? veh.heading.y : veh.heading.x;
      if (std::abs(std::abs(axis) - 1.0) > 1e-9 || std::abs(cell_f - c.cell) > 1e-6)
        throw std::invalid_argument("snapshot was not produced by the CA generator");
      const int dir = axis > 0 ? 0 : 1;
      c.lane = ManhattanGrid::lane_of(veh.street, dir);
      c.v = static_cast<int>(std::lround(veh.speed_mps * cfg.ca.step_s / grid.cell_len_m()));
      st.cars_.push_back(c);
    }
    return st;
  }

  const ManhattanGrid& grid() const { return grid_; }
  int count() const { return static_cast<int>(cars_.size()); }
  const std::vector<Car>& cars() const { return cars_; }

  void step(Rng& rng) {
    const int cells = grid_.cells_per_street();
    // occupancy: per lane, sorted cells
    std::vector<std::vector<int>> occ(static_cast<std::size_t>(grid_.lane_count()));
    for (const auto& c : cars_) occ[c.lane].push_back(c.cell);
    for (auto& lane : occ) std::sort(lane.begin(), lane.end());

    // speed update against old positions, then synchronous move
    for (auto& c : cars_) {
      const auto& lane = occ[c.lane];
      int gap = cells - 1;  // alone on the ring
      if (lane.size() > 1) {
        if (ManhattanGrid::dir_of_lane(c.lane) == 0) {
          auto it = std::upper_bound(lane.begin(), lane.end(), c.cell);
          const int next = it == lane.end() ? lane.front() : *it;
          gap = (next - c.cell - 1 + cells) % cells;
        } else {
          auto it = std::lower_bound(lane.begin(), lane.end(), c.cell);
          const int prev = it == lane.begin() ? lane.back() : *(it - 1);
          gap = (c.cell - prev - 1 + cells) % cells;
        }
      }
      c.v = std::min(c.v + 1, params_.v_max_cells);
      c.v = std::min(c.v, gap);
      if (rng.bernoulli(params_.slowdown_prob)) c.v = std::max(c.v - 1, 0);
      const int delta = ManhattanGrid::dir_of_lane(c.lane) == 0 ? c.v : -c.v;
      c.cell = ((c.cell + delta) % cells + cells) % cells;
    }

    // turning at crossings, resolved sequentially in id order
    std::vector<std::vector<int>> now(static_cast<std::size_t>(grid_.lane_count()));
    for (const auto& c : cars_) now[c.lane].push_back(c.cell);
    for (auto& lane : now) std::sort(lane.begin(), lane.end());
    auto occupied = [&](int lane, int cell) {
      const auto& v = now[lane];
      return std::binary_search(v.begin(), v.end(), cell);
    };
    auto erase_cell = [&](int lane, int cell) {
      auto& v = now[lane];
      v.erase(std::lower_bound(v.begin(), v.end(), cell));
    };
    auto insert_cell = [&](int lane, int cell) {
      auto& v = now[lane];
      v.insert(std::upper_bound(v.begin(), v.end(), cell), cell);
    };
    for (auto& c : cars_) {
      if (!grid_.is_intersection_cell(c.cell)) continue;
      const int choice = rng.uniform_int(0, 2);  // 0 straight, 1/2 cross street
      if (choice == 0) continue;
      const int street = ManhattanGrid::street_of_lane(c.lane);
      const int my_line = grid_.is_vertical_street(street) ? street - grid_.blocks() : street;
      const int cross_line = grid_.crossing_line(c.cell);
      const int cross_street =
          grid_.is_vertical_street(street) ? cross_line : grid_.blocks() + cross_line;
      const int new_lane = ManhattanGrid::lane_of(cross_street, choice - 1);
      const int new_cell = grid_.cell_of_line(my_line);
      if (new_lane == c.lane || occupied(new_lane, new_cell)) continue;
      erase_cell(c.lane, c.cell);
      insert_cell(new_lane, new_cell);
      c.lane = new_lane;
      c.cell = new_cell;
    }
  }

  Snapshot snapshot(double time_s, double density, std::uint64_t seed) const {
    Snapshot s;
    s.time_s = time_s;
    s.topology = grid_.topology();
    s.density = density;
    s.seed = seed;
    s.vehicles.reserve(cars_.size());
    for (std::size_t i = 0; i < cars_.size(); ++i) {
      const auto& c = cars_[i];
      VehicleState v;
      v.id = static_cast<int>(i);
      v.street = ManhattanGrid::street_of_lane(c.lane);
      v.pos = grid_.position(v.street, c.cell);
      v.heading = grid_.heading(v.street, ManhattanGrid::dir_of_lane(c.lane));
      v.speed_mps = c.v * grid_.cell_len_m() / params_.step_s;
      s.vehicles.push_back(v);
    }
    return s;
  }

 private:
  ManhattanGrid grid_;
  CaParams params_;
  std::vector<Car> cars_;
};

// Generates an urban snapshot. uniform_on_streets samples positions
// uniformly over the total street length (one vehicle at a time, so sweeps
// over density share a common prefix of placements for a given seed);
// ca_warmed seeds the CA at random cells and runs warmup_s of mobility.
inline Snapshot generate_urban(const UrbanConfig& cfg, std::uint64_t seed) {
  detail::validate(cfg);
  ManhattanGrid grid(cfg.area_km2, cfg.block_size_m, cfg.ca.cell_len_m);
  const int count = static_cast<int>(std::llround(cfg.density_veh_km2 * cfg.area_km2));
  Rng place(derive_seed(seed, kStreamPlacement));

  if (cfg.placement == UrbanPlacement::uniform_on_streets) {
    Snapshot s;
    s.topology = grid.topology();
    s.density = cfg.density_veh_km2;
    s.seed = seed;
    s.vehicles.reserve(count);
    for (int i = 0; i < count; ++i) {
      VehicleState v;
      v.id = i;
      v.street = place.uniform_int(0, grid.streets() - 1);
      const double along = place.uniform(0.0, grid.side_m());
      const int dir = place.uniform_int(0, 1);
      if (grid.is_vertical_street(v.street)) {
        v.pos = {grid.street_coord(v.street), along};
      } else {
        v.pos = {along, grid.street_coord(v.street)};
      }
      v.heading = grid.heading(v.street, dir);
      v.speed_mps = 0;
      s.vehicles.push_back(v);
    }
    return s;
  }

  CaState ca = CaState::place_random(grid, cfg.ca, count, place);
  Rng mob(derive_seed(seed, kStreamMobility));
  const int steps = static_cast<int>(std::llround(cfg.warmup_s / cfg.ca.step_s));
  for (int i = 0; i < steps; ++i) ca.step(mob);
  return ca.snapshot(0.0, cfg.density_veh_km2, seed);
}

// Advances a CA-generated snapshot by one Nagel-Schreckenberg step.
inline Snapshot step_urban(const Snapshot& snap, const UrbanConfig& cfg, Rng& rng) {
  detail::validate(cfg);
  CaState ca = CaState::from_snapshot(snap, cfg);
  ca.step(rng);
  Snapshot out = ca.snapshot(snap.time_s + cfg.ca.step_s, snap.density, snap.seed);
  return out;
}

// Poisson placement on a line: i.i.d. exponential spacings with mean
// 1/density, truncated at length_km.
inline Snapshot generate_highway(const HighwayConfig& cfg, std::uint64_t seed) {
  detail::validate(cfg);
  Snapshot s;
  s.topology.kind = ScenarioKind::highway;
  s.topology.length_m = cfg.length_km * 1000.0;
  s.topology.lanes = cfg.lanes;
  s.density = cfg.density_veh_km;
  s.seed = seed;
  if (cfg.density_veh_km <= 0) return s;

  Rng place(derive_seed(seed, kStreamPlacement));
  const double mean_spacing_m = 1000.0 / cfg.density_veh_km;
  double x = 0;
  int id = 0;
  for (;;) {
    x += place.exponential(mean_spacing_m);
    if (x > s.topology.length_m) break;
    VehicleState v;
    v.id = id++;
    v.pos = {x, 0};  // lanes collapse onto one line; offsets are << radio range
    v.street = cfg.lanes > 1 ? place.uniform_int(0, cfg.lanes - 1) : 0;
    v.heading = {1, 0};
    v.speed_mps = 0;
    s.vehicles.push_back(v);
  }
  return s;
}

}  // namespace vanet
