#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vanet {

struct Vec2 {
  double x = 0;
  double y = 0;
};

inline double dist(const Vec2& a, const Vec2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class ScenarioKind { urban, highway };

// Road layout a snapshot lives on. Urban maps are square Manhattan grids
// with a street every block_m meters on both axes (wrapped as a torus for
// mobility); highways are a single line of length_m.
struct Topology {
  ScenarioKind kind = ScenarioKind::urban;
  double side_m = 0;       // urban: map side, snapped to whole blocks
  double block_m = 125.0;  // urban: block edge length
  double length_m = 0;     // highway: road length
  int lanes = 1;           // highway
};

// Distance from a coordinate to the nearest street grid line.
inline double grid_offset(double coord, double block_m) {
  return std::abs(coord - std::round(coord / block_m) * block_m);
}

// True when the position sits within tol of a street crossing (both
// coordinates on grid lines).
inline bool near_intersection(const Vec2& p, const Topology& topo, double tol) {
  if (topo.kind != ScenarioKind::urban) return false;
  return grid_offset(p.x, topo.block_m) <= tol && grid_offset(p.y, topo.block_m) <= tol;
}

struct VehicleState {
  int id = 0;
  Vec2 pos;
  // urban: horizontal grid-line index, or blocks + vertical index.
  // highway: lane index.
  int street = 0;
  Vec2 heading{1, 0};  // unit direction of travel
  double speed_mps = 0;
};

struct Snapshot {
  double time_s = 0;
  Topology topology;
  double density = 0;  // veh/km^2 (urban) or veh/km (highway)
  std::uint64_t seed = 0;
  std::vector<VehicleState> vehicles;
};

namespace detail {

inline std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline double heading_deg(const Vec2& h) {
  double deg = std::atan2(h.y, h.x) * 180.0 / 3.14159265358979323846;
  if (deg < 0) deg += 360.0;
  return deg;
}

}  // namespace detail

inline std::string snapshot_csv(const Snapshot& s) {
  std::string out = "id,x_m,y_m,street,heading,speed_mps\n";
  for (const auto& v : s.vehicles) {
    out += std::to_string(v.id);
    out += ',';
    out += detail::fmt_g(v.pos.x);
    out += ',';
    out += detail::fmt_g(v.pos.y);
    out += ',';
    out += std::to_string(v.street);
    out += ',';
    out += detail::fmt_g(detail::heading_deg(v.heading));
    out += ',';
    out += detail::fmt_g(v.speed_mps);
    out += '\n';
  }
  return out;
}

// Sidecar config recording how the snapshot was generated, key=value per line.
inline std::string snapshot_sidecar(const Snapshot& s) {
  std::string out;
  out += "kind=";
  out += (s.topology.kind == ScenarioKind::urban ? "urban" : "highway");
  out += '\n';
  if (s.topology.kind == ScenarioKind::urban) {
    out += "side_m=" + detail::fmt_g(s.topology.side_m) + '\n';
    out += "block_m=" + detail::fmt_g(s.topology.block_m) + '\n';
  } else {
    out += "length_m=" + detail::fmt_g(s.topology.length_m) + '\n';
    out += "lanes=" + std::to_string(s.topology.lanes) + '\n';
  }
  out += "density=" + detail::fmt_g(s.density) + '\n';
  out += "seed=" + std::to_string(s.seed) + '\n';
  out += "time_s=" + detail::fmt_g(s.time_s) + '\n';
  return out;
}

// Writes <prefix>.csv and <prefix>.cfg.
inline void save_snapshot(const Snapshot& s, const std::string& prefix) {
  std::ofstream csv(prefix + ".csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot write " + prefix + ".csv");
  csv << snapshot_csv(s);
  std::ofstream cfg(prefix + ".cfg", std::ios::binary);
  if (!cfg) throw std::runtime_error("cannot write " + prefix + ".cfg");
  cfg << snapshot_sidecar(s);
}

inline Snapshot parse_snapshot(const std::string& csv_text, const std::string& sidecar_text) {
  Snapshot s;
  std::istringstream cfg(sidecar_text);
  std::string line;
  while (std::getline(cfg, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    if (key == "kind") {
      s.topology.kind = (val == "highway") ? ScenarioKind::highway : ScenarioKind::urban;
    } else if (key == "side_m") {
      s.topology.side_m = std::stod(val);
    } else if (key == "block_m") {
      s.topology.block_m = std::stod(val);
    } else if (key == "length_m") {
      s.topology.length_m = std::stod(val);
    } else if (key == "lanes") {
      s.topology.lanes = std::stoi(val);
    } else if (key == "density") {
      s.density = std::stod(val);
    } else if (key == "seed") {
      s.seed = std::stoull(val);
    } else if (key == "time_s") {
      s.time_s = std::stod(val);
    }
  }
  std::istringstream rows(csv_text);
  std::getline(rows, line);  // header
  while (std::getline(rows, line)) {
    if (line.empty()) continue;
    VehicleState v;
    double deg = 0;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    v.id = std::stoi(cell);
    std::getline(cells, cell, ',');
    v.pos.x = std::stod(cell);
    std::getline(cells, cell, ',');
    v.pos.y = std::stod(cell);
    std::getline(cells, cell, ',');
    v.street = std::stoi(cell);
    std::getline(cells, cell, ',');
    deg = std::stod(cell);
    std::getline(cells, cell, ',');
    v.speed_mps = std::stod(cell);
    const double rad = deg * 3.14159265358979323846 / 180.0;
    v.heading = {std::round(std::cos(rad) * 1e9) / 1e9, std::round(std::sin(rad) * 1e9) / 1e9};
    s.vehicles.push_back(v);
  }
  return s;
}

inline Snapshot load_snapshot(const std::string& prefix) {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  return parse_snapshot(slurp(prefix + ".csv"), slurp(prefix + ".cfg"));
}

}  // namespace vanet
