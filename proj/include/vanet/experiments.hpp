#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vanet/analytic.hpp"
#include "vanet/fitting.hpp"
#include "vanet/graph_metrics.hpp"
#include "vanet/sim.hpp"

namespace vanet {

// A named sweep: densities x scales (areas in km^2 or lengths in km), fully
// determined by base_seed.
struct ExperimentPreset {
  std::string name;
  std::vector<double> densities;
  std::vector<double> scales;
  int seeds = 10;
  std::uint64_t base_seed = 1;
  UrbanPlacement mode = UrbanPlacement::uniform_on_streets;
  // simulation presets
  std::vector<Mechanism> mechanisms;
  int runs = 10;
  double warmup_s = 900;
  double collect_s = 120;
  double roi_side_m = 1000;
};

inline ExperimentPreset make_preset(const std::string& name) {
  ExperimentPreset p;
  p.name = name;
  if (name == "urban-degree") {
    p.densities = {10, 60, 80};
    p.scales = {4};
  } else if (name == "highway-degree") {
    p.densities = {3.9, 26.0, 44.9};
    p.scales = {25};
  } else if (name == "urban-aspl") {
    p.densities = {10, 60, 80};
    p.scales = {0.25, 1, 2.25, 4, 6.25, 9, 12.25, 16};
  } else if (name == "highway-aspl") {
    p.densities = {3.9, 26.0, 44.9};
    p.scales = {5, 10, 15, 20, 25, 30, 35};
  } else if (name == "urban-clustering") {
    p.densities = {10, 60, 80};
    p.scales = {0.25, 1, 2.25, 4};
  } else if (name == "highway-clustering") {
    p.densities = {3.9, 26.0, 44.9};
    p.scales = {5, 10, 15, 20, 25, 30, 35};
  } else if (name == "urban-connectivity") {
    p.densities = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
    p.scales = {4};
  } else if (name == "highway-connectivity") {
    p.densities = {3.9, 26.0, 44.9};
    p.scales = {5, 15, 25, 35};
  } else if (name == "uvcast") {
    p.densities = {20, 40, 60, 80, 100};
    p.mechanisms = {Mechanism::baseline, Mechanism::p_only, Mechanism::s_only,
                    Mechanism::p_and_s, Mechanism::flooding_oracle};
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return p;
}

// "10,60,80" or "lo..hi" (default_step apart); values may be fractional.
inline std::vector<double> parse_sweep(const std::string& text, double default_step) {
  std::vector<double> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const double lo = std::stod(text.substr(0, dots));
    std::string rest = text.substr(dots + 2);
    double step = default_step;
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      step = std::stod(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const double hi = std::stod(rest);
    if (step <= 0 || hi < lo) throw std::invalid_argument("bad sweep: " + text);
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(std::stod(text.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty sweep");
  return out;
}

// Flat key=value preset file; later flags win over these.
inline std::map<std::string, std::string> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  return (std::filesystem::path(dir) / name).string();
}

template <typename Fn>
inline void parallel_for(int count, Fn&& fn) {
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(std::max(count, 1)));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct MeanSd {
  double mean = 0;
  double sd = 0;
  int n = 0;
};

inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd r;
  for (double x : xs)
    if (std::isfinite(x)) {
      r.mean += x;
      ++r.n;
    }
  if (r.n == 0) return r;
  r.mean /= r.n;
  double var = 0;
  for (double x : xs)
    if (std::isfinite(x)) var += (x - r.mean) * (x - r.mean);
  r.sd = r.n > 1 ? std::sqrt(var / (r.n - 1)) : 0.0;
  return r;
}

inline std::string metric_csv_row(const char* scenario, double density, const MetricReport& r,
                                  std::uint64_t seed) {
  std::string out = scenario;
  out += ',' + fmt_g(density);
  out += ',' + fmt_g(r.scale_param);
  out += ',' + std::to_string(r.n);
  out += ',' + fmt_g(r.aspl);
  out += ',' + fmt_g(r.clustering_network);
  out += ',' + fmt_g(r.clustering_node_avg);
  out += ',' + fmt_g(r.connectivity);
  out += ',' + std::to_string(r.component_count);
  out += ',' + std::to_string(seed);
  return out;
}

}  // namespace detail

inline Snapshot analysis_snapshot(bool urban, double density, double scale, UrbanPlacement mode,
                                  std::uint64_t seed) {
  if (urban) {
    UrbanConfig cfg;
    cfg.area_km2 = scale;
    cfg.density_veh_km2 = density;
    cfg.placement = mode;
    return generate_urban(cfg, seed);
  }
  HighwayConfig cfg;
  cfg.length_km = scale;
  cfg.density_veh_km = density;
  return generate_highway(cfg, seed);
}

// Runs an analysis preset end to end and writes its CSVs under out_dir.
inline int cmd_analyze(const ExperimentPreset& preset, const std::string& out_dir) {
  const bool urban = preset.name.rfind("urban", 0) == 0;
  const auto dash = preset.name.find('-');
  if (dash == std::string::npos) throw std::invalid_argument("unknown preset: " + preset.name);
  const std::string kind = preset.name.substr(dash + 1);
  const char* scenario = urban ? "urban" : "highway";
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  struct Point {
    double density = 0;
    double scale = 0;
    std::vector<MetricReport> reports;
    DegreeHistogram hist;
  };
  std::vector<Point> points;
  for (double d : preset.densities)
    for (double s : preset.scales) points.push_back({d, s, {}, {}});

  const RangeModel range;
  detail::parallel_for(static_cast<int>(points.size()), [&](int idx) {
    Point& pt = points[static_cast<std::size_t>(idx)];
    for (int i = 0; i < preset.seeds; ++i) {
      const std::uint64_t seed = preset.base_seed + static_cast<std::uint64_t>(i);
      const Snapshot snap = analysis_snapshot(urban, pt.density, pt.scale, preset.mode, seed);
      const CommGraph g = build_graph(snap, range);
      pt.reports.push_back(compute_metrics(g, pt.scale));
      if (kind == "degree" && g.n() > 0) {
        for (int v = 0; v < g.n(); ++v) ++pt.hist.counts[g.degree(v)];
        pt.hist.n += g.n();
      }
    }
    if (kind == "degree" && pt.hist.n > 0) {
      for (const auto& [k, c] : pt.hist.counts)
        pt.hist.probs[k] = static_cast<double>(c) / pt.hist.n;
    }
  });

  std::string metrics = "scenario,density,scale_param,n,aspl,clust_trans,clust_node_avg,"
                        "connectivity,components,seed\n";
  for (const auto& pt : points)
    for (std::size_t i = 0; i < pt.reports.size(); ++i)
      metrics += detail::metric_csv_row(scenario, pt.density, pt.reports[i],
                                        preset.base_seed + i) + '\n';
  detail::write_file(detail::join_path(out_dir, "metrics_" + preset.name + ".csv"), metrics);

  if (kind == "degree") {
    std::string dist = "scenario,density,k,p_k\n";
    std::string fits = "scenario,density,model,a,b_or_gamma,c,r_square,sse,converged\n";
    std::string verdicts = "scenario,density,gaussian_r2,powerlaw_r2,scale_free\n";
    for (const auto& pt : points) {
      for (const auto& [k, p] : pt.hist.probs)
        dist += std::string(scenario) + ',' + detail::fmt_g(pt.density) + ',' +
                std::to_string(k) + ',' + detail::fmt_g(p) + '\n';
      const FitResult gauss = fit_gaussian(pt.hist);
      fits += std::string(scenario) + ',' + detail::fmt_g(pt.density) + ',' +
              fit_csv_row(gauss) + '\n';
      FitResult pl;
      bool have_pl = true;
      try {
        pl = fit_powerlaw(pt.hist);
        fits += std::string(scenario) + ',' + detail::fmt_g(pt.density) + ',' +
                fit_csv_row(pl) + '\n';
      } catch (const std::invalid_argument&) {
        have_pl = false;
      }
      const bool scale_free = have_pl && pl.r_square > gauss.r_square;
      verdicts += std::string(scenario) + ',' + detail::fmt_g(pt.density) + ',' +
                  detail::fmt_g(gauss.r_square) + ',' +
                  (have_pl ? detail::fmt_g(pl.r_square) : std::string("nan")) + ',' +
                  (scale_free ? '1' : '0') + '\n';
    }
    detail::write_file(detail::join_path(out_dir, "degree_dist_" + std::string(scenario) + ".csv"),
                       dist);
    detail::write_file(detail::join_path(out_dir, "degree_fits_" + std::string(scenario) + ".csv"),
                       fits);
    detail::write_file(detail::join_path(out_dir, "scalefree_" + std::string(scenario) + ".csv"),
                       verdicts);
    return 0;
  }

  if (kind == "aspl") {
    std::string rows = "scenario,density,scale,n_mean,aspl_mean,aspl_sd,seeds_used\n";
    std::string fits = "scenario,density,model,a,b_or_gamma,c,r_square,sse,converged\n";
    std::string verdicts = "scenario,density,log_r2,power_r2,small_world_indicated\n";
    for (double density : preset.densities) {
      XYSeries series;
      for (const auto& pt : points) {
        if (pt.density != density) continue;
        std::vector<double> aspls, ns;
        for (const auto& r : pt.reports) {
          aspls.push_back(r.aspl);
          ns.push_back(static_cast<double>(r.n));
        }
        const auto ms = detail::mean_sd(aspls);
        const auto nstat = detail::mean_sd(ns);
        rows += std::string(scenario) + ',' + detail::fmt_g(density) + ',' +
                detail::fmt_g(pt.scale) + ',' + detail::fmt_g(nstat.mean) + ',' +
                detail::fmt_g(ms.mean) + ',' + detail::fmt_g(ms.sd) + ',' +
                std::to_string(ms.n) + '\n';
        if (ms.n > 0) {
          series.xs.push_back(pt.scale);
          series.ys.push_back(ms.mean);
        }
      }
      if (series.xs.size() >= 3) {
        const FitResult pow_fit = fit_power(series);
        const FitResult log_fit = fit_log(series);
        fits += std::string(scenario) + ',' + detail::fmt_g(density) + ',' +
                fit_csv_row(pow_fit) + '\n';
        fits += std::string(scenario) + ',' + detail::fmt_g(density) + ',' +
                fit_csv_row(log_fit) + '\n';
        verdicts += std::string(scenario) + ',' + detail::fmt_g(density) + ',' +
                    detail::fmt_g(log_fit.r_square) + ',' + detail::fmt_g(pow_fit.r_square) +
                    ',' + (log_fit.r_square >= pow_fit.r_square ? '1' : '0') + '\n';
      }
    }
    detail::write_file(detail::join_path(out_dir, "aspl_" + std::string(scenario) + ".csv"), rows);
    detail::write_file(detail::join_path(out_dir, "aspl_fits_" + std::string(scenario) + ".csv"),
                       fits);
    detail::write_file(detail::join_path(out_dir, "smallworld_" + std::string(scenario) + ".csv"),
                       verdicts);
    return 0;
  }

  if (kind == "clustering") {
    std::string rows =
        "scenario,density,scale,clust_trans_mean,clust_trans_sd,clust_node_avg_mean,seeds_used\n";
    for (const auto& pt : points) {
      std::vector<double> trans, node_avg;
      for (const auto& r : pt.reports) {
        trans.push_back(r.clustering_network);
        node_avg.push_back(r.clustering_node_avg);
      }
      const auto t = detail::mean_sd(trans);
      const auto a = detail::mean_sd(node_avg);
      rows += std::string(scenario) + ',' + detail::fmt_g(pt.density) + ',' +
              detail::fmt_g(pt.scale) + ',' + detail::fmt_g(t.mean) + ',' + detail::fmt_g(t.sd) +
              ',' + detail::fmt_g(a.mean) + ',' + std::to_string(t.n) + '\n';
    }
    detail::write_file(detail::join_path(out_dir, "clustering_" + std::string(scenario) + ".csv"),
                       rows);
    return 0;
  }

  if (kind == "connectivity") {
    std::string rows =
        "scenario,density,scale,connectivity_mean,connectivity_sd,components_mean,seeds_used\n";
    for (const auto& pt : points) {
      std::vector<double> conn, comps;
      for (const auto& r : pt.reports) {
        conn.push_back(r.connectivity);
        comps.push_back(static_cast<double>(r.component_count));
      }
      const auto c = detail::mean_sd(conn);
      const auto k = detail::mean_sd(comps);
      rows += std::string(scenario) + ',' + detail::fmt_g(pt.density) + ',' +
              detail::fmt_g(pt.scale) + ',' + detail::fmt_g(c.mean) + ',' + detail::fmt_g(c.sd) +
              ',' + detail::fmt_g(k.mean) + ',' + std::to_string(c.n) + '\n';
    }
    detail::write_file(detail::join_path(out_dir, "connectivity_" + std::string(scenario) + ".csv"),
                       rows);
    return 0;
  }

  throw std::invalid_argument("unknown preset: " + preset.name);
}

// The simulation SimConfig for one density under a preset: the map extends
// one block beyond the ROI on every side.
inline SimConfig sim_config_for(const ExperimentPreset& preset, double density) {
  SimConfig cfg;
  const double side_m = preset.roi_side_m + 2 * cfg.scenario.block_size_m;
  cfg.scenario.area_km2 = (side_m / 1000.0) * (side_m / 1000.0);
  cfg.scenario.density_veh_km2 = density;
  cfg.scenario.placement = UrbanPlacement::ca_warmed;
  cfg.protocol.roi.side_m = preset.roi_side_m;
  cfg.warmup_s = preset.warmup_s;
  cfg.collect_s = preset.collect_s;
  cfg.runs = preset.runs;
  cfg.base_seed = preset.base_seed;
  return cfg;
}

// Runs the mechanism grid over the density sweep; writes per-run rows, the
// aggregate table, and the overhead-change summary against the baseline.
inline int cmd_simulate(const ExperimentPreset& preset, const std::string& out_dir) {
  if (preset.mechanisms.empty()) throw std::invalid_argument("preset has no mechanisms");
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  std::string results = "density,mechanism,run,reachability,avg_recv_dist_m,avg_msgs_rx,avg_msgs_tx\n";
  std::string aggregate =
      "density,mechanism,runs,discarded,reachability_mean,reachability_sd,avg_recv_dist_m_mean,"
      "avg_recv_dist_m_sd,avg_msgs_rx_mean,avg_msgs_rx_sd,avg_msgs_tx_mean,avg_msgs_tx_sd\n";
  std::string summary = "density,mechanism,tx_change_vs_baseline_pct,reachability_delta_pts\n";

  for (double density : preset.densities) {
    const SimConfig cfg = sim_config_for(preset, density);
    std::map<std::string, SimMetrics> by_mech;
    for (Mechanism mech : preset.mechanisms) {
      const SimMetrics m = run_simulation(cfg, mech);
      by_mech[mechanism_name(mech)] = m;
      for (std::size_t i = 0; i < m.per_run.size(); ++i) {
        const auto& r = m.per_run[i];
        if (r.discarded) continue;
        results += detail::fmt_g(density) + ',' + mechanism_name(mech) + ',' +
                   std::to_string(i) + ',' + detail::fmt_g(r.reachability) + ',' +
                   detail::fmt_g(r.avg_received_distance_m) + ',' +
                   detail::fmt_g(r.avg_msgs_received) + ',' +
                   detail::fmt_g(r.avg_msgs_transmitted) + '\n';
      }
      aggregate += detail::fmt_g(density) + ',' + mechanism_name(mech) + ',' +
                   std::to_string(m.per_run.size()) + ',' + std::to_string(m.discarded_runs) +
                   ',' + detail::fmt_g(m.reachability) + ',' + detail::fmt_g(m.sd_reachability) +
                   ',' + detail::fmt_g(m.avg_received_distance_m) + ',' +
                   detail::fmt_g(m.sd_avg_received_distance_m) + ',' +
                   detail::fmt_g(m.avg_msgs_received) + ',' +
                   detail::fmt_g(m.sd_avg_msgs_received) + ',' +
                   detail::fmt_g(m.avg_msgs_transmitted) + ',' +
                   detail::fmt_g(m.sd_avg_msgs_transmitted) + '\n';
    }
    const auto base = by_mech.find("baseline");
    if (base != by_mech.end() && base->second.avg_msgs_transmitted > 0) {
      for (const auto& [name, m] : by_mech) {
        if (name == "baseline") continue;
        const double tx_change = 100.0 * (m.avg_msgs_transmitted -
                                          base->second.avg_msgs_transmitted) /
                                 base->second.avg_msgs_transmitted;
        const double reach_delta = 100.0 * (m.reachability - base->second.reachability);
        summary += detail::fmt_g(density) + ',' + name + ',' + detail::fmt_g(tx_change) + ',' +
                   detail::fmt_g(reach_delta) + '\n';
      }
    }
  }
  detail::write_file(detail::join_path(out_dir, "results.csv"), results);
  detail::write_file(detail::join_path(out_dir, "aggregate.csv"), aggregate);
  detail::write_file(detail::join_path(out_dir, "summary.csv"), summary);
  return 0;
}

// Prints the clustering theory values with their cross-checks; nonzero exit
// on a tolerance breach. mc_samples = 0 skips the Monte-Carlo side.
inline int cmd_oracle(double mc_samples, std::uint64_t seed, std::string* out_text = nullptr) {
  std::string out;
  bool ok = true;
  const double q2 = clustering_2d();
  const double q1 = clustering_1d();
  const double q1q = clustering_1d_quadrature();

  const bool ok2 = std::abs(q2 - 0.5865) <= 5e-4;
  out += "clustering_2d quadrature = " + detail::fmt_g(q2) + " (expected 0.5865 +- 0.0005): " +
         (ok2 ? "PASS" : "FAIL") + '\n';
  const bool ok1 = std::abs(q1 - 0.75) <= 1e-12 && std::abs(q1q - q1) <= 1e-12;
  out += "clustering_1d = " + detail::fmt_g(q1) + ", quadrature cross-check = " +
         detail::fmt_g(q1q) + " (expected 0.75): " + (ok1 ? "PASS" : "FAIL") + '\n';
  ok = ok && ok2 && ok1;

  const long samples = static_cast<long>(mc_samples);
  if (samples > 0) {
    Rng rng2(derive_seed(seed, 0x6d633264));
    Rng rng1(derive_seed(seed, 0x6d633164));
    const double mc2 = mc_clustering_2d(samples, rng2);
    const double mc1 = mc_clustering_1d(samples, rng1);
    const double sigma2 = std::sqrt(q2 * (1 - q2) / static_cast<double>(samples));
    const double sigma1 = std::sqrt(q1 * (1 - q1) / static_cast<double>(samples));
    const bool okmc2 = std::abs(mc2 - q2) <= 3 * sigma2;
    const bool okmc1 = std::abs(mc1 - q1) <= 3 * sigma1;
    out += "monte-carlo 2d = " + detail::fmt_g(mc2) + " (" + std::to_string(samples) +
           " samples, 3-sigma band " + detail::fmt_g(3 * sigma2) + "): " +
           (okmc2 ? "PASS" : "FAIL") + '\n';
    out += "monte-carlo 1d = " + detail::fmt_g(mc1) + " (" + std::to_string(samples) +
           " samples, 3-sigma band " + detail::fmt_g(3 * sigma1) + "): " +
           (okmc1 ? "PASS" : "FAIL") + '\n';
    ok = ok && okmc2 && okmc1;
  }
  if (out_text) {
    *out_text = out;
  } else {
    std::fputs(out.c_str(), stdout);
  }
  return ok ? 0 : 1;
}

}  // namespace vanet
