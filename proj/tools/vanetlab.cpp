#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "vanet/experiments.hpp"

namespace {

void apply_config(vanet::ExperimentPreset& preset, const std::string& path) {
  const auto kv = vanet::load_config(path);
  if (auto it = kv.find("densities"); it != kv.end())
    preset.densities = vanet::parse_sweep(it->second, 10);
  if (auto it = kv.find("areas"); it != kv.end()) preset.scales = vanet::parse_sweep(it->second, 1);
  if (auto it = kv.find("lengths"); it != kv.end())
    preset.scales = vanet::parse_sweep(it->second, 5);
  if (auto it = kv.find("seeds"); it != kv.end()) preset.seeds = std::stoi(it->second);
  if (auto it = kv.find("seed"); it != kv.end()) preset.base_seed = std::stoull(it->second);
  if (auto it = kv.find("runs"); it != kv.end()) preset.runs = std::stoi(it->second);
  if (auto it = kv.find("warmup_s"); it != kv.end()) preset.warmup_s = std::stod(it->second);
  if (auto it = kv.find("collect_s"); it != kv.end()) preset.collect_s = std::stod(it->second);
  if (auto it = kv.find("roi_side_m"); it != kv.end()) preset.roi_side_m = std::stod(it->second);
  if (auto it = kv.find("mode"); it != kv.end())
    preset.mode = it->second == "ca" ? vanet::UrbanPlacement::ca_warmed
                                     : vanet::UrbanPlacement::uniform_on_streets;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"VANET network analysis and UV-CAST broadcast simulation toolkit"};
  app.require_subcommand(1);

  // ---- gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "Generate a vehicle snapshot (CSV + sidecar config)");
  std::string gen_scenario = "urban";
  std::string gen_mode = "uniform";
  std::string gen_out = "snapshot";
  double gen_density = 60, gen_area = 1, gen_length = 25;
  std::uint64_t gen_seed = 1;
  gen->add_option("--scenario", gen_scenario, "urban|highway")
      ->check(CLI::IsMember({"urban", "highway"}));
  gen->add_option("--density", gen_density, "veh/km^2 (urban) or veh/km (highway)");
  gen->add_option("--area", gen_area, "urban map area, km^2");
  gen->add_option("--length", gen_length, "highway length, km");
  gen->add_option("--mode", gen_mode, "urban placement: uniform|ca")
      ->check(CLI::IsMember({"uniform", "ca"}));
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--out", gen_out, "output path prefix");

  // ---- analyze ------------------------------------------------------------
  auto* an = app.add_subcommand("analyze", "Run an analysis preset sweep and write CSVs");
  std::string an_preset;
  std::string an_densities, an_scales_area, an_scales_len, an_mode, an_config;
  std::string an_out = ".";
  int an_seeds = -1;
  std::uint64_t an_seed = 0;
  an->add_option("preset", an_preset,
                 "urban-degree|highway-degree|urban-aspl|highway-aspl|urban-clustering|"
                 "highway-clustering|urban-connectivity|highway-connectivity")
      ->required();
  an->add_option("--densities", an_densities, "comma list or lo..hi[:step] (default step 10)");
  an->add_option("--areas,--area", an_scales_area, "urban areas in km^2, comma list or range");
  an->add_option("--lengths,--length", an_scales_len, "highway lengths in km (default step 5)");
  an->add_option("--seeds", an_seeds, "snapshots per sweep point");
  auto* an_seed_opt = an->add_option("--seed", an_seed, "base RNG seed");
  an->add_option("--mode", an_mode, "urban placement: uniform|ca")
      ->check(CLI::IsMember({"uniform", "ca", ""}));
  an->add_option("--out", an_out, "output directory");
  an->add_option("--config", an_config, "key=value preset file (flags win)");

  // ---- simulate -----------------------------------------------------------
  auto* si = app.add_subcommand("simulate", "Run the UV-CAST mechanism grid over a density sweep");
  std::string si_preset = "uvcast";
  std::string si_densities, si_mechanism = "all", si_config;
  std::string si_out = ".";
  int si_runs = -1;
  double si_warmup = -1, si_collect = -1, si_roi = -1;
  std::uint64_t si_seed = 0;
  si->add_option("preset", si_preset, "uvcast");
  si->add_option("--densities", si_densities, "comma list or lo..hi[:step]");
  si->add_option("--runs", si_runs, "seeded runs per (density, mechanism)");
  auto* si_seed_opt = si->add_option("--seed", si_seed, "base RNG seed");
  si->add_option("--mechanism", si_mechanism, "baseline|p|s|ps|oracle|all")
      ->check(CLI::IsMember({"baseline", "p", "s", "ps", "oracle", "all"}));
  si->add_option("--warmup", si_warmup, "mobility warm-up, s");
  si->add_option("--collect", si_collect, "collection window after first broadcast, s");
  si->add_option("--roi", si_roi, "region-of-interest side, m");
  si->add_option("--out", si_out, "output directory");
  si->add_option("--config", si_config, "key=value preset file (flags win)");

  // ---- oracle ---------------------------------------------------------------
  auto* orc = app.add_subcommand("oracle", "Print clustering theory values and cross-checks");
  double orc_samples = 1e6;
  std::uint64_t orc_seed = 1;
  orc->add_option("--mc-samples", orc_samples, "Monte-Carlo samples (0 = quadrature only)");
  orc->add_option("--seed", orc_seed, "RNG seed for the Monte-Carlo side");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      vanet::Snapshot snap;
      if (gen_scenario == "urban") {
        vanet::UrbanConfig cfg;
        cfg.area_km2 = gen_area;
        cfg.density_veh_km2 = gen_density;
        cfg.placement = gen_mode == "ca" ? vanet::UrbanPlacement::ca_warmed
                                         : vanet::UrbanPlacement::uniform_on_streets;
        snap = vanet::generate_urban(cfg, gen_seed);
      } else {
        vanet::HighwayConfig cfg;
        cfg.length_km = gen_length;
        cfg.density_veh_km = gen_density;
        snap = vanet::generate_highway(cfg, gen_seed);
      }
      vanet::save_snapshot(snap, gen_out);
      std::printf("wrote %s.csv and %s.cfg (%zu vehicles)\n", gen_out.c_str(), gen_out.c_str(),
                  snap.vehicles.size());
      return 0;
    }

    if (an->parsed()) {
      vanet::ExperimentPreset preset = vanet::make_preset(an_preset);
      if (!an_config.empty()) apply_config(preset, an_config);
      if (!an_densities.empty()) preset.densities = vanet::parse_sweep(an_densities, 10);
      if (!an_scales_area.empty()) preset.scales = vanet::parse_sweep(an_scales_area, 1);
      if (!an_scales_len.empty()) preset.scales = vanet::parse_sweep(an_scales_len, 5);
      if (an_seeds > 0) preset.seeds = an_seeds;
      if (an_seed_opt->count() > 0) preset.base_seed = an_seed;
      if (!an_mode.empty())
        preset.mode = an_mode == "ca" ? vanet::UrbanPlacement::ca_warmed
                                      : vanet::UrbanPlacement::uniform_on_streets;
      return vanet::cmd_analyze(preset, an_out);
    }

    if (si->parsed()) {
      vanet::ExperimentPreset preset = vanet::make_preset(si_preset);
      if (!si_config.empty()) apply_config(preset, si_config);
      if (!si_densities.empty()) preset.densities = vanet::parse_sweep(si_densities, 10);
      if (si_runs > 0) preset.runs = si_runs;
      if (si_seed_opt->count() > 0) preset.base_seed = si_seed;
      if (si_warmup >= 0) preset.warmup_s = si_warmup;
      if (si_collect > 0) preset.collect_s = si_collect;
      if (si_roi > 0) preset.roi_side_m = si_roi;
      if (si_mechanism != "all") preset.mechanisms = {vanet::mechanism_from_name(si_mechanism)};
      return vanet::cmd_simulate(preset, si_out);
    }

    if (orc->parsed()) {
      return vanet::cmd_oracle(orc_samples, orc_seed);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
