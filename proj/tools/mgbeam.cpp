#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mgbeam/mgbeam.hpp"

namespace fs = std::filesystem;

namespace {

int run_command(const std::string& config_path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  mgbeam::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = mgbeam::load_config(config_path);
  for (const auto& [key, value] : overrides) mgbeam::apply_setting(cfg, key, value);
  cfg.validate();

  std::optional<mgbeam::CmReport> first;
  const auto records = mgbeam::run_experiment(cfg, &first);

  const fs::path out(cfg.out);
  fs::create_directories(out);
  mgbeam::emit_table(records, out / "table.csv");
  {
    mgbeam::json all = mgbeam::json::array();
    for (const auto& r : records) all.push_back(mgbeam::to_json(r));
    std::ofstream(out / "records.json") << all.dump(2) << '\n';
  }
  if (first) mgbeam::emit_trace(*first, out / "trace.json");

  int failed = 0;
  for (const auto& r : records) {
    if (r.failed) {
      ++failed;
      std::cerr << "trial seed=" << r.seed << " snr=" << r.snr_db << " L=" << r.antennas
                << " failed: " << r.error << '\n';
    }
  }
  std::ifstream table(out / "table.csv");
  std::cout << table.rdbuf();
  return failed > 0 ? 2 : 0;
}

int generate_command(int L, int groups, int users, double snr, std::uint64_t seed,
                     const std::string& out) {
  const auto s = mgbeam::generate_rayleigh_scenario(L, groups, std::vector<int>(groups, users), snr, seed);
  std::ofstream(out) << mgbeam::to_json(s).dump(2) << '\n';
  return 0;
}

int solve_command(const std::string& scenario_path, const std::string& solver,
                  const std::string& structure, const std::string& out, std::optional<int> trace) {
  std::ifstream in(scenario_path);
  if (!in) throw mgbeam::DimensionError("cannot open scenario " + scenario_path);
  const auto s = mgbeam::scenario_from_json(mgbeam::json::parse(in));
  mgbeam::ExperimentConfig cfg;
  cfg.solver = mgbeam::parse_solver_kind(solver);
  cfg.structure = mgbeam::parse_structure_kind(structure);
  cfg.trace = trace;
  const auto basis = mgbeam::build_basis(s, cfg.structure);
  const auto rep = mgbeam::solve_scenario(s, basis, cfg);
  mgbeam::json j = mgbeam::to_json(rep);
  j["wsr_bits"] = mgbeam::wsr(s, rep.beamformer.W, false);
  j["trace"] = mgbeam::trace_json(rep);
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream(out) << j.dump(2) << '\n';
  }
  std::cerr << "wsr_bits=" << j["wsr_bits"].get<double>() << " outer=" << rep.outer_iterations()
            << " stop=" << mgbeam::to_string(rep.stop) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-group multicast beamforming: cyclic maximization solvers and benchmarks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment");
  std::string config_path;
  run->add_option("--config", config_path, "TOML-style key = value file");
  std::vector<std::pair<std::string, std::string>> overrides;
  auto add_override = [&](const std::string& flag, const std::string& key, const std::string& help) {
    run->add_option_function<std::string>(
        flag, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  };
  add_override("--snr", "snr_db", "SNR sweep in dB, e.g. 0,10,20");
  add_override("--antennas", "antennas", "antenna sweep, e.g. 16,32");
  add_override("--groups", "groups", "number of groups");
  add_override("--users-per-group", "users_per_group", "users per group");
  add_override("--solver", "solver", "cm-pagd | cm-sa | cm-lse");
  add_override("--structure", "structure", "full | rs | mrt | zf | rzf | mzf | mrzf");
  add_override("--trials", "trials", "trials per sweep point");
  add_override("--seed", "seed", "base seed; trial i uses seed + i");
  add_override("--eps-outer", "eps_outer", "outer relative tolerance");
  add_override("--eps-inner", "eps_inner", "inner relative tolerance");
  add_override("--mu", "mu", "log-sum-exp smoothing");
  add_override("--rate-unit", "rate_unit", "bits | nats");
  add_override("--threads", "threads", "worker threads (0 = all cores)");
  add_override("--out", "out", "output directory");
  add_override("--trace", "trace", "outer iteration whose inner sequences are traced");

  auto* gen = app.add_subcommand("generate", "Write a Rayleigh scenario as JSON");
  int L = 16, groups = 3, users = 4;
  double snr = 20.0;
  std::uint64_t seed = 1;
  std::string gen_out = "scenario.json";
  gen->add_option("--antennas", L);
  gen->add_option("--groups", groups);
  gen->add_option("--users-per-group", users);
  gen->add_option("--snr", snr);
  gen->add_option("--seed", seed);
  gen->add_option("--out", gen_out);

  auto* solve = app.add_subcommand("solve", "Solve one scenario JSON and print the report");
  std::string scenario_path, solver = "cm-pagd", structure = "full", solve_out;
  std::optional<int> trace;
  solve->add_option("--scenario", scenario_path)->required();
  solve->add_option("--solver", solver);
  solve->add_option("--structure", structure);
  solve->add_option("--out", solve_out);
  solve->add_option("--trace", trace);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return run_command(config_path, overrides);
    if (*gen) return generate_command(L, groups, users, snr, seed, gen_out);
    if (*solve) return solve_command(scenario_path, solver, structure, solve_out, trace);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
