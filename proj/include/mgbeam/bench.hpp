#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mgbeam/baselines.hpp"
#include "mgbeam/cm.hpp"
#include "mgbeam/json_io.hpp"
#include "mgbeam/structures.hpp"

namespace mgbeam {

enum class SolverKind { CmPagd, CmSa, CmLse };

inline std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::CmPagd: return "cm-pagd";
    case SolverKind::CmSa: return "cm-sa";
    case SolverKind::CmLse: return "cm-lse";
  }
  return "?";
}

inline SolverKind parse_solver_kind(const std::string& text) {
  for (SolverKind k : {SolverKind::CmPagd, SolverKind::CmSa, SolverKind::CmLse}) {
    if (to_string(k) == text) return k;
  }
  throw DimensionError("unknown solver '" + text + "' (expected cm-pagd|cm-sa|cm-lse)");
}

inline RateUnit parse_rate_unit(const std::string& text) {
  if (text == "bits") return RateUnit::Bits;
  if (text == "nats") return RateUnit::Nats;
  throw DimensionError("unknown rate unit '" + text + "' (expected bits|nats)");
}

inline std::string to_string(RateUnit unit) { return unit == RateUnit::Bits ? "bits" : "nats"; }

struct ExperimentConfig {
  std::vector<double> snr_db{20.0};
  std::vector<int> antennas{16};
  int groups = 3;
  int users_per_group = 4;
  SolverKind solver = SolverKind::CmPagd;
  StructureKind structure = StructureKind::Full;
  int trials = 100;
  std::uint64_t seed = 1;
  double eps_outer = 1e-4;
  double eps_inner = 1e-4;
  double rho_c = 1.0;
  double rho_v = 0.02;
  int max_outer = 500;
  int max_inner = 2000;
  double mu = 0.1;
  RateUnit rate_unit = RateUnit::Bits;
  int threads = 0;  ///< 0 = hardware concurrency
  std::string out = "out";
  std::optional<int> trace;  ///< outer iteration whose inner sequences are traced

  void validate() const {
    if (trials < 1) throw DimensionError("trials must be at least 1");
    if (snr_db.empty() || antennas.empty()) throw DimensionError("sweep axes must be non-empty");
    if (groups < 1 || users_per_group < 1) throw DimensionError("groups and users must be positive");
    for (int L : antennas) {
      if (L < 1) throw DimensionError("antenna counts must be positive");
    }
    if (!(eps_outer > 0.0) || !(eps_inner > 0.0) || !(rho_c > 0.0) || rho_v < 0.0 ||
        !(mu > 0.0) || max_outer < 1 || max_inner < 1) {
      throw DimensionError("tolerances, step constants and iteration limits must be positive");
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::string body = trim(value);
  if (!body.empty() && body.front() == '[') {
    if (body.back() != ']') throw DimensionError("unterminated list: " + value);
    body = body.substr(1, body.size() - 2);
  }
  std::vector<std::string> items;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(unquote(item));
  }
  return items;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  std::istringstream in(text);
  T v{};
  in >> v;
  if (in.fail() || !in.eof()) throw DimensionError("invalid value for '" + key + "': " + text);
  return v;
}

}  // namespace detail

/// Applies one `key = value` setting; list values accept `[a, b]` or `a,b`.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  using detail::parse_number;
  const std::string value = detail::unquote(detail::trim(raw));
  if (key == "snr_db") {
    cfg.snr_db.clear();
    for (const auto& item : detail::split_list(value)) cfg.snr_db.push_back(parse_number<double>(key, item));
  } else if (key == "antennas") {
    cfg.antennas.clear();
    for (const auto& item : detail::split_list(value)) cfg.antennas.push_back(parse_number<int>(key, item));
  } else if (key == "groups") {
    cfg.groups = parse_number<int>(key, value);
  } else if (key == "users_per_group") {
    cfg.users_per_group = parse_number<int>(key, value);
  } else if (key == "solver") {
    cfg.solver = parse_solver_kind(value);
  } else if (key == "structure") {
    cfg.structure = parse_structure_kind(value);
  } else if (key == "trials") {
    cfg.trials = parse_number<int>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "eps_outer") {
    cfg.eps_outer = parse_number<double>(key, value);
  } else if (key == "eps_inner") {
    cfg.eps_inner = parse_number<double>(key, value);
  } else if (key == "rho_c") {
    cfg.rho_c = parse_number<double>(key, value);
  } else if (key == "rho_v") {
    cfg.rho_v = parse_number<double>(key, value);
  } else if (key == "max_outer") {
    cfg.max_outer = parse_number<int>(key, value);
  } else if (key == "max_inner") {
    cfg.max_inner = parse_number<int>(key, value);
  } else if (key == "mu") {
    cfg.mu = parse_number<double>(key, value);
  } else if (key == "rate_unit") {
    cfg.rate_unit = parse_rate_unit(value);
  } else if (key == "threads") {
    cfg.threads = parse_number<int>(key, value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "trace") {
    cfg.trace = parse_number<int>(key, value);
  } else {
    throw DimensionError("unknown config key '" + key + "'");
  }
}

/// Parses a TOML-style file of `key = value` lines; `#` starts a comment.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DimensionError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw DimensionError("cannot open config " + path.string());
  return parse_config(in, std::move(cfg));
}

struct TrialRecord {
  std::uint64_t seed = 0;
  double snr_db = 0.0;
  int antennas = 0;
  SolverKind solver = SolverKind::CmPagd;
  StructureKind structure = StructureKind::Full;
  double wsr = 0.0;  ///< in the configured rate unit
  std::vector<double> group_rates;
  int outer_iterations = 0;
  int inner_iterations = 0;
  double wall_time = 0.0;  ///< solver-only seconds
  double max_relative_gap = std::numeric_limits<double>::quiet_NaN();
  double max_kkt_stationarity = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  bool inner_converged = false;
  bool failed = false;
  std::string error;
};

struct TrialOutput {
  TrialRecord record;
  std::optional<CmReport> report;
};

inline CmReport solve_scenario(const Scenario& s, const StructureBasis& b,
                               const ExperimentConfig& cfg) {
  CmOptions co;
  co.tolerance = cfg.eps_outer;
  co.max_iterations = cfg.max_outer;
  co.trace_inner_at = cfg.trace;
  if (cfg.solver == SolverKind::CmPagd) {
    PagdInner inner;
    inner.options.tolerance = cfg.eps_inner;
    inner.options.max_iterations = cfg.max_inner;
    inner.options.rho_c = cfg.rho_c;
    inner.options.rho_v = cfg.rho_v;
    return run_cm(s, b, inner, co);
  }
  BaselineInner inner;
  inner.options.kind = cfg.solver == SolverKind::CmSa ? BaselineKind::SA : BaselineKind::LSE;
  inner.options.mu = cfg.mu;
  inner.options.tolerance = cfg.eps_inner;
  return run_cm(s, b, inner, co);
}

/// One Monte-Carlo trial. Failures are captured in the record.
inline TrialOutput run_trial(const ExperimentConfig& cfg, double snr_db, int L,
                             std::uint64_t seed) {
  TrialOutput out;
  TrialRecord& r = out.record;
  r.seed = seed;
  r.snr_db = snr_db;
  r.antennas = L;
  r.solver = cfg.solver;
  r.structure = cfg.structure;
  try {
    const Scenario s = generate_rayleigh_scenario(
        L, cfg.groups, std::vector<int>(cfg.groups, cfg.users_per_group), snr_db, seed);
    const auto t0 = std::chrono::steady_clock::now();
    const StructureBasis b = build_basis(s, cfg.structure);
    CmReport rep = solve_scenario(s, b, cfg);
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const LinkGains gains = link_gains(s, rep.beamformer.W);
    r.wsr = convert_rate(wsr_nats(s, gains, false), cfg.rate_unit);
    for (int g = 0; g < s.G; ++g) {
      r.group_rates.push_back(convert_rate(group_rate_nats(s, gains, g, false), cfg.rate_unit));
    }
    r.outer_iterations = rep.outer_iterations();
    r.inner_iterations = rep.inner_iterations();
    r.converged = rep.converged;
    r.inner_converged = true;
    for (const auto& st : rep.inner) {
      r.inner_converged = r.inner_converged && st.converged;
      if (std::isfinite(st.relative_gap)) {
        r.max_relative_gap = std::isfinite(r.max_relative_gap)
                                 ? std::max(r.max_relative_gap, st.relative_gap)
                                 : st.relative_gap;
      }
      if (std::isfinite(st.kkt_stationarity)) {
        r.max_kkt_stationarity = std::isfinite(r.max_kkt_stationarity)
                                     ? std::max(r.max_kkt_stationarity, st.kkt_stationarity)
                                     : st.kkt_stationarity;
      }
    }
    out.report = std::move(rep);
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
  }
  return out;
}

/**
 * Runs every (snr, L) sweep point for `trials` seeds base_seed + i. Trials run
 * on a worker pool; records are returned in sweep order, then seed order, so
 * the output does not depend on the thread count. The first trial of the
 * first sweep point carries its CmReport when `first_report` is given.
 */
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg,
                                               std::optional<CmReport>* first_report = nullptr) {
  cfg.validate();
  struct Job {
    double snr;
    int L;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double snr : cfg.snr_db) {
    for (int L : cfg.antennas) {
      for (int i = 0; i < cfg.trials; ++i) {
        jobs.push_back({snr, L, cfg.seed + static_cast<std::uint64_t>(i)});
      }
    }
  }
  std::vector<TrialRecord> records(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      TrialOutput out = run_trial(cfg, jobs[i].snr, jobs[i].L, jobs[i].seed);
      if (i == 0 && first_report) *first_report = std::move(out.report);
      records[i] = std::move(out.record);
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t nthreads =
      std::min<std::size_t>(jobs.size(), cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : hw);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  return records;
}

namespace detail {

inline std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kTableHeader =
    "snr_db,antennas,solver,structure,trials,failed,mean_wsr,std_wsr,mean_wall_time,"
    "mean_outer_iterations,convergence_rate";

/// One CSV row per (snr, L, solver, structure) in first-appearance order.
/// Failed trials count toward `trials` and `failed` only.
inline void emit_table(const std::vector<TrialRecord>& records, std::ostream& out) {
  out << kTableHeader << '\n';
  std::vector<std::vector<const TrialRecord*>> groups;
  std::vector<std::tuple<double, int, SolverKind, StructureKind>> keys;
  for (const auto& r : records) {
    const auto key = std::make_tuple(r.snr_db, r.antennas, r.solver, r.structure);
    auto it = std::find(keys.begin(), keys.end(), key);
    if (it == keys.end()) {
      keys.push_back(key);
      groups.emplace_back();
      it = keys.end() - 1;
    }
    groups[static_cast<std::size_t>(it - keys.begin())].push_back(&r);
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& rows = groups[i];
    std::vector<double> wsr;
    double wall = 0.0, outer = 0.0;
    int converged = 0, failed = 0;
    for (const auto* r : rows) {
      if (r->failed) {
        ++failed;
        continue;
      }
      wsr.push_back(r->wsr);
      wall += r->wall_time;
      outer += r->outer_iterations;
      converged += r->converged ? 1 : 0;
    }
    const double n = static_cast<double>(wsr.size());
    double mean = 0.0, var = 0.0;
    for (double v : wsr) mean += v;
    mean = n > 0 ? mean / n : std::numeric_limits<double>::quiet_NaN();
    for (double v : wsr) var += (v - mean) * (v - mean);
    const double sd = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    const auto& [snr, L, solver, structure] = keys[i];
    out << detail::fmt6(snr) << ',' << L << ',' << to_string(solver) << ','
        << to_string(structure) << ',' << rows.size() << ',' << failed << ','
        << detail::fmt6(mean) << ',' << detail::fmt6(sd) << ','
        << detail::fmt6(n > 0 ? wall / n : 0.0) << ',' << detail::fmt6(n > 0 ? outer / n : 0.0)
        << ',' << detail::fmt6(static_cast<double>(converged) / static_cast<double>(rows.size()))
        << '\n';
  }
}

inline void emit_table(const std::vector<TrialRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DimensionError("cannot write " + path.string());
  emit_table(records, out);
}

/// Outer WSR trajectory and, when one was designated, the inner primal/dual
/// sequences of that outer iteration.
inline json trace_json(const CmReport& rep) {
  json j;
  json outer = json::array();
  for (std::size_t t = 0; t < rep.trajectory_bits.size(); ++t) {
    outer.push_back({{"iteration", t}, {"wsr_bits", rep.trajectory_bits[t]}});
  }
  j["outer"] = std::move(outer);
  if (rep.traced_iteration) {
    json series = json::array();
    for (std::size_t i = 0; i < rep.inner_primal_trace.size(); ++i) {
      series.push_back({{"iteration", i},
                        {"primal", rep.inner_primal_trace[i]},
                        {"dual", rep.inner_dual_trace[i]}});
    }
    j["inner"] = {{"outer_iteration", *rep.traced_iteration}, {"series", std::move(series)}};
  }
  return j;
}

inline void emit_trace(const CmReport& rep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DimensionError("cannot write " + path.string());
  out << trace_json(rep).dump(2) << '\n';
}

inline json to_json(const TrialRecord& r) {
  return {{"seed", r.seed},
          {"snr_db", r.snr_db},
          {"antennas", r.antennas},
          {"solver", to_string(r.solver)},
          {"structure", to_string(r.structure)},
          {"wsr", r.wsr},
          {"group_rates", r.group_rates},
          {"outer_iterations", r.outer_iterations},
          {"inner_iterations", r.inner_iterations},
          {"wall_time", r.wall_time},
          {"max_relative_gap", detail::finite_or_null(r.max_relative_gap)},
          {"max_kkt_stationarity", detail::finite_or_null(r.max_kkt_stationarity)},
          {"converged", r.converged},
          {"inner_converged", r.inner_converged},
          {"failed", r.failed},
          {"error", r.error}};
}

}  // namespace mgbeam
