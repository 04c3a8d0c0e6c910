#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mgbeam/pagd.hpp"
#include "mgbeam/structures.hpp"
#include "mgbeam/surrogate.hpp"

namespace mgbeam {

/// Per-subproblem statistics. Certificate fields are NaN for solvers that do
/// not produce them.
struct InnerStats {
  int iterations = 0;
  bool converged = false;
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  double relative_gap = std::numeric_limits<double>::quiet_NaN();
  double kkt_stationarity = std::numeric_limits<double>::quiet_NaN();
  double hyperplane = std::numeric_limits<double>::quiet_NaN();
  double complementary_slackness = std::numeric_limits<double>::quiet_NaN();
  double primal = std::numeric_limits<double>::quiet_NaN();
  double dual = std::numeric_limits<double>::quiet_NaN();
};

struct InnerSolution {
  Coefficients coeffs;
  InnerStats stats;
  RVector duals;  ///< empty unless the solver works in the dual
  std::vector<double> primal_trace;
  std::vector<double> dual_trace;
};

/// A subproblem solver: maximizes sum_g zeta_g min_k h_gk over the basis
/// coefficients for fixed auxiliary variables. `current` is the point the
/// auxiliaries were updated at; `previous_duals` are the duals returned by the
/// previous subproblem (empty on the first pass).
template <class S>
concept InnerSolver = requires(S solver, const Scenario& s, const StructureBasis& b,
                               const CmState& st, const Coefficients& c, const RVector& d) {
  { solver(s, b, st, c, d) } -> std::convertible_to<InnerSolution>;
};

/// Projected adaptive gradient descent on the subproblem dual. With
/// `warm_start` the duals of the previous subproblem seed the next one.
struct PagdInner {
  PagdOptions options;
  bool warm_start = true;

  InnerSolution operator()(const Scenario& s, const StructureBasis& b, const CmState& st,
                           const Coefficients& /*current*/, const RVector& previous_duals) const {
    PagdOptions opt = options;
    if (warm_start && previous_duals.size() == s.num_users()) opt.initial_delta = previous_duals;
    PagdReport rep = solve_subproblem(s, b, st, opt);
    InnerSolution out;
    out.coeffs = std::move(rep.beamformer.coeffs);
    out.stats.iterations = rep.iterations;
    out.stats.converged = rep.converged;
    out.stats.duality_gap = rep.duality_gap;
    out.stats.relative_gap = rep.relative_gap;
    out.stats.kkt_stationarity = rep.residuals.stationarity;
    out.stats.hyperplane = rep.residuals.hyperplane;
    out.stats.complementary_slackness = rep.residuals.complementary_slackness;
    out.stats.primal = rep.primal;
    out.stats.dual = rep.dual;
    out.duals = std::move(rep.duals.delta);
    out.primal_trace = std::move(rep.primal_trace);
    out.dual_trace = std::move(rep.dual_trace);
    return out;
  }
};

struct CmOptions {
  double tolerance = 1e-4;
  int max_iterations = 500;
  std::optional<Coefficients> initial;
  /// Outer iteration whose inner primal/dual sequences are kept in the report.
  std::optional<int> trace_inner_at;
};

enum class CmStop { Tolerance, NoAscent, IterationLimit };

inline std::string to_string(CmStop stop) {
  switch (stop) {
    case CmStop::Tolerance: return "tolerance";
    case CmStop::NoAscent: return "no_ascent";
    case CmStop::IterationLimit: return "iteration_limit";
  }
  return "?";
}

struct CmReport {
  Beamformer beamformer;               ///< scaled to P_t
  std::vector<double> trajectory_bits; ///< normalized WSR, entry 0 is the initial point
  std::vector<InnerStats> inner;
  bool converged = false;
  CmStop stop = CmStop::IterationLimit;
  double wall_time = 0.0;              ///< seconds
  CmState final_state;                 ///< auxiliaries of the last accepted subproblem
  RVector final_duals;
  std::optional<int> traced_iteration;
  std::vector<double> inner_primal_trace;
  std::vector<double> inner_dual_trace;

  int outer_iterations() const { return static_cast<int>(inner.size()); }
  int inner_iterations() const {
    int n = 0;
    for (const auto& st : inner) n += st.iterations;
    return n;
  }
};

/**
 * Cyclic maximization of the power-normalized WSR.
 *
 * Each pass sets xi = sinr_hat and eta at the current point, then asks the
 * inner solver for a maximizer of the surrogate. A candidate is accepted only
 * if its surrogate value is at least the value at the current point; because
 * the surrogate minorizes the objective and is tight there, the true
 * normalized WSR never decreases. The loop stops on a relative WSR change
 * below the tolerance, on a rejected candidate, or at the iteration cap. The
 * output is scaled to full power.
 */
template <InnerSolver Inner>
CmReport run_cm(const Scenario& s, const StructureBasis& b, const Inner& inner,
                const CmOptions& opt = {}) {
  const auto start = std::chrono::steady_clock::now();
  CmReport rep;
  Coefficients coeffs = opt.initial ? *opt.initial : initial_coefficients(s, b);
  LinkGains gains = reduced_link_gains(b, coeffs);
  double f = wsr_nats(s, gains, true);
  rep.trajectory_bits.push_back(convert_rate(f, RateUnit::Bits));
  for (int t = 1; t <= opt.max_iterations; ++t) {
    CmState st = make_cm_state(s, gains, t);
    InnerSolution sol;
    try {
      sol = inner(s, b, st, coeffs, rep.final_duals);
    } catch (const Error& e) {
      throw SolverError(e.what(), t);
    }
    LinkGains next_gains = reduced_link_gains(b, sol.coeffs);
    const double surrogate_next = weighted_group_min(s, surrogate_values(s, next_gains, st));
    if (!(surrogate_next >= st.surrogate_wsr)) {
      rep.converged = true;
      rep.stop = CmStop::NoAscent;
      break;
    }
    if (opt.trace_inner_at && *opt.trace_inner_at == t) {
      rep.traced_iteration = t;
      rep.inner_primal_trace = sol.primal_trace;
      rep.inner_dual_trace = sol.dual_trace;
    }
    rep.inner.push_back(sol.stats);
    rep.final_duals = std::move(sol.duals);
    rep.final_state = std::move(st);
    coeffs = std::move(sol.coeffs);
    gains = std::move(next_gains);
    const double f_next = wsr_nats(s, gains, true);
    rep.trajectory_bits.push_back(convert_rate(f_next, RateUnit::Bits));
    const double change = std::abs(f_next - f) / std::max(f, kDenominatorFloor);
    f = f_next;
    if (change < opt.tolerance) {
      rep.converged = true;
      rep.stop = CmStop::Tolerance;
      break;
    }
  }
  rep.beamformer = scale_to_power(expand(b, coeffs), s.P_t);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace mgbeam
