#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "mgbeam/cm.hpp"
#include "mgbeam/pagd.hpp"

namespace mgbeam {

enum class BaselineKind { SA, LSE };

struct BaselineOptions {
  BaselineKind kind = BaselineKind::SA;
  double a = 0.0;  ///< SA step numerator; 0 selects ||c_0|| / ||grad_0||
  double b = 10.0;
  double mu = 0.1;
  int max_iterations = 500;
  double tolerance = 1e-4;
  int patience = 50;  ///< SA: iterations without best-value progress before stopping

  void validate() const {
    if (a < 0.0 || b < 0.0 || !(mu > 0.0) || max_iterations < 1) {
      throw DimensionError("baseline options require a >= 0, b >= 0, mu > 0");
    }
  }
};

struct BaselineResult {
  Beamformer beamformer;
  double value = 0.0;  ///< best surrogate objective sum_g zeta_g min_k h_gk
  int iterations = 0;
  bool converged = false;
};

namespace detail {

/// Ascent direction of sum_u pi_u h_u in every group's coefficients.
inline Coefficients weighted_surrogate_gradient(const Scenario& s, const StructureBasis& b,
                                                const CmState& st, const RVector& pi,
                                                const Coefficients& c) {
  const auto w = dual_weights(s, st, pi);
  Coefficients grad(s.G);
  for (int g = 0; g < s.G; ++g) {
    const CMatrix& f = b.eff_channels[g];
    const CVector fc = f.adjoint() * c[g];
    const CVector mc = f * (w.theta.cast<cdouble>().cwiseProduct(fc)) +
                       w.s_sigma * (b.power_grams[g] * c[g]);
    grad[g] = dual_rhs(s, b, w, g) - mc;
  }
  return grad;
}

inline double coeff_norm(const Coefficients& c) {
  double n = 0.0;
  for (const auto& cg : c) n += cg.squaredNorm();
  return std::sqrt(n);
}

inline void axpy(Coefficients& c, double step, const Coefficients& dir) {
  for (std::size_t g = 0; g < c.size(); ++g) c[g] += step * dir[g];
}

inline double surrogate_objective(const Scenario& s, const StructureBasis& b, const CmState& st,
                                  const Coefficients& c) {
  return weighted_group_min(s, surrogate_values(s, reduced_link_gains(b, c), st));
}

}  // namespace detail

/// -mu ln sum_k exp(-h_gk / mu), evaluated with the group minimum factored out.
inline double lse_group(const Eigen::Ref<const RVector>& h, double mu) {
  const double hmin = h.minCoeff();
  return hmin - mu * std::log((-(h.array() - hmin) / mu).exp().sum());
}

inline double lse_objective(const Scenario& s, const RVector& h, double mu) {
  double total = 0.0;
  for (int g = 0; g < s.G; ++g) {
    total += s.weights(g) * lse_group(h.segment(s.group_offset(g), s.group_sizes[g]), mu);
  }
  return total;
}

/**
 * Subgradient ascent on the surrogate objective: each group contributes the
 * gradient of its worst user (lowest index on ties) and the step is
 * a / (b + j). The best iterate, including the start, is returned.
 */
inline BaselineResult solve_subproblem_sa(const Scenario& s, const StructureBasis& b,
                                          const CmState& st, const BaselineOptions& opt,
                                          const Coefficients& start) {
  opt.validate();
  Coefficients c = start;
  BaselineResult res;
  Coefficients best = c;
  double best_value = detail::surrogate_objective(s, b, st, c);
  double a = opt.a;
  int since_progress = 0;
  int j = 0;
  for (; j < opt.max_iterations; ++j) {
    const RVector h = surrogate_values(s, reduced_link_gains(b, c), st);
    RVector pi = RVector::Zero(s.num_users());
    for (int g = 0; g < s.G; ++g) {
      Eigen::Index k = 0;
      h.segment(s.group_offset(g), s.group_sizes[g]).minCoeff(&k);
      pi(s.group_offset(g) + static_cast<int>(k)) = s.weights(g);
    }
    const Coefficients grad = detail::weighted_surrogate_gradient(s, b, st, pi, c);
    const double gnorm = detail::coeff_norm(grad);
    if (!(gnorm > kDenominatorFloor)) {
      res.converged = true;
      break;
    }
    if (a == 0.0) a = std::max(detail::coeff_norm(c), 1e-12) / gnorm;
    detail::axpy(c, a / (opt.b + static_cast<double>(j)), grad);
    const double value = detail::surrogate_objective(s, b, st, c);
    if (value > best_value + opt.tolerance * std::abs(best_value)) {
      since_progress = 0;
    } else if (++since_progress >= opt.patience) {
      res.converged = true;
    }
    if (value > best_value) {
      best_value = value;
      best = c;
    }
    if (res.converged) {
      ++j;
      break;
    }
  }
  res.beamformer = expand(b, best);
  res.value = best_value;
  res.iterations = j;
  return res;
}

/**
 * Gradient ascent with backtracking on the log-sum-exp smoothed objective
 * sum_g zeta_g (-mu ln sum_k exp(-h_gk / mu)). Stops on a relative change of
 * the smoothed objective below the tolerance. The iterate with the best
 * unsmoothed surrogate value is returned.
 */
inline BaselineResult solve_subproblem_lse(const Scenario& s, const StructureBasis& b,
                                           const CmState& st, const BaselineOptions& opt,
                                           const Coefficients& start) {
  opt.validate();
  Coefficients c = start;
  RVector h = surrogate_values(s, reduced_link_gains(b, c), st);
  double phi = lse_objective(s, h, opt.mu);
  Coefficients best = c;
  double best_value = weighted_group_min(s, h);
  BaselineResult res;
  double step = 0.0;
  int j = 0;
  for (; j < opt.max_iterations; ++j) {
    RVector pi(s.num_users());
    for (int g = 0; g < s.G; ++g) {
      const int off = s.group_offset(g);
      const auto hg = h.segment(off, s.group_sizes[g]);
      const RVector e = (-(hg.array() - hg.minCoeff()) / opt.mu).exp();
      pi.segment(off, s.group_sizes[g]) = s.weights(g) * e / e.sum();
    }
    const Coefficients grad = detail::weighted_surrogate_gradient(s, b, st, pi, c);
    const double g2 = std::pow(detail::coeff_norm(grad), 2);
    if (!(g2 > kDenominatorFloor)) {
      res.converged = true;
      break;
    }
    if (step == 0.0) step = std::max(detail::coeff_norm(c), 1e-12) / std::sqrt(g2);
    // Armijo backtracking on the smoothed objective.
    Coefficients trial;
    RVector h_trial;
    double phi_trial = -std::numeric_limits<double>::infinity();
    for (int bt = 0; bt < 60; ++bt) {
      trial = c;
      detail::axpy(trial, step, grad);
      h_trial = surrogate_values(s, reduced_link_gains(b, trial), st);
      phi_trial = lse_objective(s, h_trial, opt.mu);
      if (phi_trial >= phi + 1e-4 * step * g2) break;
      step *= 0.5;
    }
    if (!(phi_trial > phi)) {
      res.converged = true;
      break;
    }
    const double change = (phi_trial - phi) / std::max(std::abs(phi), kDenominatorFloor);
    c = std::move(trial);
    h = std::move(h_trial);
    phi = phi_trial;
    step *= 2.0;
    const double value = weighted_group_min(s, h);
    if (value > best_value) {
      best_value = value;
      best = c;
    }
    if (change < opt.tolerance) {
      res.converged = true;
      ++j;
      break;
    }
  }
  res.beamformer = expand(b, best);
  res.value = best_value;
  res.iterations = j;
  return res;
}

/// CM inner solver adapter for the SA / LSE baselines.
struct BaselineInner {
  BaselineOptions options;

  InnerSolution operator()(const Scenario& s, const StructureBasis& b, const CmState& st,
                           const Coefficients& current, const RVector& /*previous_duals*/) const {
    BaselineResult r = options.kind == BaselineKind::SA
                           ? solve_subproblem_sa(s, b, st, options, current)
                           : solve_subproblem_lse(s, b, st, options, current);
    InnerSolution out;
    out.coeffs = std::move(r.beamformer.coeffs);
    out.stats.iterations = r.iterations;
    out.stats.converged = r.converged;
    out.stats.primal = r.value;
    return out;
  }
};

}  // namespace mgbeam
