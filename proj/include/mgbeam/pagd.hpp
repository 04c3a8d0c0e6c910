#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "mgbeam/structures.hpp"
#include "mgbeam/surrogate.hpp"

namespace mgbeam {

/// Dual variables of the slack reformulation, one per user (group-major).
/// Feasible points satisfy delta >= 0 and sum_{k in g} delta_gk = zeta_g.
struct DualState {
  RVector delta;
  RVector group_sums;
};

inline DualState make_dual_state(const Scenario& s, RVector delta) {
  DualState d;
  d.group_sums.resize(s.G);
  for (int g = 0; g < s.G; ++g) {
    d.group_sums(g) = delta.segment(s.group_offset(g), s.group_sizes[g]).sum();
  }
  d.delta = std::move(delta);
  return d;
}

/// Centroid of the feasible set: delta_gk = zeta_g / K_g.
inline DualState uniform_duals(const Scenario& s) {
  RVector delta(s.num_users());
  for (int g = 0; g < s.G; ++g) {
    delta.segment(s.group_offset(g), s.group_sizes[g])
        .setConstant(s.weights(g) / static_cast<double>(s.group_sizes[g]));
  }
  return make_dual_state(s, std::move(delta));
}

struct PagdOptions {
  double tolerance = 1e-4;           ///< relative duality gap
  double movement_tolerance = 1e-9;  ///< max |delta change| / max zeta (stagnation)
  int max_iterations = 2000;
  double rho_c = 1.0;
  double rho_v = 0.02;
  std::optional<RVector> initial_delta;
};

struct KktResiduals {
  double stationarity = 0.0;             ///< normalized gradient norm in the basis
  double hyperplane = 0.0;               ///< max_g |sum_k delta_gk - zeta_g|
  double complementary_slackness = 0.0;  ///< max_u delta_u (h_u - min_{k in g} h_gk)
  double dual_feasibility = 0.0;         ///< min_u delta_u
  double structure_fit = std::numeric_limits<double>::quiet_NaN();
  double structure_fit_identity = std::numeric_limits<double>::quiet_NaN();
};

struct PagdReport {
  Beamformer beamformer;
  DualState duals;
  RVector h_values;
  double primal = 0.0;
  double dual = 0.0;
  double duality_gap = 0.0;
  double relative_gap = 0.0;
  KktResiduals residuals;
  int iterations = 0;
  bool converged = false;
  std::vector<double> primal_trace;
  std::vector<double> dual_trace;
};

namespace detail {

/// Derived dual quantities shared by every group's linear system.
struct DualWeights {
  RVector theta;  ///< delta_u |eta_u|^2
  CVector d;      ///< delta_u eta_u sqrt(1 + xi_u)
  double s_sigma = 0.0;  ///< sum_u theta_u sigma_u^2 / P_t
};

inline DualWeights dual_weights(const Scenario& s, const CmState& st, const RVector& delta) {
  if (delta.size() != s.num_users() || st.xi.size() != s.num_users() ||
      st.eta.size() != s.num_users()) {
    throw DimensionError("dual and auxiliary vectors must have K entries");
  }
  if ((delta.array() < 0.0).any()) throw DimensionError("dual variables must be nonnegative");
  DualWeights w;
  w.theta = delta.array() * st.eta.array().abs2();
  w.d = delta.cast<cdouble>().array() * st.eta.array() *
        (1.0 + st.xi.array()).sqrt().cast<cdouble>();
  w.s_sigma = w.theta.dot(s.noise_power) / s.P_t;
  return w;
}

/// System matrix F_g diag(theta) F_g^H + S_sigma Q_g of group g.
inline CMatrix dual_system(const StructureBasis& b, const DualWeights& w, int g) {
  const CMatrix& f = b.eff_channels[g];
  CMatrix m = f * w.theta.asDiagonal() * f.adjoint();
  m += w.s_sigma * b.power_grams[g];
  return linalg::hermitian_part(m);
}

inline CVector dual_rhs(const Scenario& s, const StructureBasis& b, const DualWeights& w, int g) {
  const int off = s.group_offset(g);
  const int kg = s.group_sizes[g];
  return b.eff_channels[g].middleCols(off, kg) * w.d.segment(off, kg);
}

}  // namespace detail

/**
 * Maximizer of the subproblem Lagrangian for fixed duals:
 *
 *   c_g = (F_g Theta F_g^H + S_sigma Q_g)^{-1} F_{g,g} d_g,  F_g = T_g^H H,
 *
 * which for the Full basis is w_g = (H Theta H^H + S_sigma I)^{-1} H_g d_g.
 */
inline Coefficients beamformer_from_dual(const Scenario& s, const StructureBasis& b,
                                         const CmState& st, const RVector& delta) {
  const auto w = detail::dual_weights(s, st, delta);
  if (!(w.s_sigma > kDenominatorFloor)) {
    throw DegenerateDualError("all dual variables vanish; beamformer is undefined");
  }
  Coefficients out(s.G);
  auto factor = [](const CMatrix& m) {
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success) {
      throw SingularityError("dual system is not positive definite");
    }
    return llt;
  };
  if (b.shared) {
    const auto llt = factor(detail::dual_system(b, w, 0));
    CMatrix rhs(b.dims[0], s.G);
    for (int g = 0; g < s.G; ++g) rhs.col(g) = detail::dual_rhs(s, b, w, g);
    const CMatrix sol = llt.solve(rhs);
    for (int g = 0; g < s.G; ++g) out[g] = sol.col(g);
    return out;
  }
  for (int g = 0; g < s.G; ++g) {
    out[g] = factor(detail::dual_system(b, w, g)).solve(detail::dual_rhs(s, b, w, g));
  }
  return out;
}

/// Lagrange dual function: sum_u delta_u h_u(W*(delta)).
inline double dual_objective(const Scenario& s, const StructureBasis& b, const CmState& st,
                             const RVector& delta) {
  const auto c = beamformer_from_dual(s, b, st, delta);
  return delta.dot(surrogate_values(s, reduced_link_gains(b, c), st));
}

/**
 * One projected adaptive gradient step on the duals of every group:
 *
 *   tau_gk   = delta_gk / (h_gk - min_i h_gi + rho_c + rho_v j)
 *   bar_gk   = delta_gk - tau_gk (h_gk - min_i h_gi)
 *   delta_g  = bar_g - (sum_k bar_gk - zeta_g) / K_g
 *
 * Entries that the mean-offset projection would drive negative are clamped
 * and the remaining mass rescaled back onto the hyperplane.
 */
inline DualState pagd_step(const Scenario& s, const RVector& h_values, const RVector& delta,
                           int j, double rho_c, double rho_v) {
  const int K = s.num_users();
  if (h_values.size() != K || delta.size() != K) throw DimensionError("expected K entries");
  const double rho = rho_c + rho_v * static_cast<double>(j);
  RVector next(K);
  for (int g = 0; g < s.G; ++g) {
    const int off = s.group_offset(g);
    const int kg = s.group_sizes[g];
    const double hmin = h_values.segment(off, kg).minCoeff();
    for (int k = 0; k < kg; ++k) {
      const double excess = h_values(off + k) - hmin;
      const double tau = delta(off + k) / (excess + rho);
      next(off + k) = delta(off + k) - tau * excess;
    }
    auto seg = next.segment(off, kg);
    const double zeta = s.weights(g);
    seg.array() -= (seg.sum() - zeta) / static_cast<double>(kg);
    if ((seg.array() < 0.0).any()) {
      seg = seg.cwiseMax(0.0);
      const double mass = seg.sum();
      if (mass > 0.0) {
        seg *= zeta / mass;
      } else {
        seg.setConstant(zeta / static_cast<double>(kg));
      }
    }
  }
  return make_dual_state(s, std::move(next));
}

/// Scale-invariant distances between W and the optimal structure rebuilt from
/// the duals, in the S_sigma-regularized form and in the identity-regularized
/// form with Theta and D divided by S_sigma. Both use
/// (H Theta H^H + S I)^{-1} H = H (Theta H^H H + S I)^{-1}, so the cost is
/// O(K^2 L).
inline std::pair<double, double> structure_fit_residual(const Scenario& s, const CmState& st,
                                                        const RVector& delta, const CMatrix& W) {
  const auto w = detail::dual_weights(s, st, delta);
  if (!(w.s_sigma > kDenominatorFloor)) {
    throw DegenerateDualError("all dual variables vanish; structure is undefined");
  }
  const Eigen::Index K = s.num_users();
  const CMatrix theta_gram = w.theta.cast<cdouble>().asDiagonal() * (s.H.adjoint() * s.H);
  CMatrix d_blocks = CMatrix::Zero(K, s.G);
  for (int g = 0; g < s.G; ++g) {
    const int off = s.group_offset(g);
    d_blocks.block(off, g, s.group_sizes[g], 1) = w.d.segment(off, s.group_sizes[g]);
  }
  const auto fit = [&](const CMatrix& sys, const CMatrix& rhs) {
    const CMatrix cand = s.H * sys.partialPivLu().solve(rhs);
    const cdouble alpha = cand.squaredNorm() > 0.0
                              ? cdouble((cand.adjoint() * W).trace()) / cand.squaredNorm()
                              : cdouble(0.0);
    return (W - alpha * cand).norm() / std::max(W.norm(), kDenominatorFloor);
  };
  const double r3 = fit(theta_gram + w.s_sigma * CMatrix::Identity(K, K), d_blocks);
  const double r1 = fit(CMatrix::Identity(K, K) + theta_gram / w.s_sigma, d_blocks / w.s_sigma);
  return {r3, r1};
}

inline KktResiduals kkt_certificate(const Scenario& s, const StructureBasis& b, const CmState& st,
                                    const PagdReport& report) {
  KktResiduals r;
  const RVector& delta = report.duals.delta;
  r.dual_feasibility = delta.size() > 0 ? delta.minCoeff() : 0.0;
  for (int g = 0; g < s.G; ++g) {
    const double sum = delta.segment(s.group_offset(g), s.group_sizes[g]).sum();
    r.hyperplane = std::max(r.hyperplane, std::abs(sum - s.weights(g)));
  }
  const RVector h = surrogate_values(s, reduced_link_gains(b, report.beamformer.coeffs), st);
  for (int g = 0; g < s.G; ++g) {
    const int off = s.group_offset(g);
    const double hmin = h.segment(off, s.group_sizes[g]).minCoeff();
    for (int k = 0; k < s.group_sizes[g]; ++k) {
      r.complementary_slackness =
          std::max(r.complementary_slackness, std::abs(delta(off + k) * (h(off + k) - hmin)));
    }
  }
  // Stationarity is evaluated with the nonnegative part of the duals so that
  // an infeasible dual point still yields a finite record.
  const RVector clamped = delta.cwiseMax(0.0);
  const auto w = detail::dual_weights(s, st, clamped);
  for (int g = 0; g < s.G; ++g) {
    const CVector rhs = detail::dual_rhs(s, b, w, g);
    const CVector lhs = detail::dual_system(b, w, g) * report.beamformer.coeffs[g];
    const double scale = std::max(rhs.norm() + lhs.norm(), kDenominatorFloor);
    r.stationarity = std::max(r.stationarity, (rhs - lhs).norm() / scale);
  }
  if ((b.kind == StructureKind::Full || b.kind == StructureKind::RS) &&
      w.s_sigma > kDenominatorFloor) {
    const auto [fit3, fit1] = structure_fit_residual(s, st, clamped, report.beamformer.W);
    r.structure_fit = fit3;
    r.structure_fit_identity = fit1;
  }
  return r;
}

/// Solves the convex subproblem through its dual with projected adaptive
/// gradient descent. Non-convergence is reported, not thrown.
inline PagdReport solve_subproblem(const Scenario& s, const StructureBasis& b, const CmState& st,
                                   const PagdOptions& opt = {}) {
  DualState duals = opt.initial_delta ? make_dual_state(s, *opt.initial_delta) : uniform_duals(s);
  const double zeta_scale = std::max(s.weights.maxCoeff(), kDenominatorFloor);
  PagdReport rep;
  double movement = std::numeric_limits<double>::infinity();
  Coefficients coeffs;
  RVector h;
  int j = 0;
  for (;; ++j) {
    coeffs = beamformer_from_dual(s, b, st, duals.delta);
    h = surrogate_values(s, reduced_link_gains(b, coeffs), st);
    rep.primal = weighted_group_min(s, h);
    rep.dual = duals.delta.dot(h);
    rep.primal_trace.push_back(rep.primal);
    rep.dual_trace.push_back(rep.dual);
    rep.duality_gap = rep.dual - rep.primal;
    rep.relative_gap = rep.duality_gap / std::max(std::abs(rep.primal), kDenominatorFloor);
    if (rep.relative_gap < opt.tolerance || movement < opt.movement_tolerance) {
      rep.converged = true;
      break;
    }
    if (j >= opt.max_iterations) break;
    DualState next = pagd_step(s, h, duals.delta, j, opt.rho_c, opt.rho_v);
    movement = (next.delta - duals.delta).cwiseAbs().maxCoeff() / zeta_scale;
    duals = std::move(next);
  }
  rep.iterations = j + 1;
  rep.duals = std::move(duals);
  rep.h_values = std::move(h);
  rep.beamformer = expand(b, coeffs);
  rep.residuals = kkt_certificate(s, b, st, rep);
  return rep;
}

}  // namespace mgbeam
