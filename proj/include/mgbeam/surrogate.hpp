#pragma once

#include <cmath>
#include <limits>

#include "mgbeam/model.hpp"

namespace mgbeam {

/**
 * Auxiliary variables of the cyclic-maximization outer loop.
 *
 * For fixed (xi, eta) the per-user surrogate
 *
 *   h_u(W) = ln(1 + xi_u) + 2 sqrt(1 + xi_u) Re{conj(eta_u) h_u^H w_g}
 *            - |eta_u|^2 (sum_i |h_u^H w_i|^2 + sigma_u^2 / P_t Tr(W W^H)) - xi_u
 *
 * is a concave quadratic lower bound of ln(1 + sinr_hat_u(W)), tight at the
 * point where (xi, eta) were updated. Natural log throughout.
 */
struct CmState {
  RVector xi;
  CVector eta;
  int iteration = 0;
  double surrogate_wsr = 0.0;  ///< sum_g zeta_g min_k h_gk, nats.
};

inline RVector xi_from_gains(const Scenario& s, const LinkGains& gains) {
  const int K = s.num_users();
  const auto groups = s.user_groups();
  RVector xi(K);
  for (int u = 0; u < K; ++u) xi(u) = sinr_from_gains(s, gains, u, groups[u], true);
  return xi;
}

/// Total received power (all streams) plus normalized noise; the denominator
/// of the eta update.
inline double received_power_normalized(const Scenario& s, const LinkGains& gains, int u) {
  return gains.cross.row(u).squaredNorm() + s.noise_power(u) / s.P_t * gains.power;
}

inline CVector eta_from_gains(const Scenario& s, const LinkGains& gains, const RVector& xi) {
  const int K = s.num_users();
  const auto groups = s.user_groups();
  CVector eta(K);
  for (int u = 0; u < K; ++u) {
    const double den = std::max(received_power_normalized(s, gains, u), kDenominatorFloor);
    eta(u) = std::sqrt(1.0 + xi(u)) * gains.cross(u, groups[u]) / den;
  }
  return eta;
}

inline double surrogate_value(const Scenario& s, const LinkGains& gains, int u, int g,
                              double xi, cdouble eta) {
  const double lin = 2.0 * std::sqrt(1.0 + xi) * (std::conj(eta) * gains.cross(u, g)).real();
  return std::log1p(xi) + lin - std::norm(eta) * received_power_normalized(s, gains, u) - xi;
}

/// h_u for every user, group-major.
inline RVector surrogate_values(const Scenario& s, const LinkGains& gains, const CmState& st) {
  const int K = s.num_users();
  const auto groups = s.user_groups();
  RVector h(K);
  for (int u = 0; u < K; ++u) h(u) = surrogate_value(s, gains, u, groups[u], st.xi(u), st.eta(u));
  return h;
}

/// sum_g zeta_g min_{k in g} values_gk.
inline double weighted_group_min(const Scenario& s, const RVector& values) {
  double total = 0.0;
  for (int g = 0; g < s.G; ++g) {
    total += s.weights(g) * values.segment(s.group_offset(g), s.group_sizes[g]).minCoeff();
  }
  return total;
}

/// Updates xi then eta at the point described by `gains`.
inline CmState make_cm_state(const Scenario& s, const LinkGains& gains, int iteration = 0) {
  CmState st;
  st.xi = xi_from_gains(s, gains);
  st.eta = eta_from_gains(s, gains, st.xi);
  st.iteration = iteration;
  st.surrogate_wsr = weighted_group_min(s, surrogate_values(s, gains, st));
  return st;
}

inline RVector update_xi(const Scenario& s, const CMatrix& W) {
  return xi_from_gains(s, link_gains(s, W));
}

inline CVector update_eta(const Scenario& s, const CMatrix& W, const RVector& xi) {
  if (xi.size() != s.num_users()) throw DimensionError("xi must have K entries");
  return eta_from_gains(s, link_gains(s, W), xi);
}

inline double surrogate_h(const Scenario& s, const CMatrix& W, double xi_gk, cdouble eta_gk,
                          int g, int k) {
  detail::check_user(s, g, k);
  return surrogate_value(s, link_gains(s, W), s.user_index(g, k), g, xi_gk, eta_gk);
}

}  // namespace mgbeam
