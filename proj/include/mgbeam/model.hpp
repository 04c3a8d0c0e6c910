#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mgbeam/linalg.hpp"

namespace mgbeam {

/// Per-group coefficient vectors of a (possibly reduced) beamformer.
using Coefficients = std::vector<CVector>;

enum class RateUnit { Bits, Nats };

inline double convert_rate(double nats, RateUnit unit) {
  return unit == RateUnit::Bits ? nats / std::log(2.0) : nats;
}

/**
 * Multi-group multicast downlink instance.
 *
 * Users are ordered group-major everywhere: column `user_index(g, k)` of `H`
 * is the channel of user k in group g, and the same ordering is used for
 * noise powers, auxiliary variables and dual variables.
 */
struct Scenario {
  int L = 0;
  int G = 0;
  std::vector<int> group_sizes;
  CMatrix H;           ///< L x K channel matrix.
  RVector noise_power; ///< sigma^2 per user, length K.
  double P_t = 0.0;
  RVector weights;     ///< zeta per group, length G.

  int num_users() const {
    return std::accumulate(group_sizes.begin(), group_sizes.end(), 0);
  }

  int group_offset(int g) const {
    return std::accumulate(group_sizes.begin(), group_sizes.begin() + g, 0);
  }

  int user_index(int g, int k) const { return group_offset(g) + k; }

  /// Group of each user, group-major.
  std::vector<int> user_groups() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(num_users()));
    for (int g = 0; g < G; ++g) out.insert(out.end(), group_sizes[g], g);
    return out;
  }

  /// Channels of group g, L x K_g.
  CMatrix group_channels(int g) const {
    return H.middleCols(group_offset(g), group_sizes[g]);
  }

  /// Channels of every user outside group g, L x (K - K_g).
  CMatrix complement_channels(int g) const {
    const int K = num_users();
    const int off = group_offset(g);
    const int kg = group_sizes[g];
    CMatrix out(L, K - kg);
    out.leftCols(off) = H.leftCols(off);
    out.rightCols(K - off - kg) = H.rightCols(K - off - kg);
    return out;
  }

  /// Throws DimensionError unless every invariant holds.
  void validate() const {
    if (L < 1 || G < 1) throw DimensionError("L and G must be positive");
    if (static_cast<int>(group_sizes.size()) != G) {
      throw DimensionError("group_sizes must have G entries");
    }
    for (int kg : group_sizes) {
      if (kg < 1) throw DimensionError("every group needs at least one user");
    }
    const int K = num_users();
    if (H.rows() != L || H.cols() != K) {
      throw DimensionError("H must be L x K");
    }
    if (noise_power.size() != K) throw DimensionError("noise_power must have K entries");
    if (weights.size() != G) throw DimensionError("weights must have G entries");
    if (!(P_t > 0.0) || !std::isfinite(P_t)) throw DimensionError("P_t must be positive");
    if (!((noise_power.array() > 0.0).all())) {
      throw DimensionError("noise powers must be positive");
    }
    if (!((weights.array() > 0.0).all())) throw DimensionError("weights must be positive");
    if (!H.allFinite()) throw DimensionError("H must be finite");
  }
};

/// Antenna-domain beamformer together with the reduced coefficients that
/// produced it.
struct Beamformer {
  Coefficients coeffs;
  CMatrix W;  ///< L x G, column g is w_g.
};

/// I.i.d. CN(0, I) channels, unit noise, P_t = 10^(snr_db / 10), unit weights.
inline Scenario generate_rayleigh_scenario(int L, int G, const std::vector<int>& group_sizes,
                                           double snr_db, std::uint64_t seed) {
  if (L < 1 || G < 1 || static_cast<int>(group_sizes.size()) != G) {
    throw DimensionError("invalid scenario dimensions");
  }
  for (int kg : group_sizes) {
    if (kg < 1) throw DimensionError("every group needs at least one user");
  }
  Scenario s;
  s.L = L;
  s.G = G;
  s.group_sizes = group_sizes;
  const int K = s.num_users();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  s.H.resize(L, K);
  for (int u = 0; u < K; ++u) {
    for (int l = 0; l < L; ++l) {
      const double re = normal(rng);
      const double im = normal(rng);
      s.H(l, u) = cdouble(re, im);
    }
  }
  s.noise_power = RVector::Ones(K);
  s.P_t = std::pow(10.0, snr_db / 10.0);
  s.weights = RVector::Ones(G);
  s.validate();
  return s;
}

/**
 * Inner products h_u^H w_i for every user u and stream i (K x G) plus the
 * total transmit power. Every SINR, rate and surrogate quantity is a function
 * of these alone, which lets reduced-dimension solvers skip the antenna
 * domain entirely.
 */
struct LinkGains {
  CMatrix cross;
  double power = 0.0;
};

inline double transmit_power(const CMatrix& W) { return W.squaredNorm(); }

inline LinkGains link_gains(const Scenario& s, const CMatrix& W) {
  if (W.rows() != s.L || W.cols() != s.G) throw DimensionError("W must be L x G");
  return {s.H.adjoint() * W, transmit_power(W)};
}

namespace detail {

inline void check_user(const Scenario& s, int g, int k) {
  if (g < 0 || g >= s.G || k < 0 || k >= s.group_sizes[g]) {
    throw DimensionError("user index out of range");
  }
}

inline double safe_ratio(double num, double den) {
  if (num < kDenominatorFloor && den < kDenominatorFloor) return 0.0;
  return num / std::max(den, kDenominatorFloor);
}

}  // namespace detail

/// SINR of user `u` in group `g` from precomputed gains. `normalized` selects
/// the power-normalized variant whose noise term is (sigma^2 / P_t) Tr(W W^H).
inline double sinr_from_gains(const Scenario& s, const LinkGains& gains, int u, int g,
                              bool normalized) {
  const double signal = std::norm(gains.cross(u, g));
  double interference = 0.0;
  for (int i = 0; i < s.G; ++i) {
    if (i != g) interference += std::norm(gains.cross(u, i));
  }
  const double noise = normalized ? s.noise_power(u) / s.P_t * gains.power : s.noise_power(u);
  return detail::safe_ratio(signal, interference + noise);
}

/// Per-group rate in nats: minimum of ln(1 + SINR) over the group.
inline double group_rate_nats(const Scenario& s, const LinkGains& gains, int g, bool normalized) {
  const int off = s.group_offset(g);
  double r = std::numeric_limits<double>::infinity();
  for (int k = 0; k < s.group_sizes[g]; ++k) {
    r = std::min(r, std::log1p(sinr_from_gains(s, gains, off + k, g, normalized)));
  }
  return r;
}

inline double wsr_nats(const Scenario& s, const LinkGains& gains, bool normalized) {
  double total = 0.0;
  for (int g = 0; g < s.G; ++g) total += s.weights(g) * group_rate_nats(s, gains, g, normalized);
  return total;
}

inline double sinr(const Scenario& s, const CMatrix& W, int g, int k) {
  detail::check_user(s, g, k);
  return sinr_from_gains(s, link_gains(s, W), s.user_index(g, k), g, false);
}

inline double sinr_hat(const Scenario& s, const CMatrix& W, int g, int k) {
  detail::check_user(s, g, k);
  return sinr_from_gains(s, link_gains(s, W), s.user_index(g, k), g, true);
}

inline double group_rate(const Scenario& s, const CMatrix& W, int g, bool normalized,
                         RateUnit unit = RateUnit::Bits) {
  if (g < 0 || g >= s.G) throw DimensionError("group index out of range");
  return convert_rate(group_rate_nats(s, link_gains(s, W), g, normalized), unit);
}

inline double wsr(const Scenario& s, const CMatrix& W, bool normalized,
                  RateUnit unit = RateUnit::Bits) {
  return convert_rate(wsr_nats(s, link_gains(s, W), normalized), unit);
}

inline Beamformer scale_to_power(const Beamformer& bf, double P_t) {
  const double p = transmit_power(bf.W);
  if (!(p > 0.0)) throw DimensionError("cannot scale a zero-power beamformer");
  const double c = std::sqrt(P_t / p);
  Beamformer out{bf.coeffs, c * bf.W};
  for (auto& cg : out.coeffs) cg *= c;
  return out;
}

/// Scales a plain antenna-domain beamformer; coefficients are its columns.
inline Beamformer scale_to_power(const CMatrix& W, double P_t) {
  Beamformer bf;
  bf.W = W;
  for (Eigen::Index g = 0; g < W.cols(); ++g) bf.coeffs.emplace_back(W.col(g));
  return scale_to_power(bf, P_t);
}

/// Relative distance of W from the column space of H; zero iff every
/// beamformer lies in the range space of the channels.
inline double range_space_residual(const Scenario& s, const CMatrix& W) {
  const CMatrix proj = s.H * (linalg::pinv(s.H) * W);
  return (W - proj).norm() / std::max(W.norm(), kDenominatorFloor);
}

}  // namespace mgbeam
