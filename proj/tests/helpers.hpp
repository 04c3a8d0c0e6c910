#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mgbeam/mgbeam.hpp"

namespace mgbeam::fixtures {

/// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::uint64_t seed() { return rng_(); }

  CMatrix complex_matrix(Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    CMatrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cdouble(n(rng_), n(rng_));
    }
    return m;
  }

  std::vector<int> group_sizes(int G, int max_size) {
    std::vector<int> out(static_cast<std::size_t>(G));
    for (auto& k : out) k = integer(1, max_size);
    return out;
  }

  /// Rayleigh scenario with random shape, SNR and group weights.
  Scenario scenario(int L, int G, int max_group, double snr_lo = -10.0, double snr_hi = 30.0) {
    Scenario s = generate_rayleigh_scenario(L, G, group_sizes(G, max_group), real(snr_lo, snr_hi), seed());
    for (int g = 0; g < G; ++g) s.weights(g) = real(0.5, 2.0);
    return s;
  }

 private:
  std::mt19937_64 rng_;
};

/// Scenario from explicit channel columns with unit weights.
inline Scenario make_scenario(const CMatrix& H, std::vector<int> group_sizes, double noise, double P_t) {
  Scenario s;
  s.L = static_cast<int>(H.rows());
  s.G = static_cast<int>(group_sizes.size());
  s.group_sizes = std::move(group_sizes);
  s.H = H;
  s.noise_power = RVector::Constant(H.cols(), noise);
  s.P_t = P_t;
  s.weights = RVector::Ones(s.G);
  s.validate();
  return s;
}

inline CmState state_at(const Scenario& s, const StructureBasis& b, const Coefficients& c) {
  return make_cm_state(s, reduced_link_gains(b, c), 1);
}

/// Central-difference gradient of sum_u delta_u h_u(W) over Re/Im of each entry.
inline CMatrix fd_weighted_surrogate_gradient(const Scenario& s, const CmState& st,
                                              const RVector& delta, const CMatrix& W,
                                              double step = 1e-6) {
  const auto f = [&](const CMatrix& x) {
    return delta.dot(surrogate_values(s, link_gains(s, x), st));
  };
  CMatrix grad(W.rows(), W.cols());
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    for (Eigen::Index i = 0; i < W.rows(); ++i) {
      CMatrix p = W, m = W;
      p(i, j) += step;
      m(i, j) -= step;
      const double re = (f(p) - f(m)) / (2 * step);
      p = W;
      m = W;
      p(i, j) += cdouble(0, step);
      m(i, j) -= cdouble(0, step);
      const double im = (f(p) - f(m)) / (2 * step);
      grad(i, j) = cdouble(re, im);
    }
  }
  return grad;
}

}  // namespace mgbeam::fixtures
