#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace mgbeam;
using mgbeam::fixtures::Gen;
using mgbeam::fixtures::make_scenario;

namespace {

CMatrix col(std::initializer_list<cdouble> v) {
  CMatrix m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (cdouble x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST(Generate, SingleAntennaAtZeroDb) {
  const Scenario s = generate_rayleigh_scenario(1, 1, {1}, 0.0, 7);
  EXPECT_EQ(s.H.rows(), 1);
  EXPECT_EQ(s.H.cols(), 1);
  EXPECT_DOUBLE_EQ(s.P_t, 1.0);
}

TEST(Generate, DefaultShape) {
  const Scenario s = generate_rayleigh_scenario(16, 3, {4, 4, 4}, 20.0, 11);
  EXPECT_EQ(s.num_users(), 12);
  EXPECT_DOUBLE_EQ(s.P_t, 100.0);
  EXPECT_TRUE((s.noise_power.array() == 1.0).all());
  EXPECT_TRUE((s.weights.array() == 1.0).all());
}

TEST(Generate, SameSeedSameChannels) {
  const Scenario a = generate_rayleigh_scenario(16, 3, {4, 4, 4}, 20.0, 5);
  const Scenario b = generate_rayleigh_scenario(16, 3, {4, 4, 4}, 20.0, 5);
  const Scenario c = generate_rayleigh_scenario(16, 3, {4, 4, 4}, 20.0, 6);
  EXPECT_TRUE(a.H == b.H);
  EXPECT_FALSE(a.H == c.H);
}

TEST(Generate, RejectsBadShapes) {
  EXPECT_THROW(generate_rayleigh_scenario(0, 1, {1}, 0.0, 1), DimensionError);
  EXPECT_THROW(generate_rayleigh_scenario(4, 2, {1}, 0.0, 1), DimensionError);
  EXPECT_THROW(generate_rayleigh_scenario(4, 1, {0}, 0.0, 1), DimensionError);
}

TEST(Sinr, NoInterference) {
  const Scenario s = make_scenario(col({1.0, 0.0}), {1}, 1.0, 4.0);
  EXPECT_DOUBLE_EQ(sinr(s, col({2.0, 0.0}), 0, 0), 4.0);
}

TEST(Sinr, ZeroBeamformer) {
  const Scenario s = make_scenario(col({1.0, 0.0}), {1}, 1.0, 4.0);
  EXPECT_DOUBLE_EQ(sinr(s, CMatrix::Zero(2, 1), 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(sinr_hat(s, CMatrix::Zero(2, 1), 0, 0), 0.0);
}

TEST(Sinr, TwoGroupsHandEvaluation) {
  CMatrix H(2, 2);
  H << 1.0, 0.0, 0.0, 1.0;
  const Scenario s = make_scenario(H, {1, 1}, 1.0, 10.0);
  CMatrix W(2, 2);
  // w_1 = (1,1), w_2 = (0,1): user 1 sees no leakage from w_2.
  W << 1.0, 0.0, 1.0, 1.0;
  EXPECT_DOUBLE_EQ(sinr(s, W, 0, 0), 1.0);
  // w_2 = (1,1): unit leakage, SINR = 1 / (1 + 1).
  W << 1.0, 1.0, 1.0, 1.0;
  EXPECT_DOUBLE_EQ(sinr(s, W, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(sinr(s, W, 1, 0), 0.5);
}

TEST(Sinr, RejectsBadIndices) {
  const Scenario s = make_scenario(col({1.0}), {1}, 1.0, 1.0);
  EXPECT_THROW(sinr(s, col({1.0}), 1, 0), DimensionError);
  EXPECT_THROW(sinr(s, col({1.0}), 0, 1), DimensionError);
  EXPECT_THROW(sinr(s, CMatrix::Ones(2, 1), 0, 0), DimensionError);
}

TEST(SinrHat, ScalarHandEvaluation) {
  const Scenario s = make_scenario(col({1.0}), {1}, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(sinr_hat(s, col({1.0}), 0, 0), 1.0);
}

TEST(SinrHat, MatchesSinrAtFullPower) {
  Gen gen(101);
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario s = gen.scenario(gen.integer(1, 8), gen.integer(1, 3), 3);
    const CMatrix W = scale_to_power(gen.complex_matrix(s.L, s.G), s.P_t).W;
    for (int g = 0; g < s.G; ++g) {
      for (int k = 0; k < s.group_sizes[g]; ++k) {
        const double a = sinr(s, W, g, k), b = sinr_hat(s, W, g, k);
        EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, a));
      }
    }
  }
}

TEST(SinrHat, ScaleInvariant) {
  Gen gen(102);
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario s = gen.scenario(gen.integer(1, 8), gen.integer(1, 3), 3);
    const CMatrix W = gen.complex_matrix(s.L, s.G);
    const double c = gen.real(1e-3, 1e3);
    for (int g = 0; g < s.G; ++g) {
      for (int k = 0; k < s.group_sizes[g]; ++k) {
        const double a = sinr_hat(s, W, g, k), b = sinr_hat(s, c * W, g, k);
        EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, a));
      }
    }
  }
}

TEST(GroupRate, SingleUserSinrThree) {
  const Scenario s = make_scenario(col({1.0}), {1}, 1.0, 3.0);
  EXPECT_NEAR(group_rate(s, col({std::sqrt(3.0)}), 0, false), 2.0, 1e-15);
  EXPECT_NEAR(group_rate(s, col({std::sqrt(3.0)}), 0, false, RateUnit::Nats), std::log(4.0), 1e-15);
}

TEST(GroupRate, MinimumOverUsers) {
  CMatrix H(1, 2);
  H << 1.0, std::sqrt(3.0);
  const Scenario s = make_scenario(H, {2}, 1.0, 1.0);
  EXPECT_NEAR(group_rate(s, col({1.0}), 0, false), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(group_rate(s, CMatrix::Zero(1, 1), 0, false), 0.0);
}

TEST(GroupRate, IsPointwiseMinimum) {
  Gen gen(103);
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario s = gen.scenario(gen.integer(1, 8), gen.integer(1, 3), 4);
    const CMatrix W = gen.complex_matrix(s.L, s.G);
    for (int g = 0; g < s.G; ++g) {
      const double r = group_rate(s, W, g, false);
      bool attained = false;
      for (int k = 0; k < s.group_sizes[g]; ++k) {
        const double rk = std::log2(1.0 + sinr(s, W, g, k));
        EXPECT_LE(r, rk + 1e-15);
        attained = attained || std::abs(r - rk) <= 1e-15;
      }
      EXPECT_TRUE(attained);
    }
  }
}

namespace {

// G orthogonal single-user groups whose SINRs give the requested rates in bits.
std::pair<Scenario, CMatrix> rate_fixture(const std::vector<double>& rates) {
  const int G = static_cast<int>(rates.size());
  const Scenario s = make_scenario(CMatrix::Identity(G, G), std::vector<int>(G, 1), 1.0, 1.0);
  CMatrix W = CMatrix::Zero(G, G);
  for (int g = 0; g < G; ++g) W(g, g) = std::sqrt(std::exp2(rates[g]) - 1.0);
  return {s, W};
}

}  // namespace

TEST(Wsr, UnitWeights) {
  auto [s, W] = rate_fixture({1.0, 2.0, 3.0});
  EXPECT_NEAR(wsr(s, W, false), 6.0, 1e-14);
}

TEST(Wsr, Weighted) {
  auto [s, W] = rate_fixture({1.0, 2.0});
  s.weights << 2.0, 0.5;
  EXPECT_NEAR(wsr(s, W, false), 3.0, 1e-14);
}

TEST(Wsr, MonotoneInEachSinr) {
  Gen gen(104);
  for (int trial = 0; trial < 50; ++trial) {
    Scenario s = gen.scenario(gen.integer(1, 8), gen.integer(1, 3), 3);
    const CMatrix W = gen.complex_matrix(s.L, s.G);
    const double before = wsr(s, W, false);
    // Lowering one user's noise raises only that user's SINR.
    const int u = gen.integer(0, s.num_users() - 1);
    s.noise_power(u) *= gen.real(0.1, 0.9);
    EXPECT_GE(wsr(s, W, false), before - 1e-15);
  }
}

TEST(TransmitPower, Examples) {
  EXPECT_DOUBLE_EQ(transmit_power(CMatrix::Zero(3, 2)), 0.0);
  EXPECT_DOUBLE_EQ(transmit_power(col({0.6, cdouble(0.0, 0.8)})), 1.0);
  CMatrix W(2, 2);
  W << 1.0, 0.0, 0.0, 2.0;
  EXPECT_DOUBLE_EQ(transmit_power(W), 5.0);
}

TEST(ScaleToPower, Examples) {
  CMatrix W(2, 1);
  W << 2.0, 0.0;
  EXPECT_TRUE(scale_to_power(W, 1.0).W.isApprox(W / 2.0, 1e-15));
  const CMatrix unit = col({0.6, 0.8});
  EXPECT_TRUE(scale_to_power(unit, 1.0).W.isApprox(unit, 1e-15));
  EXPECT_THROW(scale_to_power(CMatrix::Zero(2, 1), 1.0), DimensionError);
}

TEST(ScaleToPower, IdempotentAndExact) {
  Gen gen(105);
  for (int trial = 0; trial < 50; ++trial) {
    const CMatrix W = gen.complex_matrix(gen.integer(1, 8), gen.integer(1, 3));
    const double P = gen.real(0.01, 1000.0);
    const Beamformer once = scale_to_power(W, P);
    const Beamformer twice = scale_to_power(once, P);
    EXPECT_LE(std::abs(transmit_power(once.W) - P), 1e-12 * P);
    EXPECT_LE((once.W - twice.W).norm(), 1e-13 * once.W.norm());
  }
}

TEST(ScaleToPower, NormalizedWsrIdentity) {
  Gen gen(106);
  for (int trial = 0; trial < 50; ++trial) {
    const Scenario s = gen.scenario(gen.integer(1, 8), gen.integer(1, 3), 3);
    const CMatrix W = gen.complex_matrix(s.L, s.G) * gen.real(0.01, 100.0);
    const double a = wsr(s, scale_to_power(W, s.P_t).W, false);
    const double b = wsr(s, W, true);
    EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(b)));
  }
}

TEST(RangeSpaceResidual, Examples) {
  Gen gen(107);
  const Scenario s = gen.scenario(8, 2, 2);
  EXPECT_LE(range_space_residual(s, s.H * gen.complex_matrix(s.num_users(), s.G)), 1e-12);

  // A column orthogonal to every channel.
  CMatrix W = s.H * gen.complex_matrix(s.num_users(), s.G);
  const CMatrix orth = linalg::project_out(s.H, gen.complex_matrix(s.L, 1));
  W.col(0) += orth;
  EXPECT_NEAR(range_space_residual(s, W), orth.norm() / W.norm(), 1e-12);

  const Scenario square = generate_rayleigh_scenario(4, 2, {2, 2}, 10.0, 3);
  EXPECT_LE(range_space_residual(square, gen.complex_matrix(4, 2)), 1e-10);
}
