#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"

using namespace mgbeam;
using mgbeam::fixtures::Gen;
using mgbeam::fixtures::state_at;

namespace {

struct Subproblem {
  Scenario s;
  StructureBasis b;
  CmState st;
  Coefficients start;
};

Subproblem subproblem(const Scenario& s) {
  StructureBasis b = build_basis(s, StructureKind::Full);
  Coefficients start = initial_coefficients(s, b);
  CmState st = state_at(s, b, start);
  return {s, std::move(b), std::move(st), std::move(start)};
}

BaselineOptions options(BaselineKind kind) {
  BaselineOptions o;
  o.kind = kind;
  o.max_iterations = 3000;
  o.tolerance = 1e-9;
  o.patience = 300;
  return o;
}

}  // namespace

TEST(Lse, ClosedFormForEqualValues) {
  for (int K : {1, 2, 5}) {
    for (double mu : {0.01, 0.1, 1.0}) {
      EXPECT_NEAR(lse_group(RVector::Constant(K, 2.5), mu), 2.5 - mu * std::log(K), 1e-14);
    }
  }
}

TEST(Lse, Sandwich) {
  Gen gen(601);
  for (int trial = 0; trial < 1000; ++trial) {
    const int K = gen.integer(1, 8);
    RVector h(K);
    for (int k = 0; k < K; ++k) h(k) = gen.real(-50.0, 50.0);
    const double mu = std::pow(10.0, gen.real(-4.0, 1.0));
    const double v = lse_group(h, mu);
    EXPECT_LE(v, h.minCoeff() + 1e-12);
    EXPECT_GE(v, h.minCoeff() - mu * std::log(K) - 1e-12);
  }
}

TEST(Lse, NoOverflowForLargeSpreads) {
  RVector h(3);
  h << -1e4, 0.0, 1e4;
  EXPECT_TRUE(std::isfinite(lse_group(h, 1e-3)));
  EXPECT_NEAR(lse_group(h, 1e-3), -1e4, 1e-9);
}

TEST(Baselines, SingleUserGroupsMatchPagd) {
  Gen gen(602);
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = gen.scenario(gen.integer(3, 8), gen.integer(1, 3), 1, 0.0, 20.0);
    const Subproblem p = subproblem(s);
    const double pagd = solve_subproblem(s, p.b, p.st).primal;
    for (BaselineKind kind : {BaselineKind::SA, BaselineKind::LSE}) {
      const BaselineResult r = kind == BaselineKind::SA
                                   ? solve_subproblem_sa(s, p.b, p.st, options(kind), p.start)
                                   : solve_subproblem_lse(s, p.b, p.st, options(kind), p.start);
      EXPECT_LE(std::abs(r.value - pagd), 1e-2 * std::abs(pagd));
    }
  }
}

TEST(Baselines, NeverExceedPagdDualBound) {
  Gen gen(603);
  for (int trial = 0; trial < 20; ++trial) {
    const Scenario s = gen.scenario(gen.integer(4, 12), gen.integer(1, 3), 4, 0.0, 30.0);
    const Subproblem p = subproblem(s);
    const PagdReport cert = solve_subproblem(s, p.b, p.st);
    BaselineOptions o;
    const BaselineResult sa = solve_subproblem_sa(s, p.b, p.st, o, p.start);
    o.kind = BaselineKind::LSE;
    const BaselineResult lse = solve_subproblem_lse(s, p.b, p.st, o, p.start);
    EXPECT_LE(sa.value, cert.dual + 1e-6);
    EXPECT_LE(lse.value, cert.dual + 1e-6);
  }
}

TEST(Baselines, ReturnBestIterate) {
  Gen gen(604);
  for (int trial = 0; trial < 10; ++trial) {
    const Scenario s = gen.scenario(gen.integer(4, 12), gen.integer(1, 3), 4, 0.0, 30.0);
    const Subproblem p = subproblem(s);
    for (BaselineKind kind : {BaselineKind::SA, BaselineKind::LSE}) {
      BaselineOptions o;
      o.kind = kind;
      const BaselineResult r = kind == BaselineKind::SA ? solve_subproblem_sa(s, p.b, p.st, o, p.start)
                                                        : solve_subproblem_lse(s, p.b, p.st, o, p.start);
      EXPECT_GE(r.value, p.st.surrogate_wsr - 1e-12);
      const RVector h = surrogate_values(s, link_gains(s, r.beamformer.W), p.st);
      EXPECT_NEAR(weighted_group_min(s, h), r.value, 1e-9 * std::max(1.0, std::abs(r.value)));
    }
  }
}

TEST(Baselines, RejectInvalidOptions) {
  const Subproblem p = subproblem(generate_rayleigh_scenario(4, 2, {2, 2}, 10.0, 1));
  BaselineOptions o;
  o.mu = 0.0;
  EXPECT_THROW(solve_subproblem_lse(p.s, p.b, p.st, o, p.start), DimensionError);
}

TEST(Baselines, DriveCyclicMaximization) {
  const Scenario s = generate_rayleigh_scenario(16, 3, {4, 4, 4}, 25.0, 9);
  const StructureBasis b = build_basis(s, StructureKind::Full);
  for (BaselineKind kind : {BaselineKind::SA, BaselineKind::LSE}) {
    BaselineInner inner;
    inner.options.kind = kind;
    const CmReport rep = run_cm(s, b, inner);
    for (std::size_t t = 1; t < rep.trajectory_bits.size(); ++t) {
      EXPECT_GE(rep.trajectory_bits[t], rep.trajectory_bits[t - 1] - 1e-9);
    }
    EXPECT_TRUE(std::isnan(rep.inner.front().relative_gap));
    EXPECT_NEAR(transmit_power(rep.beamformer.W), s.P_t, 1e-10 * s.P_t);
  }
}
