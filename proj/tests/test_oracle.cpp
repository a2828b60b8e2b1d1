#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nodeflow/cutflow.hpp"
#include "nodeflow/oracle.hpp"
#include "test_support.hpp"

using namespace nodeflow;
namespace nt = nodeflow::testing;

TEST(SplitMix, KnownSequence) {
  oracle::SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ull);
}

TEST(SplitMix, UniformRange) {
  oracle::SplitMix64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double w = rng.uniform(-2.0, 3.0);
    EXPECT_GE(w, -2.0);
    EXPECT_LT(w, 3.0);
    EXPECT_LT(rng.below(7), 7u);
  }
}

TEST(SplitMix, ComplexNormalHasUnitPower) {
  oracle::SplitMix64 rng(3);
  double power = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) power += std::norm(rng.complex_normal());
  EXPECT_NEAR(power / n, 1.0, 0.05);
}

TEST(BruteCut, Line) {
  const auto cut = oracle::brute_min_cut(nt::line_net());
  EXPECT_EQ(cut.value, 2.0);
  EXPECT_EQ(cut.members, nt::node_set(nt::line_net(), {{1, 1}, {2, 1}}));
}

TEST(BruteCut, Diamond) {
  const auto net = nt::diamond_net();
  const auto cut = oracle::brute_min_cut(net);
  EXPECT_EQ(cut.value, 2.0);
  EXPECT_EQ(cut.members, nt::node_set(net, {{1, 1}, {2, 2}}));
}

TEST(BruteCut, TwoLayers) {
  const auto net = nt::additive_net({1, 2}, {{{1.5, 2.5}}});
  EXPECT_EQ(oracle::brute_min_cut(net).value, 4.0);
}

TEST(BruteCut, SizeGuard) {
  const auto inst = oracle::random_instance(oracle::family_spec(1, {1, 4, 4, 4, 4, 4, 1}, oracle::Family::Additive));
  EXPECT_THROW(oracle::brute_min_cut(inst.network), Error);
}

TEST(TableauSimplex, SmallProgram) {
  // max x + y  s.t. x + 2y <= 4, 3x + y <= 6.
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 3, 1;
  Eigen::VectorXd b(2);
  b << 4, 6;
  Eigen::VectorXd c(2);
  c << 1, 1;
  const auto r = oracle::tableau_simplex(a, b, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), c);
  EXPECT_NEAR(r.objective, 2.8, 1e-12);
  EXPECT_NEAR(r.x[0], 1.6, 1e-12);
  EXPECT_NEAR(r.x[1], 1.2, 1e-12);
}

TEST(TableauSimplex, InfeasibleEquality) {
  Eigen::MatrixXd a(1, 1);
  a << 1;
  Eigen::VectorXd b(1);
  b << 1;
  Eigen::MatrixXd e(1, 1);
  e << 1;
  Eigen::VectorXd f(1);
  f << 2;
  Eigen::VectorXd c(1);
  c << 1;
  EXPECT_THROW(oracle::tableau_simplex(a, b, e, f, c), Error);
}

TEST(BruteFlow, Line) { EXPECT_NEAR(oracle::brute_max_flow(nt::line_net()).value, 2.0, 1e-9); }

TEST(BruteFlow, Diamond) {
  const auto r = oracle::brute_max_flow(nt::diamond_net());
  EXPECT_NEAR(r.value, 2.0, 1e-9);
  EXPECT_TRUE(verify_flow(nt::diamond_net(), r.flow).pass);
}

TEST(BruteFlow, ScaledDiamond) {
  EXPECT_NEAR(oracle::brute_max_flow(nt::scaled(nt::diamond_net(), 0.5)).value, 1.0, 1e-9);
}

TEST(Generator, Deterministic) {
  const oracle::InstanceSpec spec{77, {1, 3, 2, 1}};
  const auto a = oracle::random_instance(spec);
  const auto b = oracle::random_instance(spec);
  EXPECT_EQ(a.families, b.families);
  for (int l = 1; l < 4; ++l) {
    EXPECT_EQ(oracle::detail::value_table(a.network.oracle(l)), oracle::detail::value_table(b.network.oracle(l)));
  }
}

TEST(Generator, SeedsDiffer) {
  const auto a = oracle::random_instance(oracle::family_spec(1, {1, 2, 1}, oracle::Family::Additive));
  const auto b = oracle::random_instance(oracle::family_spec(2, {1, 2, 1}, oracle::Family::Additive));
  EXPECT_NE(oracle::detail::value_table(a.network.oracle(1)), oracle::detail::value_table(b.network.oracle(1)));
}

TEST(Generator, TwoLayerInstance) {
  const auto inst = oracle::random_instance({5, {1, 1}});
  EXPECT_EQ(inst.network.layer_count(), 2);
  EXPECT_EQ(inst.families.size(), 1u);
}

TEST(Generator, FamilyWeightsSelect) {
  const auto inst = oracle::random_instance(oracle::family_spec(3, {1, 2, 2, 1}, oracle::Family::Gaussian));
  EXPECT_TRUE(inst.all(oracle::Family::Gaussian));
  EXPECT_TRUE(inst.has_models());
  const auto add = oracle::random_instance(oracle::family_spec(3, {1, 2, 1}, oracle::Family::Additive));
  EXPECT_FALSE(add.has_models());
  EXPECT_THROW(add.models(), Error);
}

TEST(Generator, RejectsBadSpecs) {
  EXPECT_THROW(oracle::random_instance({1, {1}}), Error);
  EXPECT_THROW(oracle::random_instance({1, {1, 5, 1}}), Error);
  oracle::InstanceSpec zero{1, {1, 1}};
  zero.weights = {0.0, 0.0, 0.0, 0.0};
  EXPECT_THROW(oracle::random_instance(zero), Error);
}

TEST(Generator, DiscreteLayersPassAxioms) {
  oracle::SplitMix64 rng(11);
  for (int t = 1; t <= 3; ++t) {
    for (int r = 1; r <= 3; ++r) {
      const auto m = oracle::random_discrete_model(rng, t, r);
      EXPECT_TRUE(check_capacity_axioms(CapacityOracle::discrete(m)).pass());
    }
  }
}

TEST(OracleProperty, BruteCutMatchesBruteFlow) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::vector<int> sizes{1, 1 + static_cast<int>(seed % 3), 1 + static_cast<int>((seed / 3) % 3), 1};
    const auto inst = oracle::random_instance({seed, sizes});
    const double cut = oracle::brute_min_cut(inst.network).value;
    const double flow = oracle::brute_max_flow(inst.network).value;
    EXPECT_NEAR(cut, flow, 1e-9 * std::max(1.0, cut)) << "seed " << seed;
  }
}

TEST(OracleProperty, BruteFlowIsFeasible) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = oracle::random_instance({seed, {1, 2, 2, 1}});
    const auto r = oracle::brute_max_flow(inst.network);
    EXPECT_TRUE(verify_flow(inst.network, r.flow, 1e-7).pass) << "seed " << seed;
    EXPECT_NEAR(r.flow.value(), r.value, 1e-9);
  }
}
