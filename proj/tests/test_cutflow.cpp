#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "nodeflow/cutflow.hpp"
#include "nodeflow/oracle.hpp"
#include "test_support.hpp"

using namespace nodeflow;
using nodeflow::testing::additive_net;
using nodeflow::testing::diamond_net;
using nodeflow::testing::line_net;
using nodeflow::testing::node_set;

namespace {

BoundaryFunction make_bf(BoundarySide side, std::vector<double> values) {
  BoundaryFunction f;
  f.side = side;
  f.width = std::countr_zero(values.size());
  f.values = std::move(values);
  return f;
}

void expect_lemma(const BoundaryFunction& r, double tol = 1e-9) {
  const Mask full = full_mask(r.width);
  EXPECT_NEAR(r(0), 0.0, tol);
  for (Mask a = 0; a <= full; ++a) {
    for (int k = 0; k < r.width; ++k) EXPECT_GE(r(a | (Mask{1} << k)) + scaled_tol(tol, r(a)), r(a));
    for (Mask b = 0; b <= full; ++b) {
      EXPECT_LE(r(a | b) + r(a & b), r(a) + r(b) + scaled_tol(tol, r(a) + r(b)));
    }
  }
}

std::vector<oracle::InstanceSpec> mixed_specs(int count, std::uint64_t base) {
  std::vector<oracle::InstanceSpec> out;
  oracle::SplitMix64 rng(base);
  for (int i = 0; i < count; ++i) {
    oracle::InstanceSpec s;
    s.seed = base + static_cast<std::uint64_t>(i);
    const int layers = 2 + static_cast<int>(rng.below(3));
    s.layer_sizes.push_back(1);
    for (int l = 1; l < layers - 1; ++l) s.layer_sizes.push_back(1 + static_cast<int>(rng.below(3)));
    s.layer_sizes.push_back(1);
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(CutValue, LineCuts) {
  const auto net = line_net();
  EXPECT_EQ(cut_value(net, node_set(net, {{1, 1}, {2, 1}})), 2.0);
  EXPECT_EQ(cut_value(net, node_set(net, {{1, 1}})), 3.0);
}

TEST(CutValue, DiamondCut) {
  const auto net = diamond_net();
  EXPECT_EQ(cut_value(net, node_set(net, {{1, 1}, {2, 2}})), 2.0);
}

TEST(MinCut, Line) {
  const auto net = line_net();
  const auto cut = min_cut(net);
  EXPECT_EQ(cut.value, 2.0);
  EXPECT_EQ(cut.members, node_set(net, {{1, 1}, {2, 1}}));
}

TEST(MinCut, Diamond) {
  const auto net = diamond_net();
  const auto cut = min_cut(net);
  EXPECT_EQ(cut.value, 2.0);
  EXPECT_EQ(cut.members, node_set(net, {{1, 1}, {2, 2}}));
}

TEST(MinCut, ZeroLayer) {
  const auto net = additive_net({1, 2, 2, 1}, {{{1.0, 2.0}}, {{0.0, 0.0}, {0.0, 0.0}}, {{3.0}, {1.0}}});
  const auto cut = min_cut(net);
  EXPECT_EQ(cut.value, 0.0);
  // Cheapest cut passes through the zero layer: Omega = {S, A, B}.
  EXPECT_EQ(cut.members, node_set(net, {{1, 1}, {2, 1}, {2, 2}}));
}

TEST(MinCut, TiesGoToLexSmallest) {
  // All four cuts of a 1-2-1 net with unit additive links have value 2.
  const auto net = additive_net({1, 2, 1}, {{{1.0, 1.0}}, {{1.0}, {1.0}}});
  const auto cut = min_cut(net);
  EXPECT_EQ(cut.value, 2.0);
  EXPECT_EQ(cut.members, node_set(net, {{1, 1}}));
  EXPECT_EQ(oracle::brute_min_cut(net).members, cut.members);
}

TEST(MinCut, WithBoundaryFlows) {
  const auto net = additive_net({2, 1}, {{{1.0}, {2.0}}});
  const BoundaryFlows b{{1.0, 1.0}, {2.0}};
  const auto cut = min_cut(net, b);
  const auto brute = oracle::brute_min_cut(net, b);
  EXPECT_DOUBLE_EQ(cut.value, brute.value);
  EXPECT_EQ(cut.members, brute.members);
  EXPECT_DOUBLE_EQ(cut.value, 2.0);
}

TEST(BoundaryFunction, ASideLine) {
  const auto net = additive_net({1, 1}, {{{3.0}}});
  const auto ra = boundary_function(net, BoundarySide::A, {5.0});
  EXPECT_EQ(ra(1), 3.0);
  EXPECT_EQ(ra(0), 0.0);
}

TEST(BoundaryFunction, BSideLine) {
  const auto net = additive_net({1, 1}, {{{2.0}}});
  const auto rb = boundary_function(net, BoundarySide::B, {5.0});
  EXPECT_EQ(rb(1), 2.0);
  EXPECT_EQ(rb(0), 0.0);
}

TEST(BoundaryFunction, DiamondMiddleLayer) {
  const auto net = diamond_net();
  const auto a = subnetwork(net, 1, 2);
  const auto b = subnetwork(net, 2, 3);
  const auto ra = boundary_function(a.network, BoundarySide::A, {2.0});
  const auto rb = boundary_function(b.network, BoundarySide::B, {2.0});
  EXPECT_EQ(ra.values, (std::vector<double>{0.0, 1.0, 2.0, 2.0}));
  EXPECT_EQ(rb.values, (std::vector<double>{0.0, 2.0, 1.0, 2.0}));
  EXPECT_EQ(intersection_bound(ra, rb), 2.0);
}

TEST(Polymatroid, BoxesIntersect) {
  const auto r = make_bf(BoundarySide::A, {0.0, 1.0, 2.0, 3.0});
  const auto x = polymatroid_intersect(r, r, 3.0);
  EXPECT_EQ(x, (std::vector<double>{1.0, 2.0}));
}

TEST(Polymatroid, DiamondMiddleLayer) {
  const auto ra = make_bf(BoundarySide::A, {0.0, 1.0, 2.0, 3.0});
  const auto rb = make_bf(BoundarySide::B, {0.0, 2.0, 1.0, 3.0});
  const auto x = polymatroid_intersect(ra, rb, 2.0);
  EXPECT_EQ(x, (std::vector<double>{1.0, 1.0}));
}

TEST(Polymatroid, TargetAboveBound) {
  const auto r = make_bf(BoundarySide::A, {0.0, 1.0, 2.0, 3.0});
  try {
    polymatroid_intersect(r, r, 10.0);
    FAIL() << "expected Infeasible";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(Polymatroid, GreedyReductionInIndexOrder) {
  const auto r = make_bf(BoundarySide::A, {0.0, 1.0, 2.0, 3.0});
  const auto x = polymatroid_intersect(r, r, 2.5);
  EXPECT_EQ(x, (std::vector<double>{0.5, 2.0}));
}

TEST(MaxFlow, Line) {
  const auto f = max_flow(line_net());
  EXPECT_EQ(f.at({1, 1}), 2.0);
  EXPECT_EQ(f.at({2, 1}), 2.0);
  EXPECT_EQ(f.at({3, 1}), 2.0);
}

TEST(MaxFlow, Diamond) {
  const auto f = max_flow(diamond_net());
  EXPECT_EQ(f.at({1, 1}), 2.0);
  EXPECT_EQ(f.at({2, 1}), 1.0);
  EXPECT_EQ(f.at({2, 2}), 1.0);
  EXPECT_EQ(f.at({3, 1}), 2.0);
}

TEST(MaxFlow, NonUnicastNeedsBoundary) {
  const auto net = additive_net({2, 1}, {{{1.0}, {2.0}}});
  try {
    max_flow(net);
    FAIL() << "expected NotUnicast";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotUnicast);
  }
}

TEST(MaxFlow, BoundaryFlowsMultiSource) {
  const auto net = additive_net({2, 2, 1}, {{{1.0, 0.5}, {0.5, 1.0}}, {{1.0}, {1.0}}});
  const BoundaryFlows b{{1.0, 0.75}, {1.75}};
  const auto f = max_flow(net, b);
  EXPECT_TRUE(verify_flow(net, f).pass);
  EXPECT_EQ(f.layer(1), b.first);
  EXPECT_EQ(f.layer(3), b.last);
}

TEST(MaxFlow, InfeasibleBoundary) {
  const auto net = additive_net({2, 1}, {{{1.0}, {2.0}}});
  for (const BoundaryFlows& b : {BoundaryFlows{{2.0, 1.0}, {3.0}}, BoundaryFlows{{1.0, 1.0}, {1.5}}}) {
    try {
      max_flow(net, b);
      FAIL() << "expected InfeasibleBoundary";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InfeasibleBoundary);
    }
  }
}

TEST(MaxFlow, PivotOverride) {
  const auto net = additive_net({1, 2, 2, 2, 1}, {{{2.0, 1.0}},
                                                  {{1.0, 1.0}, {0.5, 1.0}},
                                                  {{1.0, 0.25}, {1.0, 1.0}},
                                                  {{1.5}, {1.0}}});
  const double value = min_cut(net).value;
  for (int l0 = 2; l0 <= 4; ++l0) {
    MaxFlowOptions opt;
    opt.l0 = l0;
    const auto f = max_flow(net, std::nullopt, opt);
    EXPECT_NEAR(f.value(), value, 1e-9) << "l0 " << l0;
    EXPECT_TRUE(verify_flow(net, f).pass) << "l0 " << l0;
  }
  MaxFlowOptions bad;
  bad.l0 = 5;
  EXPECT_THROW(max_flow(net, std::nullopt, bad), Error);
}

TEST(VerifyFlow, DiamondFlowIsTight) {
  const auto net = diamond_net();
  const auto rep = verify_flow(net, max_flow(net));
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.min_slack, 0.0, 1e-12);
}

TEST(VerifyFlow, OverloadedRelay) {
  const auto net = diamond_net();
  Flow f(net.layer_sizes());
  f.at({1, 1}) = 2.0;
  f.at({2, 1}) = 2.0;
  f.at({3, 1}) = 2.0;
  const auto rep = verify_flow(net, f);
  EXPECT_FALSE(rep.pass);
  bool found = false;
  for (const auto& v : rep.violations) {
    if (v.layer == 1 && v.tx == 1 && v.rx == 1) {
      found = true;
      EXPECT_EQ(v.lhs, 2.0);
      EXPECT_EQ(v.rhs, 1.0);
    }
  }
  EXPECT_TRUE(found);
}

TEST(VerifyFlow, ZeroFlowPasses) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = oracle::random_instance({seed, {1, 3, 3, 1}});
    EXPECT_TRUE(verify_flow(inst.network, Flow(inst.network.layer_sizes())).pass);
  }
}

TEST(CutflowProperty, DualityAgainstBruteForce) {
  for (const auto& spec : mixed_specs(40, 500)) {
    const auto inst = oracle::random_instance(spec);
    const auto& net = inst.network;
    const auto cut = min_cut(net);
    const auto brute_cut = oracle::brute_min_cut(net);
    const auto flow = max_flow(net);
    const auto lp = oracle::brute_max_flow(net);
    const double scale = std::max(1.0, cut.value);
    EXPECT_NEAR(cut.value, brute_cut.value, 1e-9 * scale) << "seed " << spec.seed;
    EXPECT_EQ(cut.members, brute_cut.members) << "seed " << spec.seed;
    EXPECT_NEAR(flow.value(), cut.value, 1e-6 * scale) << "seed " << spec.seed;
    EXPECT_NEAR(lp.value, cut.value, 1e-6 * scale) << "seed " << spec.seed;
    EXPECT_TRUE(verify_flow(net, flow, 1e-6).pass) << "seed " << spec.seed;
    EXPECT_NEAR(cut_value(net, cut.members), cut.value, 1e-9 * scale);
  }
}

TEST(CutflowProperty, BoundaryFunctionsSatisfyLemma) {
  for (const auto& spec : mixed_specs(20, 900)) {
    const auto inst = oracle::random_instance(spec);
    MaxFlowOptions opt;
    int seen = 0;
    opt.on_boundary_function = [&](const BoundaryFunction& r) {
      ++seen;
      expect_lemma(r);
    };
    max_flow(inst.network, std::nullopt, opt);
    if (inst.network.layer_count() > 2) {
      EXPECT_GT(seen, 0);
    }
  }
}

TEST(CutflowProperty, PositiveHomogeneity) {
  for (const auto& spec : mixed_specs(10, 1300)) {
    const auto inst = oracle::random_instance(spec);
    const double base = max_flow(inst.network).value();
    for (double alpha : {0.5, 2.0, 3.7}) {
      const double v = max_flow(nodeflow::testing::scaled(inst.network, alpha)).value();
      EXPECT_NEAR(v, alpha * base, 1e-9 * std::max(1.0, alpha * base));
    }
  }
}

TEST(CutflowProperty, ScaledDiamondHalvesFlow) {
  const auto net = nodeflow::testing::scaled(diamond_net(), 0.5);
  EXPECT_NEAR(max_flow(net).value(), 1.0, 1e-12);
  EXPECT_NEAR(oracle::brute_max_flow(net).value, 1.0, 1e-9);
}

TEST(CutflowProperty, BoundaryFlowDuality) {
  // With boundary flows the LP must reach the given totals exactly when the
  // boundary min-cut allows it.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto inst = oracle::random_instance({seed, {2, 2, 2}});
    const auto& net = inst.network;
    oracle::SplitMix64 rng(seed * 7);
    BoundaryFlows b{{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)}, {0.0, 0.0}};
    const double total = b.first[0] + b.first[1];
    const double share = rng.uniform(0.0, 1.0);
    b.last = {share * total, (1.0 - share) * total};
    const auto cut = min_cut(net, b);
    EXPECT_NEAR(cut.value, oracle::brute_min_cut(net, b).value, 1e-9);
    if (total <= cut.value + 1e-9) {
      const auto f = max_flow(net, b);
      EXPECT_TRUE(verify_flow(net, f, 1e-6).pass) << "seed " << seed;
      EXPECT_NEAR(oracle::brute_max_flow(net, b).value, total, 1e-6);
    } else {
      EXPECT_THROW(max_flow(net, b), Error);
      EXPECT_THROW(oracle::brute_max_flow(net, b), Error);
    }
  }
}
