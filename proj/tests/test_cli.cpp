#include <gtest/gtest.h>

#include <string>

#include "nodeflow/io.hpp"
#include "test_support.hpp"

using nodeflow::io::Json;
namespace nt = nodeflow::testing;

namespace {

Json parsed(const nt::CliResult& r) { return Json::parse(r.out); }

}  // namespace

TEST(Cli, MinCutDiamond) {
  const auto r = nt::run_cli("mincut " + nt::sample("diamond.json"));
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "{\"value\":2.0,\"cut\":[\"1.1\",\"2.2\"]}\n");
}

TEST(Cli, MaxFlowMatchesMinCut) {
  for (const char* name : {"line.json", "diamond.json", "det3.json", "gaussian_relay.json", "binary_relay.json"}) {
    SCOPED_TRACE(name);
    const auto cut = nt::run_cli("mincut " + nt::sample(name));
    const auto flow = nt::run_cli("maxflow " + nt::sample(name));
    ASSERT_EQ(cut.status, 0);
    ASSERT_EQ(flow.status, 0);
    EXPECT_NEAR(parsed(cut).at("value").get<double>(), parsed(flow).at("value").get<double>(), 1e-9);
  }
}

TEST(Cli, ValidateAccepts) {
  const auto r = nt::run_cli("validate " + nt::sample("diamond.json"));
  EXPECT_EQ(r.status, 0);
  EXPECT_TRUE(parsed(r).at("valid").get<bool>());
}

TEST(Cli, ValidateRejectsNonMonotoneTable) {
  const auto r = nt::run_cli("validate " + nt::fixture("nonmonotone.json"));
  EXPECT_EQ(r.status, 1);
  const Json j = parsed(r);
  EXPECT_FALSE(j.at("valid").get<bool>());
  const Json& o = j.at("oracles").at(0);
  EXPECT_FALSE(o.at("monotone").get<bool>());
  ASSERT_TRUE(o.contains("counterexample"));
  EXPECT_GT(o.at("counterexample").at("lhs").get<double>(), o.at("counterexample").at("rhs").get<double>());
}

TEST(Cli, MalformedInput) {
  const auto r = nt::run_cli("mincut " + nt::fixture("malformed.json"));
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(parsed(r).at("error").get<std::string>(), "ParseError");
}

TEST(Cli, MissingFileAndBadArguments) {
  EXPECT_EQ(nt::run_cli("mincut /nonexistent.json").status, 2);
  EXPECT_EQ(nt::run_cli("").status, 2);
  EXPECT_EQ(nt::run_cli("frobnicate").status, 2);
  EXPECT_EQ(nt::run_cli("gen --family nope").status, 2);
}

TEST(Cli, TooLargeExitCode) {
  const auto r = nt::run_cli("gen --layers 1,9,1");
  EXPECT_EQ(r.status, 3);
  EXPECT_EQ(parsed(r).at("error").get<std::string>(), "TooLarge");
}

TEST(Cli, GenIsDeterministic) {
  const auto a = nt::run_cli("gen --seed 42 --layers 1,3,2,1");
  const auto b = nt::run_cli("gen --seed 42 --layers 1,3,2,1");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, nt::run_cli("gen --seed 43 --layers 1,3,2,1").out);
}

TEST(Cli, GenOutputValidates) {
  const std::string path = ::testing::TempDir() + "nodeflow_gen.json";
  const auto g = nt::run_cli("gen --seed 5 --layers 1,2,2,1 > " + path);
  EXPECT_EQ(g.status, 0);
  EXPECT_EQ(nt::run_cli("validate " + path).status, 0);
  EXPECT_EQ(nt::run_cli("mincut " + path).status, 0);
}

TEST(Cli, PlanDeterministicIsMinCut) {
  const auto plan = parsed(nt::run_cli("plan " + nt::sample("det3.json")));
  const auto cut = parsed(nt::run_cli("mincut " + nt::sample("det3.json")));
  EXPECT_EQ(plan.at("R").get<double>(), cut.at("value").get<double>());
  EXPECT_TRUE(plan.at("flags").empty());
}

TEST(Cli, PlanNeedsModels) {
  const auto r = nt::run_cli("plan " + nt::sample("diamond.json"));
  EXPECT_EQ(r.status, 2);
  EXPECT_EQ(parsed(r).at("error").get<std::string>(), "UnsupportedModel");
}

TEST(Cli, CheckRegions) {
  const auto layered = nt::run_cli("check " + nt::sample("gaussian_relay.json"));
  EXPECT_EQ(layered.status, 0);
  EXPECT_TRUE(parsed(layered).at("pass").get<bool>());
  const auto joint = nt::run_cli("check --region joint " + nt::sample("gaussian_relay.json"));
  EXPECT_EQ(joint.status, 0);
  const auto multi = nt::run_cli("check --region multi " + nt::sample("two_source.json"));
  EXPECT_EQ(multi.status, 0);
  EXPECT_TRUE(parsed(multi).at("agree").get<bool>());
  const auto far = nt::run_cli("check --region multi --rates 50 50 " + nt::sample("two_source.json"));
  EXPECT_EQ(far.status, 1);
  EXPECT_FALSE(parsed(far).at("pass").get<bool>());
}

TEST(Cli, ComplexityAndGap) {
  const auto c = nt::run_cli("complexity --T 4 " + nt::sample("gaussian_relay.json"));
  EXPECT_EQ(c.status, 0);
  const Json cj = parsed(c);
  EXPECT_TRUE(cj.at("log2_joint").is_number());
  EXPECT_TRUE(cj.at("log2_layered").is_number());
  const auto g = parsed(nt::run_cli("gap " + nt::sample("line.json")));
  EXPECT_EQ(g.at("joint").get<double>(), 9.0);
  EXPECT_EQ(g.at("layered").get<double>(), 7.0);
}

TEST(Cli, FixtureMode) {
  const auto r = nt::run_cli("gen --seed 3 --layers 1,2,1 --fixture");
  EXPECT_EQ(r.status, 0);
  const Json j = parsed(r);
  EXPECT_NEAR(j.at("expected").at("mincut").at("value").get<double>(), j.at("expected").at("maxflow").get<double>(),
              1e-9);
}
