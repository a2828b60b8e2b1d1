#include <gtest/gtest.h>

#include <string>

#include "nodeflow/io.hpp"
#include "test_support.hpp"

using namespace nodeflow;
namespace nt = nodeflow::testing;
using io::Json;

namespace {

ErrorCode parse_error_code(const std::string& text) {
  try {
    io::network_from_json(io::parse_text(text));
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed without error: " << text;
  return ErrorCode::ParseError;
}

}  // namespace

TEST(Io, NumberFormatting) {
  EXPECT_EQ(io::num(2.0).dump(), "2.0");
  EXPECT_EQ(io::num(0.1 + 0.2).dump(), "0.3");
  EXPECT_EQ(io::num(1.0 / 3.0).dump(), "0.333333333333");
  EXPECT_EQ(io::num(std::log2(51.0)).dump(), "5.67242534197");
  EXPECT_TRUE(io::num(std::numeric_limits<double>::infinity()).is_null());
  EXPECT_EQ(io::num(-0.0).dump(), "0.0");
}

TEST(Io, NodeKeys) {
  EXPECT_EQ(io::parse_node_key("2.13"), (NodeId{2, 13}));
  EXPECT_THROW(io::parse_node_key("2"), Error);
  EXPECT_THROW(io::parse_node_key("a.1"), Error);
  EXPECT_THROW(io::parse_node_key("1.2x"), Error);
}

TEST(Io, IndexLists) {
  EXPECT_EQ(io::index_list(0b101), "1,3");
  EXPECT_EQ(io::index_list(0), "");
  EXPECT_EQ(io::parse_index_list("1,3", 3), Mask{0b101});
  EXPECT_EQ(io::parse_index_list("", 3), Mask{0});
  EXPECT_THROW(io::parse_index_list("4", 3), Error);
  EXPECT_THROW(io::parse_index_list("1,,2", 3), Error);
}

TEST(Io, LoadsDiamondSample) {
  const auto file = io::load_network_file(nt::sample("diamond.json"));
  EXPECT_EQ(file.network.layer_sizes(), (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(file.network.oracle(1).eval(1, 0b11), 3.0);
  EXPECT_FALSE(file.models.has_value());
  EXPECT_THROW(file.require_models(), Error);
}

TEST(Io, LoadsEverySample) {
  for (const char* name : {"line.json", "diamond.json", "det3.json", "gaussian_relay.json", "two_source.json",
                           "binary_relay.json"}) {
    SCOPED_TRACE(name);
    const auto file = io::load_network_file(nt::sample(name));
    for (int l = 1; l < file.network.layer_count(); ++l) {
      EXPECT_TRUE(check_capacity_axioms(file.network.oracle(l)).pass());
    }
  }
}

TEST(Io, SampleExtras) {
  const auto det = io::load_network_file(nt::sample("det3.json"));
  ASSERT_TRUE(det.models.has_value());
  EXPECT_EQ(det.models->front().kind(), ModelKind::Deterministic);
  const auto two = io::load_network_file(nt::sample("two_source.json"));
  EXPECT_EQ(two.rates, (std::vector<double>{0.5, 0.5}));
  const auto relay = io::load_network_file(nt::sample("gaussian_relay.json"));
  EXPECT_EQ(relay.quantizer_sizes.at({2, 1}), 16.0);
}

TEST(Io, RoundTripPreservesOracles) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto inst = oracle::random_instance({seed, {1, 2, 3, 1}});
    const Json j = io::network_to_json(inst.network, inst.layer_models);
    const auto back = io::network_from_json(io::parse_text(j.dump()));
    for (int l = 1; l < 4; ++l) {
      const auto& a = inst.network.oracle(l);
      const auto& b = back.network.oracle(l);
      EXPECT_EQ(a.kind(), b.kind());
      for (Mask u = 0; u <= full_mask(a.tx_size()); ++u) {
        for (Mask v = 0; v <= full_mask(a.rx_size()); ++v) {
          EXPECT_NEAR(a.eval(u, v), b.eval(u, v), 1e-9) << "seed " << seed;
        }
      }
    }
    EXPECT_EQ(back.models.has_value(), inst.has_models());
    // Writing the re-read network reproduces the same text.
    EXPECT_EQ(io::network_to_json(back.network, inst.layer_models).dump(), j.dump());
  }
}

TEST(Io, TableRoundTrip) {
  const auto o = CapacityOracle::table(2, 1, {{{0b01, 0b1}, 1.0}, {{0b11, 0b1}, 1.5}});
  const Json j = io::oracle_to_json(o);
  EXPECT_EQ(j.dump(), R"({"kind":"table","values":{"1;1":1.0,"1,2;1":1.5}})");
  const auto back = io::oracle_from_json(j, 2, 1);
  EXPECT_EQ(back.eval(0b11, 1), 1.5);
  EXPECT_EQ(back.eval(0b10, 1), 0.0);
}

TEST(Io, Errors) {
  EXPECT_EQ(parse_error_code("{"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code("[]"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code(R"({"layers":[1,1],"capacities":[{"kind":"magic"}]})"), ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code(R"({"layers":[1,1],"capacities":[{"kind":"table","values":{"1":1}}]})"),
            ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code(R"({"layers":[1,1],"capacities":[{"kind":"additive","matrix":[[1,2]]}]})"),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(parse_error_code(R"({"layers":[1,1],"capacities":[]})"), ErrorCode::DimensionMismatch);
  EXPECT_EQ(parse_error_code(R"({"layers":[1,0],"capacities":[{"kind":"additive","matrix":[[]]}]})"),
            ErrorCode::EmptyLayer);
  EXPECT_EQ(parse_error_code(R"({"layers":[1],"capacities":[]})"), ErrorCode::TooFewLayers);
  EXPECT_EQ(parse_error_code(R"({"layers":[1,1],"capacities":[{"kind":"additive","matrix":[["x"]]}]})"),
            ErrorCode::ParseError);
  EXPECT_EQ(parse_error_code(
                R"({"layers":[1,1],"capacities":[{"kind":"additive","matrix":[[1]]}],"boundary":{"first":[1,2],"last":[1]}})"),
            ErrorCode::RateCountMismatch);
  EXPECT_EQ(parse_error_code(
                R"({"layers":[1,1],"capacities":[{"kind":"additive","matrix":[[1]]}],"models":["magic"]})"),
            ErrorCode::ParseError);
}

TEST(Io, MissingFile) { EXPECT_THROW(io::load_network_file("/nonexistent/net.json"), Error); }

TEST(Io, CutJson) {
  const auto j = io::cut_to_json(min_cut(nt::diamond_net()));
  EXPECT_EQ(j.dump(), R"({"value":2.0,"cut":["1.1","2.2"]})");
}

TEST(Io, FixtureValuesMatchReparsedNetwork) {
  const auto inst = oracle::random_instance({21, {1, 2, 2, 1}});
  const Json fx = io::fixture_json(inst);
  const auto net = io::network_from_json(fx.at("network")).network;
  EXPECT_NEAR(min_cut(net).value, fx.at("expected").at("mincut").at("value").get<double>(), 1e-9);
  EXPECT_NEAR(max_flow(net).value(), fx.at("expected").at("maxflow").get<double>(), 1e-9);
  EXPECT_EQ(fx.at("spec").at("seed").get<std::uint64_t>(), 21u);
}
