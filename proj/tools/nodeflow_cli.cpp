#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nodeflow/io.hpp"
#include "nodeflow/nodeflow.hpp"

namespace nf = nodeflow;
using nf::io::Json;

namespace {

int exit_code(nf::ErrorCode code) {
  switch (code) {
    case nf::ErrorCode::TooLarge: return 3;
    case nf::ErrorCode::Infeasible:
    case nf::ErrorCode::InfeasibleBoundary:
    case nf::ErrorCode::NumericalFailure: return 1;
    default: return 2;
  }
}

void emit(const Json& j) { std::cout << j.dump() << '\n'; }

struct Options {
  std::string file;
  double tol = nf::kDefaultTol;
  int l0 = 0;
  std::string region = "layered";
  std::vector<double> rates;
  int block_length = 1;
  std::uint64_t seed = 1;
  std::string layers = "1,2,1";
  std::string family = "mixed";
  bool fixture = false;
};

nf::MaxFlowOptions flow_options(const Options& o) {
  nf::MaxFlowOptions m;
  m.l0 = o.l0;
  m.tol = o.tol;
  return m;
}

/// The plan stored in the file, or a freshly computed one.
nf::RatePlan resolve_plan(const nf::io::NetworkFile& file, const Options& o) {
  const auto& models = file.require_models();
  if (file.plan_rate) {
    nf::RatePlan p;
    p.rate = *file.plan_rate;
    p.relay = file.plan_relay;
    p.kappa = nf::kappa_recursion(file.network, models);
    return p;
  }
  return nf::plan_rates(file.network, models, flow_options(o));
}

int cmd_validate(const Options& o) {
  const auto file = nf::io::load_network_file(o.file);
  Json report;
  Json oracles = Json::array();
  bool ok = true;
  for (int l = 1; l < file.network.layer_count(); ++l) {
    const auto axioms = nf::check_capacity_axioms(file.network.oracle(l), o.tol);
    Json entry;
    entry["layer"] = l;
    entry["kind"] = std::string(nf::to_string(file.network.oracle(l).kind()));
    const Json detail = nf::io::axiom_to_json(axioms);
    for (const auto& [k, v] : detail.items()) entry[k] = v;
    oracles.push_back(entry);
    if (!axioms.pass()) {
      if (ok) std::cerr << "axiom violation in layer pair " << l << '\n';
      ok = false;
    }
  }
  report["valid"] = ok;
  report["layers"] = file.network.layer_sizes();
  report["oracles"] = oracles;
  emit(report);
  return ok ? 0 : 1;
}

int cmd_mincut(const Options& o) {
  const auto file = nf::io::load_network_file(o.file);
  emit(nf::io::cut_to_json(nf::min_cut(file.network, file.boundary)));
  return 0;
}

int cmd_maxflow(const Options& o) {
  const auto file = nf::io::load_network_file(o.file);
  emit(nf::io::flow_to_json(nf::max_flow(file.network, file.boundary, flow_options(o))));
  return 0;
}

int cmd_plan(const Options& o) {
  const auto file = nf::io::load_network_file(o.file);
  const auto plan = nf::plan_rates(file.network, file.require_models(), flow_options(o));
  if (plan.flagged()) std::cerr << "some planned rates were negative and clamped to 0\n";
  emit(nf::io::plan_to_json(plan));
  return 0;
}

int cmd_check(const Options& o) {
  const auto file = nf::io::load_network_file(o.file);
  const auto& models = file.require_models();
  if (o.region == "multi") {
    const auto& rates = o.rates.empty() ? file.rates : o.rates;
    const auto rep = nf::check_multi_source(file.network, models, rates, nf::MultiSourceRegion::Layered, o.tol);
    const auto joint = nf::check_multi_source(file.network, models, rates, nf::MultiSourceRegion::Joint, o.tol);
    Json j = nf::io::multi_to_json(rep);
    j["joint"] = nf::io::multi_to_json(joint);
    emit(j);
    return rep.pass() ? 0 : 1;
  }
  const auto plan = resolve_plan(file, o);
  nf::RegionReport rep;
  if (o.region == "layered") {
    rep = nf::check_layered_feasible(file.network, models, plan, o.tol);
  } else if (o.region == "joint") {
    rep = nf::check_joint_feasible(file.network, models, plan.rate, plan.relay, o.tol);
  } else {
    throw nf::Error(nf::ErrorCode::BadRange, "region must be layered, joint or multi");
  }
  emit(nf::io::region_to_json(rep));
  return rep.pass ? 0 : 1;
}

int cmd_complexity(const Options& o) {
  const auto file = nf::io::load_network_file(o.file);
  const auto plan = resolve_plan(file, o);
  emit(nf::io::complexity_to_json(nf::decoding_complexity(file.network, plan, o.block_length, file.quantizer_sizes)));
  return 0;
}

int cmd_gap(const Options& o) {
  const auto file = nf::io::load_network_file(o.file);
  const auto gap = nf::gaussian_gap(file.network);
  Json j;
  j["joint"] = nf::io::num(gap.joint);
  j["layered"] = nf::io::num(gap.layered);
  j["kappa_g"] = nf::io::num_array(nf::gaussian_kappa(file.network));
  emit(j);
  return 0;
}

int cmd_gen(const Options& o) {
  nf::oracle::InstanceSpec spec;
  spec.seed = o.seed;
  std::stringstream ss(o.layers);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      spec.layer_sizes.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw nf::Error(nf::ErrorCode::ParseError, "bad layer size '" + item + "'");
    }
  }
  if (o.family != "mixed") {
    bool found = false;
    for (int f = 0; f < 4; ++f) {
      if (nf::oracle::to_string(static_cast<nf::oracle::Family>(f)) == o.family) {
        spec = nf::oracle::family_spec(spec.seed, spec.layer_sizes, static_cast<nf::oracle::Family>(f));
        found = true;
      }
    }
    if (!found) throw nf::Error(nf::ErrorCode::BadRange, "unknown family '" + o.family + "'");
  }
  const auto inst = nf::oracle::random_instance(spec);
  emit(o.fixture ? nf::io::fixture_json(inst) : nf::io::network_to_json(inst.network, inst.layer_models));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Node-flows, cuts and compression-rate plans on layered networks"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--tol", o.tol, "Tolerance for feasibility and axiom checks")->capture_default_str();
  app.add_option("--l0", o.l0, "Pivot layer for the top-level bisection (0 = middle)");
  app.fallthrough();

  auto with_file = [&](const char* name, const char* help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("file", o.file, "Network JSON file")->required();
    return sub;
  };
  auto* validate = with_file("validate", "Check the capacity axioms of every oracle");
  auto* mincut = with_file("mincut", "Minimum cut");
  auto* maxflow = with_file("maxflow", "Maximum node-flow");
  auto* plan = with_file("plan", "Compression-rate plan from a max-flow");
  auto* check = with_file("check", "Check rates against an achievable region");
  check->add_option("--region", o.region, "layered, joint or multi")->capture_default_str();
  check->add_option("--rates", o.rates, "Source rates for --region multi");
  auto* complexity = with_file("complexity", "Decoding complexity of a plan (log2)");
  complexity->add_option("--T", o.block_length, "Block length")->capture_default_str();
  auto* gap = with_file("gap", "Gaussian gap constants");
  auto* gen = app.add_subcommand("gen", "Generate a seeded random network");
  gen->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  gen->add_option("--layers", o.layers, "Comma-separated layer sizes")->capture_default_str();
  gen->add_option("--family", o.family, "additive, rank_gf2, gaussian, discrete or mixed")->capture_default_str();
  gen->add_flag("--fixture", o.fixture, "Emit a golden fixture with brute-force expected values");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*mincut) return cmd_mincut(o);
    if (*maxflow) return cmd_maxflow(o);
    if (*plan) return cmd_plan(o);
    if (*check) return cmd_check(o);
    if (*complexity) return cmd_complexity(o);
    if (*gap) return cmd_gap(o);
    if (*gen) return cmd_gen(o);
  } catch (const nf::Error& e) {
    std::cerr << nf::to_string(e.code()) << ": " << e.detail() << '\n';
    Json j;
    j["error"] = std::string(nf::to_string(e.code()));
    j["detail"] = e.detail();
    emit(j);
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    Json j;
    j["error"] = "InternalError";
    j["detail"] = e.what();
    emit(j);
  }
  return 2;
}
