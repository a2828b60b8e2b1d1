#ifndef NODEFLOW_IO_HPP
#define NODEFLOW_IO_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nodeflow/capacity.hpp"
#include "nodeflow/cutflow.hpp"
#include "nodeflow/errors.hpp"
#include "nodeflow/netgraph.hpp"
#include "nodeflow/oracle.hpp"
#include "nodeflow/rateplan.hpp"
#include "nodeflow/subset.hpp"

namespace nodeflow::io {

using Json = nlohmann::ordered_json;

/// Rounds to 12 significant digits; the shortest round-trip printer then
/// emits at most 12 digits. Non-finite values become null.
inline Json num(double v) {
  if (!std::isfinite(v)) return Json(nullptr);
  if (v == 0.0) return Json(0.0);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return Json(std::strtod(buf, nullptr));
}

inline Json num_array(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

/// "l.k" -> NodeId.
inline NodeId parse_node_key(const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size()) {
    throw Error(ErrorCode::ParseError, "node key '" + key + "' is not of the form layer.index");
  }
  try {
    std::size_t used = 0;
    const int l = std::stoi(key.substr(0, dot), &used);
    if (used != dot) throw std::invalid_argument(key);
    const int k = std::stoi(key.substr(dot + 1), &used);
    if (used != key.size() - dot - 1) throw std::invalid_argument(key);
    return {l, k};
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "node key '" + key + "' is not of the form layer.index");
  }
}

inline std::string index_list(Mask m) {
  std::string s;
  for (int k : indices_from_mask(m)) {
    if (!s.empty()) s += ',';
    s += std::to_string(k);
  }
  return s;
}

inline Mask parse_index_list(const std::string& s, int width) {
  std::vector<int> idx;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) throw Error(ErrorCode::ParseError, "empty entry in index list '" + s + "'");
    try {
      std::size_t used = 0;
      idx.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad index '" + item + "'");
    }
  }
  return mask_from_indices(idx, width);
}

namespace detail {

template <typename T>
T get(const Json& j, const std::string& what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw Error(ErrorCode::ParseError, where + " needs \"" + name + "\"");
  return j.at(name);
}

inline std::vector<std::vector<double>> matrix(const Json& j, const std::string& what) {
  return get<std::vector<std::vector<double>>>(j, what);
}

inline void check_shape(const std::vector<std::vector<double>>& m, std::size_t rows, std::size_t cols,
                        const std::string& what) {
  if (m.size() != rows) {
    throw Error(ErrorCode::DimensionMismatch, what + " needs " + std::to_string(rows) + " rows");
  }
  for (const auto& r : m) {
    if (r.size() != cols) throw Error(ErrorCode::DimensionMismatch, what + " needs " + std::to_string(cols) + " columns");
  }
}

}  // namespace detail

/// Oracle spec for the pair (tx, rx); see schema/network.schema.json.
inline CapacityOracle oracle_from_json(const Json& j, int tx, int rx) {
  const std::string where = "capacity spec";
  const auto type = detail::get<std::string>(detail::field(j, "kind", where), "kind");
  const auto utx = static_cast<std::size_t>(tx);
  const auto urx = static_cast<std::size_t>(rx);
  if (type == "additive") {
    auto c = detail::matrix(detail::field(j, "matrix", where), "additive matrix");
    detail::check_shape(c, utx, urx, "additive matrix");
    return CapacityOracle::additive(std::move(c));
  }
  if (type == "rank_gf2") {
    auto g = detail::get<std::vector<std::vector<int>>>(detail::field(j, "matrix", where), "GF(2) matrix");
    if (g.size() != urx) throw Error(ErrorCode::DimensionMismatch, "GF(2) matrix needs one row per receiver");
    for (const auto& row : g) {
      if (row.size() != utx) throw Error(ErrorCode::DimensionMismatch, "GF(2) matrix needs one column per transmitter");
    }
    return CapacityOracle::rank_gf2(g);
  }
  if (type == "gaussian") {
    auto re = detail::matrix(detail::field(j, "h_re", where), "h_re");
    detail::check_shape(re, urx, utx, "h_re");
    std::vector<std::vector<double>> im(urx, std::vector<double>(utx, 0.0));
    if (j.contains("h_im")) {
      im = detail::matrix(j.at("h_im"), "h_im");
      detail::check_shape(im, urx, utx, "h_im");
    }
    Eigen::MatrixXcd h(rx, tx);
    for (int w = 0; w < rx; ++w) {
      for (int u = 0; u < tx; ++u) {
        h(w, u) = {re[static_cast<std::size_t>(w)][static_cast<std::size_t>(u)],
                   im[static_cast<std::size_t>(w)][static_cast<std::size_t>(u)]};
      }
    }
    return CapacityOracle::gaussian(std::make_shared<const GaussianLayerModel>(std::move(h)));
  }
  if (type == "table") {
    const auto& values = detail::field(j, "values", where);
    if (!values.is_object()) throw Error(ErrorCode::ParseError, "table values must be an object");
    std::map<std::pair<Mask, Mask>, double> table;
    for (const auto& [key, val] : values.items()) {
      const auto semi = key.find(';');
      if (semi == std::string::npos) throw Error(ErrorCode::ParseError, "table key '" + key + "' lacks ';'");
      const Mask u = parse_index_list(key.substr(0, semi), tx);
      const Mask v = parse_index_list(key.substr(semi + 1), rx);
      table[{u, v}] = detail::get<double>(val, "table value");
    }
    return CapacityOracle::table(tx, rx, std::move(table));
  }
  if (type == "discrete") {
    auto inputs = detail::get<std::vector<std::vector<double>>>(detail::field(j, "pmfs", where), "pmfs");
    auto channel = detail::get<std::vector<std::vector<std::vector<double>>>>(detail::field(j, "channel", where),
                                                                             "channel");
    std::vector<std::vector<std::vector<double>>> quantizer;
    if (j.contains("quantizer")) {
      quantizer = detail::get<std::vector<std::vector<std::vector<double>>>>(j.at("quantizer"), "quantizer");
    }
    if (inputs.size() != utx || channel.size() != urx) {
      throw Error(ErrorCode::DimensionMismatch, "discrete model dimensions disagree with the layer sizes");
    }
    return CapacityOracle::discrete(
        std::make_shared<const DiscreteLayerModel>(std::move(inputs), std::move(channel), std::move(quantizer)));
  }
  throw Error(ErrorCode::ParseError, "unknown capacity kind '" + type + "'");
}

inline Json matrix_json(const std::vector<std::vector<double>>& m) {
  Json out = Json::array();
  for (const auto& row : m) out.push_back(num_array(row));
  return out;
}

inline Json oracle_to_json(const CapacityOracle& o) {
  Json j;
  j["kind"] = std::string(to_string(o.kind()));
  const auto& p = o.payload();
  switch (o.kind()) {
    case OracleKind::Additive: j["matrix"] = matrix_json(std::get<AdditiveCapacity>(p).c); break;
    case OracleKind::RankGF2: {
      Json rows = Json::array();
      for (auto bits : std::get<RankGf2Capacity>(p).rows) {
        Json row = Json::array();
        for (int u = 0; u < o.tx_size(); ++u) row.push_back(static_cast<int>((bits >> u) & 1u));
        rows.push_back(row);
      }
      j["matrix"] = rows;
      break;
    }
    case OracleKind::GaussianLogDet: {
      const auto& h = std::get<std::shared_ptr<const GaussianLayerModel>>(p)->channel();
      Json re = Json::array(), im = Json::array();
      for (int w = 0; w < h.rows(); ++w) {
        Json rr = Json::array(), ri = Json::array();
        for (int u = 0; u < h.cols(); ++u) {
          rr.push_back(num(h(w, u).real()));
          ri.push_back(num(h(w, u).imag()));
        }
        re.push_back(rr);
        im.push_back(ri);
      }
      j["h_re"] = re;
      j["h_im"] = im;
      break;
    }
    case OracleKind::ExplicitTable: {
      Json values = Json::object();
      for (const auto& [key, v] : std::get<TableCapacity>(p).values) {
        values[index_list(key.first) + ";" + index_list(key.second)] = num(v);
      }
      j["values"] = values;
      break;
    }
    case OracleKind::DiscreteMI: {
      const auto& d = *std::get<std::shared_ptr<const DiscreteLayerModel>>(p);
      j["pmfs"] = matrix_json(d.input_pmfs());
      Json ch = Json::array();
      for (const auto& w : d.channel()) ch.push_back(matrix_json(w));
      j["channel"] = ch;
      if (!d.identity_quantizer()) {
        Json q = Json::array();
        for (const auto& w : d.quantizer()) q.push_back(matrix_json(w));
        j["quantizer"] = q;
      }
      break;
    }
  }
  return j;
}

/// Parsed network file. `models` holds one entry per layer pair when the
/// file declares models, or when every oracle carries its own.
struct NetworkFile {
  LayeredNetwork network;
  std::optional<LayerModels> models;
  std::string models_error;
  std::optional<BoundaryFlows> boundary;
  std::optional<double> plan_rate;
  std::map<NodeId, double> plan_relay;
  std::vector<double> rates;
  std::map<NodeId, double> quantizer_sizes;

  const LayerModels& require_models() const {
    if (!models) throw Error(ErrorCode::UnsupportedModel, models_error);
    return *models;
  }
};

inline std::map<NodeId, double> node_map(const Json& j, const LayeredNetwork& net, const std::string& what) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, what + " must be an object keyed by layer.index");
  std::map<NodeId, double> out;
  for (const auto& [key, val] : j.items()) {
    const NodeId v = parse_node_key(key);
    net.check_node(v);
    out[v] = detail::get<double>(val, what);
  }
  return out;
}

inline NetworkFile network_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "network file must be a JSON object");
  const auto sizes = detail::get<std::vector<int>>(detail::field(j, "layers", "network"), "layers");
  const auto& caps = detail::field(j, "capacities", "network");
  if (!caps.is_array()) throw Error(ErrorCode::ParseError, "\"capacities\" must be an array");
  if (sizes.size() < 2) throw Error(ErrorCode::TooFewLayers, "a layered network needs at least 2 layers");
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    if (sizes[l] < 1) throw Error(ErrorCode::EmptyLayer, "layer " + std::to_string(l + 1) + " is empty");
    if (sizes[l] > kMaxLayerWidth) throw Error(ErrorCode::TooLarge, "layer " + std::to_string(l + 1) + " too wide");
  }
  if (caps.size() != sizes.size() - 1) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(sizes.size()) + " layers need " +
                                                  std::to_string(sizes.size() - 1) + " capacity specs");
  }
  std::vector<std::shared_ptr<const CapacityOracle>> oracles;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    oracles.push_back(std::make_shared<const CapacityOracle>(oracle_from_json(caps[l], sizes[l], sizes[l + 1])));
  }
  NetworkFile file{LayeredNetwork(sizes, std::move(oracles)), {}, {}, {}, {}, {}, {}, {}};
  const auto& net = file.network;

  LayerModels models;
  for (int l = 1; l < net.layer_count(); ++l) {
    std::string decl = "auto";
    if (j.contains("models")) {
      const auto& m = j.at("models");
      if (!m.is_array() || m.size() != sizes.size() - 1) {
        throw Error(ErrorCode::DimensionMismatch, "\"models\" needs one entry per layer pair");
      }
      const auto& e = m[static_cast<std::size_t>(l - 1)];
      if (!e.is_null()) decl = detail::get<std::string>(e, "model");
    }
    if (decl == "deterministic") {
      models.push_back(LayerModel::deterministic());
    } else if (decl == "auto") {
      auto from = LayerModel::from_oracle(net.oracle(l));
      if (!from) {
        file.models_error = "layer pair " + std::to_string(l) + " (" + std::string(to_string(net.oracle(l).kind())) +
                            ") needs a model; declare it \"deterministic\" in \"models\"";
        models.clear();
        break;
      }
      models.push_back(*from);
    } else {
      throw Error(ErrorCode::ParseError, "unknown model '" + decl + "'");
    }
  }
  if (file.models_error.empty()) file.models = std::move(models);

  if (j.contains("boundary")) {
    const auto& b = j.at("boundary");
    BoundaryFlows flows{detail::get<std::vector<double>>(detail::field(b, "first", "boundary"), "boundary.first"),
                        detail::get<std::vector<double>>(detail::field(b, "last", "boundary"), "boundary.last")};
    nodeflow::detail::check_boundary_shape(net, flows);
    file.boundary = std::move(flows);
  }
  if (j.contains("plan")) {
    const auto& p = j.at("plan");
    file.plan_rate = detail::get<double>(detail::field(p, "R", "plan"), "plan.R");
    if (p.contains("r")) file.plan_relay = node_map(p.at("r"), net, "plan.r");
  }
  if (j.contains("rates")) file.rates = detail::get<std::vector<double>>(j.at("rates"), "rates");
  if (j.contains("quantizer_sizes")) file.quantizer_sizes = node_map(j.at("quantizer_sizes"), net, "quantizer_sizes");
  return file;
}

inline Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline NetworkFile load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return network_from_json(parse_text(ss.str()));
}

inline Json network_to_json(const LayeredNetwork& net, const std::vector<std::optional<LayerModel>>& models = {}) {
  Json j;
  j["layers"] = net.layer_sizes();
  Json caps = Json::array();
  for (int l = 1; l < net.layer_count(); ++l) caps.push_back(oracle_to_json(net.oracle(l)));
  j["capacities"] = caps;
  // Only deterministic declarations need spelling out; the rest are read
  // off their oracles.
  bool any = false;
  Json m = Json::array();
  for (const auto& model : models) {
    if (model && model->kind() == ModelKind::Deterministic) {
      m.push_back("deterministic");
      any = true;
    } else {
      m.push_back(nullptr);
    }
  }
  if (any) j["models"] = m;
  return j;
}

inline Json node_list(const NodeSet& s) {
  Json out = Json::array();
  for (const auto& v : s.members()) out.push_back(v.key());
  return out;
}

inline Json cut_to_json(const Cut& c) {
  Json j;
  j["value"] = num(c.value);
  j["cut"] = node_list(c.members);
  return j;
}

inline Json flow_map(const Flow& f) {
  Json m = Json::object();
  for (int l = 1; l <= f.layer_count(); ++l) {
    for (std::size_t k = 0; k < f.layer(l).size(); ++k) {
      m[NodeId{l, static_cast<int>(k) + 1}.key()] = num(f.layer(l)[k]);
    }
  }
  return m;
}

inline Json flow_to_json(const Flow& f) {
  Json j;
  j["value"] = num(f.value());
  j["flow"] = flow_map(f);
  return j;
}

inline Json plan_to_json(const RatePlan& p) {
  Json j;
  j["R"] = num(p.rate);
  Json r = Json::object();
  for (const auto& [v, rate] : p.relay) r[v.key()] = num(rate);
  j["r"] = r;
  j["kappa"] = num_array(p.kappa);
  j["flags"] = p.flags;
  return j;
}

inline Json region_to_json(const RegionReport& rep) {
  Json j;
  j["pass"] = rep.pass;
  Json b = Json::object();
  if (rep.layer > 0) {
    b["layer"] = rep.layer;
    b["U"] = index_list(rep.tx);
    b["V"] = index_list(rep.rx);
  }
  if (!rep.omega.layers.empty()) b["omega"] = node_list(rep.omega);
  if (!rep.phi.layers.empty()) b["phi"] = node_list(rep.phi);
  b["lhs"] = num(rep.lhs);
  b["rhs"] = num(rep.rhs);
  j["binding"] = b;
  j["margin"] = num(rep.margin);
  j["constraints"] = rep.constraints;
  return j;
}

inline Json multi_to_json(const MultiSourceReport& rep) {
  Json j = region_to_json(rep.direct);
  j["supernode"] = region_to_json(rep.supernode);
  j["agree"] = rep.agree;
  return j;
}

inline Json complexity_to_json(const DecodingComplexity& c) {
  Json j;
  j["log2_joint"] = num(c.log2_joint);
  j["log2_layered"] = num(c.log2_layered);
  return j;
}

inline Json axiom_to_json(const AxiomReport& r) {
  Json j;
  j["pass"] = r.pass();
  j["bisubmodular"] = r.bisubmodular;
  j["monotone"] = r.monotone;
  j["zero_at_empty"] = r.zero_at_empty;
  if (r.counterexample) {
    const auto& c = *r.counterexample;
    Json ce;
    ce["axiom"] = c.axiom;
    ce["U1"] = index_list(c.u1);
    ce["V1"] = index_list(c.v1);
    ce["U2"] = index_list(c.u2);
    ce["V2"] = index_list(c.v2);
    ce["lhs"] = num(c.lhs);
    ce["rhs"] = num(c.rhs);
    j["counterexample"] = ce;
  }
  return j;
}

inline Json spec_to_json(const oracle::InstanceSpec& s) {
  Json j;
  j["seed"] = s.seed;
  j["layers"] = s.layer_sizes;
  j["weights"] = num_array({s.weights.begin(), s.weights.end()});
  return j;
}

/// Golden fixture {spec, network, expected:{mincut, maxflow, flow}}. The
/// expected values come from the brute-force references evaluated on the
/// network as written (12 significant digits), so a reader that parses the
/// fixture sees exactly the instance the values belong to.
inline Json fixture_json(const oracle::Instance& inst) {
  Json j;
  j["spec"] = spec_to_json(inst.spec);
  const Json net_json = network_to_json(inst.network, inst.layer_models);
  const auto reread = network_from_json(net_json);
  const auto cut = oracle::brute_min_cut(reread.network);
  const auto flow = oracle::brute_max_flow(reread.network);
  j["network"] = net_json;
  Json expected;
  expected["mincut"] = cut_to_json(cut);
  expected["maxflow"] = num(flow.value);
  expected["flow"] = flow_map(flow.flow);
  j["expected"] = expected;
  return j;
}

}  // namespace nodeflow::io

#endif  // NODEFLOW_IO_HPP
