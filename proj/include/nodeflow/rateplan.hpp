#ifndef NODEFLOW_RATEPLAN_HPP
#define NODEFLOW_RATEPLAN_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodeflow/capacity.hpp"
#include "nodeflow/cutflow.hpp"
#include "nodeflow/errors.hpp"
#include "nodeflow/netgraph.hpp"
#include "nodeflow/subset.hpp"

namespace nodeflow {

/// One model per adjacent layer pair, aligned with the network's oracles.
using LayerModels = std::vector<LayerModel>;

/// Models read off the oracles; fails for layers that carry no quantizer
/// description (additive, table, GF(2)).
inline LayerModels models_from_network(const LayeredNetwork& net) {
  LayerModels out;
  for (int l = 1; l < net.layer_count(); ++l) {
    auto m = LayerModel::from_oracle(net.oracle(l));
    if (!m) {
      throw Error(ErrorCode::UnsupportedModel, "layer pair " + std::to_string(l) + " (" +
                                                   std::string(to_string(net.oracle(l).kind())) +
                                                   ") needs an explicit model");
    }
    out.push_back(*m);
  }
  return out;
}

namespace detail {

inline void check_models(const LayeredNetwork& net, const LayerModels& models) {
  if (static_cast<int>(models.size()) != net.layer_count() - 1) {
    throw Error(ErrorCode::DimensionMismatch, "need one model per layer pair (" +
                                                  std::to_string(net.layer_count() - 1) + "), got " +
                                                  std::to_string(models.size()));
  }
}

}  // namespace detail

/// kappa_{L-1} = 0, kappa_l = leak(O_{l+1}) + kappa_{l+1} |O_{l+1}|.
/// Entry l-1 of the result is kappa_l.
inline std::vector<double> kappa_recursion(const LayeredNetwork& net, const LayerModels& models) {
  detail::check_models(net, models);
  const int layers = net.layer_count();
  std::vector<double> kappa(static_cast<std::size_t>(layers - 1), 0.0);
  for (int l = layers - 2; l >= 1; --l) {
    const int next_width = net.width(l + 1);
    kappa[static_cast<std::size_t>(l - 1)] =
        quantizer_leak(models[static_cast<std::size_t>(l - 1)], next_width) +
        kappa[static_cast<std::size_t>(l)] * next_width;
  }
  return kappa;
}

struct RatePlan {
  double rate = 0.0;                  // R
  std::map<NodeId, double> relay;     // r_v for v in layers 2..L-1
  std::vector<double> kappa;          // kappa_1..kappa_{L-1}
  Flow flow;
  std::vector<std::string> flags;     // "NegativeRate:<node>" for clamped entries

  bool flagged() const { return !flags.empty(); }
};

/// R = f(S) - kappa_1 and r_v = f(v) - kappa_l from a max node-flow.
/// Negative entries are clamped to 0 and listed in `flags`.
inline RatePlan plan_rates(const LayeredNetwork& net, const LayerModels& models, const MaxFlowOptions& opt = {}) {
  if (!net.is_unicast()) throw Error(ErrorCode::NotUnicast, "rate plans need a single source and destination");
  RatePlan plan;
  plan.kappa = kappa_recursion(net, models);
  plan.flow = max_flow(net, std::nullopt, opt);
  plan.rate = plan.flow.at({1, 1}) - plan.kappa[0];
  if (plan.rate < 0.0) {
    plan.flags.push_back("NegativeRate:R");
    plan.rate = 0.0;
  }
  for (int l = 2; l < net.layer_count(); ++l) {
    for (int k = 1; k <= net.width(l); ++k) {
      double r = plan.flow.at({l, k}) - plan.kappa[static_cast<std::size_t>(l - 1)];
      if (r < 0.0) {
        plan.flags.push_back("NegativeRate:" + NodeId{l, k}.key());
        r = 0.0;
      }
      plan.relay[{l, k}] = r;
    }
  }
  return plan;
}

/// Outcome of a region check. margin = min over constraints of rhs - lhs;
/// the region's strict inequalities are accepted when margin > -tol.
struct RegionReport {
  bool pass = true;
  double margin = std::numeric_limits<double>::infinity();
  std::size_t constraints = 0;
  // Binding constraint. Layered checks fill layer/tx/rx, cut checks fill
  // omega (and phi for the joint region).
  int layer = 0;
  Mask tx = 0;
  Mask rx = 0;
  NodeSet omega;
  NodeSet phi;
  double lhs = 0.0;
  double rhs = 0.0;
};

namespace detail {

/// Per-pair tables of I(X_U; Yhat_V | .), I(X_U; Y_V | .) and leak(W).
struct LayerInfo {
  int tx = 0;
  int rx = 0;
  std::vector<double> quantized;    // [U << rx | V]
  std::vector<double> observation;  // [U << rx | V]
  std::vector<double> leak;         // [W]

  double q(Mask u, Mask v) const { return quantized[(static_cast<std::size_t>(u) << rx) | v]; }
  double o(Mask u, Mask v) const { return observation[(static_cast<std::size_t>(u) << rx) | v]; }
};

inline std::vector<LayerInfo> tabulate_information(const LayeredNetwork& net, const LayerModels& models,
                                                   bool need_observation) {
  check_pair_guard(net);
  std::vector<LayerInfo> out;
  for (int l = 1; l < net.layer_count(); ++l) {
    const auto& model = models[static_cast<std::size_t>(l - 1)];
    const auto& oracle = net.oracle(l);
    LayerInfo info;
    info.tx = net.width(l);
    info.rx = net.width(l + 1);
    const std::size_t cells = std::size_t{1} << (info.tx + info.rx);
    info.quantized.resize(cells);
    const bool last = l == net.layer_count() - 1;
    if (need_observation && last) info.observation.resize(cells);
    for (Mask u = 0; u <= full_mask(info.tx); ++u) {
      for (Mask v = 0; v <= full_mask(info.rx); ++v) {
        const std::size_t idx = (static_cast<std::size_t>(u) << info.rx) | v;
        info.quantized[idx] = model.quantized_mi(oracle, u, v);
        if (!info.observation.empty()) info.observation[idx] = model.observation_mi(oracle, u, v);
      }
    }
    info.leak.resize(std::size_t{1} << info.rx);
    for (Mask w = 0; w <= full_mask(info.rx); ++w) info.leak[w] = model.leak(w);
    out.push_back(std::move(info));
  }
  return out;
}

inline void consider(RegionReport& rep, double lhs, double rhs, double tol, const auto& fill) {
  ++rep.constraints;
  const double margin = rhs - lhs;
  if (margin < rep.margin) {
    rep.margin = margin;
    rep.lhs = lhs;
    rep.rhs = rhs;
    fill();
  }
  if (margin <= -scaled_tol(tol, std::max(std::abs(lhs), std::abs(rhs)))) rep.pass = false;
}

inline double plan_layer_rate(const RatePlan& plan, int layer, Mask members) {
  if (layer == 1) return members != 0 ? plan.rate : 0.0;
  double s = 0.0;
  for (int k : indices_from_mask(members)) {
    auto it = plan.relay.find({layer, k});
    if (it == plan.relay.end()) throw Error(ErrorCode::OutOfRange, "plan has no rate for " + NodeId{layer, k}.key());
    s += it->second;
  }
  return s;
}

}  // namespace detail

/// Region achievable with layer-by-layer backward decoding:
///   r(U) <= I(X_U; Y_D | X_{O_{L-1} \ U})                      (last relay layer)
///   r(U) - r(O_{l+1} \ V) <= I(X_U; Yhat_V | X_{O_l \ U})
///                            - I(Yhat_{O_{l+1}\V}; Y_{O_{l+1}\V} | X_{O_l})
/// for non-empty U, with r on the source layer read as R.
inline RegionReport check_layered_feasible(const LayeredNetwork& net, const LayerModels& models,
                                           const RatePlan& plan, double tol = kDefaultTol) {
  if (!net.is_unicast()) throw Error(ErrorCode::NotUnicast, "layered region is defined for unicast networks");
  detail::check_models(net, models);
  const auto info = detail::tabulate_information(net, models, true);
  const int layers = net.layer_count();
  RegionReport rep;

  for (int l = 1; l <= layers - 2; ++l) {
    const auto& li = info[static_cast<std::size_t>(l - 1)];
    const Mask next_full = full_mask(li.rx);
    for (Mask u = 1; u <= full_mask(li.tx); ++u) {
      const double ru = detail::plan_layer_rate(plan, l, u);
      for (Mask v = 0; v <= next_full; ++v) {
        const Mask rest = next_full & ~v;
        const double lhs = ru - detail::plan_layer_rate(plan, l + 1, rest);
        const double rhs = li.q(u, v) - li.leak[rest];
        detail::consider(rep, lhs, rhs, tol, [&] {
          rep.layer = l;
          rep.tx = u;
          rep.rx = v;
        });
      }
    }
  }
  const auto& last = info.back();
  for (Mask u = 1; u <= full_mask(last.tx); ++u) {
    const double lhs = detail::plan_layer_rate(plan, layers - 1, u);
    const double rhs = last.o(u, full_mask(last.rx));
    detail::consider(rep, lhs, rhs, tol, [&] {
      rep.layer = layers - 1;
      rep.tx = u;
      rep.rx = full_mask(last.rx);
    });
  }
  return rep;
}

inline constexpr int kMaxJointRelays = 12;

/// Joint-decoding region: for every Omega containing S and Phi containing D
/// with Phi inside Omega^c,
///   R < r(Omega^c \ Phi) + I(Yhat_Phi; X_Omega | X_{Omega^c}) - I(Yhat_{Phi^c}; Y_{Phi^c} | X_V)
/// with Yhat_D = Y_D. The layered product form splits both information
/// terms into per-layer-pair terms.
inline RegionReport check_joint_feasible(const LayeredNetwork& net, const LayerModels& models, double rate,
                                         const std::map<NodeId, double>& relay_rates, double tol = kDefaultTol) {
  if (!net.is_unicast()) throw Error(ErrorCode::NotUnicast, "joint region is defined for unicast networks");
  detail::check_models(net, models);
  const int layers = net.layer_count();
  std::vector<NodeId> relays;
  for (int l = 2; l < layers; ++l) {
    for (int k = 1; k <= net.width(l); ++k) relays.push_back({l, k});
  }
  if (static_cast<int>(relays.size()) > kMaxJointRelays) {
    throw Error(ErrorCode::TooLarge, "joint region enumeration limited to " + std::to_string(kMaxJointRelays) +
                                         " relays");
  }
  std::vector<double> r;
  for (const auto& v : relays) {
    auto it = relay_rates.find(v);
    if (it == relay_rates.end()) throw Error(ErrorCode::OutOfRange, "no compression rate for relay " + v.key());
    r.push_back(it->second);
  }
  const auto info = detail::tabulate_information(net, models, true);

  std::size_t assignments = 1;
  for (std::size_t i = 0; i < relays.size(); ++i) assignments *= 3;

  RegionReport rep;
  NodeSet omega{std::vector<Mask>(static_cast<std::size_t>(layers), 0)};
  NodeSet phi{std::vector<Mask>(static_cast<std::size_t>(layers), 0)};
  for (std::size_t code = 0; code < assignments; ++code) {
    std::fill(omega.layers.begin(), omega.layers.end(), 0);
    std::fill(phi.layers.begin(), phi.layers.end(), 0);
    omega.layers.front() = 1;
    phi.layers.back() = 1;
    double free_rate = 0.0;
    std::size_t c = code;
    for (std::size_t i = 0; i < relays.size(); ++i, c /= 3) {
      const auto& v = relays[i];
      const Mask bit = Mask{1} << (v.index - 1);
      switch (c % 3) {
        case 0: omega.layers[static_cast<std::size_t>(v.layer - 1)] |= bit; break;
        case 1: phi.layers[static_cast<std::size_t>(v.layer - 1)] |= bit; break;
        default: free_rate += r[i]; break;
      }
    }
    double information = 0.0;
    for (int l = 1; l <= layers - 2; ++l) information += info[static_cast<std::size_t>(l - 1)].q(omega.at(l), phi.at(l + 1));
    information += info.back().o(omega.at(layers - 1), 1);
    double leak = 0.0;
    for (int l = 2; l < layers; ++l) {
      leak += info[static_cast<std::size_t>(l - 2)].leak[full_mask(net.width(l)) & ~phi.at(l)];
    }
    const double rhs = free_rate + information - leak;
    detail::consider(rep, rate, rhs, tol, [&] {
      rep.omega = omega;
      rep.phi = phi;
    });
  }
  return rep;
}

enum class MultiSourceRegion { Joint, Layered };

struct MultiSourceReport {
  RegionReport direct;     // enumeration over cuts of the network itself
  RegionReport supernode;  // same region through the supernode extension
  bool agree = false;

  bool pass() const { return direct.pass; }
};

namespace detail {

/// I(Yhat_{Omega^c}; X_Omega | X_{Omega^c}) with Yhat_D = Y_D, split per layer pair.
inline double cut_information(const std::vector<LayerInfo>& info, const NodeSet& omega) {
  const std::size_t pairs = info.size();
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pairs; ++i) {
    total += info[i].q(omega.layers[i], full_mask(info[i].rx) & ~omega.layers[i + 1]);
  }
  const auto& last = info.back();
  total += last.o(omega.layers[pairs - 1], full_mask(last.rx) & ~omega.layers[pairs]);
  return total;
}

/// Relay leak I(Yhat_Omega; Y_Omega | X_V) over layers 2..L-1.
inline double cut_leak(const std::vector<LayerInfo>& info, const NodeSet& omega) {
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < omega.layers.size(); ++i) total += info[i - 1].leak[omega.layers[i]];
  return total;
}

/// Calls visit(omega) for every node set with the layers in [first, last]
/// free (1-based) and the others as given, in lexicographic order.
template <typename Visit>
void for_each_cut(const LayeredNetwork& net, NodeSet omega, int first, int last, Visit visit) {
  std::size_t bits = 0;
  for (int l = first; l <= last; ++l) bits += static_cast<std::size_t>(net.width(l));
  if (bits > 20) throw Error(ErrorCode::TooLarge, "cut enumeration limited to 20 free nodes");
  for (std::size_t code = 0; code < (std::size_t{1} << bits); ++code) {
    // Most significant bit of `code` is node (first, 1).
    std::size_t shift = bits;
    for (int l = first; l <= last; ++l) {
      Mask m = 0;
      for (int k = 0; k < net.width(l); ++k) {
        --shift;
        if ((code >> shift) & 1u) m |= Mask{1} << k;
      }
      omega.layers[static_cast<std::size_t>(l - 1)] = m;
    }
    visit(omega);
  }
}

}  // namespace detail

/// Multi-source single-destination region, checked over every cut Omega
/// holding at least one source and excluding D:
///   Joint:   R(Omega_1) < I(Yhat_{Omega^c}; X_Omega | X_{Omega^c}) - I(Yhat_Omega; Y_Omega | X_V)
///   Layered: R(Omega_1) < I(Yhat_{Omega^c}; X_Omega | X_{Omega^c}) - |Omega_1| kappa_1
/// The same region is evaluated a second time as a unicast problem on the
/// network with a supernode feeding the sources at the given rates.
inline MultiSourceReport check_multi_source(const LayeredNetwork& net, const LayerModels& models,
                                            std::span<const double> rates, MultiSourceRegion region,
                                            double tol = kDefaultTol) {
  detail::check_models(net, models);
  const int layers = net.layer_count();
  if (net.width(layers) != 1) throw Error(ErrorCode::NotUnicast, "multi-source region needs a single destination");
  const int sources = net.width(1);
  if (static_cast<int>(rates.size()) != sources) {
    throw Error(ErrorCode::RateCountMismatch, "expected " + std::to_string(sources) + " source rates");
  }
  for (double r : rates) {
    if (!(r >= 0.0)) throw Error(ErrorCode::NegativeRate, "source rates must be >= 0");
  }
  const double kappa1 = region == MultiSourceRegion::Layered ? kappa_recursion(net, models)[0] : 0.0;
  const std::vector<double> rate_vec(rates.begin(), rates.end());

  MultiSourceReport out;
  {
    const auto info = detail::tabulate_information(net, models, true);
    NodeSet start{std::vector<Mask>(static_cast<std::size_t>(layers), 0)};
    detail::for_each_cut(net, start, 1, layers - 1, [&](const NodeSet& omega) {
      const Mask sources_in = omega.at(1);
      if (sources_in == 0) return;
      const double penalty = region == MultiSourceRegion::Joint ? detail::cut_leak(info, omega)
                                                                : popcount(sources_in) * kappa1;
      const double lhs = sum_over(rate_vec, sources_in);
      const double rhs = detail::cut_information(info, omega) - penalty;
      detail::consider(out.direct, lhs, rhs, tol, [&] { out.direct.omega = omega; });
    });
  }
  {
    const LayeredNetwork ext = attach_supernode(net, SupernodeSide::BeforeSources, rates);
    LayerModels ext_models;
    ext_models.push_back(LayerModel::deterministic());
    ext_models.insert(ext_models.end(), models.begin(), models.end());
    const auto info = detail::tabulate_information(ext, ext_models, true);
    const double total = sum_over(rate_vec, full_mask(sources));
    NodeSet start{std::vector<Mask>(static_cast<std::size_t>(layers + 1), 0)};
    start.layers.front() = 1;
    detail::for_each_cut(ext, start, 2, layers, [&](const NodeSet& omega) {
      const Mask sources_in = omega.at(2);
      if (sources_in == 0) return;
      const double penalty = region == MultiSourceRegion::Joint ? detail::cut_leak(info, omega)
                                                                : popcount(sources_in) * kappa1;
      const double rhs = detail::cut_information(info, omega) - penalty;
      detail::consider(out.supernode, total, rhs, tol, [&] {
        out.supernode.omega.layers.assign(omega.layers.begin() + 1, omega.layers.end());
      });
    });
  }
  const double scale = std::max({1.0, std::abs(out.direct.margin), std::abs(out.supernode.margin)});
  out.agree = out.direct.pass == out.supernode.pass &&
              std::abs(out.direct.margin - out.supernode.margin) <= 1e-9 * scale;
  return out;
}

struct DecodingComplexity {
  double log2_joint = 0.0;
  double log2_layered = 0.0;
};

/// Exhaustive-search decoding costs in log2:
///   joint   = 2^{RT} prod_{relays} n_Q,v
///   layered = sum_l 2^{r(O_l) T} prod_{v in O_{l+1}} n_Q,v
/// The destination keeps its observation, so its n_Q is 1.
inline DecodingComplexity decoding_complexity(const LayeredNetwork& net, const RatePlan& plan, int block_length,
                                              const std::map<NodeId, double>& quantizer_sizes) {
  if (block_length < 1) throw Error(ErrorCode::BadRange, "block length T must be >= 1");
  const int layers = net.layer_count();
  auto log2_nq = [&](NodeId v) -> double {
    if (v.layer == 1 || v.layer == layers) return 0.0;
    auto it = quantizer_sizes.find(v);
    if (it == quantizer_sizes.end()) throw Error(ErrorCode::OutOfRange, "no quantizer size for relay " + v.key());
    if (!(it->second >= 1.0)) throw Error(ErrorCode::BadRange, "quantizer sizes must be >= 1");
    return std::log2(it->second);
  };
  const double t = static_cast<double>(block_length);
  DecodingComplexity out;
  out.log2_joint = plan.rate * t;
  for (int l = 2; l < layers; ++l) {
    for (int k = 1; k <= net.width(l); ++k) out.log2_joint += log2_nq({l, k});
  }
  std::vector<double> terms;
  for (int l = 1; l < layers; ++l) {
    double e = detail::plan_layer_rate(plan, l, full_mask(net.width(l))) * t;
    for (int k = 1; k <= net.width(l + 1); ++k) e += log2_nq({l + 1, k});
    terms.push_back(e);
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double e : terms) acc += std::exp2(e - top);
  out.log2_layered = top + std::log2(acc);
  return out;
}

/// kappa^g_{L-1} = 0, kappa^g_l = 1 + kappa^g_{l+1} |O_{l+1}|.
inline std::vector<double> gaussian_kappa(const LayeredNetwork& net) {
  const int layers = net.layer_count();
  std::vector<double> kappa(static_cast<std::size_t>(layers - 1), 0.0);
  for (int l = layers - 2; l >= 1; --l) {
    kappa[static_cast<std::size_t>(l - 1)] = 1.0 + kappa[static_cast<std::size_t>(l)] * net.width(l + 1);
  }
  return kappa;
}

struct GaussianGap {
  double joint = 0.0;    // 3|V|
  double layered = 0.0;  // 2|V| + kappa^g_1
};

inline GaussianGap gaussian_gap(const LayeredNetwork& net) {
  const double nodes = static_cast<double>(net.node_count());
  return {3.0 * nodes, 2.0 * nodes + gaussian_kappa(net)[0]};
}

}  // namespace nodeflow

#endif  // NODEFLOW_RATEPLAN_HPP
