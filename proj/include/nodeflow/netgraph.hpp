#ifndef NODEFLOW_NETGRAPH_HPP
#define NODEFLOW_NETGRAPH_HPP

#include <compare>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "nodeflow/capacity.hpp"
#include "nodeflow/errors.hpp"
#include "nodeflow/subset.hpp"

namespace nodeflow {

/// (layer, index), both 1-based.
struct NodeId {
  int layer = 1;
  int index = 1;

  auto operator<=>(const NodeId&) const = default;

  std::string key() const { return std::to_string(layer) + "." + std::to_string(index); }
};

/// Layered graph with one capacity oracle per adjacent layer pair. Layer 1
/// holds the sources and layer L the destinations. Immutable once built;
/// oracles are shared between a network and the slices taken from it.
class LayeredNetwork {
 public:
  LayeredNetwork(std::vector<int> layer_sizes, std::vector<std::shared_ptr<const CapacityOracle>> oracles)
      : sizes_(std::move(layer_sizes)), oracles_(std::move(oracles)) {
    if (sizes_.size() < 2) throw Error(ErrorCode::TooFewLayers, "a layered network needs at least 2 layers");
    for (std::size_t l = 0; l < sizes_.size(); ++l) {
      if (sizes_[l] < 1) throw Error(ErrorCode::EmptyLayer, "layer " + std::to_string(l + 1) + " is empty");
      if (sizes_[l] > kMaxLayerWidth) {
        throw Error(ErrorCode::TooLarge, "layer " + std::to_string(l + 1) + " wider than " +
                                             std::to_string(kMaxLayerWidth));
      }
    }
    if (oracles_.size() != sizes_.size() - 1) {
      throw Error(ErrorCode::DimensionMismatch, std::to_string(sizes_.size()) + " layers need " +
                                                    std::to_string(sizes_.size() - 1) + " oracles, got " +
                                                    std::to_string(oracles_.size()));
    }
    for (std::size_t l = 0; l < oracles_.size(); ++l) {
      const auto& o = oracles_[l];
      if (!o) throw Error(ErrorCode::DimensionMismatch, "missing oracle " + std::to_string(l + 1));
      if (o->tx_size() != sizes_[l] || o->rx_size() != sizes_[l + 1]) {
        throw Error(ErrorCode::DimensionMismatch,
                    "oracle " + std::to_string(l + 1) + " is " + std::to_string(o->tx_size()) + "x" +
                        std::to_string(o->rx_size()) + ", layers need " + std::to_string(sizes_[l]) + "x" +
                        std::to_string(sizes_[l + 1]));
      }
    }
  }

  int layer_count() const { return static_cast<int>(sizes_.size()); }
  /// Width of 1-based layer l.
  int width(int l) const { return sizes_[static_cast<std::size_t>(l - 1)]; }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  int node_count() const { return std::accumulate(sizes_.begin(), sizes_.end(), 0); }
  bool is_unicast() const { return sizes_.front() == 1 && sizes_.back() == 1; }

  /// Oracle between layers l and l+1 (1-based l).
  const CapacityOracle& oracle(int l) const { return *oracles_[static_cast<std::size_t>(l - 1)]; }
  std::shared_ptr<const CapacityOracle> oracle_ptr(int l) const { return oracles_[static_cast<std::size_t>(l - 1)]; }
  const std::vector<std::shared_ptr<const CapacityOracle>>& oracles() const { return oracles_; }

  /// Nodes in (layer, index) order.
  std::vector<NodeId> nodes() const {
    std::vector<NodeId> out;
    for (int l = 1; l <= layer_count(); ++l) {
      for (int k = 1; k <= width(l); ++k) out.push_back({l, k});
    }
    return out;
  }

  void check_node(NodeId v) const {
    if (v.layer < 1 || v.layer > layer_count() || v.index < 1 || v.index > width(v.layer)) {
      throw Error(ErrorCode::OutOfRange, "node " + v.key() + " not in network");
    }
  }

 private:
  std::vector<int> sizes_;
  std::vector<std::shared_ptr<const CapacityOracle>> oracles_;
};

inline LayeredNetwork build_network(std::vector<int> layer_sizes, std::vector<CapacityOracle> oracles) {
  std::vector<std::shared_ptr<const CapacityOracle>> shared;
  shared.reserve(oracles.size());
  for (auto& o : oracles) shared.push_back(std::make_shared<const CapacityOracle>(std::move(o)));
  return LayeredNetwork(std::move(layer_sizes), std::move(shared));
}

/// Node subset stored as one mask per layer.
struct NodeSet {
  std::vector<Mask> layers;  // layers[l-1]

  Mask at(int l) const { return layers[static_cast<std::size_t>(l - 1)]; }
  bool contains(NodeId v) const { return nodeflow::contains(at(v.layer), v.index - 1); }

  std::vector<NodeId> members() const {
    std::vector<NodeId> out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      for (int k : indices_from_mask(layers[l])) out.push_back({static_cast<int>(l) + 1, k});
    }
    return out;
  }

  bool operator==(const NodeSet&) const = default;
};

/// Per-node flow values in bits per symbol.
class Flow {
 public:
  Flow() = default;
  explicit Flow(const std::vector<int>& layer_sizes) {
    for (int m : layer_sizes) values_.emplace_back(static_cast<std::size_t>(m), 0.0);
  }

  int layer_count() const { return static_cast<int>(values_.size()); }
  double& at(NodeId v) { return values_[static_cast<std::size_t>(v.layer - 1)][static_cast<std::size_t>(v.index - 1)]; }
  double at(NodeId v) const {
    return values_[static_cast<std::size_t>(v.layer - 1)][static_cast<std::size_t>(v.index - 1)];
  }
  /// Values of 1-based layer l, indexed by 0-based node index.
  std::vector<double>& layer(int l) { return values_[static_cast<std::size_t>(l - 1)]; }
  const std::vector<double>& layer(int l) const { return values_[static_cast<std::size_t>(l - 1)]; }

  /// f(A) for A inside layer l.
  double sum(int l, Mask members) const { return sum_over(layer(l), members); }
  double layer_total(int l) const {
    const auto& v = layer(l);
    return std::accumulate(v.begin(), v.end(), 0.0);
  }
  /// f(O_1), the value carried by the flow.
  double value() const { return layer_total(1); }

 private:
  std::vector<std::vector<double>> values_;
};

/// Cut: node subset containing the sources' side, with its value.
struct Cut {
  NodeSet members;
  double value = 0.0;
};

/// Contiguous slice of a network. Layer k of `network` is layer
/// first_layer + k - 1 of the parent; node indices inside a layer are kept.
struct Subnetwork {
  LayeredNetwork network;
  int first_layer = 1;

  NodeId to_parent(NodeId v) const { return {v.layer + first_layer - 1, v.index}; }
  NodeId from_parent(NodeId v) const { return {v.layer - first_layer + 1, v.index}; }
  int parent_layer(int l) const { return l + first_layer - 1; }
};

inline Subnetwork subnetwork(const LayeredNetwork& net, int l_start, int l_end) {
  if (l_start < 1 || l_end > net.layer_count() || l_start >= l_end) {
    throw Error(ErrorCode::BadRange, "slice (" + std::to_string(l_start) + "," + std::to_string(l_end) +
                                         ") of a " + std::to_string(net.layer_count()) + "-layer network");
  }
  std::vector<int> sizes(net.layer_sizes().begin() + (l_start - 1), net.layer_sizes().begin() + l_end);
  std::vector<std::shared_ptr<const CapacityOracle>> oracles(net.oracles().begin() + (l_start - 1),
                                                             net.oracles().begin() + (l_end - 1));
  return Subnetwork{LayeredNetwork(std::move(sizes), std::move(oracles)), l_start};
}

enum class SupernodeSide { BeforeSources, AfterDestinations };

/// Adds a single-node layer in front of the sources (or behind the
/// destinations) joined by the additive oracle rho(A, V) = sum_{v in V} rate_v.
/// The result is unicast on that side.
inline LayeredNetwork attach_supernode(const LayeredNetwork& net, SupernodeSide side, std::span<const double> rates) {
  const int boundary = side == SupernodeSide::BeforeSources ? net.width(1) : net.width(net.layer_count());
  if (static_cast<int>(rates.size()) != boundary) {
    throw Error(ErrorCode::RateCountMismatch, "expected " + std::to_string(boundary) + " boundary rates, got " +
                                                  std::to_string(rates.size()));
  }
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorCode::NegativeRate, "boundary rates must be >= 0");
  }
  std::vector<int> sizes = net.layer_sizes();
  auto oracles = net.oracles();
  if (side == SupernodeSide::BeforeSources) {
    auto link = std::make_shared<const CapacityOracle>(
        CapacityOracle::additive({std::vector<double>(rates.begin(), rates.end())}));
    sizes.insert(sizes.begin(), 1);
    oracles.insert(oracles.begin(), std::move(link));
  } else {
    std::vector<std::vector<double>> column;
    for (double r : rates) column.push_back({r});
    auto link = std::make_shared<const CapacityOracle>(CapacityOracle::additive(std::move(column)));
    sizes.push_back(1);
    oracles.push_back(std::move(link));
  }
  return LayeredNetwork(std::move(sizes), std::move(oracles));
}

}  // namespace nodeflow

#endif  // NODEFLOW_NETGRAPH_HPP
