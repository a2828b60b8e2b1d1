#ifndef NODEFLOW_CAPACITY_HPP
#define NODEFLOW_CAPACITY_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "nodeflow/errors.hpp"
#include "nodeflow/gf2.hpp"
#include "nodeflow/subset.hpp"

namespace nodeflow {

/// y_w = sum_u h_{w,u} x_u + z_w with unit-variance circular noise, unit
/// input covariance and the quantizer yhat_w = y_w + zhat_w with unit
/// quantization noise.
class GaussianLayerModel {
 public:
  explicit GaussianLayerModel(Eigen::MatrixXcd h) : h_(std::move(h)) {
    if (h_.rows() < 1 || h_.cols() < 1) {
      throw Error(ErrorCode::DimensionMismatch, "gaussian channel matrix must be non-empty");
    }
    if (!h_.allFinite()) {
      throw Error(ErrorCode::InvalidOracle, "gaussian channel matrix has non-finite entries");
    }
  }

  int tx_size() const { return static_cast<int>(h_.cols()); }
  int rx_size() const { return static_cast<int>(h_.rows()); }
  const Eigen::MatrixXcd& channel() const { return h_; }

  /// log2 det(I + H_{V,U} H_{V,U}^* / noise_power), computed through a
  /// Cholesky factor of the symmetrized matrix.
  double log_det(Mask tx, Mask rx, double noise_power) const {
    const int nu = popcount(tx);
    const int nv = popcount(rx);
    if (nu == 0 || nv == 0) return 0.0;
    Eigen::MatrixXcd sub(nv, nu);
    int r = 0;
    for (int w = 0; w < rx_size(); ++w) {
      if (!contains(rx, w)) continue;
      int c = 0;
      for (int u = 0; u < tx_size(); ++u) {
        if (!contains(tx, u)) continue;
        sub(r, c++) = h_(w, u);
      }
      ++r;
    }
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(nv, nv) + sub * sub.adjoint() / noise_power;
    m = (m + m.adjoint()).eval() / 2.0;
    Eigen::LLT<Eigen::MatrixXcd> llt(m);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::NumericalFailure, "Cholesky factorization of I + HH*/n failed");
    }
    const Eigen::MatrixXcd& l = llt.matrixLLT();
    double acc = 0.0;
    for (int i = 0; i < nv; ++i) acc += std::log2(l(i, i).real());
    return 2.0 * acc;
  }

  /// I(X_U; Yhat_V | X_{rest}): total noise power 2 (channel + quantizer).
  double quantized_mi(Mask tx, Mask rx) const { return log_det(tx, rx, 2.0); }
  /// I(X_U; Y_V | X_{rest}) with the unquantized observation.
  double observation_mi(Mask tx, Mask rx) const { return log_det(tx, rx, 1.0); }
  /// I(Yhat_W; Y_W | X) = |W| * log2(1 + 1/1).
  double leak(Mask rx) const { return static_cast<double>(popcount(rx)); }

 private:
  Eigen::MatrixXcd h_;
};

inline constexpr double kPmfTolerance = 1e-12;
inline constexpr double kMaxJointEntries = 1e7;

/// Finite-alphabet layer: independent inputs, per-receiver channels
/// p(y_w | x_{O_l}) and per-receiver quantizers p(yhat_w | y_w).
///
/// Joint input configurations are indexed in mixed radix with transmitter 1
/// as the fastest-varying digit.
class DiscreteLayerModel {
 public:
  using Pmf = std::vector<double>;

  /// `quantizer` may be empty, meaning yhat_w = y_w for every receiver.
  DiscreteLayerModel(std::vector<Pmf> input_pmfs, std::vector<std::vector<Pmf>> channel,
                     std::vector<std::vector<Pmf>> quantizer = {})
      : inputs_(std::move(input_pmfs)),
        channel_(std::move(channel)),
        quantizer_(std::move(quantizer)) {
    validate_and_precompute();
  }

  int tx_size() const { return static_cast<int>(inputs_.size()); }
  int rx_size() const { return static_cast<int>(channel_.size()); }
  std::size_t config_count() const { return configs_; }
  const std::vector<Pmf>& input_pmfs() const { return inputs_; }
  const std::vector<std::vector<Pmf>>& channel() const { return channel_; }
  /// Empty when the quantizer is the identity.
  const std::vector<std::vector<Pmf>>& quantizer() const { return quantizer_; }
  bool identity_quantizer() const { return quantizer_.empty(); }

  int input_alphabet(int u) const { return static_cast<int>(inputs_[static_cast<std::size_t>(u)].size()); }
  int output_alphabet(int w) const { return static_cast<int>(channel_[static_cast<std::size_t>(w)][0].size()); }
  int quantized_alphabet(int w) const { return quantized_size_[static_cast<std::size_t>(w)]; }

  int input_digit(std::size_t config, int u) const {
    return static_cast<int>((config / strides_[static_cast<std::size_t>(u)]) %
                            inputs_[static_cast<std::size_t>(u)].size());
  }

  double input_probability(std::size_t config) const { return config_prob_[config]; }

  /// p(yhat_w | x) for the joint input configuration x.
  double quantized_given_input(int w, std::size_t config, int yhat) const {
    const auto ws = static_cast<std::size_t>(w);
    return yhat_given_x_[ws][config * static_cast<std::size_t>(quantized_size_[ws]) +
                             static_cast<std::size_t>(yhat)];
  }

  double output_given_input(int w, std::size_t config, int y) const {
    return channel_[static_cast<std::size_t>(w)][config][static_cast<std::size_t>(y)];
  }

  double quantizer_probability(int w, int y, int yhat) const {
    if (quantizer_.empty()) return y == yhat ? 1.0 : 0.0;
    return quantizer_[static_cast<std::size_t>(w)][static_cast<std::size_t>(y)]
                     [static_cast<std::size_t>(yhat)];
  }

  /// I(X_U; Yhat_V | X_{O_l \ U}) by exact summation.
  double quantized_mi(Mask tx, Mask rx) const {
    return conditional_mi(tx, rx, [this](int w, std::size_t x, int yhat) {
      return quantized_given_input(w, x, yhat);
    }, quantized_size_);
  }

  /// I(X_U; Y_V | X_{O_l \ U}) with the unquantized observation.
  double observation_mi(Mask tx, Mask rx) const {
    return conditional_mi(tx, rx, [this](int w, std::size_t x, int y) {
      return output_given_input(w, x, y);
    }, output_size_);
  }

  /// I(Yhat_W; Y_W | X_{O_l}); additive over W because receivers are
  /// conditionally independent given the inputs.
  double leak(Mask rx) const {
    double total = 0.0;
    for (int w = 0; w < rx_size(); ++w) {
      if (contains(rx, w)) total += node_leak_[static_cast<std::size_t>(w)];
    }
    return total;
  }

 private:
  template <typename Cond>
  double conditional_mi(Mask tx, Mask rx, Cond cond, const std::vector<int>& sizes) const {
    check_masks(tx, rx);
    if (tx == 0 || rx == 0) return 0.0;

    std::vector<int> rx_nodes;
    std::size_t outcomes = 1;
    for (int w = 0; w < rx_size(); ++w) {
      if (contains(rx, w)) {
        rx_nodes.push_back(w);
        outcomes *= static_cast<std::size_t>(sizes[static_cast<std::size_t>(w)]);
      }
    }

    // Key of the conditioning inputs X_{O_l \ U}.
    std::vector<std::size_t> key(configs_);
    std::size_t keys = 1;
    {
      std::vector<std::size_t> key_stride(inputs_.size(), 0);
      for (int u = 0; u < tx_size(); ++u) {
        if (contains(tx, u)) continue;
        key_stride[static_cast<std::size_t>(u)] = keys;
        keys *= inputs_[static_cast<std::size_t>(u)].size();
      }
      for (std::size_t x = 0; x < configs_; ++x) {
        std::size_t k = 0;
        for (int u = 0; u < tx_size(); ++u) {
          if (!contains(tx, u)) k += key_stride[static_cast<std::size_t>(u)] * static_cast<std::size_t>(input_digit(x, u));
        }
        key[x] = k;
      }
    }

    // p(yhat_V | x) for every x, then the mixture over X_U for each key.
    std::vector<double> given_x(configs_ * outcomes);
    std::vector<int> digits(rx_nodes.size());
    for (std::size_t x = 0; x < configs_; ++x) {
      std::fill(digits.begin(), digits.end(), 0);
      for (std::size_t o = 0; o < outcomes; ++o) {
        double p = 1.0;
        for (std::size_t i = 0; i < rx_nodes.size(); ++i) p *= cond(rx_nodes[i], x, digits[i]);
        given_x[x * outcomes + o] = p;
        for (std::size_t i = 0; i < rx_nodes.size(); ++i) {
          if (++digits[i] < sizes[static_cast<std::size_t>(rx_nodes[i])]) break;
          digits[i] = 0;
        }
      }
    }

    std::vector<double> mixture(keys * outcomes, 0.0);
    for (std::size_t x = 0; x < configs_; ++x) {
      double px_u = 1.0;
      for (int u = 0; u < tx_size(); ++u) {
        if (contains(tx, u)) px_u *= inputs_[static_cast<std::size_t>(u)][static_cast<std::size_t>(input_digit(x, u))];
      }
      if (px_u == 0.0) continue;
      for (std::size_t o = 0; o < outcomes; ++o) {
        mixture[key[x] * outcomes + o] += px_u * given_x[x * outcomes + o];
      }
    }

    double info = 0.0;
    for (std::size_t x = 0; x < configs_; ++x) {
      const double px = config_prob_[x];
      if (px == 0.0) continue;
      for (std::size_t o = 0; o < outcomes; ++o) {
        const double p = given_x[x * outcomes + o];
        if (p == 0.0) continue;
        info += px * p * std::log2(p / mixture[key[x] * outcomes + o]);
      }
    }
    return info > 0.0 ? info : 0.0;
  }

  void check_masks(Mask tx, Mask rx) const {
    if (!is_subset(tx, full_mask(tx_size())) || !is_subset(rx, full_mask(rx_size()))) {
      throw Error(ErrorCode::OutOfRange, "subset outside the discrete layer dimensions");
    }
  }

  static void check_pmf(const Pmf& p, const std::string& what) {
    if (p.empty()) throw Error(ErrorCode::NonNormalizedPMF, what + " is empty");
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::NonNormalizedPMF, what + " has a negative or non-finite entry");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > kPmfTolerance) {
      throw Error(ErrorCode::NonNormalizedPMF, what + " sums to " + std::to_string(s));
    }
  }

  void validate_and_precompute() {
    if (inputs_.empty() || channel_.empty()) {
      throw Error(ErrorCode::DimensionMismatch, "discrete layer needs at least one transmitter and receiver");
    }
    if (tx_size() > kMaxLayerWidth || rx_size() > kMaxLayerWidth) {
      throw Error(ErrorCode::TooLarge, "discrete layer wider than " + std::to_string(kMaxLayerWidth));
    }
    double configs = 1.0;
    strides_.resize(inputs_.size());
    for (std::size_t u = 0; u < inputs_.size(); ++u) {
      check_pmf(inputs_[u], "input pmf of transmitter " + std::to_string(u + 1));
      strides_[u] = static_cast<std::size_t>(configs);
      configs *= static_cast<double>(inputs_[u].size());
    }
    if (configs > kMaxJointEntries) throw Error(ErrorCode::TooLarge, "input alphabet product exceeds 1e7");
    configs_ = static_cast<std::size_t>(configs);

    if (!quantizer_.empty() && quantizer_.size() != channel_.size()) {
      throw Error(ErrorCode::DimensionMismatch, "quantizer count differs from receiver count");
    }
    double out_product = configs;
    double q_product = configs;
    output_size_.resize(channel_.size());
    quantized_size_.resize(channel_.size());
    for (std::size_t w = 0; w < channel_.size(); ++w) {
      const auto& ch = channel_[w];
      if (ch.size() != configs_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "channel of receiver " + std::to_string(w + 1) + " needs one pmf per input configuration (" +
                        std::to_string(configs_) + ")");
      }
      const std::size_t ny = ch[0].size();
      for (std::size_t x = 0; x < configs_; ++x) {
        if (ch[x].size() != ny) throw Error(ErrorCode::DimensionMismatch, "ragged channel table");
        check_pmf(ch[x], "channel pmf of receiver " + std::to_string(w + 1));
      }
      output_size_[w] = static_cast<int>(ny);
      std::size_t nq = ny;
      if (!quantizer_.empty()) {
        const auto& q = quantizer_[w];
        if (q.size() != ny) {
          throw Error(ErrorCode::DimensionMismatch, "quantizer of receiver " + std::to_string(w + 1) +
                                                        " needs one pmf per output symbol");
        }
        nq = q[0].size();
        for (const auto& row : q) {
          if (row.size() != nq) throw Error(ErrorCode::DimensionMismatch, "ragged quantizer table");
          check_pmf(row, "quantizer pmf of receiver " + std::to_string(w + 1));
        }
      }
      quantized_size_[w] = static_cast<int>(nq);
      out_product *= static_cast<double>(ny);
      q_product *= static_cast<double>(nq);
    }
    if (out_product > kMaxJointEntries || q_product > kMaxJointEntries) {
      throw Error(ErrorCode::TooLarge, "joint table exceeds 1e7 entries");
    }

    config_prob_.assign(configs_, 1.0);
    for (std::size_t x = 0; x < configs_; ++x) {
      for (int u = 0; u < tx_size(); ++u) {
        config_prob_[x] *= inputs_[static_cast<std::size_t>(u)][static_cast<std::size_t>(input_digit(x, u))];
      }
    }

    yhat_given_x_.resize(channel_.size());
    node_leak_.assign(channel_.size(), 0.0);
    for (int w = 0; w < rx_size(); ++w) {
      const auto ws = static_cast<std::size_t>(w);
      const int ny = output_size_[ws];
      const int nq = quantized_size_[ws];
      auto& table = yhat_given_x_[ws];
      table.assign(configs_ * static_cast<std::size_t>(nq), 0.0);
      for (std::size_t x = 0; x < configs_; ++x) {
        for (int y = 0; y < ny; ++y) {
          const double py = channel_[ws][x][static_cast<std::size_t>(y)];
          if (py == 0.0) continue;
          for (int q = 0; q < nq; ++q) {
            table[x * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q)] += py * quantizer_probability(w, y, q);
          }
        }
      }
      // I(Yhat;Y|X) = sum_x p(x) sum_y p(y|x) sum_q p(q|y) log p(q|y)/p(q|x)
      double leak = 0.0;
      for (std::size_t x = 0; x < configs_; ++x) {
        if (config_prob_[x] == 0.0) continue;
        for (int y = 0; y < ny; ++y) {
          const double py = channel_[ws][x][static_cast<std::size_t>(y)];
          if (py == 0.0) continue;
          for (int q = 0; q < nq; ++q) {
            const double pq = quantizer_probability(w, y, q);
            if (pq == 0.0) continue;
            leak += config_prob_[x] * py * pq *
                    std::log2(pq / table[x * static_cast<std::size_t>(nq) + static_cast<std::size_t>(q)]);
          }
        }
      }
      node_leak_[ws] = leak > 0.0 ? leak : 0.0;
    }
  }

  std::vector<Pmf> inputs_;
  std::vector<std::vector<Pmf>> channel_;    // [w][x][y]
  std::vector<std::vector<Pmf>> quantizer_;  // [w][y][yhat]
  std::vector<std::size_t> strides_;
  std::size_t configs_ = 0;
  std::vector<double> config_prob_;
  std::vector<int> output_size_;
  std::vector<int> quantized_size_;
  std::vector<std::vector<double>> yhat_given_x_;  // [w][x * |Yhat_w| + yhat]
  std::vector<double> node_leak_;
};

enum class OracleKind { Additive, RankGF2, GaussianLogDet, ExplicitTable, DiscreteMI };

inline std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::Additive: return "additive";
    case OracleKind::RankGF2: return "rank_gf2";
    case OracleKind::GaussianLogDet: return "gaussian";
    case OracleKind::ExplicitTable: return "table";
    case OracleKind::DiscreteMI: return "discrete";
  }
  return "unknown";
}

/// c[u][v]: capacity contributed by transmitter u to receiver v.
struct AdditiveCapacity {
  std::vector<std::vector<double>> c;
};

/// rows[w] bit u: G_{w,u} of y = G x over GF(2).
struct RankGf2Capacity {
  std::vector<std::uint64_t> rows;
};

/// Values for (U, V) pairs; absent non-empty pairs evaluate to 0.
struct TableCapacity {
  std::map<std::pair<Mask, Mask>, double> values;
};

/// Capacity function rho_l(U, V) between layer l (transmitters) and layer
/// l+1 (receivers). Immutable; eval is a pure read.
class CapacityOracle {
 public:
  using Payload = std::variant<AdditiveCapacity, RankGf2Capacity, std::shared_ptr<const GaussianLayerModel>,
                               TableCapacity, std::shared_ptr<const DiscreteLayerModel>>;

  static CapacityOracle additive(std::vector<std::vector<double>> c) {
    if (c.empty() || c[0].empty()) throw Error(ErrorCode::DimensionMismatch, "additive matrix must be non-empty");
    const std::size_t rx = c[0].size();
    for (const auto& row : c) {
      if (row.size() != rx) throw Error(ErrorCode::DimensionMismatch, "ragged additive matrix");
      for (double v : row) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
          throw Error(ErrorCode::InvalidOracle, "additive capacities must be finite and nonnegative");
        }
      }
    }
    const int tx = static_cast<int>(c.size());
    return CapacityOracle(AdditiveCapacity{std::move(c)}, tx, static_cast<int>(rx));
  }

  /// g is receivers x transmitters with 0/1 entries.
  static CapacityOracle rank_gf2(const std::vector<std::vector<int>>& g) {
    if (g.empty() || g[0].empty()) throw Error(ErrorCode::DimensionMismatch, "GF(2) matrix must be non-empty");
    const std::size_t tx = g[0].size();
    if (tx > 64) throw Error(ErrorCode::TooLarge, "GF(2) matrix wider than 64 columns");
    RankGf2Capacity cap;
    for (const auto& row : g) {
      if (row.size() != tx) throw Error(ErrorCode::DimensionMismatch, "ragged GF(2) matrix");
      std::uint64_t bits = 0;
      for (std::size_t u = 0; u < tx; ++u) {
        if (row[u] != 0 && row[u] != 1) throw Error(ErrorCode::InvalidOracle, "GF(2) entries must be 0 or 1");
        if (row[u] == 1) bits |= std::uint64_t{1} << u;
      }
      cap.rows.push_back(bits);
    }
    const int rx = static_cast<int>(g.size());
    return CapacityOracle(std::move(cap), static_cast<int>(tx), rx);
  }

  static CapacityOracle gaussian(std::shared_ptr<const GaussianLayerModel> model) {
    const int tx = model->tx_size();
    const int rx = model->rx_size();
    return CapacityOracle(std::move(model), tx, rx);
  }

  static CapacityOracle table(int tx, int rx, std::map<std::pair<Mask, Mask>, double> values) {
    if (tx < 1 || rx < 1) throw Error(ErrorCode::DimensionMismatch, "table dimensions must be positive");
    for (const auto& [key, v] : values) {
      const auto [u, w] = key;
      if (!is_subset(u, full_mask(tx)) || !is_subset(w, full_mask(rx))) {
        throw Error(ErrorCode::OutOfRange, "table entry outside the layer dimensions");
      }
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::InvalidOracle, "table values must be finite and nonnegative");
      }
      if ((u == 0 || w == 0) && v != 0.0) {
        throw Error(ErrorCode::InvalidOracle, "table entries with an empty side must be 0");
      }
    }
    return CapacityOracle(TableCapacity{std::move(values)}, tx, rx);
  }

  static CapacityOracle discrete(std::shared_ptr<const DiscreteLayerModel> model) {
    const int tx = model->tx_size();
    const int rx = model->rx_size();
    return CapacityOracle(std::move(model), tx, rx);
  }

  OracleKind kind() const { return static_cast<OracleKind>(payload_.index()); }
  int tx_size() const { return tx_; }
  int rx_size() const { return rx_; }
  const Payload& payload() const { return payload_; }

  /// rho(U, V) in bits per symbol.
  double eval(Mask tx, Mask rx) const {
    if (!is_subset(tx, full_mask(tx_)) || !is_subset(rx, full_mask(rx_))) {
      throw Error(ErrorCode::OutOfRange, "subset outside oracle dimensions " + std::to_string(tx_) + "x" +
                                             std::to_string(rx_));
    }
    if (tx == 0 || rx == 0) return 0.0;
    return std::visit(
        [&](const auto& p) -> double {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, AdditiveCapacity>) {
            double s = 0.0;
            for (int u = 0; u < tx_; ++u) {
              if (!contains(tx, u)) continue;
              for (int v = 0; v < rx_; ++v) {
                if (contains(rx, v)) s += p.c[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)];
              }
            }
            return s;
          } else if constexpr (std::is_same_v<T, RankGf2Capacity>) {
            return static_cast<double>(gf2::submatrix_rank(p.rows, rx, tx));
          } else if constexpr (std::is_same_v<T, TableCapacity>) {
            auto it = p.values.find({tx, rx});
            return it == p.values.end() ? 0.0 : it->second;
          } else {
            return p->quantized_mi(tx, rx);
          }
        },
        payload_);
  }

  /// Tabulated copy with every value multiplied by `scale`.
  CapacityOracle tabulated(double scale = 1.0) const {
    if (tx_ + rx_ > 2 * kMaxLayerWidth) throw Error(ErrorCode::TooLarge, "oracle too large to tabulate");
    std::map<std::pair<Mask, Mask>, double> values;
    for (Mask u = 1; u <= full_mask(tx_); ++u) {
      for (Mask v = 1; v <= full_mask(rx_); ++v) values[{u, v}] = scale * eval(u, v);
    }
    return table(tx_, rx_, std::move(values));
  }

 private:
  CapacityOracle(Payload payload, int tx, int rx) : payload_(std::move(payload)), tx_(tx), rx_(rx) {
    if (tx_ > kMaxLayerWidth || rx_ > kMaxLayerWidth) {
      throw Error(ErrorCode::TooLarge, "layer wider than " + std::to_string(kMaxLayerWidth) + " nodes");
    }
  }

  Payload payload_;
  int tx_;
  int rx_;
};

struct AxiomViolation {
  std::string axiom;  // "bisubmodular", "monotone" or "zero"
  Mask u1 = 0, v1 = 0, u2 = 0, v2 = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AxiomReport {
  bool bisubmodular = true;
  bool monotone = true;
  bool zero_at_empty = true;
  std::optional<AxiomViolation> counterexample;  // first violation found

  bool pass() const { return bisubmodular && monotone && zero_at_empty; }
};

inline constexpr int kAxiomGuard = 16;

/// Exhaustive check of the three capacity-function axioms:
///   rho(U1 u U2, V1 n V2) + rho(U1 n U2, V1 u V2) <= rho(U1,V1) + rho(U2,V2),
///   rho(U,V) <= rho(U1,V1) whenever U c U1 and V c V1,
///   rho(0,V) = rho(U,0) = 0.
inline AxiomReport check_capacity_axioms(const CapacityOracle& oracle, double tol = 1e-9) {
  const int m = oracle.tx_size();
  const int n = oracle.rx_size();
  if (m + n > kAxiomGuard) {
    throw Error(ErrorCode::TooLarge, "axiom check needs tx + rx <= " + std::to_string(kAxiomGuard));
  }
  const Mask fu = full_mask(m);
  const Mask fv = full_mask(n);
  const std::size_t cells = std::size_t{1} << (m + n);
  std::vector<double> val(cells);
  auto at = [&](Mask u, Mask v) -> double& { return val[(static_cast<std::size_t>(u) << n) | v]; };
  for (Mask u = 0; u <= fu; ++u) {
    for (Mask v = 0; v <= fv; ++v) at(u, v) = oracle.eval(u, v);
  }

  AxiomReport report;
  auto record = [&](const char* axiom, Mask u1, Mask v1, Mask u2, Mask v2, double lhs, double rhs) {
    if (!report.counterexample) report.counterexample = AxiomViolation{axiom, u1, v1, u2, v2, lhs, rhs};
  };

  for (Mask u = 0; u <= fu; ++u) {
    if (std::abs(at(u, 0)) > tol) {
      report.zero_at_empty = false;
      record("zero", u, 0, 0, 0, at(u, 0), 0.0);
    }
  }
  for (Mask v = 0; v <= fv; ++v) {
    if (std::abs(at(0, v)) > tol) {
      report.zero_at_empty = false;
      record("zero", 0, v, 0, 0, at(0, v), 0.0);
    }
  }

  for (Mask u1 = 0; u1 <= fu && report.monotone; ++u1) {
    for (Mask v1 = 0; v1 <= fv && report.monotone; ++v1) {
      const double big = at(u1, v1);
      // all (u, v) with u c u1 and v c v1
      for (Mask u = u1;; u = (u - 1) & u1) {
        for (Mask v = v1;; v = (v - 1) & v1) {
          const double small = at(u, v);
          if (small > big + scaled_tol(tol, big)) {
            report.monotone = false;
            record("monotone", u, v, u1, v1, small, big);
            break;
          }
          if (v == 0) break;
        }
        if (!report.monotone || u == 0) break;
      }
    }
  }

  const std::size_t pairs = cells;
  for (std::size_t a = 0; a < pairs && report.bisubmodular; ++a) {
    const Mask u1 = static_cast<Mask>(a >> n);
    const Mask v1 = static_cast<Mask>(a) & fv;
    for (std::size_t b = a + 1; b < pairs; ++b) {
      const Mask u2 = static_cast<Mask>(b >> n);
      const Mask v2 = static_cast<Mask>(b) & fv;
      const double lhs = at(u1 | u2, v1 & v2) + at(u1 & u2, v1 | v2);
      const double rhs = val[a] + val[b];
      if (lhs > rhs + scaled_tol(tol, rhs)) {
        report.bisubmodular = false;
        record("bisubmodular", u1, v1, u2, v2, lhs, rhs);
        break;
      }
    }
  }
  return report;
}

enum class ModelKind { Deterministic, Gaussian, Discrete };

/// Statistical description of one layer pair used by the rate planner:
/// which mutual-information terms apply and how much the quantizers leak.
/// `Deterministic` declares yhat = y with a noiseless channel, so the leak
/// is 0 and all information terms are read from the capacity oracle.
class LayerModel {
 public:
  static LayerModel deterministic() { return LayerModel(std::monostate{}); }
  static LayerModel gaussian(std::shared_ptr<const GaussianLayerModel> m) { return LayerModel(std::move(m)); }
  static LayerModel discrete(std::shared_ptr<const DiscreteLayerModel> m) { return LayerModel(std::move(m)); }

  /// Gaussian and discrete oracles carry their own model; other kinds need
  /// an explicit declaration.
  static std::optional<LayerModel> from_oracle(const CapacityOracle& oracle) {
    if (const auto* g = std::get_if<std::shared_ptr<const GaussianLayerModel>>(&oracle.payload())) {
      return gaussian(*g);
    }
    if (const auto* d = std::get_if<std::shared_ptr<const DiscreteLayerModel>>(&oracle.payload())) {
      return discrete(*d);
    }
    return std::nullopt;
  }

  ModelKind kind() const { return static_cast<ModelKind>(model_.index()); }

  /// I(Yhat_W; Y_W | X_{O_l}) for receivers W.
  double leak(Mask rx) const {
    switch (kind()) {
      case ModelKind::Deterministic: return 0.0;
      case ModelKind::Gaussian: return std::get<1>(model_)->leak(rx);
      case ModelKind::Discrete: return std::get<2>(model_)->leak(rx);
    }
    return 0.0;
  }

  /// I(X_U; Yhat_V | X_{O_l \ U}).
  double quantized_mi(const CapacityOracle& oracle, Mask tx, Mask rx) const {
    switch (kind()) {
      case ModelKind::Deterministic: return oracle.eval(tx, rx);
      case ModelKind::Gaussian: return std::get<1>(model_)->quantized_mi(tx, rx);
      case ModelKind::Discrete: return std::get<2>(model_)->quantized_mi(tx, rx);
    }
    return 0.0;
  }

  /// I(X_U; Y_V | X_{O_l \ U}); used at the destination, which keeps its
  /// unquantized observation.
  double observation_mi(const CapacityOracle& oracle, Mask tx, Mask rx) const {
    switch (kind()) {
      case ModelKind::Deterministic: return oracle.eval(tx, rx);
      case ModelKind::Gaussian: return std::get<1>(model_)->observation_mi(tx, rx);
      case ModelKind::Discrete: return std::get<2>(model_)->observation_mi(tx, rx);
    }
    return 0.0;
  }

 private:
  using Variant = std::variant<std::monostate, std::shared_ptr<const GaussianLayerModel>,
                               std::shared_ptr<const DiscreteLayerModel>>;
  explicit LayerModel(Variant v) : model_(std::move(v)) {}
  Variant model_;
};

/// I(Yhat_{O_{l+1}}; Y_{O_{l+1}} | X_{O_l}) for the whole receiving layer.
inline double quantizer_leak(const LayerModel& model, int rx_size) { return model.leak(full_mask(rx_size)); }

/// Same, reading the model off an oracle. Additive, table and GF(2) oracles
/// carry no quantizer description and are rejected.
inline double quantizer_leak(const CapacityOracle& oracle) {
  auto model = LayerModel::from_oracle(oracle);
  if (!model) {
    throw Error(ErrorCode::UnsupportedModel,
                std::string("no quantizer model for a ") + std::string(to_string(oracle.kind())) +
                    " oracle; declare the layer deterministic to use leak 0");
  }
  return quantizer_leak(*model, oracle.rx_size());
}

}  // namespace nodeflow

#endif  // NODEFLOW_CAPACITY_HPP
