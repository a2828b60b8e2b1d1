#ifndef NODEFLOW_ORACLE_HPP
#define NODEFLOW_ORACLE_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodeflow/capacity.hpp"
#include "nodeflow/cutflow.hpp"
#include "nodeflow/errors.hpp"
#include "nodeflow/netgraph.hpp"
#include "nodeflow/rateplan.hpp"
#include "nodeflow/subset.hpp"

namespace nodeflow::oracle {

/// SplitMix64: state += 0x9E3779B97F4A7C15, then the standard output mix.
/// Value type; copying a generator forks its stream.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) from the top 53 bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }
  int bit() { return static_cast<int>(next() >> 63); }

  /// Standard normal by Box-Muller; uses two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Circularly symmetric complex normal with E|z|^2 = 1.
  std::complex<double> complex_normal() {
    const double s = std::sqrt(0.5);
    const double re = normal() * s;
    const double im = normal() * s;
    return {re, im};
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

inline constexpr int kBruteCutNodes = 20;
inline constexpr int kBruteFlowNodes = 12;

namespace detail {

/// Exhaustive value table for one oracle: [U << rx | V] = rho(U, V).
inline std::vector<double> value_table(const CapacityOracle& o) {
  const int rx = o.rx_size();
  std::vector<double> t(std::size_t{1} << (o.tx_size() + rx));
  for (Mask u = 0; u <= full_mask(o.tx_size()); ++u) {
    for (Mask v = 0; v <= full_mask(rx); ++v) t[(static_cast<std::size_t>(u) << rx) | v] = o.eval(u, v);
  }
  return t;
}

}  // namespace detail

/// Minimum cut by enumerating every admissible Omega in lexicographic order
/// of its indicator vector; a later cut replaces the incumbent only when it
/// is smaller by more than the tie tolerance. Admissibility and the boundary
/// terms follow cutflow's min_cut.
inline Cut brute_min_cut(const LayeredNetwork& net, const std::optional<BoundaryFlows>& boundary = std::nullopt) {
  if (net.node_count() > kBruteCutNodes) {
    throw Error(ErrorCode::TooLarge, "brute-force cut limited to " + std::to_string(kBruteCutNodes) + " nodes");
  }
  const int layers = net.layer_count();
  std::vector<std::vector<double>> tables;
  for (int l = 1; l < layers; ++l) tables.push_back(detail::value_table(net.oracle(l)));

  // Free layers: all of them with boundary flows, the interior otherwise.
  const int first_free = boundary ? 1 : 2;
  const int last_free = boundary ? layers : layers - 1;
  int bits = 0;
  for (int l = first_free; l <= last_free; ++l) bits += net.width(l);

  NodeSet omega{std::vector<Mask>(static_cast<std::size_t>(layers), 0)};
  if (!boundary) omega.layers.front() = full_mask(net.width(1));

  Cut best;
  bool have = false;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
    int shift = bits;
    for (int l = first_free; l <= last_free; ++l) {
      Mask m = 0;
      for (int k = 0; k < net.width(l); ++k) {
        --shift;
        if ((code >> shift) & 1u) m |= Mask{1} << k;
      }
      omega.layers[static_cast<std::size_t>(l - 1)] = m;
    }
    double value = 0.0;
    for (int l = 1; l < layers; ++l) {
      const int rx = net.width(l + 1);
      const Mask outside = full_mask(rx) & ~omega.at(l + 1);
      value += tables[static_cast<std::size_t>(l - 1)][(static_cast<std::size_t>(omega.at(l)) << rx) | outside];
    }
    if (boundary) {
      value += sum_over(boundary->first, full_mask(net.width(1)) & ~omega.at(1));
      value += sum_over(boundary->last, omega.at(layers));
    }
    const double tie = kTieTol * std::max({1.0, std::abs(value), std::abs(best.value)});
    if (!have || value < best.value - tie) {
      best.members = omega;
      best.value = value;
      have = true;
    }
  }
  return best;
}

struct LpResult {
  std::vector<double> x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's rule:
///   max c'x  s.t.  A_ub x <= b_ub (b_ub >= 0),  A_eq x = b_eq,  x >= 0.
/// Throws Infeasible when phase one cannot drive the artificials to zero.
inline LpResult tableau_simplex(const Eigen::MatrixXd& a_ub, const Eigen::VectorXd& b_ub, const Eigen::MatrixXd& a_eq,
                                Eigen::VectorXd b_eq, const Eigen::VectorXd& c) {
  const int n = static_cast<int>(c.size());
  const int mu = static_cast<int>(a_ub.rows());
  const int me = static_cast<int>(a_eq.rows());
  for (int i = 0; i < mu; ++i) {
    if (!(b_ub(i) >= 0.0)) throw Error(ErrorCode::NumericalFailure, "inequality right-hand sides must be >= 0");
  }
  Eigen::MatrixXd eq = a_eq;
  for (int i = 0; i < me; ++i) {
    if (b_eq(i) < 0.0) {
      eq.row(i) *= -1.0;
      b_eq(i) = -b_eq(i);
    }
  }
  // Columns: x (n), slacks (mu), artificials (me), rhs.
  const int cols = n + mu + me;
  const int rows = mu + me;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(rows + 1, cols + 1);
  std::vector<int> basis(static_cast<std::size_t>(rows));
  for (int i = 0; i < mu; ++i) {
    t.block(i, 0, 1, n) = a_ub.row(i);
    t(i, n + i) = 1.0;
    t(i, cols) = b_ub(i);
    basis[static_cast<std::size_t>(i)] = n + i;
  }
  for (int i = 0; i < me; ++i) {
    t.block(mu + i, 0, 1, n) = eq.row(i);
    t(mu + i, n + mu + i) = 1.0;
    t(mu + i, cols) = b_eq(i);
    basis[static_cast<std::size_t>(mu + i)] = n + mu + i;
  }
  constexpr double kEps = 1e-10;

  auto pivot = [&](int r, int col) {
    t.row(r) /= t(r, col);
    for (int i = 0; i <= rows; ++i) {
      if (i != r && t(i, col) != 0.0) t.row(i) -= t(i, col) * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = col;
  };
  // Objective row holds reduced costs of a minimization; runs until none
  // is negative among the allowed columns.
  auto run = [&](int allowed_cols) {
    for (int iter = 0; iter < 200000; ++iter) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (t(rows, j) < -kEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows; ++i) {
        if (t(i, enter) > kEps) {
          const double ratio = t(i, cols) / t(i, enter);
          if (ratio < best - kEps ||
              (std::abs(ratio - best) <= kEps && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) throw Error(ErrorCode::NumericalFailure, "LP is unbounded");
      pivot(leave, enter);
    }
    throw Error(ErrorCode::NumericalFailure, "tableau simplex iteration limit reached");
  };

  if (me > 0) {
    // Phase one: minimize the sum of artificials.
    t.row(rows).setZero();
    for (int i = 0; i < me; ++i) t.row(rows) -= t.row(mu + i);
    for (int i = 0; i < me; ++i) t(rows, n + mu + i) = 0.0;
    run(cols);
    if (-t(rows, cols) > 1e-8 * std::max(1.0, b_eq.cwiseAbs().sum())) {
      throw Error(ErrorCode::Infeasible, "equality constraints cannot be met");
    }
    // Drive remaining artificials out of the basis where possible.
    for (int i = 0; i < rows; ++i) {
      if (basis[static_cast<std::size_t>(i)] < n + mu) continue;
      for (int j = 0; j < n + mu; ++j) {
        if (std::abs(t(i, j)) > kEps) {
          pivot(i, j);
          break;
        }
      }
    }
  }
  // Phase two on the original objective (as a minimization of -c'x).
  t.row(rows).setZero();
  for (int j = 0; j < n; ++j) t(rows, j) = -c(j);
  for (int i = 0; i < rows; ++i) {
    const int b = basis[static_cast<std::size_t>(i)];
    if (t(rows, b) != 0.0) t.row(rows) -= t(rows, b) * t.row(i);
  }
  run(n + mu);

  LpResult out;
  out.x.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < rows; ++i) {
    const int b = basis[static_cast<std::size_t>(i)];
    if (b < n) out.x[static_cast<std::size_t>(b)] = std::max(0.0, t(i, cols));
  }
  for (int j = 0; j < n; ++j) out.objective += c(j) * out.x[static_cast<std::size_t>(j)];
  return out;
}

struct BruteFlow {
  double value = 0.0;
  Flow flow;
};

/// max f(O_1) over every node-flow constraint of every layer pair plus
/// f(O_1) = f(O_L), solved as one global LP. Boundary flows, when given,
/// are imposed as equalities.
inline BruteFlow brute_max_flow(const LayeredNetwork& net, const std::optional<BoundaryFlows>& boundary = std::nullopt) {
  if (net.node_count() > kBruteFlowNodes) {
    throw Error(ErrorCode::TooLarge, "brute-force LP limited to " + std::to_string(kBruteFlowNodes) + " nodes");
  }
  const int layers = net.layer_count();
  std::vector<int> offset(static_cast<std::size_t>(layers) + 1, 0);
  for (int l = 1; l <= layers; ++l) offset[static_cast<std::size_t>(l)] = offset[static_cast<std::size_t>(l - 1)] + net.width(l);
  const int n = net.node_count();
  auto var = [&](int l, int k0) { return offset[static_cast<std::size_t>(l - 1)] + k0; };

  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int l = 1; l < layers; ++l) {
    const auto table = detail::value_table(net.oracle(l));
    const int tx = net.width(l);
    const int rx = net.width(l + 1);
    for (Mask u = 0; u <= full_mask(tx); ++u) {
      for (Mask v = 0; v <= full_mask(rx); ++v) {
        // f(V) - f(O_l \ U) <= rho(U, V)
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
        for (int k = 0; k < rx; ++k) {
          if (contains(v, k)) r(var(l + 1, k)) += 1.0;
        }
        for (int k = 0; k < tx; ++k) {
          if (!contains(u, k)) r(var(l, k)) -= 1.0;
        }
        if (r.isZero()) continue;
        rows.push_back(r);
        rhs.push_back(table[(static_cast<std::size_t>(u) << rx) | v]);
      }
    }
  }
  Eigen::MatrixXd a_ub(static_cast<Eigen::Index>(rows.size()), n);
  Eigen::VectorXd b_ub(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a_ub.row(static_cast<Eigen::Index>(i)) = rows[i];
    b_ub(static_cast<Eigen::Index>(i)) = rhs[i];
  }

  std::vector<Eigen::RowVectorXd> eq_rows;
  std::vector<double> eq_rhs;
  {
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    for (int k = 0; k < net.width(1); ++k) r(var(1, k)) += 1.0;
    for (int k = 0; k < net.width(layers); ++k) r(var(layers, k)) -= 1.0;
    eq_rows.push_back(r);
    eq_rhs.push_back(0.0);
  }
  if (boundary) {
    if (static_cast<int>(boundary->first.size()) != net.width(1) ||
        static_cast<int>(boundary->last.size()) != net.width(layers)) {
      throw Error(ErrorCode::RateCountMismatch, "boundary flows must have one entry per first/last-layer node");
    }
    for (int k = 0; k < net.width(1); ++k) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r(var(1, k)) = 1.0;
      eq_rows.push_back(r);
      eq_rhs.push_back(boundary->first[static_cast<std::size_t>(k)]);
    }
    for (int k = 0; k < net.width(layers); ++k) {
      Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
      r(var(layers, k)) = 1.0;
      eq_rows.push_back(r);
      eq_rhs.push_back(boundary->last[static_cast<std::size_t>(k)]);
    }
  }
  Eigen::MatrixXd a_eq(static_cast<Eigen::Index>(eq_rows.size()), n);
  Eigen::VectorXd b_eq(static_cast<Eigen::Index>(eq_rows.size()));
  for (std::size_t i = 0; i < eq_rows.size(); ++i) {
    a_eq.row(static_cast<Eigen::Index>(i)) = eq_rows[i];
    b_eq(static_cast<Eigen::Index>(i)) = eq_rhs[i];
  }
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < net.width(1); ++k) c(var(1, k)) = 1.0;

  LpResult lp;
  try {
    lp = tableau_simplex(a_ub, b_ub, a_eq, b_eq, c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible) throw Error(ErrorCode::InfeasibleBoundary, e.detail());
    throw;
  }
  BruteFlow out;
  out.value = lp.objective;
  out.flow = Flow(net.layer_sizes());
  for (int l = 1; l <= layers; ++l) {
    for (int k = 0; k < net.width(l); ++k) out.flow.at({l, k + 1}) = lp.x[static_cast<std::size_t>(var(l, k))];
  }
  return out;
}

enum class Family { Additive, RankGF2, Gaussian, Discrete };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Additive: return "additive";
    case Family::RankGF2: return "rank_gf2";
    case Family::Gaussian: return "gaussian";
    case Family::Discrete: return "discrete";
  }
  return "unknown";
}

inline constexpr int kMaxGeneratedWidth = 4;

/// Generator input. Weights are over {additive, rank_gf2, gaussian,
/// discrete}; each layer pair draws its family independently.
struct InstanceSpec {
  std::uint64_t seed = 1;
  std::vector<int> layer_sizes;
  std::array<double, 4> weights{1.0, 1.0, 1.0, 1.0};
};

struct Instance {
  InstanceSpec spec;
  LayeredNetwork network;
  std::vector<Family> families;
  /// Present for every family except additive, whose leak is undefined.
  std::vector<std::optional<LayerModel>> layer_models;

  bool has_models() const {
    for (const auto& m : layer_models) {
      if (!m) return false;
    }
    return true;
  }
  LayerModels models() const {
    LayerModels out;
    for (const auto& m : layer_models) {
      if (!m) throw Error(ErrorCode::UnsupportedModel, "instance has an additive layer without a model");
      out.push_back(*m);
    }
    return out;
  }
  bool all(Family f) const {
    for (auto g : families) {
      if (g != f) return false;
    }
    return true;
  }
};

namespace detail {

/// Probabilities sit on a 1e-6 grid so the pmf still sums to 1 after a
/// 12-digit text round trip.
inline std::vector<double> random_binary_pmf(SplitMix64& rng) {
  const double p = std::round(rng.uniform(0.05, 0.95) * 1e6) / 1e6;
  return {1.0 - p, p};
}

inline Family draw_family(SplitMix64& rng, const std::array<double, 4>& w) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) throw Error(ErrorCode::BadRange, "family weights must be >= 0");
    total += x;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::BadRange, "family weights sum to zero");
  double pick = rng.uniform() * total;
  for (int i = 0; i < 4; ++i) {
    if (pick < w[static_cast<std::size_t>(i)]) return static_cast<Family>(i);
    pick -= w[static_cast<std::size_t>(i)];
  }
  for (int i = 3; i >= 0; --i) {
    if (w[static_cast<std::size_t>(i)] > 0.0) return static_cast<Family>(i);
  }
  return Family::Additive;
}

}  // namespace detail

/// Discrete layer with binary inputs, binary outputs and binary quantizers.
inline std::shared_ptr<const DiscreteLayerModel> random_discrete_model(SplitMix64& rng, int tx, int rx) {
  std::vector<DiscreteLayerModel::Pmf> inputs;
  for (int u = 0; u < tx; ++u) inputs.push_back(detail::random_binary_pmf(rng));
  const std::size_t configs = std::size_t{1} << tx;
  std::vector<std::vector<DiscreteLayerModel::Pmf>> channel(static_cast<std::size_t>(rx));
  for (auto& w : channel) {
    for (std::size_t x = 0; x < configs; ++x) w.push_back(detail::random_binary_pmf(rng));
  }
  std::vector<std::vector<DiscreteLayerModel::Pmf>> quantizer(static_cast<std::size_t>(rx));
  for (auto& w : quantizer) {
    for (int y = 0; y < 2; ++y) w.push_back(detail::random_binary_pmf(rng));
  }
  return std::make_shared<const DiscreteLayerModel>(std::move(inputs), std::move(channel), std::move(quantizer));
}

/// Deterministic in spec.seed. Per layer pair, in order: one draw for the
/// family, then the family's entries in row-major order. Every oracle is
/// run through check_capacity_axioms before it is returned.
inline Instance random_instance(const InstanceSpec& spec) {
  if (spec.layer_sizes.size() < 2) throw Error(ErrorCode::TooFewLayers, "instances need at least 2 layers");
  for (int m : spec.layer_sizes) {
    if (m < 1 || m > kMaxGeneratedWidth) {
      throw Error(ErrorCode::TooLarge, "generated layers must have 1.." + std::to_string(kMaxGeneratedWidth) + " nodes");
    }
  }
  SplitMix64 rng(spec.seed);
  std::vector<std::shared_ptr<const CapacityOracle>> oracles;
  std::vector<Family> families;
  std::vector<std::optional<LayerModel>> models;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const int tx = spec.layer_sizes[l];
    const int rx = spec.layer_sizes[l + 1];
    const Family fam = detail::draw_family(rng, spec.weights);
    std::shared_ptr<const CapacityOracle> o;
    std::optional<LayerModel> model;
    switch (fam) {
      case Family::Additive: {
        std::vector<std::vector<double>> c(static_cast<std::size_t>(tx), std::vector<double>(static_cast<std::size_t>(rx)));
        for (auto& row : c) {
          for (double& v : row) v = rng.uniform(0.0, 4.0);
        }
        o = std::make_shared<const CapacityOracle>(CapacityOracle::additive(std::move(c)));
        break;
      }
      case Family::RankGF2: {
        std::vector<std::vector<int>> g(static_cast<std::size_t>(rx), std::vector<int>(static_cast<std::size_t>(tx)));
        for (auto& row : g) {
          for (int& v : row) v = rng.bit();
        }
        o = std::make_shared<const CapacityOracle>(CapacityOracle::rank_gf2(g));
        model = LayerModel::deterministic();
        break;
      }
      case Family::Gaussian: {
        Eigen::MatrixXcd h(rx, tx);
        for (int i = 0; i < rx; ++i) {
          for (int j = 0; j < tx; ++j) h(i, j) = rng.complex_normal();
        }
        auto g = std::make_shared<const GaussianLayerModel>(std::move(h));
        o = std::make_shared<const CapacityOracle>(CapacityOracle::gaussian(g));
        model = LayerModel::gaussian(g);
        break;
      }
      case Family::Discrete: {
        auto d = random_discrete_model(rng, tx, rx);
        o = std::make_shared<const CapacityOracle>(CapacityOracle::discrete(d));
        model = LayerModel::discrete(d);
        break;
      }
    }
    const auto report = check_capacity_axioms(*o);
    if (!report.pass()) {
      throw Error(ErrorCode::InvalidOracle, "generated " + std::string(to_string(fam)) + " oracle for layer pair " +
                                                std::to_string(l + 1) + " failed the axiom check");
    }
    oracles.push_back(std::move(o));
    families.push_back(fam);
    models.push_back(std::move(model));
  }
  return Instance{spec, LayeredNetwork(spec.layer_sizes, std::move(oracles)), std::move(families), std::move(models)};
}

/// Single-family spec.
inline InstanceSpec family_spec(std::uint64_t seed, std::vector<int> sizes, Family f) {
  InstanceSpec s;
  s.seed = seed;
  s.layer_sizes = std::move(sizes);
  s.weights = {0.0, 0.0, 0.0, 0.0};
  s.weights[static_cast<std::size_t>(f)] = 1.0;
  return s;
}

}  // namespace nodeflow::oracle

#endif  // NODEFLOW_ORACLE_HPP
