#ifndef NODEFLOW_CUTFLOW_HPP
#define NODEFLOW_CUTFLOW_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nodeflow/capacity.hpp"
#include "nodeflow/errors.hpp"
#include "nodeflow/lp.hpp"
#include "nodeflow/netgraph.hpp"
#include "nodeflow/subset.hpp"

namespace nodeflow {

inline constexpr double kDefaultTol = 1e-9;
/// Values closer than this (relative) count as ties for cut selection.
inline constexpr double kTieTol = 1e-12;
/// Largest m_l + m_{l+1} for which per-pair subset tables are built.
inline constexpr int kMaxPairWidth = 24;

/// Flow values fixed on the first and last layer.
struct BoundaryFlows {
  std::vector<double> first;
  std::vector<double> last;
};

namespace detail {

inline void check_pair_guard(const LayeredNetwork& net) {
  for (int l = 1; l < net.layer_count(); ++l) {
    if (net.width(l) + net.width(l + 1) > kMaxPairWidth) {
      throw Error(ErrorCode::TooLarge, "layers " + std::to_string(l) + "," + std::to_string(l + 1) +
                                           " exceed the enumeration guard");
    }
  }
}

/// True when (value a, key ka) should replace (value b, key kb).
inline bool better(double a, std::uint32_t ka, double b, std::uint32_t kb) {
  const double tie = kTieTol * std::max({1.0, std::abs(a), std::abs(b)});
  if (a < b - tie) return true;
  if (a > b + tie) return false;
  return ka < kb;
}

/// rho_l(M, O_{l+1} \ N) for every (M, N), indexed [M << m_{l+1} | N].
inline std::vector<double> crossing_table(const CapacityOracle& o) {
  const int m = o.tx_size();
  const int n = o.rx_size();
  const Mask fv = full_mask(n);
  std::vector<double> t(std::size_t{1} << (m + n));
  for (Mask u = 0; u <= full_mask(m); ++u) {
    for (Mask v = 0; v <= fv; ++v) t[(static_cast<std::size_t>(u) << n) | v] = o.eval(u, fv & ~v);
  }
  return t;
}

inline void check_boundary_shape(const LayeredNetwork& net, const BoundaryFlows& b) {
  if (static_cast<int>(b.first.size()) != net.width(1) ||
      static_cast<int>(b.last.size()) != net.width(net.layer_count())) {
    throw Error(ErrorCode::RateCountMismatch, "boundary flows must have one entry per first/last-layer node");
  }
  for (double v : b.first) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::NegativeRate, "boundary flows must be >= 0");
  }
  for (double v : b.last) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorCode::NegativeRate, "boundary flows must be >= 0");
  }
}

}  // namespace detail

/// C(Omega) = sum_l rho_l(Omega_l, O_{l+1} \ Omega_{l+1}).
inline double cut_value(const LayeredNetwork& net, const NodeSet& omega) {
  if (static_cast<int>(omega.layers.size()) != net.layer_count()) {
    throw Error(ErrorCode::DimensionMismatch, "node set has the wrong number of layers");
  }
  double total = 0.0;
  for (int l = 1; l < net.layer_count(); ++l) {
    total += net.oracle(l).eval(omega.at(l), full_mask(net.width(l + 1)) & ~omega.at(l + 1));
  }
  return total;
}

/// Minimum cut by dynamic programming over per-layer subsets.
///
/// Without boundary flows the first layer is pinned inside the cut and the
/// last layer outside it. With boundary flows f both ends are free and the
/// minimized quantity is C(Omega) + f(O_1 \ Omega_1) + f(Omega_L). Ties go to
/// the lexicographically smallest indicator vector in (layer, index) order.
inline Cut min_cut(const LayeredNetwork& net, const std::optional<BoundaryFlows>& boundary = std::nullopt) {
  detail::check_pair_guard(net);
  if (boundary) detail::check_boundary_shape(net, *boundary);
  const int layers = net.layer_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // best[l][M]: cheapest completion of layers l..L given Omega_l = M.
  std::vector<std::vector<double>> best(static_cast<std::size_t>(layers));
  std::vector<std::vector<Mask>> choice(static_cast<std::size_t>(layers));
  {
    const int w = net.width(layers);
    auto& last = best.back();
    last.assign(std::size_t{1} << w, kInf);
    for (Mask m = 0; m <= full_mask(w); ++m) {
      if (boundary) {
        last[m] = sum_over(boundary->last, m);
      } else if (m == 0) {
        last[m] = 0.0;
      }
    }
  }
  for (int l = layers - 1; l >= 1; --l) {
    const int m = net.width(l);
    const int n = net.width(l + 1);
    const auto crossing = detail::crossing_table(net.oracle(l));
    const auto& next = best[static_cast<std::size_t>(l)];
    auto& cur = best[static_cast<std::size_t>(l - 1)];
    auto& pick = choice[static_cast<std::size_t>(l - 1)];
    cur.assign(std::size_t{1} << m, kInf);
    pick.assign(std::size_t{1} << m, 0);
    for (Mask u = 0; u <= full_mask(m); ++u) {
      double bv = kInf;
      Mask bn = 0;
      for (Mask v = 0; v <= full_mask(n); ++v) {
        if (next[v] == kInf) continue;
        const double c = crossing[(static_cast<std::size_t>(u) << n) | v] + next[v];
        if (bv == kInf || detail::better(c, lex_key(v, n), bv, lex_key(bn, n))) {
          bv = c;
          bn = v;
        }
      }
      cur[u] = bv;
      pick[u] = bn;
    }
  }

  const int w1 = net.width(1);
  Mask start = full_mask(w1);
  double total = best[0][start];
  if (boundary) {
    total = kInf;
    for (Mask m = 0; m <= full_mask(w1); ++m) {
      const double c = best[0][m] + sum_over(boundary->first, full_mask(w1) & ~m);
      if (total == kInf || detail::better(c, lex_key(m, w1), total, lex_key(start, w1))) {
        total = c;
        start = m;
      }
    }
  }

  Cut cut;
  cut.members.layers.resize(static_cast<std::size_t>(layers));
  Mask cur = start;
  for (int l = 1; l <= layers; ++l) {
    cut.members.layers[static_cast<std::size_t>(l - 1)] = cur;
    if (l < layers) cur = choice[static_cast<std::size_t>(l - 1)][cur];
  }
  cut.value = total;
  return cut;
}

enum class BoundarySide { A, B };

/// r_A or r_B over the subsets T of the pivot layer.
struct BoundaryFunction {
  BoundarySide side = BoundarySide::A;
  int width = 0;
  std::vector<double> values;  // values[T]

  double operator()(Mask t) const { return values[t]; }
};

/// A-side (pivot is the slice's last layer, flows fixed on its first):
///   r_A(T) = min { C_A(Omega) + f(O_1 \ Omega_1) : pivot \ Omega = T }.
/// B-side (pivot is the slice's first layer, flows fixed on its last):
///   r_B(T) = min { C_B(Omega) + f(Omega_L) : pivot n Omega = T }.
/// Each side is one DP pass that fills every T at once.
inline BoundaryFunction boundary_function(const LayeredNetwork& slice, BoundarySide side,
                                          const std::vector<double>& fixed_flows) {
  detail::check_pair_guard(slice);
  const int layers = slice.layer_count();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  BoundaryFunction r;
  r.side = side;

  if (side == BoundarySide::A) {
    if (static_cast<int>(fixed_flows.size()) != slice.width(1)) {
      throw Error(ErrorCode::RateCountMismatch, "A-side flows must cover the slice's first layer");
    }
    const int w1 = slice.width(1);
    std::vector<double> cost(std::size_t{1} << w1);
    for (Mask m = 0; m <= full_mask(w1); ++m) cost[m] = sum_over(fixed_flows, full_mask(w1) & ~m);
    for (int l = 1; l < layers; ++l) {
      const int m = slice.width(l);
      const int n = slice.width(l + 1);
      const auto crossing = detail::crossing_table(slice.oracle(l));
      std::vector<double> next(std::size_t{1} << n, kInf);
      for (Mask v = 0; v <= full_mask(n); ++v) {
        for (Mask u = 0; u <= full_mask(m); ++u) {
          next[v] = std::min(next[v], cost[u] + crossing[(static_cast<std::size_t>(u) << n) | v]);
        }
      }
      cost = std::move(next);
    }
    const int wp = slice.width(layers);
    r.width = wp;
    r.values.resize(cost.size());
    for (Mask t = 0; t <= full_mask(wp); ++t) r.values[t] = cost[full_mask(wp) & ~t];
  } else {
    if (static_cast<int>(fixed_flows.size()) != slice.width(layers)) {
      throw Error(ErrorCode::RateCountMismatch, "B-side flows must cover the slice's last layer");
    }
    const int wl = slice.width(layers);
    std::vector<double> cost(std::size_t{1} << wl);
    for (Mask m = 0; m <= full_mask(wl); ++m) cost[m] = sum_over(fixed_flows, m);
    for (int l = layers - 1; l >= 1; --l) {
      const int m = slice.width(l);
      const int n = slice.width(l + 1);
      const auto crossing = detail::crossing_table(slice.oracle(l));
      std::vector<double> prev(std::size_t{1} << m, kInf);
      for (Mask u = 0; u <= full_mask(m); ++u) {
        for (Mask v = 0; v <= full_mask(n); ++v) {
          prev[u] = std::min(prev[u], crossing[(static_cast<std::size_t>(u) << n) | v] + cost[v]);
        }
      }
      cost = std::move(prev);
    }
    r.width = slice.width(1);
    r.values = std::move(cost);
  }
  return r;
}

/// max over x in P(rA) n P(rB) of x(ground), i.e. min_T rA(ground \ T) + rB(T).
inline double intersection_bound(const BoundaryFunction& ra, const BoundaryFunction& rb) {
  const Mask full = full_mask(ra.width);
  double bound = std::numeric_limits<double>::infinity();
  for (Mask t = 0; t <= full; ++t) bound = std::min(bound, ra(full & ~t) + rb(t));
  return bound;
}

namespace detail {

inline bool integral(double v) { return std::abs(v - std::round(v)) <= 1e-12 * std::max(1.0, std::abs(v)); }

inline bool in_both_polymatroids(const std::vector<double>& x, const BoundaryFunction& ra,
                                 const BoundaryFunction& rb, double tol) {
  for (double xi : x) {
    if (xi < 0.0) return false;
  }
  for (Mask u = 1; u <= full_mask(ra.width); ++u) {
    const double s = sum_over(x, u);
    if (s > ra(u) + scaled_tol(tol, ra(u)) || s > rb(u) + scaled_tol(tol, rb(u))) return false;
  }
  return true;
}

}  // namespace detail

/// A common point of the polymatroids of rA and rB with coordinate sum
/// exactly `target`: the LP maximum over the enumerated constraints, then
/// lowered coordinate by coordinate in index order.
inline std::vector<double> polymatroid_intersect(const BoundaryFunction& ra, const BoundaryFunction& rb,
                                                 double target, double tol = kDefaultTol) {
  if (ra.width != rb.width) throw Error(ErrorCode::DimensionMismatch, "boundary functions on different ground sets");
  const int n = ra.width;
  if (n > kMaxLayerWidth) throw Error(ErrorCode::TooLarge, "ground set wider than 16");
  if (!(target >= 0.0)) throw Error(ErrorCode::Infeasible, "target must be >= 0");
  const double bound = intersection_bound(ra, rb);
  if (target > bound + scaled_tol(tol, bound)) {
    throw Error(ErrorCode::Infeasible, "target " + std::to_string(target) + " exceeds intersection bound " +
                                           std::to_string(bound));
  }

  const Mask full = full_mask(n);
  const int rows = 2 * static_cast<int>(full);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, n);
  Eigen::VectorXd b(rows);
  int r = 0;
  for (Mask u = 1; u <= full; ++u) {
    for (const BoundaryFunction* f : {&ra, &rb}) {
      for (int i = 0; i < n; ++i) {
        if (contains(u, i)) a(r, i) = 1.0;
      }
      b(r) = std::max(0.0, (*f)(u));
      ++r;
    }
  }
  const auto sol = lp::maximize_packing(a, b, Eigen::VectorXd::Ones(n));
  std::vector<double> x(sol.x.data(), sol.x.data() + n);

  // Integral polymatroids meet in an integral polytope; remove rounding
  // noise from such vertices so downstream sums stay exact.
  bool integral_data = detail::integral(target);
  for (Mask u = 0; u <= full && integral_data; ++u) integral_data = detail::integral(ra(u)) && detail::integral(rb(u));
  if (integral_data) {
    std::vector<double> snapped = x;
    for (double& v : snapped) {
      if (std::abs(v - std::round(v)) <= 1e-7) v = std::round(v);
    }
    if (detail::in_both_polymatroids(snapped, ra, rb, 0.0)) x = std::move(snapped);
  }

  double total = 0.0;
  for (double v : x) total += v;
  if (total < target - scaled_tol(1e-7, target)) {
    throw Error(ErrorCode::NumericalFailure, "LP optimum " + std::to_string(total) + " below target " +
                                                 std::to_string(target));
  }
  double excess = total - target;
  for (double& v : x) {
    if (excess <= 0.0) break;
    const double d = std::min(v, excess);
    v -= d;
    excess -= d;
  }
  return x;
}

struct MaxFlowOptions {
  /// Pivot layer for the top-level split; 0 selects ceil(L/2).
  int l0 = 0;
  double tol = kDefaultTol;
  /// Called with every boundary function built during the recursion.
  std::function<void(const BoundaryFunction&)> on_boundary_function;
};

namespace detail {

inline void fill_flow(const LayeredNetwork& part, int offset, Flow& f, int pivot, const MaxFlowOptions& opt) {
  const int layers = part.layer_count();
  if (layers <= 2) return;
  const int l0 = pivot > 0 ? pivot : (layers + 1) / 2;
  const Subnetwork a = subnetwork(part, 1, l0);
  const Subnetwork b = subnetwork(part, l0, layers);
  const auto ra = boundary_function(a.network, BoundarySide::A, f.layer(offset + 1));
  const auto rb = boundary_function(b.network, BoundarySide::B, f.layer(offset + layers));
  if (opt.on_boundary_function) {
    opt.on_boundary_function(ra);
    opt.on_boundary_function(rb);
  }
  double target = 0.0;
  for (double v : f.layer(offset + 1)) target += v;
  // Slack from the recursion may push the target a hair over the bound.
  const double bound = intersection_bound(ra, rb);
  if (target > bound && target <= bound + scaled_tol(1e-6, bound)) target = bound;
  f.layer(offset + l0) = polymatroid_intersect(ra, rb, target, opt.tol);
  fill_flow(a.network, offset, f, 0, opt);
  fill_flow(b.network, offset + l0 - 1, f, 0, opt);
}

}  // namespace detail

/// Node-flow attaining the min-cut (unicast) or matching given boundary
/// flows, built by recursive bisection and polymatroid intersection.
inline Flow max_flow(const LayeredNetwork& net, const std::optional<BoundaryFlows>& boundary = std::nullopt,
                     const MaxFlowOptions& opt = {}) {
  const int layers = net.layer_count();
  if (opt.l0 != 0 && (layers < 3 || opt.l0 < 2 || opt.l0 > layers - 1)) {
    throw Error(ErrorCode::BadRange, "pivot layer must lie in [2, L-1]");
  }
  Flow f(net.layer_sizes());
  if (boundary) {
    detail::check_boundary_shape(net, *boundary);
    double in = 0.0, out = 0.0;
    for (double v : boundary->first) in += v;
    for (double v : boundary->last) out += v;
    if (std::abs(in - out) > scaled_tol(opt.tol, std::max(in, out))) {
      throw Error(ErrorCode::InfeasibleBoundary, "boundary totals differ: " + std::to_string(in) + " vs " +
                                                     std::to_string(out));
    }
    const double bound = min_cut(net, boundary).value;
    if (in > bound + scaled_tol(opt.tol, bound)) {
      throw Error(ErrorCode::InfeasibleBoundary, "boundary flow " + std::to_string(in) +
                                                     " violates a cut constraint (bound " + std::to_string(bound) +
                                                     ")");
    }
    f.layer(1) = boundary->first;
    f.layer(layers) = boundary->last;
  } else {
    if (!net.is_unicast()) {
      throw Error(ErrorCode::NotUnicast, "boundary flows are required when the end layers have several nodes");
    }
    const double value = min_cut(net).value;
    f.layer(1)[0] = value;
    f.layer(layers)[0] = value;
  }
  detail::fill_flow(net, 0, f, opt.l0, opt);
  return f;
}

struct FlowViolation {
  int layer = 0;  // 0 marks a conservation or sign violation
  Mask tx = 0;
  Mask rx = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct FlowReport {
  bool pass = true;
  double min_slack = std::numeric_limits<double>::infinity();
  double conservation_gap = 0.0;
  std::size_t constraints = 0;
  std::vector<FlowViolation> violations;  // first 64 at most
};

/// Checks f(V) - f(O_l \ U) <= rho_l(U, V) for every l, U, V, plus
/// nonnegativity and f(O_1) = f(O_L).
inline FlowReport verify_flow(const LayeredNetwork& net, const Flow& f, double tol = kDefaultTol) {
  detail::check_pair_guard(net);
  if (f.layer_count() != net.layer_count()) throw Error(ErrorCode::DimensionMismatch, "flow has wrong layer count");
  FlowReport rep;
  auto add = [&](const FlowViolation& v) {
    rep.pass = false;
    if (rep.violations.size() < 64) rep.violations.push_back(v);
  };
  for (int l = 1; l <= net.layer_count(); ++l) {
    if (static_cast<int>(f.layer(l).size()) != net.width(l)) {
      throw Error(ErrorCode::DimensionMismatch, "flow layer " + std::to_string(l) + " has wrong width");
    }
    for (double v : f.layer(l)) {
      if (v < -tol) add({0, 0, 0, v, 0.0});
    }
  }
  const double in = f.layer_total(1);
  const double out = f.layer_total(net.layer_count());
  rep.conservation_gap = std::abs(in - out);
  if (rep.conservation_gap > scaled_tol(tol, std::max(in, out))) add({0, 0, 0, in, out});

  for (int l = 1; l < net.layer_count(); ++l) {
    const int m = net.width(l);
    const int n = net.width(l + 1);
    const auto& o = net.oracle(l);
    const double total_l = f.layer_total(l);
    for (Mask u = 0; u <= full_mask(m); ++u) {
      const double outside = total_l - f.sum(l, u);
      for (Mask v = 0; v <= full_mask(n); ++v) {
        const double lhs = f.sum(l + 1, v) - outside;
        const double rhs = o.eval(u, v);
        ++rep.constraints;
        rep.min_slack = std::min(rep.min_slack, rhs - lhs);
        if (lhs - rhs > scaled_tol(tol, std::max(std::abs(lhs), std::abs(rhs)))) add({l, u, v, lhs, rhs});
      }
    }
  }
  return rep;
}

}  // namespace nodeflow

#endif  // NODEFLOW_CUTFLOW_HPP
