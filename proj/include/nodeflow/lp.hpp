#ifndef NODEFLOW_LP_HPP
#define NODEFLOW_LP_HPP

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "nodeflow/errors.hpp"

namespace nodeflow::lp {

struct Solution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// max c'x  s.t.  A x <= b, x >= 0, for b >= 0 (so x = 0 is a vertex).
///
/// Simplex over vertices described by n active constraints out of the
/// m rows of A plus the n bounds -x_i <= 0. Only an n x n basis is ever
/// factored, so problems with many rows and few columns stay cheap.
/// Entering and leaving choices follow Bland's smallest-index rule.
inline Solution maximize_packing(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                 int max_iterations = 100000) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n) throw Error(ErrorCode::DimensionMismatch, "LP dimensions disagree");
  for (int i = 0; i < m; ++i) {
    if (!(b(i) >= 0.0)) throw Error(ErrorCode::NumericalFailure, "packing LP needs b >= 0");
  }
  constexpr double kEps = 1e-11;

  // Constraint id < m: row of A. id >= m: bound on x_{id-m}.
  auto row = [&](int id) -> Eigen::RowVectorXd {
    if (id < m) return a.row(id);
    Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(n);
    r(id - m) = -1.0;
    return r;
  };
  auto rhs = [&](int id) { return id < m ? b(id) : 0.0; };

  std::vector<int> active(static_cast<std::size_t>(n));
  std::vector<char> is_active(static_cast<std::size_t>(m + n), 0);
  for (int k = 0; k < n; ++k) {
    active[static_cast<std::size_t>(k)] = m + k;
    is_active[static_cast<std::size_t>(m + k)] = 1;
  }
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd basis(n, n);

  Solution sol;
  for (int it = 0;; ++it) {
    if (it >= max_iterations) throw Error(ErrorCode::NumericalFailure, "simplex iteration limit reached");
    for (int k = 0; k < n; ++k) basis.row(k) = row(active[static_cast<std::size_t>(k)]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const Eigen::VectorXd lambda = lu.transpose().solve(c);

    int leave = -1;
    for (int k = 0; k < n; ++k) {
      if (lambda(k) < -kEps && (leave < 0 || active[static_cast<std::size_t>(k)] < active[static_cast<std::size_t>(leave)])) {
        leave = k;
      }
    }
    if (leave < 0) {
      sol.iterations = it;
      break;
    }

    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e(leave) = -1.0;
    const Eigen::VectorXd d = lu.solve(e);

    int enter = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int id = 0; id < m + n; ++id) {
      if (is_active[static_cast<std::size_t>(id)]) continue;
      const Eigen::RowVectorXd r = row(id);
      const double rate = r.dot(d);
      if (rate <= kEps) continue;
      const double slack = std::max(0.0, rhs(id) - r.dot(x));
      const double step = slack / rate;
      if (enter < 0 || step < best - kEps * std::max(1.0, best)) {
        best = step;
        enter = id;
      }
    }
    if (enter < 0) throw Error(ErrorCode::NumericalFailure, "packing LP is unbounded");

    x += best * d;
    is_active[static_cast<std::size_t>(active[static_cast<std::size_t>(leave)])] = 0;
    active[static_cast<std::size_t>(leave)] = enter;
    is_active[static_cast<std::size_t>(enter)] = 1;
  }

  // Re-solve the final vertex from its defining constraints.
  Eigen::VectorXd active_rhs(n);
  for (int k = 0; k < n; ++k) {
    basis.row(k) = row(active[static_cast<std::size_t>(k)]);
    active_rhs(k) = rhs(active[static_cast<std::size_t>(k)]);
  }
  x = basis.partialPivLu().solve(active_rhs);
  for (int i = 0; i < n; ++i) {
    if (x(i) < 0.0) x(i) = 0.0;
  }
  if (!x.allFinite()) throw Error(ErrorCode::NumericalFailure, "simplex produced a non-finite vertex");
  sol.x = x;
  sol.objective = c.dot(x);
  return sol;
}

}  // namespace nodeflow::lp

#endif  // NODEFLOW_LP_HPP
