#pragma once

// Dense two-phase tableau simplex with Bland's rule for small LPs in
// standard form:  minimize c'x  subject to  A x = b,  x >= 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace optf::detail {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  // Sum of artificial variables at the end of phase 1.
  double infeasibility = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
};

struct LpOptions {
  std::size_t max_iterations = 1000;
  // Phase 1 is feasible when the artificial sum is at most this value.
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-12;
};

class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
      : m_(a.rows()), n_(a.cols()), t_(a.rows(), a.cols() + a.rows()), rhs_(b), basis_(a.rows()) {
    t_.leftCols(n_) = a;
    t_.rightCols(m_).setIdentity();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (rhs_(i) < 0.0) {
        t_.row(i).head(n_) *= -1.0;
        rhs_(i) = -rhs_(i);
      }
      basis_[i] = n_ + i;
    }
  }

  // Minimizes cost'x over the current basis, never letting artificial
  // columns enter when `allow_artificial` is false.
  LpStatus run(const Eigen::VectorXd& cost, bool allow_artificial, const LpOptions& opts,
               std::size_t& iterations) {
    const Eigen::Index cols = allow_artificial ? n_ + m_ : n_;
    reduced_ = cost;
    value_ = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = cost(basis_[i]);
      if (cb != 0.0) {
        reduced_ -= cb * t_.row(i).transpose();
        value_ += cb * rhs_(i);
      }
    }
    for (;;) {
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (reduced_(j) < -opts.pivot_tol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return LpStatus::Optimal;
      if (iterations >= opts.max_iterations) return LpStatus::IterationLimit;

      Eigen::Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double aij = t_(i, entering);
        if (aij <= opts.pivot_tol) continue;
        const double ratio = rhs_(i) / aij;
        if (ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leaving])) {
          best_ratio = ratio;
          leaving = i;
        }
      }
      if (leaving < 0) return LpStatus::Unbounded;
      pivot(leaving, entering);
      ++iterations;
    }
  }

  // Replaces artificial basics (at level ~0 after a feasible phase 1) by
  // structural columns where possible.
  void drive_out_artificials(double pivot_tol) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (std::abs(t_(i, j)) > pivot_tol) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_ + m_);
    for (Eigen::Index i = 0; i < m_; ++i) x(basis_[i]) = std::max(rhs_(i), 0.0);
    return x;
  }

  double value() const { return value_; }

 private:
  void pivot(Eigen::Index r, Eigen::Index c) {
    const double p = t_(r, c);
    t_.row(r) /= p;
    rhs_(r) /= p;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double factor = t_(i, c);
      if (factor != 0.0) {
        t_.row(i) -= factor * t_.row(r);
        rhs_(i) -= factor * rhs_(r);
        t_(i, c) = 0.0;
      }
    }
    const double rc = reduced_(c);
    if (rc != 0.0) {
      reduced_ -= rc * t_.row(r).transpose();
      value_ += rc * rhs_(r);
      reduced_(c) = 0.0;
    }
    basis_[r] = c;
  }

  Eigen::Index m_;
  Eigen::Index n_;
  Eigen::MatrixXd t_;
  Eigen::VectorXd rhs_;
  std::vector<Eigen::Index> basis_;
  Eigen::VectorXd reduced_;
  double value_ = 0.0;
};

inline LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                         const Eigen::VectorXd& c, const LpOptions& opts = {}) {
  LpResult result;
  Tableau tableau(a, b);
  const Eigen::Index n = a.cols();
  const Eigen::Index m = a.rows();

  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
  phase1_cost.tail(m).setOnes();
  auto status = tableau.run(phase1_cost, true, opts, result.iterations);
  const Eigen::VectorXd x1 = tableau.solution();
  result.infeasibility = x1.tail(m).sum();
  if (status == LpStatus::IterationLimit) {
    result.status = status;
    result.x = x1.head(n);
    return result;
  }
  if (result.infeasibility > opts.feasibility_tol) {
    result.status = LpStatus::Infeasible;
    result.x = x1.head(n);
    return result;
  }

  tableau.drive_out_artificials(opts.pivot_tol);
  Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(n + m);
  phase2_cost.head(n) = c;
  status = tableau.run(phase2_cost, false, opts, result.iterations);
  result.status = status;
  result.x = tableau.solution().head(n);
  result.objective = c.dot(result.x);
  return result;
}

/// Phase 1 only: finds a point of {x >= 0 : A x = b} or reports Infeasible.
inline LpResult solve_feasibility(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  const LpOptions& opts = {}) {
  return solve_lp(a, b, Eigen::VectorXd::Zero(a.cols()), opts);
}

}  // namespace optf::detail
