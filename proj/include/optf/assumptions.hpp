#pragma once

// Admissibility checks on a return matrix: every system lost at least once,
// every system is profitable on average, the systems are linearly
// independent, and no nonnegative allocation is free of losing periods.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "optf/detail/simplex.hpp"
#include "optf/ingest.hpp"

namespace optf {

struct AssumptionOptions {
  /// Singular values at or below tol_rank * sigma_max count as zero.
  double tol_rank = 1e-10;
  /// Phase-1 objective threshold that declares the risk-free cone nonempty.
  double tol_cone = 1e-9;
};

struct LossHistoryCheck {
  bool pass = false;
  /// First column (0-based) without a strictly negative entry.
  std::optional<std::size_t> offending_column;
  std::vector<bool> column_pass;
};

struct ProfitabilityCheck {
  bool pass = false;
  std::vector<double> column_means;
  std::vector<bool> column_pass;
};

struct RankCheck {
  bool pass = false;
  std::size_t rank = 0;
  double smallest_singular_value = 0.0;
};

struct RiskFreeCheck {
  bool pass = false;
  /// Set iff pass is false: f >= 0 with sum 1 and <r_i, f> >= -tol_cone.
  std::optional<Vector> witness;
  std::string diagnostic;
};

struct AssumptionReport {
  LossHistoryCheck loss_per_column;
  ProfitabilityCheck profitable;
  RankCheck full_rank;
  RiskFreeCheck no_risk_free;
  bool overall = false;
};

inline LossHistoryCheck check_loss_history(const ReturnMatrix& returns) {
  LossHistoryCheck check;
  check.pass = true;
  for (Eigen::Index k = 0; k < returns.systems(); ++k) {
    const bool has_loss = (returns.entries().col(k).array() < 0.0).any();
    check.column_pass.push_back(has_loss);
    if (!has_loss && check.pass) {
      check.pass = false;
      check.offending_column = static_cast<std::size_t>(k);
    }
  }
  return check;
}

/// Sample mean of each column must be strictly positive.
inline ProfitabilityCheck check_profitable(const ReturnMatrix& returns) {
  ProfitabilityCheck check;
  check.pass = true;
  for (Eigen::Index k = 0; k < returns.systems(); ++k) {
    const double mean = returns.entries().col(k).sum() / static_cast<double>(returns.periods());
    check.column_means.push_back(mean);
    check.column_pass.push_back(mean > 0.0);
    check.pass = check.pass && mean > 0.0;
  }
  return check;
}

/// Numerical rank from singular values relative to the largest one. With
/// fewer periods than systems the kernel is nontrivial and the smallest
/// singular value is reported as 0.
inline RankCheck check_full_rank(const ReturnMatrix& returns, double tol_rank = 1e-10) {
  RankCheck check;
  const Eigen::JacobiSVD<Matrix> svd(returns.entries());
  const Vector& sigma = svd.singularValues();
  const double largest = sigma.size() ? sigma(0) : 0.0;
  for (Eigen::Index j = 0; j < sigma.size(); ++j) {
    if (sigma(j) > tol_rank * largest) ++check.rank;
  }
  const auto m = static_cast<std::size_t>(returns.systems());
  check.smallest_singular_value =
      returns.periods() < returns.systems() ? 0.0 : sigma(sigma.size() - 1);
  check.pass = check.rank == m && largest > 0.0;
  return check;
}

/// Decides whether {f >= 0, sum f = 1, <r_i, f> >= 0 for all i} is empty.
/// Empty means every nonnegative allocation has a losing period (pass).
/// Throws SimplexCycle if the phase-1 simplex exceeds 10 (N + M + 1) pivots.
inline RiskFreeCheck check_no_risk_free(const NormalizedReturns& normalized,
                                        double tol_cone = 1e-9) {
  const Eigen::Index n = normalized.periods();
  const Eigen::Index m = normalized.systems();

  // Columns: f (m), surplus s (n).  Rows: R f - s = 0,  1'f = 1.
  Matrix a = Matrix::Zero(n + 1, m + n);
  a.topLeftCorner(n, m) = normalized.rows();
  a.topRightCorner(n, n) = -Matrix::Identity(n, n);
  a.bottomLeftCorner(1, m).setOnes();
  Vector b = Vector::Zero(n + 1);
  b(n) = 1.0;

  detail::LpOptions lp;
  lp.max_iterations = static_cast<std::size_t>(10 * (n + m + 1));
  lp.feasibility_tol = tol_cone;
  const auto lp_result = detail::solve_feasibility(a, b, lp);

  RiskFreeCheck check;
  if (lp_result.status == detail::LpStatus::IterationLimit) {
    throw Error(Errc::SimplexCycle, "phase-1 simplex exceeded " +
                                        std::to_string(lp.max_iterations) + " pivots");
  }
  if (lp_result.status == detail::LpStatus::Infeasible) {
    check.pass = true;
    check.diagnostic = "every nonnegative allocation has a losing period";
    return check;
  }

  Vector f = lp_result.x.head(m);
  f /= f.sum();
  const Vector dots = normalized.rows() * f;
  check.pass = false;
  check.diagnostic = "risk-free direction: no period loses along the witness allocation";
  if (dots.maxCoeff() > tol_cone) {
    check.diagnostic += "; TWR unbounded along the witness ray";
  }
  check.witness = std::move(f);
  return check;
}

/// Runs all four checks; none is skipped when another fails. When a system
/// never lost, its unit vector is itself a risk-free witness.
inline AssumptionReport assumption_report(const ReturnMatrix& returns,
                                          const AssumptionOptions& options = {}) {
  AssumptionReport report;
  report.loss_per_column = check_loss_history(returns);
  report.profitable = check_profitable(returns);
  report.full_rank = check_full_rank(returns, options.tol_rank);
  if (report.loss_per_column.pass) {
    report.no_risk_free = check_no_risk_free(normalize(returns), options.tol_cone);
  } else {
    const auto k = *report.loss_per_column.offending_column;
    Vector witness = Vector::Zero(returns.systems());
    witness(static_cast<Eigen::Index>(k)) = 1.0;
    report.no_risk_free.pass = false;
    report.no_risk_free.witness = std::move(witness);
    report.no_risk_free.diagnostic =
        "risk-free direction: system " + returns.names()[k] + " never loses";
    if (returns.entries().col(static_cast<Eigen::Index>(k)).maxCoeff() > 0.0) {
      report.no_risk_free.diagnostic += "; TWR unbounded along the witness ray";
    }
  }
  report.overall = report.loss_per_column.pass && report.profitable.pass &&
                   report.full_rank.pass && report.no_risk_free.pass;
  return report;
}

/// Same checks on already normalized rows. Column scaling by the biggest
/// losses preserves the sign of each mean and the rank.
inline AssumptionReport assumption_report(const NormalizedReturns& normalized,
                                          const AssumptionOptions& options = {}) {
  return assumption_report(ReturnMatrix(normalized.rows()), options);
}

}  // namespace optf
