#pragma once

// Optimal-f solver: maximizes TWR over the admissible set by projected
// gradient ascent on (1/N) log TWR, with a KKT certificate and a
// system-elimination cross-check for optima on the orthant boundary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "optf/assumptions.hpp"
#include "optf/detail/parallel.hpp"
#include "optf/domain.hpp"
#include "optf/error.hpp"
#include "optf/ingest.hpp"

namespace optf {

struct SolverOptions {
  double tol_grad = 1e-9;
  std::size_t max_iter = 100000;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double boundary_fraction = 0.95;
  /// Warm start; must be >= 0 with all HPR > 0. Defaults to f = 0.
  std::optional<FractionVector> initial_point;
  /// Thresholds for the assumption gate run before optimizing.
  AssumptionOptions assumptions;

  void validate() const {
    auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!(tol_grad > 0.0) || max_iter == 0 || !open_unit(armijo_c) ||
        !open_unit(backtrack_factor) || !open_unit(boundary_fraction)) {
      throw Error(Errc::InvalidArgument, "solver options out of range");
    }
  }
};

enum class Location { Interior, OrthantBoundary };

enum class Termination {
  Converged,      // projected gradient below tol_grad
  MaxIterations,  // iteration cap hit
  Stalled,        // line search could not make progress
};

struct TwrDerivatives {
  /// Gradient of (1/N) log TWR: (1/N) sum_i y_i with y_i = r_i / HPR_i.
  Vector gradient;
  /// B(f) = sum_i w_i' w_i, w_i = y_i - mean(y). Positive semi-definite.
  Matrix hessian_B;
  /// Hessian of (1/N) log TWR: -(1/N) sum_i y_i' y_i.
  Matrix hessian_log;
};

struct KktCertificate {
  /// max over k of |g_k| (f_k > 0) or max(g_k, 0) (f_k = 0).
  double projected_grad_norm = std::numeric_limits<double>::infinity();
  /// g_k <= tol_grad on every active component.
  bool active_signs_ok = false;
  bool certified = false;
};

struct SolverResult {
  FractionVector f_opt;
  double twr_value = 0.0;
  double log_twr_mean_value = 0.0;
  double risk_value = 0.0;
  std::size_t iterations = 0;
  Location location = Location::Interior;
  /// 0-based systems with f_k == 0 at the optimum.
  std::vector<std::size_t> active_set;
  KktCertificate kkt;
  /// 0-based systems removed by refine_boundary(), in removal order.
  std::vector<std::size_t> eliminated_chain;
  Termination termination = Termination::Converged;
  /// Objective at the start point and after each accepted step.
  std::vector<double> objective_trace;
};

inline TwrDerivatives derivatives(const NormalizedReturns& normalized, const FractionVector& f,
                                  double tol_ruin = kDefaultTolRuin) {
  const Vector h = hprs(normalized, f);
  if (!(h.minCoeff() > tol_ruin)) {
    throw Error(Errc::RuinDomain, "derivatives need all HPR > tol_ruin");
  }
  const auto n = static_cast<double>(normalized.periods());
  const Matrix y = normalized.rows().array().colwise() / h.array();
  TwrDerivatives d;
  d.gradient = y.colwise().sum().transpose() / n;
  const Matrix w = y.rowwise() - d.gradient.transpose();
  d.hessian_B = w.transpose() * w;
  d.hessian_log = -(y.transpose() * y) / n;
  return d;
}

/// Partial derivatives of TWR itself: TWR(f) * sum_i r_i / HPR_i.
inline Vector twr_gradient(const NormalizedReturns& normalized, const FractionVector& f) {
  return twr(normalized, f) * static_cast<double>(normalized.periods()) *
         derivatives(normalized, f).gradient;
}

namespace detail {

inline Vector objective_gradient(const NormalizedReturns& normalized, const Vector& h) {
  const Matrix& r = normalized.rows();
  Vector g = Vector::Zero(r.cols());
  for (Eigen::Index i = 0; i < r.rows(); ++i) g += r.row(i).transpose() / h(i);
  return g / static_cast<double>(r.rows());
}

inline double projected_norm(const Vector& f, const Vector& g) {
  double norm = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    norm = std::max(norm, f(k) > 0.0 ? std::abs(g(k)) : std::max(g(k), 0.0));
  }
  return norm;
}

// Runs the ascent without the assumption gate.
inline SolverResult ascend(const NormalizedReturns& normalized, const SolverOptions& opts) {
  opts.validate();
  const Matrix& r = normalized.rows();
  const Eigen::Index m = normalized.systems();
  const auto n = static_cast<double>(normalized.periods());

  Vector f = Vector::Zero(m);
  if (opts.initial_point) {
    f = *opts.initial_point;
    if (f.size() != m || (f.array() < 0.0).any() || !(hprs(normalized, f).minCoeff() > 0.0)) {
      throw Error(Errc::InvalidArgument, "initial point must be nonnegative with all HPR > 0");
    }
  }

  SolverResult result;
  Vector h = hprs(normalized, f);
  double objective = log_twr_mean(normalized, f);
  result.objective_trace.push_back(objective);
  result.termination = Termination::MaxIterations;

  for (std::size_t iter = 0; iter < opts.max_iter; ++iter) {
    const Vector g = objective_gradient(normalized, h);
    if (projected_norm(f, g) <= opts.tol_grad) {
      result.termination = Termination::Converged;
      break;
    }

    Vector d = g;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (f(k) <= 0.0 && g(k) < 0.0) d(k) = 0.0;
    }
    const Vector rd = r * d;
    double to_ruin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < rd.size(); ++i) {
      if (rd(i) < 0.0) to_ruin = std::min(to_ruin, h(i) / -rd(i));
    }
    double step = std::min(1.0, opts.boundary_fraction * to_ruin);

    // Armijo on the exact objective change, sum log1p(<r_i, df> / HPR_i) / N,
    // which stays accurate when the change is far below the objective's ulp.
    bool accepted = false;
    Vector candidate;
    Vector delta_h;
    double gain = 0.0;
    for (int tries = 0; tries < 200; ++tries, step *= opts.backtrack_factor) {
      candidate = (f + step * d).cwiseMax(0.0);
      const Vector df = candidate - f;
      if (df.isZero(0.0)) break;
      delta_h = r * df;
      double sum = 0.0;
      bool inside = true;
      for (Eigen::Index i = 0; i < h.size(); ++i) {
        const double ratio = delta_h(i) / h(i);
        if (!(ratio > -1.0)) {
          inside = false;
          break;
        }
        sum += std::log1p(ratio);
      }
      if (!inside) continue;
      gain = sum / n;
      if (gain >= opts.armijo_c * g.dot(df)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      result.termination = Termination::Stalled;
      break;
    }

    f = std::move(candidate);
    h += delta_h;
    objective += gain;
    ++result.iterations;
    result.objective_trace.push_back(objective);
    if (objective > 700.0) {
      throw Error(Errc::UnboundedAscent,
                  "log TWR mean exceeded 700; a risk-free direction slipped past the checks");
    }
  }

  // Recompute from scratch so the reported values do not carry drift from
  // the incremental updates.
  h = hprs(normalized, f);
  const Vector g = objective_gradient(normalized, h);
  result.f_opt = f;
  result.log_twr_mean_value = log_twr_mean(normalized, f);
  result.twr_value = twr(normalized, f);
  result.risk_value = risk(normalized, f);
  result.kkt.projected_grad_norm = projected_norm(f, g);
  result.kkt.active_signs_ok = true;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (f(k) == 0.0) {
      result.active_set.push_back(static_cast<std::size_t>(k));
      result.kkt.active_signs_ok = result.kkt.active_signs_ok && g(k) <= opts.tol_grad;
    }
  }
  result.kkt.certified =
      result.kkt.projected_grad_norm <= opts.tol_grad && result.kkt.active_signs_ok;
  if (result.kkt.certified) result.termination = Termination::Converged;
  result.location = result.active_set.empty() ? Location::Interior : Location::OrthantBoundary;
  return result;
}

}  // namespace detail

/// Maximizes TWR over G. Refuses to run (AssumptionViolation) unless every
/// admissibility check passes. Hitting max_iter is not an error: the last
/// iterate comes back with kkt.certified == false.
inline SolverResult optimize(const NormalizedReturns& normalized, const SolverOptions& opts = {}) {
  const auto report = assumption_report(normalized, opts.assumptions);
  if (!report.overall) {
    throw Error(Errc::AssumptionViolation, "return matrix fails the admissibility checks");
  }
  return detail::ascend(normalized, opts);
}

inline SolverResult optimize(const ReturnMatrix& returns, const SolverOptions& opts = {}) {
  const auto report = assumption_report(returns, opts.assumptions);
  if (!report.overall) {
    throw Error(Errc::AssumptionViolation, "return matrix fails the admissibility checks");
  }
  return detail::ascend(normalize(returns), opts);
}

/// Drops system k (0-based).
inline ReturnMatrix eliminate_system(const ReturnMatrix& returns, std::size_t k) {
  const Eigen::Index m = returns.systems();
  if (m < 2) throw Error(Errc::LastSystem, "cannot eliminate the only system");
  if (k >= static_cast<std::size_t>(m)) throw Error(Errc::InvalidArgument, "system out of range");
  const auto kk = static_cast<Eigen::Index>(k);
  Matrix reduced(returns.periods(), m - 1);
  reduced << returns.entries().leftCols(kk), returns.entries().rightCols(m - kk - 1);
  auto names = returns.names();
  names.erase(names.begin() + static_cast<std::ptrdiff_t>(k));
  return ReturnMatrix(std::move(reduced), std::move(names));
}

inline NormalizedReturns eliminate_system(const NormalizedReturns& normalized, std::size_t k) {
  const Eigen::Index m = normalized.systems();
  if (m < 2) throw Error(Errc::LastSystem, "cannot eliminate the only system");
  if (k >= static_cast<std::size_t>(m)) throw Error(Errc::InvalidArgument, "system out of range");
  const auto kk = static_cast<Eigen::Index>(k);
  Matrix rows(normalized.periods(), m - 1);
  rows << normalized.rows().leftCols(kk), normalized.rows().rightCols(m - kk - 1);
  Vector losses(m - 1);
  losses << normalized.biggest_losses().head(kk), normalized.biggest_losses().tail(m - kk - 1);
  return NormalizedReturns(std::move(losses), std::move(rows));
}

/// Cross-checks a boundary optimum by removing its active systems one at a
/// time and re-solving the smaller problem. Each reduced optimum, padded
/// with zeros, must agree with result.f_opt within 10 * tol_grad; otherwise
/// InconsistentReduction. Interior results come back unchanged.
inline SolverResult refine_boundary(const NormalizedReturns& normalized, const SolverResult& result,
                                    const SolverOptions& opts = {}) {
  if (result.location == Location::Interior) return result;

  SolverOptions sub_opts = opts;
  sub_opts.initial_point.reset();
  const double tol = 10.0 * opts.tol_grad;

  SolverResult refined = result;
  refined.eliminated_chain.clear();
  NormalizedReturns current = normalized;
  std::vector<std::size_t> kept(static_cast<std::size_t>(normalized.systems()));
  for (std::size_t k = 0; k < kept.size(); ++k) kept[k] = k;

  std::vector<std::size_t> pending = result.active_set;
  while (!pending.empty()) {
    const std::size_t original = pending.front();
    const auto pos = static_cast<std::size_t>(
        std::find(kept.begin(), kept.end(), original) - kept.begin());
    if (pos == kept.size()) throw Error(Errc::InvalidArgument, "active system out of range");
    current = eliminate_system(current, pos);
    kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(pos));
    refined.eliminated_chain.push_back(original);

    const SolverResult sub = optimize(current, sub_opts);
    Vector embedded = Vector::Zero(normalized.systems());
    for (std::size_t j = 0; j < kept.size(); ++j) {
      embedded(static_cast<Eigen::Index>(kept[j])) = sub.f_opt(static_cast<Eigen::Index>(j));
    }
    double mismatch = 0.0;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const auto idx = static_cast<Eigen::Index>(kept[j]);
      mismatch = std::max(mismatch, std::abs(embedded(idx) - result.f_opt(idx)));
    }
    for (const auto gone : refined.eliminated_chain) {
      mismatch = std::max(mismatch, std::abs(result.f_opt(static_cast<Eigen::Index>(gone))));
    }
    if (mismatch > tol) {
      throw Error(Errc::InconsistentReduction,
                  "reduced optimum differs from the full optimum by " + std::to_string(mismatch));
    }

    // Continue down the chain with whatever the reduced problem leaves at 0.
    pending.clear();
    for (const auto j : sub.active_set) pending.push_back(kept[j]);
  }
  return refined;
}

struct GridOptimum {
  FractionVector f_best;
  double twr_best = 0.0;
  std::size_t points_in_domain = 0;
};

/// Exhaustive TWR maximization over the lattice {0, h_k, ..., resolution * h_k}
/// per axis with h_k = boundary_scale(e_k) / resolution, restricted to G.
/// Exact ties resolve to the lexicographically smallest point. Test oracle;
/// cost grows as (resolution + 1)^M, so M is capped at 4.
inline GridOptimum grid_oracle(const NormalizedReturns& normalized, std::size_t resolution,
                               std::size_t workers = detail::worker_count()) {
  const Eigen::Index m = normalized.systems();
  if (m > 4) throw Error(Errc::TooManySystems, "grid oracle supports at most 4 systems");
  if (resolution < 2) throw Error(Errc::InvalidArgument, "resolution must be at least 2");

  Vector step(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    step(k) = boundary_scale(normalized, Vector::Unit(m, k)) / static_cast<double>(resolution);
  }
  const std::size_t per_axis = resolution + 1;
  const Matrix& r = normalized.rows();

  std::vector<GridOptimum> partial(std::max<std::size_t>(1, std::min(workers, per_axis)));
  detail::for_each_chunk(per_axis, partial.size(), [&](std::size_t chunk, std::size_t begin,
                                                       std::size_t end) {
    GridOptimum best;
    best.twr_best = -1.0;
    Vector f = Vector::Zero(m);
    std::vector<Vector> level_h(static_cast<std::size_t>(m) + 1,
                                Vector::Ones(normalized.periods()));

    // Depth-first over axes; level_h[a] holds the HPRs with axes < a set.
    auto visit = [&](auto&& self, Eigen::Index axis, std::size_t lo, std::size_t hi) -> void {
      const auto a = static_cast<std::size_t>(axis);
      for (std::size_t j = lo; j < hi; ++j) {
        f(axis) = static_cast<double>(j) * step(axis);
        level_h[a + 1] = level_h[a] + r.col(axis) * f(axis);
        if (axis + 1 < m) {
          self(self, axis + 1, 0, per_axis);
          continue;
        }
        if (level_h[a + 1].minCoeff() < -kDefaultTolRuin) continue;
        ++best.points_in_domain;
        const double value = twr(normalized, f);
        if (value > best.twr_best) {
          best.twr_best = value;
          best.f_best = f;
        }
      }
      f(axis) = 0.0;
    };
    visit(visit, 0, begin, end);
    partial[chunk] = std::move(best);
  });

  GridOptimum merged;
  merged.twr_best = -1.0;
  for (auto& p : partial) {
    merged.points_in_domain += p.points_in_domain;
    if (p.twr_best > merged.twr_best) {
      merged.twr_best = p.twr_best;
      merged.f_best = p.f_best;
    }
  }
  return merged;
}

}  // namespace optf
