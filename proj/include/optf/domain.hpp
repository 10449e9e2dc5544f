#pragma once

// Holding period returns, terminal wealth relative and the admissible set
// G = {f >= 0 : HPR_i(f) >= 0 for all i}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "optf/error.hpp"
#include "optf/ingest.hpp"

namespace optf {

using FractionVector = Vector;

inline constexpr double kDefaultTolRuin = 1e-12;

enum class Admissibility {
  Interior,  // all HPR_i > tol_ruin
  Ruin,      // some HPR_i in [-tol_ruin, tol_ruin], none below
  Outside,   // some HPR_i < -tol_ruin, or some f_k < -tol_ruin
};

struct AdmissibilityStatus {
  Admissibility kind = Admissibility::Outside;
  double min_hpr = 0.0;
  std::size_t argmin_period = 0;  // 0-based
};

/// HPR_i(f) = 1 + <r_i, f> for the 0-based period i.
inline double hpr(const NormalizedReturns& normalized, const FractionVector& f, Eigen::Index i) {
  if (i < 0 || i >= normalized.periods()) {
    throw Error(Errc::InvalidArgument, "period index out of range");
  }
  return 1.0 + normalized.row(i).dot(f);
}

inline Vector hprs(const NormalizedReturns& normalized, const FractionVector& f) {
  if (f.size() != normalized.systems()) {
    throw Error(Errc::InvalidArgument, "fraction vector has wrong dimension");
  }
  return (normalized.rows() * f).array() + 1.0;
}

inline AdmissibilityStatus classify(const NormalizedReturns& normalized, const Vector& f,
                                    double tol_ruin = kDefaultTolRuin) {
  const Vector h = hprs(normalized, f);
  AdmissibilityStatus status;
  Eigen::Index argmin = 0;
  status.min_hpr = h.minCoeff(&argmin);
  status.argmin_period = static_cast<std::size_t>(argmin);
  if ((f.array() < -tol_ruin).any() || status.min_hpr < -tol_ruin) {
    status.kind = Admissibility::Outside;
  } else if (status.min_hpr <= tol_ruin) {
    status.kind = Admissibility::Ruin;
  } else {
    status.kind = Admissibility::Interior;
  }
  return status;
}

/// Product of all HPRs. Interior points are evaluated as exp(sum log HPR_i)
/// summed in period order; ruin points give exactly 0. Points outside G
/// fall back to the plain product.
inline double twr(const NormalizedReturns& normalized, const FractionVector& f,
                  double tol_ruin = kDefaultTolRuin) {
  const Vector h = hprs(normalized, f);
  const double min_h = h.minCoeff();
  if (min_h > tol_ruin) {
    double log_sum = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) log_sum += std::log(h(i));
    return std::exp(log_sum);
  }
  if (min_h >= -tol_ruin) return 0.0;
  double product = 1.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) product *= h(i);
  return product;
}

/// (1/N) sum log HPR_i(f). Throws RuinDomain when some HPR_i <= 0.
inline double log_twr_mean(const NormalizedReturns& normalized, const FractionVector& f) {
  const Vector h = hprs(normalized, f);
  double log_sum = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (!(h(i) > 0.0)) {
      throw Error(Errc::RuinDomain, "HPR of period " + std::to_string(i + 1) + " is not positive");
    }
    log_sum += std::log(h(i));
  }
  return log_sum / static_cast<double>(h.size());
}

/// Worst single-period relative loss, max(-min_i <r_i, f>, 0). Equals 1 on
/// the ruin set.
inline double risk(const NormalizedReturns& normalized, const FractionVector& f) {
  const Vector dots = normalized.rows() * f;
  return std::max(-dots.minCoeff(), 0.0);
}

/// s0 = -1 / min_i <r_i, f>, the scale at which s0 * f reaches the ruin set.
/// Throws NoLossDirection when no period loses along f.
inline double boundary_scale(const NormalizedReturns& normalized, const FractionVector& f) {
  if (f.size() != normalized.systems() || (f.array() < 0.0).any() || !(f.array() > 0.0).any()) {
    throw Error(Errc::InvalidArgument, "boundary_scale needs f >= 0, f != 0");
  }
  const double worst = (normalized.rows() * f).minCoeff();
  if (!(worst < 0.0)) {
    throw Error(Errc::NoLossDirection, "no period loses along the given direction");
  }
  return -1.0 / worst;
}

}  // namespace optf
