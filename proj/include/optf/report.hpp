#pragma once

// JSON run reports and CSV surface grids.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "optf/assumptions.hpp"
#include "optf/detail/parallel.hpp"
#include "optf/detail/simplex.hpp"
#include "optf/domain.hpp"
#include "optf/solver.hpp"

namespace optf {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunReport {
  std::string input_digest;
  AssumptionReport assumptions;
  /// Present iff the checks passed and a solve was requested.
  std::optional<SolverResult> solution;
  std::string tool_version = kToolVersion;
};

/// FNV-1a 64 over the shape, the names and the bit patterns of the entries.
inline std::string input_digest(const ReturnMatrix& returns) {
  std::uint64_t hash = 14695981039346656037ull;
  auto feed = [&hash](const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ull;
    }
  };
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(returns.periods()),
                                 static_cast<std::uint64_t>(returns.systems())};
  feed(dims, sizeof dims);
  for (const auto& name : returns.names()) {
    feed(name.data(), name.size());
    feed("\0", 1);
  }
  for (Eigen::Index i = 0; i < returns.periods(); ++i) {
    for (Eigen::Index k = 0; k < returns.systems(); ++k) {
      double v = returns(i, k);
      if (v == 0.0) v = 0.0;  // fold -0 into +0
      std::uint64_t bits = 0;
      std::memcpy(&bits, &v, sizeof bits);
      feed(&bits, sizeof bits);
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

namespace detail {

using Json = nlohmann::ordered_json;

inline Json vector_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

// 1-based system numbers, as printed everywhere outside the C++ API.
inline Json systems_json(const std::vector<std::size_t>& systems) {
  Json out = Json::array();
  for (const auto k : systems) out.push_back(k + 1);
  return out;
}

inline std::vector<std::size_t> systems_from_json(const Json& j) {
  std::vector<std::size_t> out;
  for (const auto& v : j) out.push_back(v.get<std::size_t>() - 1);
  return out;
}

inline Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  return v;
}

// Pretty printer with a fixed 17-significant-digit float format; nlohmann's
// own dump uses shortest round-trip output instead.
inline void write_json(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(key).dump() + ": ";
        write_json(value, out, indent + 2);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& value : j) {
        if (!first) out += ", ";
        first = false;
        write_json(value, out, indent);
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

inline std::string dump(const Json& j) {
  std::string out;
  write_json(j, out, 0);
  out += '\n';
  return out;
}

inline Json assumptions_json(const AssumptionReport& a) {
  Json j;
  j["loss_per_column"]["pass"] = a.loss_per_column.pass;
  j["loss_per_column"]["offending_column"] =
      a.loss_per_column.offending_column ? Json(*a.loss_per_column.offending_column + 1) : Json();
  j["profitable"]["pass"] = a.profitable.pass;
  j["profitable"]["column_means"] = a.profitable.column_means;
  j["profitable"]["column_pass"] = a.profitable.column_pass;
  j["full_rank"]["pass"] = a.full_rank.pass;
  j["full_rank"]["rank"] = a.full_rank.rank;
  j["full_rank"]["smallest_singular_value"] = a.full_rank.smallest_singular_value;
  j["no_risk_free"]["pass"] = a.no_risk_free.pass;
  j["no_risk_free"]["witness"] =
      a.no_risk_free.witness ? vector_json(*a.no_risk_free.witness) : Json();
  j["no_risk_free"]["diagnostic"] = a.no_risk_free.diagnostic;
  j["overall"] = a.overall;
  return j;
}

inline AssumptionReport assumptions_from_json(const Json& j) {
  AssumptionReport a;
  a.loss_per_column.pass = j.at("loss_per_column").at("pass").get<bool>();
  const auto& off = j.at("loss_per_column").at("offending_column");
  if (!off.is_null()) a.loss_per_column.offending_column = off.get<std::size_t>() - 1;
  a.profitable.pass = j.at("profitable").at("pass").get<bool>();
  a.profitable.column_means = j.at("profitable").at("column_means").get<std::vector<double>>();
  a.profitable.column_pass = j.at("profitable").at("column_pass").get<std::vector<bool>>();
  a.full_rank.pass = j.at("full_rank").at("pass").get<bool>();
  a.full_rank.rank = j.at("full_rank").at("rank").get<std::size_t>();
  a.full_rank.smallest_singular_value =
      j.at("full_rank").at("smallest_singular_value").get<double>();
  a.no_risk_free.pass = j.at("no_risk_free").at("pass").get<bool>();
  const auto& witness = j.at("no_risk_free").at("witness");
  if (!witness.is_null()) a.no_risk_free.witness = vector_from_json(witness);
  a.no_risk_free.diagnostic = j.at("no_risk_free").at("diagnostic").get<std::string>();
  a.overall = j.at("overall").get<bool>();
  return a;
}

inline Json solution_json(const SolverResult& s) {
  Json j;
  j["f_opt"] = vector_json(s.f_opt);
  j["twr"] = s.twr_value;
  j["log_twr_mean"] = s.log_twr_mean_value;
  j["risk"] = s.risk_value;
  j["iterations"] = s.iterations;
  j["location"] = s.location == Location::Interior ? "interior" : "orthant_boundary";
  j["active_set"] = systems_json(s.active_set);
  j["kkt"]["projected_grad_norm"] = s.kkt.projected_grad_norm;
  j["kkt"]["certified"] = s.kkt.certified;
  j["eliminated_chain"] = systems_json(s.eliminated_chain);
  return j;
}

inline SolverResult solution_from_json(const Json& j) {
  SolverResult s;
  s.f_opt = vector_from_json(j.at("f_opt"));
  s.twr_value = j.at("twr").get<double>();
  s.log_twr_mean_value = j.at("log_twr_mean").get<double>();
  s.risk_value = j.at("risk").get<double>();
  s.iterations = j.at("iterations").get<std::size_t>();
  s.location = j.at("location").get<std::string>() == "interior" ? Location::Interior
                                                                 : Location::OrthantBoundary;
  s.active_set = systems_from_json(j.at("active_set"));
  s.kkt.projected_grad_norm = j.at("kkt").at("projected_grad_norm").get<double>();
  s.kkt.certified = j.at("kkt").at("certified").get<bool>();
  s.kkt.active_signs_ok = s.kkt.certified;
  s.eliminated_chain = systems_from_json(j.at("eliminated_chain"));
  s.termination = s.kkt.certified ? Termination::Converged : Termination::MaxIterations;
  return s;
}

}  // namespace detail

/// JSON for the assumption checks alone (the `check` subcommand output).
inline std::string to_json(const AssumptionReport& report) {
  return detail::dump(detail::assumptions_json(report));
}

/// Deterministic JSON: fixed key order, floats with 17 significant digits,
/// system numbers 1-based.
inline std::string to_json(const RunReport& report) {
  detail::Json j;
  j["input_digest"] = report.input_digest;
  j["tool_version"] = report.tool_version;
  j["assumptions"] = detail::assumptions_json(report.assumptions);
  j["solution"] = report.solution ? detail::solution_json(*report.solution) : detail::Json();
  return detail::dump(j);
}

/// Inverse of to_json(RunReport) for every field the schema carries.
inline RunReport run_report_from_json(const std::string& text) {
  const auto j = detail::Json::parse(text);
  RunReport report;
  report.input_digest = j.at("input_digest").get<std::string>();
  report.tool_version = j.at("tool_version").get<std::string>();
  report.assumptions = detail::assumptions_from_json(j.at("assumptions"));
  if (!j.at("solution").is_null()) report.solution = detail::solution_from_json(j.at("solution"));
  return report;
}

namespace detail {

// Largest f_axis over the slice of G with the fixed systems pinned; falls
// back to boundary_scale(e_axis) when the slice LP is empty or unbounded.
inline double slice_extent(const NormalizedReturns& normalized, const std::vector<Eigen::Index>& free,
                           const Vector& pinned, std::size_t which) {
  const Eigen::Index n = normalized.periods();
  const Eigen::Index m = normalized.systems();
  // Columns: f_a, f_b, slack (n).  Rows: -<r_i_free, f> + s_i = 1 + <r_i, pinned>.
  Matrix a = Matrix::Zero(n, 2 + n);
  for (std::size_t c = 0; c < 2; ++c) a.col(static_cast<Eigen::Index>(c)) = -normalized.rows().col(free[c]);
  a.rightCols(n).setIdentity();
  const Vector b = (normalized.rows() * pinned).array() + 1.0;
  Vector cost = Vector::Zero(2 + n);
  cost(static_cast<Eigen::Index>(which)) = -1.0;
  LpOptions lp;
  lp.max_iterations = static_cast<std::size_t>(50 * (n + 3));
  const auto result = solve_lp(a, b, cost, lp);
  if (result.status == LpStatus::Optimal && result.x(static_cast<Eigen::Index>(which)) > 0.0) {
    return result.x(static_cast<Eigen::Index>(which));
  }
  return boundary_scale(normalized, Vector::Unit(m, free[which]));
}

}  // namespace detail

/// TWR over a two-dimensional slice of G as CSV `f_a,f_b,twr,outside`.
/// `fixed` pins every system except two (0-based index -> fraction). Each
/// free axis runs over `resolution` evenly spaced points from 0 to the
/// slice's extent along that axis. Points outside G carry twr = 0 and
/// outside = 1. Rows are ordered with f_a outermost.
inline std::string surface_grid(const NormalizedReturns& normalized, std::size_t resolution,
                                const std::map<std::size_t, double>& fixed,
                                std::size_t workers = detail::worker_count()) {
  const Eigen::Index m = normalized.systems();
  if (resolution < 2) throw Error(Errc::InvalidArgument, "resolution must be at least 2");
  if (static_cast<Eigen::Index>(fixed.size()) + 2 != m) {
    throw Error(Errc::BadSlice, "exactly two systems must stay free; " + std::to_string(m) +
                                    " systems, " + std::to_string(fixed.size()) + " fixed");
  }
  Vector pinned = Vector::Zero(m);
  for (const auto& [k, value] : fixed) {
    if (k >= static_cast<std::size_t>(m)) throw Error(Errc::BadSlice, "fixed system out of range");
    if (!std::isfinite(value) || value < 0.0) {
      throw Error(Errc::BadSlice, "fixed fractions must be finite and nonnegative");
    }
    pinned(static_cast<Eigen::Index>(k)) = value;
  }
  std::vector<Eigen::Index> free;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!fixed.count(static_cast<std::size_t>(k))) free.push_back(k);
  }

  const double extent_a = detail::slice_extent(normalized, free, pinned, 0);
  const double extent_b = detail::slice_extent(normalized, free, pinned, 1);
  const double denom = static_cast<double>(resolution - 1);

  std::vector<std::string> blocks(resolution);
  detail::for_each_chunk(resolution, workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t ia = begin; ia < end; ++ia) {
      std::string& out = blocks[ia];
      Vector f = pinned;
      f(free[0]) = extent_a * static_cast<double>(ia) / denom;
      for (std::size_t ib = 0; ib < resolution; ++ib) {
        f(free[1]) = extent_b * static_cast<double>(ib) / denom;
        const bool outside = classify(normalized, f).kind == Admissibility::Outside;
        const double value = outside ? 0.0 : twr(normalized, f);
        out += format_double(f(free[0])) + ',' + format_double(f(free[1])) + ',' +
               format_double(value) + (outside ? ",1\n" : ",0\n");
      }
    }
  });

  std::string csv = "f_a,f_b,twr,outside\n";
  for (const auto& block : blocks) csv += block;
  return csv;
}

}  // namespace optf
