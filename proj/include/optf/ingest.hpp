#pragma once

// Trade-return ingestion: CSV parsing, validation and per-system
// normalization by the biggest loss.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "optf/error.hpp"

namespace optf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Absolute trade returns t(i,k): one row per period, one column per system.
/// Entries are finite and the shape is at least 1x1. Whether each column
/// holds a loss is not part of this invariant; see check_loss_history() and
/// biggest_losses().
class ReturnMatrix {
 public:
  explicit ReturnMatrix(Matrix entries, std::vector<std::string> names = {})
      : entries_(std::move(entries)), names_(std::move(names)) {
    if (entries_.rows() < 1 || entries_.cols() < 1) {
      throw Error(Errc::EmptyInput, "return matrix needs at least one period and one system");
    }
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      for (Eigen::Index k = 0; k < entries_.cols(); ++k) {
        if (!std::isfinite(entries_(i, k))) {
          throw Error(Errc::NonFiniteValue, "non-finite return", static_cast<std::size_t>(i + 1),
                      static_cast<std::size_t>(k + 1));
        }
      }
    }
    if (names_.empty()) {
      for (Eigen::Index k = 0; k < entries_.cols(); ++k) {
        names_.push_back("S" + std::to_string(k + 1));
      }
    } else if (static_cast<Eigen::Index>(names_.size()) != entries_.cols()) {
      throw Error(Errc::InvalidArgument, "expected one name per system");
    }
  }

  Eigen::Index periods() const noexcept { return entries_.rows(); }
  Eigen::Index systems() const noexcept { return entries_.cols(); }
  const Matrix& entries() const noexcept { return entries_; }
  double operator()(Eigen::Index i, Eigen::Index k) const { return entries_(i, k); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  friend bool operator==(const ReturnMatrix& a, const ReturnMatrix& b) {
    return a.names_ == b.names_ && a.entries_.rows() == b.entries_.rows() &&
           a.entries_.cols() == b.entries_.cols() && a.entries_ == b.entries_;
  }

 private:
  Matrix entries_;
  std::vector<std::string> names_;
};

/// Rows r_i = (t(i,1)/that_1, ..., t(i,M)/that_M) together with the
/// biggest-loss vector that. Every column attains exactly -1.
class NormalizedReturns {
 public:
  NormalizedReturns(Vector biggest_losses, Matrix rows)
      : biggest_losses_(std::move(biggest_losses)), rows_(std::move(rows)) {}

  Eigen::Index periods() const noexcept { return rows_.rows(); }
  Eigen::Index systems() const noexcept { return rows_.cols(); }
  const Vector& biggest_losses() const noexcept { return biggest_losses_; }
  const Matrix& rows() const noexcept { return rows_; }
  auto row(Eigen::Index i) const { return rows_.row(i); }

 private:
  Vector biggest_losses_;
  Matrix rows_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      return fields;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

inline bool parse_double(std::string_view field, double& value) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  return ec == std::errc() && ptr == end;
}

}  // namespace detail

struct ParseOptions {
  /// Treat the first row as data even if its first field is non-numeric.
  bool no_header = false;
};

/// Parses comma-separated returns. A header row is recognized when the first
/// field of the first row is not a number. Blank lines are ignored; row
/// numbers in errors refer to physical lines of the input.
inline ReturnMatrix parse_returns(std::string_view text, ParseOptions options = {}) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    ++line_no;
    const auto line = text.substr(pos, nl - pos);
    if (!detail::trim(line).empty()) lines.emplace_back(line_no, line);
    pos = nl + 1;
  }
  if (lines.empty()) throw Error(Errc::EmptyInput, "no rows in input");

  std::vector<std::string> names;
  std::size_t first_data = 0;
  double probe = 0.0;
  const auto first_fields = detail::split_fields(lines.front().second);
  if (!options.no_header && !detail::parse_double(first_fields.front(), probe)) {
    for (auto f : first_fields) names.emplace_back(f);
    first_data = 1;
  }
  if (first_data >= lines.size()) throw Error(Errc::EmptyInput, "header without data rows");

  const std::size_t width =
      names.empty() ? detail::split_fields(lines[first_data].second).size() : names.size();
  Matrix entries(static_cast<Eigen::Index>(lines.size() - first_data),
                 static_cast<Eigen::Index>(width));
  for (std::size_t r = first_data; r < lines.size(); ++r) {
    const auto [row_no, line] = lines[r];
    const auto fields = detail::split_fields(line);
    if (fields.size() != width) {
      throw Error(Errc::RaggedRows,
                  "row " + std::to_string(row_no) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(width),
                  row_no);
    }
    for (std::size_t c = 0; c < width; ++c) {
      double v = 0.0;
      if (!detail::parse_double(fields[c], v)) {
        throw Error(Errc::NonNumericCell,
                    "'" + std::string(fields[c]) + "' at row " + std::to_string(row_no) +
                        ", column " + std::to_string(c + 1),
                    row_no, c + 1);
      }
      if (!std::isfinite(v)) {
        throw Error(Errc::NonFiniteValue,
                    "at row " + std::to_string(row_no) + ", column " + std::to_string(c + 1),
                    row_no, c + 1);
      }
      entries(static_cast<Eigen::Index>(r - first_data), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return ReturnMatrix(std::move(entries), std::move(names));
}

/// Prints a double with 17 significant digits; parsing the text back yields
/// the same bits.
inline std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV with a header row of system names. parse_returns(serialize_returns(T)) == T.
inline std::string serialize_returns(const ReturnMatrix& returns) {
  std::string out;
  for (std::size_t k = 0; k < returns.names().size(); ++k) {
    if (k) out += ',';
    out += returns.names()[k];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < returns.periods(); ++i) {
    for (Eigen::Index k = 0; k < returns.systems(); ++k) {
      if (k) out += ',';
      out += format_double(returns(i, k));
    }
    out += '\n';
  }
  return out;
}

/// that_k = max{|t(i,k)| : t(i,k) < 0}. Throws NoLossInColumn (1-based
/// column) when a system never lost.
inline Vector biggest_losses(const ReturnMatrix& returns) {
  Vector losses(returns.systems());
  for (Eigen::Index k = 0; k < returns.systems(); ++k) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < returns.periods(); ++i) {
      if (returns(i, k) < 0.0) worst = std::max(worst, -returns(i, k));
    }
    if (!(worst > 0.0)) {
      throw Error(Errc::NoLossInColumn,
                  "system " + returns.names()[static_cast<std::size_t>(k)] + " has no loss",
                  std::nullopt, static_cast<std::size_t>(k + 1));
    }
    losses(k) = worst;
  }
  return losses;
}

inline NormalizedReturns normalize(const ReturnMatrix& returns) {
  Vector losses = biggest_losses(returns);
  Matrix rows = returns.entries();
  for (Eigen::Index k = 0; k < rows.cols(); ++k) rows.col(k) /= losses(k);
  return NormalizedReturns(std::move(losses), std::move(rows));
}

}  // namespace optf
