#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace optf {

enum class Errc {
  EmptyInput,
  RaggedRows,
  NonNumericCell,
  NonFiniteValue,
  NoLossInColumn,
  SimplexCycle,
  RuinDomain,
  NoLossDirection,
  AssumptionViolation,
  UnboundedAscent,
  LastSystem,
  InconsistentReduction,
  TooManySystems,
  BadSlice,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::RaggedRows: return "RaggedRows";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::NoLossInColumn: return "NoLossInColumn";
    case Errc::SimplexCycle: return "SimplexCycle";
    case Errc::RuinDomain: return "RuinDomain";
    case Errc::NoLossDirection: return "NoLossDirection";
    case Errc::AssumptionViolation: return "AssumptionViolation";
    case Errc::UnboundedAscent: return "UnboundedAscent";
    case Errc::LastSystem: return "LastSystem";
    case Errc::InconsistentReduction: return "InconsistentReduction";
    case Errc::TooManySystems: return "TooManySystems";
    case Errc::BadSlice: return "BadSlice";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code. `row` and `column` are
/// 1-based locations and are only set where the error has a position
/// (parse errors, a column lacking a loss).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message,
        std::optional<std::size_t> row = std::nullopt,
        std::optional<std::size_t> column = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        row_(row),
        column_(column) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> row() const noexcept { return row_; }
  std::optional<std::size_t> column() const noexcept { return column_; }

 private:
  Errc code_;
  std::optional<std::size_t> row_;
  std::optional<std::size_t> column_;
};

}  // namespace optf
