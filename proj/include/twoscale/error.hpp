#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace twoscale {

/// Raised when a solver or analysis routine hits a numerical failure
/// (CFL violation, vacuum state, non-finite value, oracle divergence).
/// Precondition violations on arguments are reported with std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string operation, const std::string& detail,
                 std::optional<std::size_t> step = std::nullopt,
                 std::optional<std::size_t> cell = std::nullopt)
      : std::runtime_error(compose(operation, detail, step, cell)),
        operation_(std::move(operation)),
        detail_(detail),
        step_(step),
        cell_(cell) {}

  const std::string& operation() const noexcept { return operation_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::size_t> step() const noexcept { return step_; }
  std::optional<std::size_t> cell() const noexcept { return cell_; }

  /// Same failure, tagged with the time-loop step index it happened in.
  NumericalError at_step(std::size_t step) const {
    return NumericalError(operation_, detail_, step, cell_);
  }

 private:
  static std::string compose(const std::string& op, const std::string& detail,
                             std::optional<std::size_t> step,
                             std::optional<std::size_t> cell) {
    std::string msg = op + ": " + detail;
    if (step) msg += " (step " + std::to_string(*step) + ")";
    if (cell) msg += " (cell " + std::to_string(*cell) + ")";
    return msg;
  }

  std::string operation_;
  std::string detail_;
  std::optional<std::size_t> step_;
  std::optional<std::size_t> cell_;
};

}  // namespace twoscale
