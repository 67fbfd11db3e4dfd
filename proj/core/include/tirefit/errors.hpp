#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tirefit {

// Every error raised by the library carries one of these kinds. The CLI maps
// kinds onto process exit codes (see exit_code()).
enum class ErrorKind {
  InvalidArgument,
  Schema,
  NonPositiveLoad,
  SteeringOutOfRange,
  LowSpeed,
  SeriesTooShort,
  NoOverlap,
  InsufficientCalibrationData,
  InsufficientLinearData,
  DegenerateSlope,
  EmptyDataset,
  NonFiniteObjective,
  NotAPosterior,
  ZeroVariance,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// 0 ok, 2 input/schema, 3 insufficient data, 4 optimization failure.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tirefit
