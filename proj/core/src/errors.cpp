#include "tirefit/errors.hpp"

namespace tirefit {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Schema: return "Schema";
    case ErrorKind::NonPositiveLoad: return "NonPositiveLoad";
    case ErrorKind::SteeringOutOfRange: return "SteeringOutOfRange";
    case ErrorKind::LowSpeed: return "LowSpeed";
    case ErrorKind::SeriesTooShort: return "SeriesTooShort";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::InsufficientCalibrationData: return "InsufficientCalibrationData";
    case ErrorKind::InsufficientLinearData: return "InsufficientLinearData";
    case ErrorKind::DegenerateSlope: return "DegenerateSlope";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    case ErrorKind::NotAPosterior: return "NotAPosterior";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InsufficientCalibrationData:
    case ErrorKind::InsufficientLinearData:
    case ErrorKind::EmptyDataset:
    case ErrorKind::SeriesTooShort:
    case ErrorKind::NoOverlap:
      return 3;
    case ErrorKind::NonFiniteObjective:
    case ErrorKind::DegenerateSlope:
    case ErrorKind::NotAPosterior:
      return 4;
    default:
      return 2;
  }
}

}  // namespace tirefit
