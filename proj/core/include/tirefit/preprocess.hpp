#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tirefit/dataset.hpp"
#include "tirefit/filters.hpp"
#include "tirefit/sensor_log.hpp"
#include "tirefit/vehicle_dynamics.hpp"

namespace tirefit {

struct PreprocessConfig {
  // Keyed by sensor group: correvit, imu, can.
  std::map<std::string, FilterSpec> filters = {
      {"correvit", {FilterKind::SavitzkyGolay, 200, 3, 0.0}},
      {"imu", {FilterKind::SavitzkyGolay, 500, 5, 0.0}},
      {"can", {FilterKind::SavitzkyGolay, 30, 3, 0.0}},
  };
  double target_rate_hz = 100.0;
  CalibrationSettings calibration;
  double gear_blanking = 0.2;     ///< [s]
  double v_min = kDefaultMinSlipSpeed;
  double thinning_radius = 0.02;  ///< normalized units; <= 0 disables thinning
  double linear_cut_slip_ratio = 0.02;
  double linear_cut_slip_angle = 0.02;  ///< [rad]
};

struct DatasetKey {
  Axle axle;
  Direction direction;
  auto operator<=>(const DatasetKey&) const = default;
};

// "front_lateral" etc.
std::string dataset_name(const DatasetKey& key);

struct PreparedDataset {
  AxleDataset dataset;          ///< thinned
  std::size_t samples_before_thinning = 0;
  std::optional<ShiftEstimate> shifts;
  std::string shift_error;      ///< set when shifts could not be estimated
};

struct PreprocessStats {
  std::size_t frames = 0;
  std::size_t dropped_gear_shift = 0;
  std::size_t dropped_low_speed = 0;
  std::size_t dropped_nonpositive_load = 0;
  std::size_t dropped_steering = 0;
  std::size_t dropped_sanity = 0;
};

struct PreprocessOutput {
  std::map<DatasetKey, PreparedDataset> datasets;
  OffsetReport offsets;
  PreprocessStats stats;
  bool gear_channel_present = true;
};

/**
 * Raw log to per-axle datasets: filter at native rates, derive yaw
 * acceleration, resample, remove offsets, blank gear shifts, run the
 * axle-force and slip chain, normalize by axle load, estimate Sh/Sv on the
 * linear region, thin.
 */
PreprocessOutput run_preprocess(const SensorLog& log, const VehicleParams& vehicle,
                                const PreprocessConfig& config);

}  // namespace tirefit
