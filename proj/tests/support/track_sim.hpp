#pragma once

#include <cstdint>
#include <string>

#include "tirefit/sensor_log.hpp"
#include "tirefit/tire_model.hpp"
#include "tirefit/vehicle_dynamics.hpp"

namespace tirefit::testing {

// Constant-speed single-track simulation with Magic Formula lateral tires,
// sampled at the native sensor rates (Correvit 500 Hz, IMU 800 Hz, CAN 100 Hz).
struct TrackSimConfig {
  VehicleParams vehicle;
  TireParams front{10.0, 1.5, 1.3, 0.2, 0.0, 0.0};
  TireParams rear{14.0, 1.5, 1.7, 0.2, 0.0, 0.0};
  double speed = 20.0;          ///< [m/s]
  double straight_time = 8.0;   ///< leading straight segment [s]
  double manoeuvre_time = 40.0; ///< sine steer with ramped amplitude [s]
  double steer_amplitude = 0.25; ///< final road-wheel amplitude [rad]
  double steer_frequency = 0.3; ///< [Hz]
  double noise = 0.0;           ///< scales per-channel white noise
  double vy_bias = 0.0;
  double ay_bias = 0.0;
  double yaw_rate_bias = 0.0;
  double steer_bias = 0.0;
  double gear_shift_time = -1.0; ///< < 0: no shift
  bool stationary = false;       ///< vehicle parked, all speeds zero
  std::uint64_t seed = 1;
};

VehicleParams sim_vehicle();

SensorLog simulate_track(const TrackSimConfig& config);

// Log as CSV text; channels sampled at different instants leave empty cells.
std::string sensor_log_to_csv(const SensorLog& log);

}  // namespace tirefit::testing
