#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tirefit {

namespace columns {
inline constexpr const char* kTime = "time_s";
inline constexpr const char* kAx = "ax_mps2";
inline constexpr const char* kAy = "ay_mps2";
inline constexpr const char* kYawRate = "yaw_rate_radps";
inline constexpr const char* kSteer = "steer_angle_rad";
inline constexpr const char* kOmegaFl = "omega_fl_radps";
inline constexpr const char* kOmegaFr = "omega_fr_radps";
inline constexpr const char* kOmegaRl = "omega_rl_radps";
inline constexpr const char* kOmegaRr = "omega_rr_radps";
inline constexpr const char* kVx = "vx_mps";
inline constexpr const char* kVy = "vy_mps";
inline constexpr const char* kGear = "gear";
// Derived from the filtered yaw rate before resampling.
inline constexpr const char* kYawAccel = "yaw_accel_radps2";
}  // namespace columns

// Every column the log CSV must carry, time first.
const std::vector<std::string>& required_log_columns();

// Sensor group a channel belongs to: "correvit", "imu" or "can".
std::string sensor_group(const std::string& channel);

// One channel sampled on its own time axis. Categorical channels (gear) are
// held, never interpolated or filtered.
struct Channel {
  std::vector<double> time;
  std::vector<double> values;
  bool categorical = false;

  // Throws Schema when time is not strictly increasing or sizes differ.
  void validate(const std::string& name) const;
  // Median sample period.
  double sample_period() const;
};

struct SensorLog {
  std::map<std::string, Channel> channels;

  bool has(const std::string& name) const { return channels.count(name) != 0; }
  const Channel& at(const std::string& name) const;
};

// Channels on one shared, evenly spaced time grid.
struct FrameTable {
  std::vector<double> time;
  std::map<std::string, std::vector<double>> columns;
  double rate_hz = 0.0;

  std::size_t size() const { return time.size(); }
  bool has(const std::string& name) const { return columns.count(name) != 0; }
  // Throws Schema when the column is absent.
  const std::vector<double>& column(const std::string& name) const;
  std::vector<double>& column(const std::string& name);
};

// Interpolates every channel onto t0 + k / rate over the intersection of all
// channel time ranges. The grid has floor(duration * rate) + 1 points.
// Throws NoOverlap when the channel windows are disjoint.
FrameTable resample(const SensorLog& log, double target_rate_hz = 100.0);

struct CalibrationSettings {
  double max_abs_ay = 0.5;        ///< [m/s^2]
  double max_abs_yaw_rate = 0.02; ///< [rad/s]
  double min_vx = 5.0;            ///< [m/s]
  double min_duration = 5.0;      ///< [s]
};

// Biases removed from each channel.
struct OffsetReport {
  double ay = 0.0;
  double yaw_rate = 0.0;
  double vy = 0.0;
  double steer = 0.0;
  double calibration_duration = 0.0;  ///< [s] of low-dynamics samples used
  std::size_t calibration_samples = 0;
};

// Subtracts the low-dynamics (straight, steady) mean of ay, yaw rate, vy and
// steering angle from each full series. Throws InsufficientCalibrationData
// when fewer than min_duration seconds qualify.
OffsetReport compensate_offsets(FrameTable& frames, const CalibrationSettings& settings = {});

struct GearMask {
  std::vector<bool> keep;
  bool gear_channel_present = true;
};

// keep[k] is false within +-blanking seconds of a gear change. A change is
// timed at the first sample carrying the new gear value.
GearMask mask_gear_shifts(const FrameTable& frames, double blanking = 0.2);

}  // namespace tirefit
