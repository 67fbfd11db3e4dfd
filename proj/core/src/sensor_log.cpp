#include "tirefit/sensor_log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "tirefit/errors.hpp"

namespace tirefit {

const std::vector<std::string>& required_log_columns() {
  static const std::vector<std::string> cols = {
      columns::kTime,    columns::kAx,      columns::kAy,      columns::kYawRate,
      columns::kSteer,   columns::kOmegaFl, columns::kOmegaFr, columns::kOmegaRl,
      columns::kOmegaRr, columns::kVx,      columns::kVy,      columns::kGear};
  return cols;
}

std::string sensor_group(const std::string& channel) {
  if (channel == columns::kVx || channel == columns::kVy) return "correvit";
  if (channel == columns::kAx || channel == columns::kAy || channel == columns::kYawRate ||
      channel == columns::kYawAccel) {
    return "imu";
  }
  return "can";
}

void Channel::validate(const std::string& name) const {
  if (time.size() != values.size()) {
    throw Error(ErrorKind::Schema, "channel " + name + ": time and value lengths differ");
  }
  if (time.empty()) throw Error(ErrorKind::Schema, "channel " + name + " has no samples");
  for (std::size_t i = 1; i < time.size(); ++i) {
    if (!(time[i] > time[i - 1])) {
      throw Error(ErrorKind::Schema, "channel " + name + ": timestamps not strictly increasing");
    }
  }
}

double Channel::sample_period() const {
  if (time.size() < 2) return 0.0;
  std::vector<double> dt(time.size() - 1);
  for (std::size_t i = 1; i < time.size(); ++i) dt[i - 1] = time[i] - time[i - 1];
  auto mid = dt.begin() + static_cast<std::ptrdiff_t>(dt.size() / 2);
  std::nth_element(dt.begin(), mid, dt.end());
  return *mid;
}

const Channel& SensorLog::at(const std::string& name) const {
  auto it = channels.find(name);
  if (it == channels.end()) throw Error(ErrorKind::Schema, "missing channel " + name);
  return it->second;
}

const std::vector<double>& FrameTable::column(const std::string& name) const {
  auto it = columns.find(name);
  if (it == columns.end()) throw Error(ErrorKind::Schema, "missing column " + name);
  return it->second;
}

std::vector<double>& FrameTable::column(const std::string& name) {
  auto it = columns.find(name);
  if (it == columns.end()) throw Error(ErrorKind::Schema, "missing column " + name);
  return it->second;
}

namespace {

std::vector<double> interpolate(const Channel& ch, const std::vector<double>& grid) {
  std::vector<double> out(grid.size());
  std::size_t j = 0;
  const std::size_t n = ch.time.size();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double t = grid[k];
    while (j + 1 < n && ch.time[j + 1] <= t) ++j;
    if (j + 1 >= n || ch.time[j] >= t) {
      out[k] = ch.values[j];
      continue;
    }
    if (ch.categorical) {
      out[k] = ch.values[j];
      continue;
    }
    const double w = (t - ch.time[j]) / (ch.time[j + 1] - ch.time[j]);
    out[k] = ch.values[j] + w * (ch.values[j + 1] - ch.values[j]);
  }
  return out;
}

}  // namespace

FrameTable resample(const SensorLog& log, double target_rate_hz) {
  if (!(target_rate_hz > 0.0)) throw Error(ErrorKind::InvalidArgument, "target rate must be > 0");
  if (log.channels.empty()) throw Error(ErrorKind::Schema, "sensor log has no channels");

  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (const auto& [name, ch] : log.channels) {
    ch.validate(name);
    t0 = std::max(t0, ch.time.front());
    t1 = std::min(t1, ch.time.back());
  }
  if (t1 < t0) throw Error(ErrorKind::NoOverlap, "channel time ranges do not overlap");

  const double duration = t1 - t0;
  // Guard against duration * rate landing just below an integer.
  const auto steps = static_cast<std::size_t>(std::floor(duration * target_rate_hz + 1e-9));
  FrameTable table;
  table.rate_hz = target_rate_hz;
  table.time.resize(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) {
    table.time[k] = std::min(t0 + static_cast<double>(k) / target_rate_hz, t1);
  }
  for (const auto& [name, ch] : log.channels) table.columns[name] = interpolate(ch, table.time);
  return table;
}

OffsetReport compensate_offsets(FrameTable& frames, const CalibrationSettings& s) {
  auto& ay = frames.column(columns::kAy);
  auto& yaw = frames.column(columns::kYawRate);
  auto& vy = frames.column(columns::kVy);
  auto& steer = frames.column(columns::kSteer);
  const auto& vx = frames.column(columns::kVx);

  OffsetReport report;
  double sum_ay = 0.0, sum_yaw = 0.0, sum_vy = 0.0, sum_steer = 0.0;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (std::abs(ay[k]) < s.max_abs_ay && std::abs(yaw[k]) < s.max_abs_yaw_rate &&
        vx[k] > s.min_vx) {
      ++report.calibration_samples;
      sum_ay += ay[k];
      sum_yaw += yaw[k];
      sum_vy += vy[k];
      sum_steer += steer[k];
    }
  }
  const double dt = frames.rate_hz > 0.0 ? 1.0 / frames.rate_hz : 0.0;
  report.calibration_duration = static_cast<double>(report.calibration_samples) * dt;
  if (report.calibration_samples == 0 || report.calibration_duration + 1e-9 < s.min_duration) {
    throw Error(ErrorKind::InsufficientCalibrationData,
                "low-dynamics segment lasts " + std::to_string(report.calibration_duration) +
                    " s, need " + std::to_string(s.min_duration) + " s");
  }
  const double n = static_cast<double>(report.calibration_samples);
  report.ay = sum_ay / n;
  report.yaw_rate = sum_yaw / n;
  report.vy = sum_vy / n;
  report.steer = sum_steer / n;

  for (auto& v : ay) v -= report.ay;
  for (auto& v : yaw) v -= report.yaw_rate;
  for (auto& v : vy) v -= report.vy;
  for (auto& v : steer) v -= report.steer;
  return report;
}

GearMask mask_gear_shifts(const FrameTable& frames, double blanking) {
  GearMask mask;
  mask.keep.assign(frames.size(), true);
  if (!frames.has(columns::kGear)) {
    mask.gear_channel_present = false;
    spdlog::warn("no gear channel; gear-shift masking skipped");
    return mask;
  }
  const auto& gear = frames.column(columns::kGear);
  const auto& t = frames.time;
  // Tolerates grid times that are off by rounding.
  const double eps = 1e-9;
  std::size_t lo = 0;
  for (std::size_t k = 1; k < gear.size(); ++k) {
    if (gear[k] == gear[k - 1]) continue;
    const double shift = t[k];
    while (lo < t.size() && t[lo] < shift - blanking - eps) ++lo;
    for (std::size_t j = lo; j < t.size() && t[j] <= shift + blanking + eps; ++j) {
      mask.keep[j] = false;
    }
  }
  return mask;
}

}  // namespace tirefit
