#include "tirefit/preprocess.hpp"

#include <algorithm>

#include <spdlog/spdlog.h>

#include "tirefit/errors.hpp"

namespace tirefit {

std::string dataset_name(const DatasetKey& key) {
  return std::string(to_string(key.axle)) + "_" + std::string(to_string(key.direction));
}

namespace {

const FilterSpec& filter_for(const PreprocessConfig& config, const std::string& channel) {
  const auto group = sensor_group(channel);
  auto it = config.filters.find(group);
  if (it == config.filters.end()) {
    throw Error(ErrorKind::Schema, "no filter configured for sensor group " + group);
  }
  return it->second;
}

SensorLog filter_log(const SensorLog& raw, const PreprocessConfig& config) {
  SensorLog out;
  for (const auto& [name, ch] : raw.channels) {
    ch.validate(name);
    Channel filtered = ch;
    if (!ch.categorical) filtered.values = filter_channel(ch.values, filter_for(config, name));
    out.channels.emplace(name, std::move(filtered));
  }

  // Yaw acceleration: Savitzky-Golay derivative with the IMU window and order.
  const auto& yaw = raw.at(columns::kYawRate);
  const FilterSpec imu = filter_for(config, columns::kYawRate).normalized();
  const int order = imu.kind == FilterKind::SavitzkyGolay ? std::max(imu.order, 2) : 3;
  Channel accel;
  accel.time = yaw.time;
  accel.values = savgol_derivative(yaw.values, imu.window, std::min(order, imu.window - 1),
                                   yaw.sample_period());
  out.channels.emplace(columns::kYawAccel, std::move(accel));
  return out;
}

}  // namespace

PreprocessOutput run_preprocess(const SensorLog& log, const VehicleParams& vehicle,
                                const PreprocessConfig& config) {
  vehicle.validate();
  for (const auto& name : required_log_columns()) {
    if (name != columns::kTime && name != columns::kGear && !log.has(name)) {
      throw Error(ErrorKind::Schema, "missing channel " + name);
    }
  }

  PreprocessOutput out;
  FrameTable frames = resample(filter_log(log, config), config.target_rate_hz);
  out.offsets = compensate_offsets(frames, config.calibration);
  const GearMask mask = mask_gear_shifts(frames, config.gear_blanking);
  out.gear_channel_present = mask.gear_channel_present;
  out.stats.frames = frames.size();

  const auto& ax = frames.column(columns::kAx);
  const auto& ay = frames.column(columns::kAy);
  const auto& yaw = frames.column(columns::kYawRate);
  const auto& yaw_accel = frames.column(columns::kYawAccel);
  const auto& steer = frames.column(columns::kSteer);
  const auto& vx = frames.column(columns::kVx);
  const auto& vy = frames.column(columns::kVy);
  const auto& wfl = frames.column(columns::kOmegaFl);
  const auto& wfr = frames.column(columns::kOmegaFr);
  const auto& wrl = frames.column(columns::kOmegaRl);
  const auto& wrr = frames.column(columns::kOmegaRr);

  std::map<DatasetKey, AxleDataset> raw;
  for (auto axle : {Axle::Front, Axle::Rear}) {
    for (auto dir : {Direction::Longitudinal, Direction::Lateral}) {
      raw[{axle, dir}] = AxleDataset{{}, axle, dir};
    }
  }
  auto push = [&](Axle axle, Direction dir, double excitation, double force, double fz) {
    Sample s{excitation, force / fz, 1.0};
    if (!AxleDataset::passes_sanity_gate(s)) {
      ++out.stats.dropped_sanity;
      return;
    }
    raw[{axle, dir}].samples.push_back(s);
  };

  for (std::size_t k = 0; k < frames.size(); ++k) {
    if (!mask.keep[k]) {
      ++out.stats.dropped_gear_shift;
      continue;
    }
    FrameInput in;
    in.ax = ax[k];
    in.ay = ay[k];
    in.yaw_accel = yaw_accel[k];
    in.motion = {vx[k], vy[k], yaw[k], steer[k]};
    in.wheels = {wfl[k], wfr[k], wrl[k], wrr[k]};
    FrameResult r;
    try {
      r = process_frame(vehicle, in, config.v_min);
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::LowSpeed: ++out.stats.dropped_low_speed; continue;
        case ErrorKind::NonPositiveLoad: ++out.stats.dropped_nonpositive_load; continue;
        case ErrorKind::SteeringOutOfRange: ++out.stats.dropped_steering; continue;
        default: throw;
      }
    }
    const auto& f = r.forces;
    push(Axle::Front, Direction::Longitudinal, r.slip.lambda_f, f.Fx_f, f.Fz_f);
    push(Axle::Rear, Direction::Longitudinal, r.slip.lambda_r, f.Fx_r, f.Fz_r);
    push(Axle::Front, Direction::Lateral, r.slip.alpha_f, f.Fy_f_tf, f.Fz_f);
    push(Axle::Rear, Direction::Lateral, r.slip.alpha_r, f.Fy_r, f.Fz_r);
  }

  for (auto& [key, data] : raw) {
    PreparedDataset prepared;
    prepared.samples_before_thinning = data.size();
    const double cut = key.direction == Direction::Longitudinal ? config.linear_cut_slip_ratio
                                                                 : config.linear_cut_slip_angle;
    // Shifts use the full linear region; thinning would starve it.
    try {
      prepared.shifts = estimate_shifts(data, cut);
    } catch (const Error& e) {
      prepared.shift_error = std::string(to_string(e.kind())) + ": " + e.what();
      spdlog::warn("{}: shift estimate unavailable ({})", dataset_name(key), e.what());
    }
    prepared.dataset =
        config.thinning_radius > 0.0 ? thin_nearest_neighbor(data, config.thinning_radius) : data;
    out.datasets.emplace(key, std::move(prepared));
  }
  return out;
}

}  // namespace tirefit
