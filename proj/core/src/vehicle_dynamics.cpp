#include "tirefit/vehicle_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tirefit/errors.hpp"

namespace tirefit {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, std::string("vehicle parameters: ") + what);
}

void validate_tire(const TireGeometry& t, const char* axle) {
  require(t.r_i > 0.0, axle);
  require(t.c_tire > 0.0, axle);
  require(std::isfinite(t.d_r), axle);
}

}  // namespace

void VehicleParams::validate() const {
  require(m > 0.0, "m must be > 0");
  require(l > 0.0 && lr > 0.0 && lr < l, "0 < lr < l violated");
  require(izz > 0.0, "izz must be > 0");
  require(h_cog >= 0.0, "h_cog must be >= 0");
  validate_tire(front_tire, "front tire needs r_i > 0 and c_tire > 0");
  validate_tire(rear_tire, "rear tire needs r_i > 0 and c_tire > 0");
  require(driveline_ratio > 0.0, "driveline_ratio must be > 0");
  require(engine_brake_torque_max >= 0.0, "engine_brake_torque_max must be >= 0");
}

double longitudinal_cog_force(const VehicleParams& vp, double ax, double vx) {
  const double v2 = vx * vx;
  const double f_drag = vp.c_drag * v2;
  const double f_roll = vp.f_roll * (vp.m * kGravity + (vp.c_lift_f + vp.c_lift_r) * v2);
  return vp.m * ax + f_drag + f_roll;
}

AxleLoads vertical_loads(const VehicleParams& vp, double ax, double vx) {
  const double v2 = vx * vx;
  const double transfer = vp.m * ax * vp.h_cog / vp.l;
  const double front = vp.m * kGravity * vp.lr / vp.l - transfer + vp.c_lift_f * v2;
  const double rear = vp.m * kGravity * vp.lf() / vp.l + transfer + vp.c_lift_r * v2;
  if (!(front > 0.0) || !(rear > 0.0)) {
    throw Error(ErrorKind::NonPositiveLoad, "axle vertical load is not positive");
  }
  return {front, rear};
}

LongitudinalSplit split_longitudinal(double Fx_cog, double Fz_f, double Fz_r) {
  const double front = Fx_cog > 0.0 ? 0.0 : Fx_cog * Fz_f / (Fz_f + Fz_r);
  return {front, Fx_cog - front};
}

double lsd_torque(const VehicleParams& vp, double Fx_r, double r_dyn_r, double omega_rl,
                  double omega_rr) {
  const double speed_diff = omega_rr - omega_rl;
  if (speed_diff == 0.0) return 0.0;

  const double brake_limit = vp.engine_brake_torque_max * vp.driveline_ratio;
  const double t_input = std::max(Fx_r * r_dyn_r, -brake_limit);
  const double ramp = t_input > 0.0 ? vp.lsd.drive_coeff : vp.lsd.coast_coeff;
  const double locking = vp.lsd.preload + ramp * std::abs(t_input);
  // A differential cannot transfer more than the torque it is fed, so the
  // transfer never reverses the wheel-speed difference.
  const double transfer = std::min(locking, std::abs(t_input));
  return speed_diff > 0.0 ? -transfer : transfer;
}

LateralSplit lateral_axle_forces(const VehicleParams& vp, double ay, double yaw_accel,
                                 double T_lsd) {
  // Yaw balance I*r' = lf*Fy_f - lr*Fy_r with r counter-clockwise positive.
  const double front = (vp.lr * vp.m * ay + vp.izz * yaw_accel + T_lsd) / vp.l;
  return {front, vp.m * ay - front};
}

double front_tire_frame(double Fy_f, double Fx_f, double delta) {
  if (!(std::abs(delta) < std::numbers::pi / 2.0)) {
    throw Error(ErrorKind::SteeringOutOfRange, "steering angle magnitude must be below pi/2");
  }
  return (Fy_f - Fx_f * std::sin(delta)) / std::cos(delta);
}

TireRadii dynamic_radius(const TireGeometry& tire, double Fz, double omega_left,
                         double omega_right) {
  const double omega = 0.5 * (omega_left + omega_right);
  const double r_0 = tire.r_i + tire.d_r * omega * omega;
  const double r_s = tire.r_i - Fz / (2.0 * tire.c_tire);
  return {r_0 * (2.0 / 3.0) + r_s * (1.0 / 3.0), r_0, r_s};
}

AxleVelocities axle_velocities(const VehicleParams& vp, const MotionState& s) {
  const double vy_front_axle = s.vy + s.yaw_rate * vp.lf();
  const double c = std::cos(s.steer);
  const double sn = std::sin(s.steer);
  AxleVelocity front{s.vx * c + vy_front_axle * sn, -s.vx * sn + vy_front_axle * c};
  AxleVelocity rear{s.vx, s.vy - s.yaw_rate * vp.lr};
  return {front, rear};
}

SlipStates axle_slip(const VehicleParams& vp, const MotionState& state, const WheelSpeeds& w,
                     double r_dyn_f, double r_dyn_r, double v_min) {
  const auto v = axle_velocities(vp, state);
  if (!(v.front.vx > v_min) || !(v.rear.vx > v_min)) {
    throw Error(ErrorKind::LowSpeed, "axle speed below slip threshold");
  }
  SlipStates out;
  out.r_dyn_f = r_dyn_f;
  out.r_dyn_r = r_dyn_r;
  out.lambda_f = (0.5 * (w.fl + w.fr) * r_dyn_f - v.front.vx) / v.front.vx;
  out.lambda_r = (0.5 * (w.rl + w.rr) * r_dyn_r - v.rear.vx) / v.rear.vx;
  out.alpha_f = -std::atan(v.front.vy / v.front.vx);
  out.alpha_r = -std::atan(v.rear.vy / v.rear.vx);
  return out;
}

FrameResult process_frame(const VehicleParams& vp, const FrameInput& in, double v_min) {
  FrameResult r;
  const double vx = in.motion.vx;
  const auto loads = vertical_loads(vp, in.ax, vx);
  r.forces.Fz_f = loads.front;
  r.forces.Fz_r = loads.rear;

  r.Fx_cog = longitudinal_cog_force(vp, in.ax, vx);
  const auto lon = split_longitudinal(r.Fx_cog, loads.front, loads.rear);
  r.forces.Fx_f = lon.front;
  r.forces.Fx_r = lon.rear;

  const auto rad_f = dynamic_radius(vp.front_tire, loads.front, in.wheels.fl, in.wheels.fr);
  const auto rad_r = dynamic_radius(vp.rear_tire, loads.rear, in.wheels.rl, in.wheels.rr);

  r.T_lsd = lsd_torque(vp, lon.rear, rad_r.r_dyn, in.wheels.rl, in.wheels.rr);
  const auto lat = lateral_axle_forces(vp, in.ay, in.yaw_accel, r.T_lsd);
  r.forces.Fy_f = lat.front;
  r.forces.Fy_r = lat.rear;
  r.forces.Fy_f_tf = front_tire_frame(lat.front, lon.front, in.motion.steer);

  r.slip = axle_slip(vp, in.motion, in.wheels, rad_f.r_dyn, rad_r.r_dyn, v_min);
  return r;
}

}  // namespace tirefit
