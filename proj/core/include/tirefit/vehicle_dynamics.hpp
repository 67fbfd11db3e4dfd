#pragma once

namespace tirefit {

inline constexpr double kGravity = 9.81;

struct TireGeometry {
  double r_i = 0.3;        ///< unloaded radius of the non-rotating tire [m]
  double d_r = 0.0;        ///< speed expansion factor [m s^2]
  double c_tire = 2.0e5;   ///< global vertical stiffness [N/m]
};

struct LsdSettings {
  double preload = 0.0;      ///< [N m]
  double coast_coeff = 0.0;  ///< locking ramp on overrun
  double drive_coeff = 0.0;  ///< locking ramp under drive torque
};

/**
 * Single-track vehicle constants, SI units throughout.
 *
 * Sign convention: x forward, y left, yaw rate positive counter-clockwise
 * seen from above. Steering angle positive to the left.
 */
struct VehicleParams {
  double m = 800.0;         ///< mass [kg]
  double l = 2.9;           ///< wheelbase [m]
  double lr = 1.4;          ///< CoG to rear axle [m]
  double h_cog = 0.3;       ///< CoG height [m]
  double izz = 1000.0;      ///< yaw inertia [kg m^2]
  double c_drag = 0.0;      ///< drag force = c_drag * vx^2 [N s^2/m^2]
  double c_lift_f = 0.0;    ///< front downforce = c_lift_f * vx^2 [N s^2/m^2]
  double c_lift_r = 0.0;    ///< rear downforce = c_lift_r * vx^2 [N s^2/m^2]
  double f_roll = 0.0;      ///< rolling-resistance coefficient
  TireGeometry front_tire;
  TireGeometry rear_tire;
  LsdSettings lsd;
  double engine_brake_torque_max = 0.0;  ///< [N m], at the engine
  double driveline_ratio = 1.0;          ///< engine to rear axle

  double lf() const { return l - lr; }

  // Throws InvalidArgument when m>0, 0<lr<l, izz>0, c_tire>0 or radii>0 is violated.
  void validate() const;
};

struct AxleLoads {
  double front;
  double rear;
};

struct AxleForces {
  double Fx_f = 0.0, Fx_r = 0.0;
  double Fy_f = 0.0, Fy_r = 0.0;
  double Fz_f = 0.0, Fz_r = 0.0;
  double Fy_f_tf = 0.0;  ///< front lateral force in the tire frame
};

struct SlipStates {
  double lambda_f = 0.0, lambda_r = 0.0;
  double alpha_f = 0.0, alpha_r = 0.0;
  double r_dyn_f = 0.0, r_dyn_r = 0.0;
};

struct TireRadii {
  double r_dyn;
  double r_0;  ///< unloaded, speed-expanded
  double r_s;  ///< static loaded
};

struct LongitudinalSplit {
  double front;
  double rear;
};

struct LateralSplit {
  double front;
  double rear;
};

struct WheelSpeeds {
  double fl = 0.0, fr = 0.0, rl = 0.0, rr = 0.0;  ///< [rad/s]
};

struct MotionState {
  double vx = 0.0;        ///< CoG longitudinal speed [m/s]
  double vy = 0.0;        ///< CoG lateral speed [m/s]
  double yaw_rate = 0.0;  ///< [rad/s]
  double steer = 0.0;     ///< road-wheel steering angle [rad]
};

// Velocity of an axle centre expressed in that axle's wheel frame.
struct AxleVelocity {
  double vx;
  double vy;
};

struct AxleVelocities {
  AxleVelocity front;
  AxleVelocity rear;
};

inline constexpr double kDefaultMinSlipSpeed = 3.0;

double longitudinal_cog_force(const VehicleParams& vp, double ax, double vx);

// Quasi-static longitudinal load transfer plus per-axle aero downforce.
// Throws NonPositiveLoad when either axle load is <= 0.
AxleLoads vertical_loads(const VehicleParams& vp, double ax, double vx);

// Rear-wheel drive: positive force goes entirely to the rear axle, braking
// force is split by vertical load.
LongitudinalSplit split_longitudinal(double Fx_cog, double Fz_f, double Fz_r);

double lsd_torque(const VehicleParams& vp, double Fx_r, double r_dyn_r, double omega_rl,
                  double omega_rr);

LateralSplit lateral_axle_forces(const VehicleParams& vp, double ay, double yaw_accel,
                                 double T_lsd);

// Throws SteeringOutOfRange when |delta| >= pi/2.
double front_tire_frame(double Fy_f, double Fx_f, double delta);

TireRadii dynamic_radius(const TireGeometry& tire, double Fz, double omega_left,
                         double omega_right);

AxleVelocities axle_velocities(const VehicleParams& vp, const MotionState& state);

// Throws LowSpeed when either axle's wheel-frame vx is <= v_min.
SlipStates axle_slip(const VehicleParams& vp, const MotionState& state, const WheelSpeeds& wheels,
                     double r_dyn_f, double r_dyn_r, double v_min = kDefaultMinSlipSpeed);

struct FrameInput {
  double ax = 0.0;
  double ay = 0.0;
  double yaw_accel = 0.0;
  MotionState motion;
  WheelSpeeds wheels;
};

struct FrameResult {
  double Fx_cog = 0.0;
  double T_lsd = 0.0;
  AxleForces forces;
  SlipStates slip;
};

// Full force and slip chain for one frame. Propagates NonPositiveLoad,
// SteeringOutOfRange and LowSpeed.
FrameResult process_frame(const VehicleParams& vp, const FrameInput& in,
                          double v_min = kDefaultMinSlipSpeed);

}  // namespace tirefit
