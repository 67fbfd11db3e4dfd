#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "tirefit/errors.hpp"
#include "tirefit/vehicle_dynamics.hpp"

using namespace tirefit;

namespace {

VehicleParams base_vehicle() {
  VehicleParams vp;
  vp.m = 800.0;
  vp.l = 2.9;
  vp.lr = 1.4;
  vp.h_cog = 0.3;
  vp.izz = 1000.0;
  return vp;
}

bool close_ulps(double a, double b, double scale) {
  return std::abs(a - b) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
}

}  // namespace

TEST_CASE("longitudinal force at the centre of gravity") {
  VehicleParams vp = base_vehicle();
  SUBCASE("drag and rolling terms chosen to give 100 N and 50 N") {
    vp.c_drag = 100.0 / 100.0;  // vx = 10
    vp.f_roll = 50.0 / (vp.m * kGravity);
    CHECK(longitudinal_cog_force(vp, 2.0, 10.0) == doctest::Approx(1750.0).epsilon(1e-12));
  }
  SUBCASE("standstill leaves only rolling resistance") {
    vp.f_roll = 0.015;
    vp.c_drag = 0.8;
    CHECK(longitudinal_cog_force(vp, 0.0, 0.0) == doctest::Approx(0.015 * 800.0 * kGravity));
  }
  SUBCASE("braking at speed") {
    vp.c_drag = 1.0;
    vp.f_roll = 0.01;
    const double roll = 0.01 * vp.m * kGravity;
    CHECK(longitudinal_cog_force(vp, -3.0, 50.0) == doctest::Approx(-2400.0 + 2500.0 + roll));
  }
  SUBCASE("rolling resistance follows aero downforce") {
    vp.f_roll = 0.02;
    vp.c_lift_f = 0.5;
    vp.c_lift_r = 0.7;
    CHECK(longitudinal_cog_force(vp, 0.0, 40.0) ==
          doctest::Approx(0.02 * (vp.m * kGravity + 1.2 * 1600.0)));
  }
}

TEST_CASE("vertical loads") {
  VehicleParams vp = base_vehicle();
  SUBCASE("symmetric vehicle at rest") {
    vp.lr = vp.l / 2.0;
    const auto z = vertical_loads(vp, 0.0, 0.0);
    CHECK(z.front == doctest::Approx(vp.m * kGravity / 2.0));
    CHECK(z.rear == doctest::Approx(vp.m * kGravity / 2.0));
  }
  SUBCASE("acceleration transfers load rearwards") {
    const auto z = vertical_loads(vp, 10.0, 0.0);
    // 800*9.81*1.4/2.9 - 800*10*0.3/2.9 recomputed independently.
    const double expected = 800.0 * 9.81 * 1.4 / 2.9 - 800.0 * 10.0 * 0.3 / 2.9;
    CHECK(z.front == doctest::Approx(expected).epsilon(1e-12));
    CHECK(z.front == doctest::Approx(2961.103).epsilon(1e-6));
  }
  SUBCASE("load sum is conserved") {
    vp.c_lift_f = 0.4;
    vp.c_lift_r = 0.6;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ax(-12.0, 8.0), vx(0.0, 80.0);
    for (int i = 0; i < 1000; ++i) {
      const double a = ax(rng), v = vx(rng);
      const auto z = vertical_loads(vp, a, v);
      const double total = vp.m * kGravity + (vp.c_lift_f + vp.c_lift_r) * v * v;
      CHECK(close_ulps(z.front + z.rear, total, total));
    }
  }
  SUBCASE("non-physical acceleration raises") {
    try {
      vertical_loads(vp, 100.0, 0.0);
      FAIL("expected NonPositiveLoad");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonPositiveLoad);
    }
  }
}

TEST_CASE("longitudinal split: rear-wheel drive") {
  auto s = split_longitudinal(5000.0, 3000.0, 5000.0);
  CHECK(s.front == 0.0);
  CHECK(s.rear == 5000.0);
  s = split_longitudinal(-4000.0, 4000.0, 4000.0);
  CHECK(s.front == -2000.0);
  CHECK(s.rear == -2000.0);
  s = split_longitudinal(-3000.0, 3600.0, 5400.0);
  CHECK(s.front == doctest::Approx(-1200.0));
  CHECK(s.rear == doctest::Approx(-1800.0));
}

TEST_CASE("limited-slip differential torque") {
  VehicleParams vp = base_vehicle();
  vp.lsd = {50.0, 0.2, 0.3};
  vp.engine_brake_torque_max = 400.0;
  const double r = 0.3;
  SUBCASE("no speed difference") { CHECK(lsd_torque(vp, 2000.0, r, 100.0, 100.0) == 0.0); }
  SUBCASE("drive ramp opposes the faster right wheel") {
    // T_input = 200 N m: locking 50 + 0.3*200 = 110 < 200.
    CHECK(lsd_torque(vp, 200.0 / r, r, 100.0, 101.0) == doctest::Approx(-110.0));
    CHECK(lsd_torque(vp, 200.0 / r, r, 101.0, 100.0) == doctest::Approx(110.0));
  }
  SUBCASE("engine braking input is clipped before the coast ramp") {
    // -10000 N m clipped to -400: locking 50 + 0.2*400 = 130.
    CHECK(lsd_torque(vp, -10000.0 / r, r, 100.0, 101.0) == doctest::Approx(-130.0));
  }
  SUBCASE("transfer never exceeds the input torque") {
    vp.lsd.preload = 500.0;
    CHECK(lsd_torque(vp, 100.0 / r, r, 100.0, 101.0) == doctest::Approx(-100.0));
  }
}

TEST_CASE("lateral axle forces") {
  VehicleParams vp = base_vehicle();
  auto f = lateral_axle_forces(vp, 10.0, 0.0, 0.0);
  CHECK(f.front == doctest::Approx(3862.0690).epsilon(1e-8));
  CHECK(f.rear == doctest::Approx(4137.9310).epsilon(1e-8));
  f = lateral_axle_forces(vp, 0.0, 0.0, 0.0);
  CHECK(f.front == 0.0);
  CHECK(f.rear == 0.0);

  SUBCASE("yaw balance about the centre of gravity") {
    // lf*Fy_f - lr*Fy_r must equal Izz*yaw_accel (without differential torque).
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-15.0, 15.0);
    for (int i = 0; i < 100; ++i) {
      const double ay = u(rng), yaw_acc = u(rng);
      const auto s = lateral_axle_forces(vp, ay, yaw_acc, 0.0);
      CHECK(vp.lf() * s.front - vp.lr * s.rear == doctest::Approx(vp.izz * yaw_acc).epsilon(1e-9));
      CHECK(close_ulps(s.front + s.rear, vp.m * ay, vp.m * std::abs(ay)));
    }
  }
}

TEST_CASE("front tire frame rotation") {
  CHECK(front_tire_frame(1234.5, -300.0, 0.0) == 1234.5);
  CHECK(front_tire_frame(1000.0, -500.0, 0.1) == doctest::Approx(1055.18825).epsilon(1e-8));
  CHECK(front_tire_frame(1000.0, 0.0, 0.3) == doctest::Approx(1000.0 / std::cos(0.3)));
  try {
    front_tire_frame(1.0, 0.0, std::numbers::pi / 2.0);
    FAIL("expected SteeringOutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SteeringOutOfRange);
  }
  CHECK_THROWS_AS(front_tire_frame(1.0, 0.0, -2.0), Error);
}

TEST_CASE("dynamic radius") {
  const TireGeometry t{0.3, 1e-7, 200000.0};
  auto r = dynamic_radius(t, 0.0, 0.0, 0.0);
  CHECK(r.r_dyn == 0.3);
  r = dynamic_radius(t, 4000.0, 140.0, 160.0);
  CHECK(r.r_0 == doctest::Approx(0.30225).epsilon(1e-12));
  CHECK(r.r_s == doctest::Approx(0.29).epsilon(1e-12));
  CHECK(r.r_dyn == doctest::Approx(0.2981666667).epsilon(1e-9));
  double prev = 0.0;
  for (double w = 0.0; w < 300.0; w += 10.0) {
    const double v = dynamic_radius(t, 3000.0, w, w).r_dyn;
    CHECK(v > prev);
    prev = v;
  }
  prev = 1.0;
  for (double fz = 0.0; fz < 8000.0; fz += 500.0) {
    const double v = dynamic_radius(t, fz, 100.0, 100.0).r_dyn;
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("axle slip") {
  const VehicleParams vp = base_vehicle();
  MotionState m{20.0, 0.0, 0.0, 0.0};
  const double r = 0.3;
  SUBCASE("free rolling") {
    const WheelSpeeds w{20.0 / r, 20.0 / r, 20.0 / r, 20.0 / r};
    const auto s = axle_slip(vp, m, w, r, r);
    CHECK(s.lambda_f == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.lambda_r == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.alpha_f == 0.0);
    CHECK(s.alpha_r == 0.0);
  }
  SUBCASE("10 percent drive slip") {
    const WheelSpeeds w{20.0 / r, 20.0 / r, 22.0 / r, 22.0 / r};
    CHECK(axle_slip(vp, m, w, r, r).lambda_r == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("slip angles from rigid-body kinematics") {
    m = {25.0, 0.8, 0.3, 0.05};
    const WheelSpeeds w{80.0, 80.0, 80.0, 80.0};
    const auto s = axle_slip(vp, m, w, r, r);
    // Independent route: steer minus the velocity direction at each axle.
    CHECK(s.alpha_f == doctest::Approx(0.05 - std::atan2(0.8 + 0.3 * vp.lf(), 25.0)).epsilon(1e-12));
    CHECK(s.alpha_r == doctest::Approx(-std::atan2(0.8 - 0.3 * vp.lr, 25.0)).epsilon(1e-12));
  }
  SUBCASE("mirror symmetry") {
    const WheelSpeeds w{70.0, 71.0, 72.0, 73.0};
    const MotionState a{22.0, 0.5, 0.2, 0.04};
    const MotionState b{22.0, -0.5, -0.2, -0.04};
    const auto sa = axle_slip(vp, a, w, r, r);
    const auto sb = axle_slip(vp, b, w, r, r);
    CHECK(sa.alpha_f == doctest::Approx(-sb.alpha_f).epsilon(1e-14));
    CHECK(sa.alpha_r == doctest::Approx(-sb.alpha_r).epsilon(1e-14));
    CHECK(sa.lambda_f == doctest::Approx(sb.lambda_f).epsilon(1e-14));
    CHECK(sa.lambda_r == doctest::Approx(sb.lambda_r).epsilon(1e-14));
  }
  SUBCASE("low speed raises") {
    m.vx = 2.0;
    try {
      axle_slip(vp, m, {}, r, r);
      FAIL("expected LowSpeed");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::LowSpeed);
    }
  }
}

TEST_CASE("processed frames keep force balance") {
  VehicleParams vp = base_vehicle();
  vp.c_drag = 0.9;
  vp.c_lift_f = 0.6;
  vp.c_lift_r = 0.8;
  vp.f_roll = 0.015;
  vp.lsd = {40.0, 0.25, 0.35};
  vp.engine_brake_torque_max = 300.0;
  vp.driveline_ratio = 3.5;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ax(-10.0, 6.0), ay(-15.0, 15.0), yaw(-3.0, 3.0),
      vx(5.0, 70.0), small(-0.5, 0.5), steer(-0.2, 0.2);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    FrameInput in;
    in.ax = ax(rng);
    in.ay = ay(rng);
    in.yaw_accel = yaw(rng);
    in.motion = {vx(rng), small(rng), small(rng), steer(rng)};
    const double w = in.motion.vx / 0.3;
    in.wheels = {w * (1 + 0.05 * small(rng)), w * (1 + 0.05 * small(rng)),
                 w * (1 + 0.1 * small(rng)), w * (1 + 0.1 * small(rng))};
    FrameResult r;
    try {
      r = process_frame(vp, in);
    } catch (const Error&) {
      continue;
    }
    ++checked;
    const auto& f = r.forces;
    // Rounding is relative to the largest operand, not to the sum.
    CHECK(close_ulps(f.Fx_f + f.Fx_r, r.Fx_cog, std::max({std::abs(f.Fx_f), std::abs(f.Fx_r), std::abs(r.Fx_cog)})));
    CHECK(close_ulps(f.Fy_f + f.Fy_r, vp.m * in.ay,
                     std::max({std::abs(f.Fy_f), std::abs(f.Fy_r), vp.m * std::abs(in.ay)})));
    if (r.Fx_cog > 0.0) CHECK(f.Fx_f == 0.0);
    CHECK(f.Fz_f > 0.0);
    CHECK(f.Fz_r > 0.0);
    CHECK(r.slip.r_dyn_f == doctest::Approx(vp.front_tire.r_i).epsilon(0.1));
  }
  CHECK(checked > 9000);
}

TEST_CASE("vehicle parameter validation") {
  VehicleParams vp = base_vehicle();
  CHECK_NOTHROW(vp.validate());
  vp.lr = 3.0;
  CHECK_THROWS_AS(vp.validate(), Error);
  vp = base_vehicle();
  vp.m = 0.0;
  CHECK_THROWS_AS(vp.validate(), Error);
  vp = base_vehicle();
  vp.rear_tire.c_tire = -1.0;
  CHECK_THROWS_AS(vp.validate(), Error);
}
