#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "tirefit/errors.hpp"
#include "tirefit/study.hpp"

using namespace tirefit;

namespace {

const TireParams kReference{15.0, 2.0, 1.5, 0.8, 0.0, 0.0};

StudyConfig quick(std::vector<double> levels) {
  StudyConfig c;
  c.excitation_levels = std::move(levels);
  c.n_points = 200;
  c.svi.steps = 600;
  c.svi.moment_samples = 2000;
  c.band_draws = 50;
  c.curve_points = 21;
  return c;
}

}  // namespace

TEST_CASE("default levels") {
  const auto l = default_excitation_levels();
  REQUIRE(l.size() == 12);
  CHECK(l.front() == 0.01);
  CHECK(l.back() == 1.0);
}

TEST_CASE("synthetic data") {
  SUBCASE("noise free samples lie on the curve") {
    std::mt19937_64 rng(1);
    const auto d = generate_synthetic(kReference, 0.3, 101, 0.0, 0.0, rng);
    REQUIRE(d.size() == 101);
    CHECK(d.samples.front().excitation == doctest::Approx(-0.3));
    CHECK(d.samples.back().excitation == doctest::Approx(0.3));
    CHECK(d.samples[50].excitation == doctest::Approx(0.0));
    for (const auto& s : d.samples) CHECK(s.force_coeff == evaluate(kReference, s.excitation));
  }
  SUBCASE("noise has the requested spread") {
    std::mt19937_64 rng(2);
    const int n = 20001;
    const auto d = generate_synthetic(kReference, 0.5, n, 0.002, 0.02, rng);
    std::vector<double> slip_err, force_err;
    for (int i = 0; i < n; ++i) {
      const double x = -0.5 + 1.0 * i / (n - 1);
      slip_err.push_back(d.samples[i].excitation - x);
      force_err.push_back(d.samples[i].force_coeff - evaluate(kReference, x));
    }
    CHECK(tirefit::testing::stddev(slip_err) == doctest::Approx(0.002).epsilon(0.03));
    CHECK(tirefit::testing::stddev(force_err) == doctest::Approx(0.02).epsilon(0.03));
    CHECK(std::abs(tirefit::testing::mean(force_err)) < 4.0 * 0.02 / std::sqrt(n));
  }
  SUBCASE("level must be in (0, 1]") {
    std::mt19937_64 rng(0);
    CHECK_THROWS_AS(generate_synthetic(kReference, 0.0, 10, 0.0, 0.0, rng), Error);
    CHECK_THROWS_AS(generate_synthetic(kReference, 1.5, 10, 0.0, 0.0, rng), Error);
  }
}

TEST_CASE("reference curve error") {
  CHECK(reference_mse(kReference, kReference) == 0.0);
  TireParams lifted = kReference;
  lifted.Sv = 0.1;
  CHECK(reference_mse(lifted, kReference) == doctest::Approx(0.01));
  // Against a zero curve the error is the mean square of the truth on [0, 1].
  const TireParams flat{10.0, 1.5, 0.0, 0.0, 0.0, 0.0};
  const double expected = tirefit::testing::simpson(
      [](double x) { return std::pow(evaluate(kReference, x), 2); }, 0.0, 1.0, 4000);
  CHECK(reference_mse(flat, kReference, 100001) == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("study config validation") {
  StudyConfig c;
  CHECK_NOTHROW(c.validate());
  c.excitation_levels = {0.1, 0.05};
  CHECK_THROWS_AS(c.validate(), Error);
  c.excitation_levels = {0.0, 0.5};
  CHECK_THROWS_AS(c.validate(), Error);
  c.excitation_levels = {0.5, 1.2};
  CHECK_THROWS_AS(c.validate(), Error);
  c = StudyConfig{};
  c.n_points = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = StudyConfig{};
  c.svi.steps = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("single level study") {
  const auto out = run_study(quick({0.75}));
  REQUIRE(out.rows.size() == 2);
  const auto& nm = out.rows[0];
  const auto& svi = out.rows[1];
  CHECK(nm.method == FitMethod::NelderMead);
  CHECK(svi.method == FitMethod::Svi);
  CHECK_FALSE(nm.failed());
  CHECK_FALSE(svi.failed());
  CHECK_FALSE(nm.stddev.has_value());
  REQUIRE(svi.stddev.has_value());
  CHECK(nm.mean[kD] == doctest::Approx(1.5).epsilon(0.05));
  CHECK(svi.mean[kD] == doctest::Approx(1.5).epsilon(0.05));
  CHECK(nm.mse < 1e-3);
  CHECK(nm.mse == doctest::Approx(reference_mse(TireParams::from_coefficients(nm.mean), kReference)));

  SUBCASE("highlighted level produces curves") {
    REQUIRE(out.curves.size() == 42);
    for (const auto& p : out.curves) {
      CHECK(p.level == 0.75);
      CHECK(p.truth == evaluate(kReference, p.slip));
      CHECK(p.lower <= p.upper);
      if (p.method == FitMethod::NelderMead) {
        CHECK(p.lower == p.fit);
        CHECK(p.upper == p.fit);
      }
    }
  }
  SUBCASE("repeat is identical") {
    const auto again = run_study(quick({0.75}));
    CHECK(again.rows[1].mean == svi.mean);
    CHECK(again.rows[1].stddev == svi.stddev);
    CHECK(again.rows[0].mean == nm.mean);
  }
}

TEST_CASE("levels without highlight have no curves; method toggles") {
  auto c = quick({0.3, 0.5});
  c.run_svi = false;
  const auto out = run_study(c);
  REQUIRE(out.rows.size() == 2);
  CHECK(out.rows[0].level == 0.3);
  CHECK(out.rows[1].level == 0.5);
  CHECK(out.curves.empty());
}

TEST_CASE("a failing fit is recorded and the sweep continues") {
  auto c = quick({0.3, 0.75});
  c.svi.learning_rate = 1e6;
  c.svi.steps = 20;
  const auto out = run_study(c);
  REQUIRE(out.rows.size() == 4);
  CHECK_FALSE(out.rows[0].failed());
  CHECK(out.rows[1].failed());
  CHECK(out.rows[1].error.find("NonFiniteObjective") != std::string::npos);
  CHECK_FALSE(out.rows[2].failed());
  CHECK(out.rows[3].failed());
}
