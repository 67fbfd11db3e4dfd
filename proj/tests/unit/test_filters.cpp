#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "support/oracles.hpp"
#include "tirefit/errors.hpp"
#include "tirefit/filters.hpp"

using namespace tirefit;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("filter spec normalization and validation") {
  const FilterSpec even{FilterKind::SavitzkyGolay, 200, 3, 0.0};
  CHECK(even.normalized().window == 201);
  CHECK(FilterSpec{FilterKind::SavitzkyGolay, 500, 5, 0.0}.normalized().window == 501);
  CHECK(FilterSpec{FilterKind::SavitzkyGolay, 30, 3, 0.0}.normalized().window == 31);
  CHECK_NOTHROW(even.normalized().validate());
  CHECK_THROWS_AS((FilterSpec{FilterKind::SavitzkyGolay, 5, 5, 0.0}.validate()), Error);
  CHECK_THROWS_AS((FilterSpec{FilterKind::MovingAverage, 1, 0, 0.0}.validate()), Error);
  CHECK(filter_kind_from_string(to_string(FilterKind::Gaussian)) == FilterKind::Gaussian);
  CHECK_THROWS_AS(filter_kind_from_string("median"), Error);
}

TEST_CASE("constant series pass through every filter") {
  const std::vector<double> c(300, 2.75);
  for (const FilterSpec& spec : {FilterSpec{FilterKind::MovingAverage, 21, 0, 0.0},
                                 FilterSpec{FilterKind::Gaussian, 31, 0, 4.0},
                                 FilterSpec{FilterKind::SavitzkyGolay, 51, 3, 0.0}}) {
    const auto y = filter_channel(c, spec);
    REQUIRE(y.size() == c.size());
    CHECK(max_abs_diff(y, c) < 1e-12);
  }
}

TEST_CASE("Savitzky-Golay reproduces polynomials up to its order, edges included") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  struct Case { int window, order, n; };
  for (const Case c : {Case{30, 3, 400}, Case{200, 3, 2000}, Case{500, 5, 3000}, Case{11, 2, 11}}) {
    for (int degree = 0; degree <= c.order; ++degree) {
      std::vector<double> coeffs(static_cast<std::size_t>(degree + 1));
      for (auto& v : coeffs) v = coef(rng);
      // Sample on [-1, 1] so every term contributes at order one.
      const double dx = 2.0 / (c.n - 1);
      std::vector<double> series(static_cast<std::size_t>(c.n));
      for (int i = 0; i < c.n; ++i) series[static_cast<std::size_t>(i)] = tirefit::testing::polyval(coeffs, -1.0 + i * dx);
      const auto y = filter_channel(series, {FilterKind::SavitzkyGolay, c.window, c.order, 0.0});
      CHECK(max_abs_diff(y, series) < 1e-9);
    }
  }
}

TEST_CASE("Savitzky-Golay interior matches an independent local least-squares fit") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> s(200);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::sin(0.05 * i) + 0.1 * noise(rng);
  const int window = 21, order = 3, half = window / 2;
  const auto y = filter_channel(s, {FilterKind::SavitzkyGolay, window, order, 0.0});
  for (int centre : {half, 50, 100, 199 - half}) {
    std::vector<double> xs, ys;
    for (int k = -half; k <= half; ++k) {
      xs.push_back(k);
      ys.push_back(s[static_cast<std::size_t>(centre + k)]);
    }
    const auto c = tirefit::testing::polyfit_normal(xs, ys, order);
    CHECK(y[static_cast<std::size_t>(centre)] == doctest::Approx(c[0]).epsilon(1e-9));
  }
  // Edge samples come from the fit over the first full window.
  std::vector<double> xs, ys;
  for (int k = 0; k < window; ++k) {
    xs.push_back(k);
    ys.push_back(s[static_cast<std::size_t>(k)]);
  }
  const auto c = tirefit::testing::polyfit_normal(xs, ys, order);
  CHECK(y[0] == doctest::Approx(c[0]).epsilon(1e-9));
  CHECK(y[3] == doctest::Approx(tirefit::testing::polyval(c, 3.0)).epsilon(1e-9));
}

TEST_CASE("moving average and Gaussian against direct convolution with mirror edges") {
  std::vector<double> s(60);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::cos(0.3 * i) + 0.01 * i * i;
  auto mirror = [&](int i) {
    const int n = static_cast<int>(s.size());
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
    return s[static_cast<std::size_t>(i)];
  };
  const int w = 7, h = 3;
  const auto ma = filter_channel(s, {FilterKind::MovingAverage, w, 0, 0.0});
  const double sigma = 1.5;
  const auto ga = filter_channel(s, {FilterKind::Gaussian, w, 0, sigma});
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    double sum = 0.0, gsum = 0.0, gnorm = 0.0;
    for (int k = -h; k <= h; ++k) {
      sum += mirror(i + k);
      const double wk = std::exp(-0.5 * k * k / (sigma * sigma));
      gsum += wk * mirror(i + k);
      gnorm += wk;
    }
    CHECK(ma[static_cast<std::size_t>(i)] == doctest::Approx(sum / w).epsilon(1e-12));
    CHECK(ga[static_cast<std::size_t>(i)] == doctest::Approx(gsum / gnorm).epsilon(1e-12));
  }
}

TEST_CASE("short series raise") {
  const std::vector<double> s(10, 1.0);
  try {
    filter_channel(s, {FilterKind::SavitzkyGolay, 31, 3, 0.0});
    FAIL("expected SeriesTooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SeriesTooShort);
  }
}

TEST_CASE("Savitzky-Golay derivative") {
  const double dt = 1.0 / 800.0;
  std::vector<double> s(4000), ds(4000);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = i * dt;
    s[i] = 0.3 * std::sin(2.0 * std::numbers::pi * 0.5 * t) + 0.1 * t * t;
    ds[i] = 0.3 * 2.0 * std::numbers::pi * 0.5 * std::cos(2.0 * std::numbers::pi * 0.5 * t) + 0.2 * t;
  }
  const int window = 501, order = 5, half = window / 2;
  const auto d = savgol_derivative(s, window, order, dt);
  REQUIRE(d.size() == s.size());
  // Slope of an independent least-squares polynomial over the same window;
  // edge samples use the first or last full window.
  for (int i : {0, 37, half, 1234, 2000, 3999 - half, 3990, 3999}) {
    const int start = std::clamp(i - half, 0, static_cast<int>(s.size()) - window);
    std::vector<double> x, y;
    for (int k = 0; k < window; ++k) {
      x.push_back(static_cast<double>(start + k - i) / half);
      y.push_back(s[static_cast<std::size_t>(start + k)]);
    }
    const auto c = tirefit::testing::polyfit_normal(x, y, order);
    CHECK(d[static_cast<std::size_t>(i)] == doctest::Approx(c[1] / (half * dt)).epsilon(1e-7));
  }
  // Truncation error of the local fit stays small against the true slope.
  CHECK(max_abs_diff(d, ds) < 5e-3);

  // Exact on a cubic, including the edges.
  std::vector<double> cubic(300), dcubic(300);
  for (std::size_t i = 0; i < cubic.size(); ++i) {
    const double t = i * 0.01;
    cubic[i] = 1.0 - 2.0 * t + 0.5 * t * t * t;
    dcubic[i] = -2.0 + 1.5 * t * t;
  }
  CHECK(max_abs_diff(savgol_derivative(cubic, 31, 3, 0.01), dcubic) < 1e-8);
}
