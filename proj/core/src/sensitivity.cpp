#include "tirefit/sensitivity.hpp"

#include <cmath>
#include <string>

#include "tirefit/errors.hpp"
#include "tirefit/parallel.hpp"

namespace tirefit {

ParameterBox ParameterBox::around(const Coefficients& center, double fraction,
                                  std::array<bool, kNumCoefficients> vary) {
  ParameterBox box;
  for (int i = 0; i < kNumCoefficients; ++i) {
    const double half = vary[static_cast<std::size_t>(i)] ? std::abs(center[i]) * fraction : 0.0;
    box.ranges[static_cast<std::size_t>(i)] = {center[i] - half, center[i] + half};
  }
  return box;
}

namespace {

using Matrix = std::vector<Coefficients>;

Matrix draw(const ParameterBox& box, std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix m(n);
  for (auto& row : m) {
    for (int i = 0; i < kNumCoefficients; ++i) {
      const auto& r = box.ranges[static_cast<std::size_t>(i)];
      row[i] = r.min + r.width() * unit(rng);
    }
  }
  return m;
}

}  // namespace

SaltelliEstimate saltelli_indices(const ScalarModel& model, const ParameterBox& box,
                                  std::size_t n, std::mt19937_64& rng) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "need at least two base samples");
  constexpr int p = kNumCoefficients;
  const Matrix a = draw(box, n, rng);
  const Matrix b = draw(box, n, rng);

  std::vector<double> fa(n), fb(n);
  std::array<std::vector<double>, p> f_ab;  // A with column i from B
  std::array<std::vector<double>, p> f_ba;  // B with column i from A
  for (std::size_t k = 0; k < n; ++k) {
    fa[k] = model(a[k]);
    fb[k] = model(b[k]);
  }
  for (int i = 0; i < p; ++i) {
    auto& ab = f_ab[static_cast<std::size_t>(i)];
    auto& ba = f_ba[static_cast<std::size_t>(i)];
    ab.resize(n);
    ba.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      Coefficients row = a[k];
      row[i] = b[k][i];
      ab[k] = model(row);
      row = b[k];
      row[i] = a[k][i];
      ba[k] = model(row);
    }
  }

  SaltelliEstimate est;
  const double dn = static_cast<double>(n);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) sum += fa[k] + fb[k];
  est.mean = sum / (2.0 * dn);
  double ss = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ss += (fa[k] - est.mean) * (fa[k] - est.mean) + (fb[k] - est.mean) * (fb[k] - est.mean);
  }
  est.variance = ss / (2.0 * dn - 1.0);
  if (!(est.variance >= kZeroVarianceThreshold)) {
    est.zero_variance = true;
    return est;
  }
  // The index expectations are invariant to an output offset, their sampling
  // variance is not: centering removes the mean^2 terms from every product.
  for (auto* v : {&fa, &fb}) {
    for (double& y : *v) y -= est.mean;
  }
  for (int i = 0; i < p; ++i) {
    for (double& y : f_ab[static_cast<std::size_t>(i)]) y -= est.mean;
    for (double& y : f_ba[static_cast<std::size_t>(i)]) y -= est.mean;
  }

  std::array<double, p> v_first{};
  for (int i = 0; i < p; ++i) {
    const auto& ab = f_ab[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += fb[k] * (ab[k] - fa[k]);
    v_first[static_cast<std::size_t>(i)] = acc / dn;
    est.first_order[i] = v_first[static_cast<std::size_t>(i)] / est.variance;
  }
  double fab_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) fab_mean += fa[k] * fb[k];
  fab_mean /= dn;
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      const auto& ba = f_ba[static_cast<std::size_t>(i)];
      const auto& ab = f_ab[static_cast<std::size_t>(j)];
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += ba[k] * ab[k];
      const double v_closed = acc / dn - fab_mean;
      const double v_ij = v_closed - v_first[static_cast<std::size_t>(i)] -
                          v_first[static_cast<std::size_t>(j)];
      est.second_order[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v_ij / est.variance;
      est.second_order[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v_ij / est.variance;
    }
  }
  for (int i = 0; i < p; ++i) {
    double t = est.first_order[i];
    for (int j = 0; j < p; ++j) {
      if (j != i) t += est.second_order[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    est.total[i] = t;
  }
  return est;
}

std::vector<double> default_slip_grid(std::size_t points, double lo, double hi) {
  if (points == 0) return {};
  if (!(lo > 0.0) || !(hi > lo)) throw Error(ErrorKind::InvalidArgument, "need 0 < lo < hi");
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t k = 0; k < points; ++k) grid[k] = lo * std::exp(step * static_cast<double>(k));
  grid.back() = hi;
  return grid;
}

namespace {

void check_sobol_args(double perturbation, std::size_t n_samples) {
  if (!(perturbation > 0.0 && perturbation <= 0.5)) {
    throw Error(ErrorKind::InvalidArgument, "perturbation must be in (0, 0.5]");
  }
  if (n_samples < kMinSobolSamples) {
    throw Error(ErrorKind::InvalidArgument,
                "need at least " + std::to_string(kMinSobolSamples) + " base samples");
  }
}

}  // namespace

SobolResult sobol_indices(const TireParams& center, double perturbation,
                          const std::vector<double>& slip_grid, std::size_t n_samples,
                          std::uint64_t seed) {
  check_sobol_args(perturbation, n_samples);
  const ParameterBox box = ParameterBox::around(center.coefficients(), perturbation);
  const std::size_t g = slip_grid.size();

  SobolResult out;
  out.slip_grid = slip_grid;
  out.n_samples = n_samples;
  out.seed = seed;
  out.perturbation = perturbation;
  for (int i = 0; i < kNumCoefficients; ++i) {
    out.total[static_cast<std::size_t>(i)].assign(g, 0.0);
    out.first_order[static_cast<std::size_t>(i)].assign(g, 0.0);
  }
  out.variance.assign(g, 0.0);
  std::vector<char> zero(g, 0);

  parallel_for(g, [&](std::size_t k) {
    const double slip = slip_grid[k];
    const ScalarModel model = [slip](const Coefficients& c) {
      return evaluate(TireParams::from_coefficients(c), slip);
    };
    std::mt19937_64 rng(derive_seed(seed, k));
    const auto est = saltelli_indices(model, box, n_samples, rng);
    out.variance[k] = est.variance;
    zero[k] = est.zero_variance ? 1 : 0;
    for (int i = 0; i < kNumCoefficients; ++i) {
      out.total[static_cast<std::size_t>(i)][k] = est.total[i];
      out.first_order[static_cast<std::size_t>(i)][k] = est.first_order[i];
    }
  });
  out.zero_variance.assign(zero.begin(), zero.end());
  return out;
}

double total_variance(const ParameterBox& box, double slip, std::size_t n_samples,
                      std::uint64_t seed) {
  if (n_samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  std::mt19937_64 rng(seed);
  const Matrix m = draw(box, n_samples, rng);
  // Welford keeps the exact-zero case exact.
  double mean = 0.0, m2 = 0.0;
  std::size_t count = 0;
  for (const auto& row : m) {
    const double y = evaluate(TireParams::from_coefficients(row), slip);
    ++count;
    const double d = y - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (y - mean);
  }
  return m2 / static_cast<double>(count - 1);
}

double total_variance(const TireParams& center, double perturbation, double slip,
                      std::size_t n_samples, std::uint64_t seed) {
  check_sobol_args(perturbation, n_samples);
  return total_variance(ParameterBox::around(center.coefficients(), perturbation), slip, n_samples,
                        seed);
}

}  // namespace tirefit
