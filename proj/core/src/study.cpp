#include "tirefit/study.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <spdlog/spdlog.h>

#include "tirefit/errors.hpp"
#include "tirefit/parallel.hpp"

namespace tirefit {

std::vector<double> default_excitation_levels() {
  return {0.01, 0.02, 0.04, 0.06, 0.08, 0.10, 0.15, 0.20, 0.30, 0.50, 0.75, 1.00};
}

void StudyConfig::validate() const {
  if (excitation_levels.empty()) throw Error(ErrorKind::InvalidArgument, "no excitation levels");
  for (std::size_t i = 0; i < excitation_levels.size(); ++i) {
    const double l = excitation_levels[i];
    if (!(l > 0.0 && l <= 1.0)) {
      throw Error(ErrorKind::InvalidArgument, "excitation levels must lie in (0, 1]");
    }
    if (i > 0 && !(l > excitation_levels[i - 1])) {
      throw Error(ErrorKind::InvalidArgument, "excitation levels must be strictly ascending");
    }
  }
  if (n_points < 1) throw Error(ErrorKind::InvalidArgument, "n_points must be >= 1");
  if (noise_slip < 0.0 || noise_force < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "noise levels must be >= 0");
  }
  if (reference_points < 2 || curve_points < 2) {
    throw Error(ErrorKind::InvalidArgument, "reference and curve grids need >= 2 points");
  }
  bounds.validate();
  if (run_svi) {
    SviConfig s = svi;
    s.bounds = bounds;
    s.validate();
  }
}

AxleDataset generate_synthetic(const TireParams& truth, double level, int n_points,
                               double noise_slip, double noise_force, std::mt19937_64& rng) {
  if (!(level > 0.0 && level <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "excitation level must be in (0, 1]");
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  AxleDataset data;
  data.axle = Axle::Front;
  data.direction = Direction::Longitudinal;
  data.samples.reserve(static_cast<std::size_t>(std::max(n_points, 0)));
  for (int i = 0; i < n_points; ++i) {
    const double x = n_points == 1 ? 0.0 : -level + 2.0 * level * i / (n_points - 1);
    // Draw order is fixed so datasets are reproducible per stream.
    const double e_slip = normal(rng);
    const double e_force = normal(rng);
    const double force = evaluate(truth, x) + noise_force * e_force;
    data.samples.push_back({x + noise_slip * e_slip, force, 1.0});
  }
  return data;
}

double reference_mse(const TireParams& fitted, const TireParams& truth, int points) {
  double acc = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) / (points - 1);
    const double d = evaluate(fitted, x) - evaluate(truth, x);
    acc += d * d;
  }
  return acc / points;
}

namespace {

struct LevelOutput {
  std::vector<StudyRow> rows;
  std::vector<CurvePoint> curves;
};

bool is_highlighted(const StudyConfig& config, double level) {
  return std::any_of(config.highlight_levels.begin(), config.highlight_levels.end(),
                     [&](double h) { return std::abs(h - level) < 1e-12; });
}

void add_curves(const StudyConfig& config, const FitResult& fit, double level,
                std::uint64_t band_seed, std::vector<CurvePoint>& out) {
  const TireParams mean = fit.params();
  std::vector<TireParams> draws;
  if (fit.method == FitMethod::Svi && config.band_draws > 1) {
    std::mt19937_64 rng(band_seed);
    draws = posterior_samples(fit, static_cast<std::size_t>(config.band_draws), rng);
  }
  for (int i = 0; i < config.curve_points; ++i) {
    const double x = static_cast<double>(i) / (config.curve_points - 1);
    const double y = evaluate(mean, x);
    double lo = y, hi = y;
    if (!draws.empty()) {
      double s = 0.0, s2 = 0.0;
      for (const auto& d : draws) {
        const double v = evaluate(d, x);
        s += v;
        s2 += v * v;
      }
      const double n = static_cast<double>(draws.size());
      const double m = s / n;
      const double sd = std::sqrt(std::max(0.0, (s2 - n * m * m) / (n - 1.0)));
      lo = m - 2.0 * sd;
      hi = m + 2.0 * sd;
    }
    out.push_back({level, fit.method, x, evaluate(config.truth, x), y, lo, hi});
  }
}

LevelOutput run_level(const StudyConfig& config, std::size_t index) {
  const double level = config.excitation_levels[index];
  std::mt19937_64 data_rng(derive_seed(config.seed, 4 * index));
  const AxleDataset data = generate_synthetic(config.truth, level, config.n_points,
                                              config.noise_slip, config.noise_force, data_rng);
  LevelOutput out;
  const bool highlight = is_highlighted(config, level);

  auto record = [&](FitMethod method, auto&& fit_fn, std::uint64_t band_seed) {
    StudyRow row;
    row.level = level;
    row.method = method;
    try {
      const FitResult fit = fit_fn();
      row.mean = fit.mean;
      if (method == FitMethod::Svi) row.stddev = fit.stddev();
      row.mse = reference_mse(fit.params(), config.truth, config.reference_points);
      row.sigma_noise = fit.sigma_noise;
      if (highlight) add_curves(config, fit, level, band_seed, out.curves);
    } catch (const Error& e) {
      row.error = std::string(to_string(e.kind())) + ": " + e.what();
      spdlog::warn("level {} {}: {}", level, to_string(method), e.what());
    }
    out.rows.push_back(std::move(row));
  };

  if (config.run_nelder_mead) {
    record(FitMethod::NelderMead, [&] { return fit_nelder_mead(data, config.bounds); }, 0);
  }
  if (config.run_svi) {
    SviConfig svi = config.svi;
    svi.bounds = config.bounds;
    svi.seed = derive_seed(config.seed, 4 * index + 1);
    record(FitMethod::Svi, [&] { return fit_svi(data, svi); }, derive_seed(config.seed, 4 * index + 2));
  }
  return out;
}

}  // namespace

StudyOutput run_study(const StudyConfig& config) {
  config.validate();
  const std::size_t n = config.excitation_levels.size();
  std::vector<LevelOutput> per_level(n);
  parallel_for(n, [&](std::size_t i) { per_level[i] = run_level(config, i); });

  StudyOutput out;
  for (auto& lv : per_level) {
    out.rows.insert(out.rows.end(), lv.rows.begin(), lv.rows.end());
    out.curves.insert(out.curves.end(), lv.curves.begin(), lv.curves.end());
  }
  return out;
}

}  // namespace tirefit
