#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tirefit/dataset.hpp"
#include "tirefit/fitting.hpp"
#include "tirefit/tire_model.hpp"

namespace tirefit {

std::vector<double> default_excitation_levels();

struct StudyConfig {
  TireParams truth{15.0, 2.0, 1.5, 0.8, 0.0, 0.0};
  std::vector<double> excitation_levels = default_excitation_levels();
  int n_points = 500;
  double noise_slip = 0.002;
  double noise_force = 0.02;
  std::uint64_t seed = 0;
  SviConfig svi;  ///< bounds and seed are overridden per level
  ParamBounds bounds;
  std::vector<double> highlight_levels = {0.02, 0.08, 0.75};
  int reference_points = 1001;  ///< dense [0, 1] grid for curve MSE
  int curve_points = 201;
  int band_draws = 200;         ///< posterior draws per SVI band
  bool run_nelder_mead = true;
  bool run_svi = true;

  // Throws InvalidArgument: levels strictly ascending in (0, 1], n_points >= 1.
  void validate() const;
};

/**
 * n_points excitations evenly spaced on [-level, level]. Forces are
 * evaluated at the true excitation and corrupted with noise_force; the
 * recorded excitation gets noise_slip (errors-in-variables).
 */
AxleDataset generate_synthetic(const TireParams& truth, double level, int n_points,
                               double noise_slip, double noise_force, std::mt19937_64& rng);

struct StudyRow {
  double level = 0.0;
  FitMethod method = FitMethod::NelderMead;
  Coefficients mean{};
  std::optional<Coefficients> stddev;  ///< SVI only
  double mse = 0.0;                    ///< against the noiseless truth on [0, 1]
  double sigma_noise = 0.0;
  std::string error;                   ///< non-empty when the fit failed

  bool failed() const { return !error.empty(); }
};

struct CurvePoint {
  double level;
  FitMethod method;
  double slip;
  double truth;
  double fit;
  double lower;  ///< mean curve - 2 std of posterior curves (SVI), else = fit
  double upper;
};

struct StudyOutput {
  std::vector<StudyRow> rows;  ///< ordered by level, then simplex before SVI
  std::vector<CurvePoint> curves;
};

// Curve MSE on `points` evenly spaced excitations in [0, 1].
double reference_mse(const TireParams& fitted, const TireParams& truth, int points = 1001);

// Fits every level with both methods. Level i uses seeds derived from
// (seed, i), so rows do not depend on scheduling. Fitter errors are recorded
// on the row and the remaining levels continue.
StudyOutput run_study(const StudyConfig& config);

}  // namespace tirefit
