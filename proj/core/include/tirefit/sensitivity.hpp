#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "tirefit/tire_model.hpp"

namespace tirefit {

// Independent uniform marginals over (B, C, D, E).
struct ParameterBox {
  std::array<Interval, kNumCoefficients> ranges{};

  // center_i * (1 -+ fraction) for every coefficient whose mask entry is set;
  // the rest collapse to the center value.
  static ParameterBox around(const Coefficients& center, double fraction,
                             std::array<bool, kNumCoefficients> vary = {true, true, true, true});
};

using ScalarModel = std::function<double(const Coefficients&)>;

struct SaltelliEstimate {
  double variance = 0.0;  ///< V(y)
  double mean = 0.0;
  Coefficients first_order{};                                    ///< V_i / V
  std::array<std::array<double, kNumCoefficients>, kNumCoefficients> second_order{};  ///< V_ij / V, symmetric, zero diagonal
  Coefficients total{};  ///< (V_i + sum_{j != i} V_ij) / V
  bool zero_variance = false;
};

inline constexpr double kZeroVarianceThreshold = 1e-14;

/**
 * Saltelli paired-matrix estimator with n base samples (n * (2p + 2) model
 * calls). First order uses the Saltelli (2010) form
 * V_i = mean(f(B) (f(A_B^i) - f(A))); second order the closed-index form
 * V_ij^c = mean(f(B_A^i) f(A_B^j) - f(A) f(B)) minus both first-order terms.
 * Outputs are centered on their sample mean first. Interactions above
 * second order are not estimated. When V(y) < 1e-14 all indices are 0 and
 * zero_variance is set.
 */
SaltelliEstimate saltelli_indices(const ScalarModel& model, const ParameterBox& box,
                                  std::size_t n_samples, std::mt19937_64& rng);

struct SobolResult {
  std::vector<double> slip_grid;
  std::array<std::vector<double>, kNumCoefficients> total;        ///< S_T per coefficient
  std::array<std::vector<double>, kNumCoefficients> first_order;
  std::vector<bool> zero_variance;
  std::vector<double> variance;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  double perturbation = 0.1;
};

inline constexpr std::size_t kMinSobolSamples = 1024;

// 200 log-spaced points in [1e-3, 1] by default.
std::vector<double> default_slip_grid(std::size_t points = 200, double lo = 1e-3, double hi = 1.0);

/**
 * Total Sobol indices of the Magic Formula output (Sh = Sv = 0) at each slip
 * value for uniform +-perturbation variation of B, C, D, E around center.
 * Grid point g draws from its own stream seeded with (seed, g), so results
 * do not depend on scheduling. Requires perturbation in (0, 0.5] and
 * n_samples >= 1024.
 */
SobolResult sobol_indices(const TireParams& center, double perturbation,
                          const std::vector<double>& slip_grid, std::size_t n_samples,
                          std::uint64_t seed);

// Plain Monte-Carlo variance of the model output over the box at one slip.
double total_variance(const ParameterBox& box, double slip, std::size_t n_samples,
                      std::uint64_t seed);
double total_variance(const TireParams& center, double perturbation, double slip,
                      std::size_t n_samples, std::uint64_t seed);

}  // namespace tirefit
