#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "tirefit/dataset.hpp"
#include "tirefit/nelder_mead.hpp"
#include "tirefit/tire_model.hpp"

namespace tirefit {

enum class FitMethod { NelderMead, Svi };

std::string_view to_string(FitMethod method) noexcept;
FitMethod fit_method_from_string(std::string_view name);

/**
 * Maps an unconstrained vector onto the free coefficients of the bounds box
 * with a per-coordinate sigmoid-affine transform:
 *   theta_j = min_j + (max_j - min_j) * sigmoid(u_j).
 * With a fixed C the free coordinates are (B, D, E).
 */
class BoxBijection {
 public:
  BoxBijection(const ParamBounds& bounds, std::optional<double> fixed_c);

  int dim() const { return static_cast<int>(free_.size()); }
  const std::vector<int>& free_coefficients() const { return free_; }
  const ParamBounds& bounds() const { return bounds_; }
  std::optional<double> fixed_c() const { return fixed_c_; }

  Coefficients forward(const Eigen::VectorXd& u) const;
  Eigen::VectorXd inverse(const Coefficients& c) const;
  // d theta_j / d u_j for each free coordinate.
  Eigen::VectorXd jacobian_diagonal(const Eigen::VectorXd& u) const;
  // log |d theta / d u| plus the log of the uniform prior density on the box,
  // i.e. sum_j log sigmoid(u_j) + log(1 - sigmoid(u_j)).
  double log_prior_density(const Eigen::VectorXd& u) const;

 private:
  ParamBounds bounds_;
  std::optional<double> fixed_c_;
  std::vector<int> free_;
};

// Full-covariance Gaussian over the unconstrained coordinates.
struct Guide {
  Eigen::VectorXd loc;
  Eigen::MatrixXd scale_tril;  ///< lower triangular, positive diagonal
};

struct FitResult {
  FitMethod method = FitMethod::NelderMead;
  Coefficients mean{};                               ///< (B, C, D, E)
  Eigen::Matrix4d covariance = Eigen::Matrix4d::Zero();  ///< constrained space
  double sigma_noise = 0.0;                          ///< force-coefficient units
  std::vector<double> trace;                         ///< per-iteration objective
  ParamBounds bounds;
  double Sh = 0.0;
  double Sv = 0.0;
  std::optional<double> fixed_c;
  std::optional<Guide> guide;  ///< SVI only
  int iterations = 0;
  bool converged = false;

  TireParams params() const { return TireParams::from_coefficients(mean, Sh, Sv); }
  Coefficients stddev() const;
};

struct NelderMeadFitConfig {
  ParamBounds bounds;
  std::optional<TireParams> init;  ///< coefficients clamped to the box
  std::optional<double> fixed_c;
  double Sh = 0.0;
  double Sv = 0.0;
  NelderMeadOptions options;
  double penalty_weight = 1e3;
  int max_restarts = 5;
};

// Weighted mean squared residual of the model against the dataset.
double mean_squared_error(const AxleDataset& dataset, const TireParams& params);

/**
 * Least-squares fit of (B, C, D, E) by the simplex method.
 *
 * The box is enforced by a quadratic penalty on the normalized distance
 * outside it; the reported mean is clamped into the box. The simplex is
 * restarted around the incumbent until a restart no longer improves it, so
 * the trace stays non-increasing. Covariance is zero (point estimate) and
 * sigma_noise is the residual RMS. Throws EmptyDataset.
 */
FitResult fit_nelder_mead(const AxleDataset& dataset, const NelderMeadFitConfig& config);
FitResult fit_nelder_mead(const AxleDataset& dataset, const ParamBounds& bounds,
                          const std::optional<TireParams>& init = std::nullopt);

struct SviConfig {
  int steps = 3000;
  int mc_samples = 8;
  double learning_rate = 0.01;  ///< initial step, cosine-decayed to zero
  std::uint64_t seed = 0;
  ParamBounds bounds;
  std::optional<double> fixed_c;
  int moment_samples = 10000;  ///< guide draws used for the reported moments
  bool record_trace = true;

  // Throws InvalidArgument.
  void validate() const;
};

// Optimized variational state: guide plus observation noise log(sigma).
struct GuideState {
  Eigen::VectorXd loc;
  Eigen::VectorXd log_diag;  ///< log of the Cholesky diagonal
  Eigen::VectorXd offdiag;   ///< strictly lower part, row-major
  double log_sigma = 0.0;

  int dim() const { return static_cast<int>(loc.size()); }
  Eigen::MatrixXd scale_tril() const;
  Guide guide() const { return {loc, scale_tril()}; }

  // Flat layout: loc, log_diag, offdiag, log_sigma.
  Eigen::VectorXd pack() const;
  static GuideState unpack(const Eigen::VectorXd& flat, int dim);
  static int packed_size(int dim) { return 2 * dim + dim * (dim - 1) / 2 + 1; }
};

struct ElboModel {
  const AxleDataset& dataset;
  BoxBijection bijection;
  double Sh = 0.0;
  double Sv = 0.0;
};

/**
 * Single-draw reparameterized ELBO for the standard normal draw eps:
 *   log p(x | theta(u)) + log p(u) + H[q],  u = loc + L eps,
 * where p(u) is the uniform box prior pushed to u-space (Jacobian included)
 * and H[q] is the closed-form Gaussian entropy. Writes the gradient with
 * respect to the packed GuideState when grad is non-null.
 */
double elbo_sample(const ElboModel& model, const GuideState& state, const Eigen::VectorXd& eps,
                   Eigen::VectorXd* grad = nullptr);

// Monte-Carlo ELBO estimate over mc_samples draws.
double elbo(const ElboModel& model, const GuideState& state, int mc_samples, std::mt19937_64& rng);

/**
 * Stochastic variational inference with a full-covariance Gaussian guide.
 *
 * Guide mean starts at the box midpoint with a 10 % of box width standard
 * deviation; log(sigma) starts at the residual RMS of a preliminary simplex
 * fit. Adaptive-moment gradient ascent with cosine-decayed step size. The
 * reported mean and covariance are sample moments of moment_samples guide
 * draws in constrained space. Deterministic for a given seed.
 * Throws EmptyDataset, NonFiniteObjective.
 */
FitResult fit_svi(const AxleDataset& dataset, const SviConfig& config, double Sh = 0.0,
                  double Sv = 0.0);

// Draws from the fitted guide, each inside the bounds box. Throws NotAPosterior
// for simplex results.
std::vector<TireParams> posterior_samples(const FitResult& result, std::size_t n,
                                          std::mt19937_64& rng);

}  // namespace tirefit
