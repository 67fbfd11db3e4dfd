#include "tirefit/fitting.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "tirefit/errors.hpp"

namespace tirefit {

std::string_view to_string(FitMethod method) noexcept {
  return method == FitMethod::Svi ? "svi" : "nelder-mead";
}

FitMethod fit_method_from_string(std::string_view name) {
  if (name == "svi") return FitMethod::Svi;
  if (name == "nelder-mead") return FitMethod::NelderMead;
  throw Error(ErrorKind::Schema, "unknown fit method '" + std::string(name) + "'");
}

Coefficients FitResult::stddev() const {
  Coefficients out{};
  for (int i = 0; i < kNumCoefficients; ++i) out[i] = std::sqrt(std::max(0.0, covariance(i, i)));
  return out;
}

namespace {

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

// log(1 + exp(u)) without overflow.
double softplus(double u) { return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u)); }

void require_non_empty(const AxleDataset& dataset) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "dataset has no samples");
}

void check_fixed_c(const ParamBounds& bounds, const std::optional<double>& fixed_c) {
  if (fixed_c && !std::isfinite(*fixed_c)) {
    throw Error(ErrorKind::InvalidArgument, "fixed C must be finite");
  }
  bounds.validate();
}

std::vector<int> free_coefficient_list(const std::optional<double>& fixed_c) {
  if (fixed_c) return {kB, kD, kE};
  return {kB, kC, kD, kE};
}

}  // namespace

// ---------------------------------------------------------------------------
// BoxBijection

BoxBijection::BoxBijection(const ParamBounds& bounds, std::optional<double> fixed_c)
    : bounds_(bounds), fixed_c_(fixed_c), free_(free_coefficient_list(fixed_c)) {
  check_fixed_c(bounds_, fixed_c_);
}

Coefficients BoxBijection::forward(const Eigen::VectorXd& u) const {
  Coefficients c{};
  c[kC] = fixed_c_.value_or(0.0);
  for (int j = 0; j < dim(); ++j) {
    const auto& iv = bounds_[free_[static_cast<std::size_t>(j)]];
    c[free_[static_cast<std::size_t>(j)]] = iv.min + iv.width() * sigmoid(u(j));
  }
  return c;
}

Eigen::VectorXd BoxBijection::inverse(const Coefficients& c) const {
  Eigen::VectorXd u(dim());
  for (int j = 0; j < dim(); ++j) {
    const int idx = free_[static_cast<std::size_t>(j)];
    const auto& iv = bounds_[idx];
    const double s = std::clamp((c[idx] - iv.min) / iv.width(), 1e-12, 1.0 - 1e-12);
    u(j) = std::log(s) - std::log1p(-s);
  }
  return u;
}

Eigen::VectorXd BoxBijection::jacobian_diagonal(const Eigen::VectorXd& u) const {
  Eigen::VectorXd d(dim());
  for (int j = 0; j < dim(); ++j) {
    const double s = sigmoid(u(j));
    d(j) = bounds_[free_[static_cast<std::size_t>(j)]].width() * s * (1.0 - s);
  }
  return d;
}

double BoxBijection::log_prior_density(const Eigen::VectorXd& u) const {
  double total = 0.0;
  for (int j = 0; j < dim(); ++j) total -= softplus(-u(j)) + softplus(u(j));
  return total;
}

// ---------------------------------------------------------------------------
// Nelder-Mead

double mean_squared_error(const AxleDataset& dataset, const TireParams& params) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& s : dataset.samples) {
    const double r = s.force_coeff - evaluate(params, s.excitation);
    num += s.weight * r * r;
    den += s.weight;
  }
  return den > 0.0 ? num / den : 0.0;
}

FitResult fit_nelder_mead(const AxleDataset& dataset, const ParamBounds& bounds,
                          const std::optional<TireParams>& init) {
  NelderMeadFitConfig config;
  config.bounds = bounds;
  config.init = init;
  return fit_nelder_mead(dataset, config);
}

FitResult fit_nelder_mead(const AxleDataset& dataset, const NelderMeadFitConfig& config) {
  require_non_empty(dataset);
  check_fixed_c(config.bounds, config.fixed_c);
  const auto free = free_coefficient_list(config.fixed_c);
  const auto& bounds = config.bounds;

  Coefficients start = config.init ? bounds.clamp(config.init->coefficients()) : bounds.midpoint();
  if (config.fixed_c) start[kC] = *config.fixed_c;

  auto expand = [&](std::span<const double> x) {
    Coefficients c = start;
    for (std::size_t j = 0; j < free.size(); ++j) c[free[j]] = x[j];
    return c;
  };
  const Objective objective = [&](std::span<const double> x) {
    const Coefficients c = expand(x);
    double penalty = 0.0;
    for (int idx : free) {
      const auto& iv = bounds[idx];
      const double over = std::max(0.0, c[idx] - iv.max) + std::max(0.0, iv.min - c[idx]);
      penalty += (over / iv.width()) * (over / iv.width());
    }
    return mean_squared_error(dataset, TireParams::from_coefficients(c, config.Sh, config.Sv)) +
           config.penalty_weight * penalty;
  };

  std::vector<double> x(free.size());
  std::vector<double> step(free.size());
  for (std::size_t j = 0; j < free.size(); ++j) {
    x[j] = start[free[j]];
    step[j] = 0.1 * bounds[free[j]].width();
  }

  FitResult result;
  result.method = FitMethod::NelderMead;
  result.bounds = bounds;
  result.fixed_c = config.fixed_c;
  result.Sh = config.Sh;
  result.Sv = config.Sv;

  NelderMeadOptions options = config.options;
  double best = objective(x);
  for (int restart = 0; restart <= config.max_restarts; ++restart) {
    options.max_iterations = config.options.max_iterations - result.iterations;
    if (options.max_iterations <= 0) break;
    auto run = minimize_nelder_mead(objective, x, step, options);
    result.iterations += run.iterations;
    result.trace.insert(result.trace.end(), run.trace.begin(), run.trace.end());
    result.converged = run.converged;
    const bool improved = run.value < best - config.options.f_tol;
    if (run.value <= best) {
      best = run.value;
      x = run.x;
    }
    if (!improved) break;
    // Fresh simplex around the incumbent, shrunk with each restart.
    for (auto& s : step) s *= 0.5;
  }

  result.mean = bounds.clamp(expand(x));
  if (config.fixed_c) result.mean[kC] = *config.fixed_c;
  result.sigma_noise = std::sqrt(mean_squared_error(dataset, result.params()));
  return result;
}

// ---------------------------------------------------------------------------
// SVI

void SviConfig::validate() const {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "svi steps must be >= 1");
  if (mc_samples < 1) throw Error(ErrorKind::InvalidArgument, "svi mc_samples must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidArgument, "learning_rate must be > 0");
  if (moment_samples < 2) throw Error(ErrorKind::InvalidArgument, "moment_samples must be >= 2");
  check_fixed_c(bounds, fixed_c);
}

Eigen::MatrixXd GuideState::scale_tril() const {
  const int k = dim();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(k, k);
  int idx = 0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < a; ++b) L(a, b) = offdiag(idx++);
    L(a, a) = std::exp(log_diag(a));
  }
  return L;
}

Eigen::VectorXd GuideState::pack() const {
  const int k = dim();
  Eigen::VectorXd flat(packed_size(k));
  flat << loc, log_diag, offdiag, log_sigma;
  return flat;
}

GuideState GuideState::unpack(const Eigen::VectorXd& flat, int k) {
  if (flat.size() != packed_size(k)) {
    throw Error(ErrorKind::InvalidArgument, "packed guide state has the wrong size");
  }
  GuideState s;
  const int n_off = k * (k - 1) / 2;
  s.loc = flat.segment(0, k);
  s.log_diag = flat.segment(k, k);
  s.offdiag = flat.segment(2 * k, n_off);
  s.log_sigma = flat(2 * k + n_off);
  return s;
}

double elbo_sample(const ElboModel& model, const GuideState& state, const Eigen::VectorXd& eps,
                   Eigen::VectorXd* grad) {
  const int k = state.dim();
  const auto& free = model.bijection.free_coefficients();
  const Eigen::MatrixXd L = state.scale_tril();
  const Eigen::VectorXd u = state.loc + L * eps;
  const Coefficients theta = model.bijection.forward(u);
  const TireParams params = TireParams::from_coefficients(theta, model.Sh, model.Sv);

  const double sigma = std::exp(state.log_sigma);
  const double inv_var = 1.0 / (sigma * sigma);
  const double log_norm = -state.log_sigma - 0.5 * std::log(2.0 * std::numbers::pi);

  double loglik = 0.0;
  double dlog_sigma = 0.0;
  Coefficients dtheta{};
  CoefficientGradient g;
  for (const auto& s : model.dataset.samples) {
    const double r = s.force_coeff - evaluate_with_gradient(params, s.excitation, g);
    const double r2 = r * r * inv_var;
    loglik += s.weight * (log_norm - 0.5 * r2);
    if (grad) {
      const double w = s.weight * r * inv_var;
      dtheta[kB] += w * g.dB;
      dtheta[kC] += w * g.dC;
      dtheta[kD] += w * g.dD;
      dtheta[kE] += w * g.dE;
      dlog_sigma += s.weight * (r2 - 1.0);
    }
  }

  const double entropy = 0.5 * k * (1.0 + std::log(2.0 * std::numbers::pi)) + state.log_diag.sum();
  const double value = loglik + model.bijection.log_prior_density(u) + entropy;

  if (grad) {
    const Eigen::VectorXd jac = model.bijection.jacobian_diagonal(u);
    Eigen::VectorXd g_u(k);
    for (int j = 0; j < k; ++j) {
      g_u(j) = dtheta[free[static_cast<std::size_t>(j)]] * jac(j) + (1.0 - 2.0 * sigmoid(u(j)));
    }
    grad->resize(GuideState::packed_size(k));
    grad->segment(0, k) = g_u;
    int idx = 2 * k;
    for (int a = 0; a < k; ++a) {
      (*grad)(k + a) = g_u(a) * eps(a) * L(a, a) + 1.0;
      for (int b = 0; b < a; ++b) (*grad)(idx++) = g_u(a) * eps(b);
    }
    (*grad)(idx) = dlog_sigma;
  }
  return value;
}

namespace {

Eigen::VectorXd standard_normal(int k, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd eps(k);
  for (int j = 0; j < k; ++j) eps(j) = normal(rng);
  return eps;
}

}  // namespace

double elbo(const ElboModel& model, const GuideState& state, int mc_samples,
            std::mt19937_64& rng) {
  if (mc_samples < 1) throw Error(ErrorKind::InvalidArgument, "mc_samples must be >= 1");
  double total = 0.0;
  for (int m = 0; m < mc_samples; ++m) {
    total += elbo_sample(model, state, standard_normal(state.dim(), rng));
  }
  return total / mc_samples;
}

FitResult fit_svi(const AxleDataset& dataset, const SviConfig& config, double Sh, double Sv) {
  config.validate();
  require_non_empty(dataset);

  NelderMeadFitConfig prelim;
  prelim.bounds = config.bounds;
  prelim.fixed_c = config.fixed_c;
  prelim.Sh = Sh;
  prelim.Sv = Sv;
  const double sigma0 = std::max(fit_nelder_mead(dataset, prelim).sigma_noise, 1e-3);

  const ElboModel model{dataset, BoxBijection(config.bounds, config.fixed_c), Sh, Sv};
  const int k = model.bijection.dim();

  GuideState state;
  Coefficients mid = config.bounds.midpoint();
  if (config.fixed_c) mid[kC] = *config.fixed_c;
  state.loc = model.bijection.inverse(mid);
  // 10 % of the box width in constrained space, mapped through the local slope.
  const Eigen::VectorXd jac = model.bijection.jacobian_diagonal(state.loc);
  state.log_diag.resize(k);
  for (int j = 0; j < k; ++j) {
    const double width = config.bounds[model.bijection.free_coefficients()[static_cast<std::size_t>(j)]].width();
    state.log_diag(j) = std::log(0.1 * width / jac(j));
  }
  state.offdiag = Eigen::VectorXd::Zero(k * (k - 1) / 2);
  state.log_sigma = std::log(sigma0);

  std::mt19937_64 rng(config.seed);
  Eigen::VectorXd params = state.pack();
  const auto n = params.size();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad(n), grad_sum(n);
  // Short second-moment memory: the first steps see gradients orders of
  // magnitude larger than near the optimum, and a 0.999 average keeps the
  // step size suppressed for most of the run.
  constexpr double beta1 = 0.9, beta2 = 0.99, adam_eps = 1e-8;

  FitResult result;
  result.method = FitMethod::Svi;
  result.bounds = config.bounds;
  result.fixed_c = config.fixed_c;
  result.Sh = Sh;
  result.Sv = Sv;
  if (config.record_trace) result.trace.reserve(static_cast<std::size_t>(config.steps));

  double b1t = 1.0, b2t = 1.0;
  for (int t = 1; t <= config.steps; ++t) {
    const GuideState current = GuideState::unpack(params, k);
    grad_sum.setZero();
    double value = 0.0;
    for (int m = 0; m < config.mc_samples; ++m) {
      value += elbo_sample(model, current, standard_normal(k, rng), &grad);
      grad_sum += grad;
    }
    value /= config.mc_samples;
    grad_sum /= config.mc_samples;
    if (!std::isfinite(value) || !grad_sum.allFinite()) {
      throw Error(ErrorKind::NonFiniteObjective,
                  "ELBO became non-finite at step " + std::to_string(t) +
                      "; lower the learning rate");
    }
    if (config.record_trace) result.trace.push_back(value);

    const double lr = config.learning_rate * 0.5 *
                      (1.0 + std::cos(std::numbers::pi * (t - 1) / config.steps));
    b1t *= beta1;
    b2t *= beta2;
    m1 = beta1 * m1 + (1.0 - beta1) * grad_sum;
    m2 = beta2 * m2 + (1.0 - beta2) * grad_sum.cwiseProduct(grad_sum);
    const Eigen::VectorXd m_hat = m1 / (1.0 - b1t);
    const Eigen::VectorXd v_hat = m2 / (1.0 - b2t);
    params += lr * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + adam_eps).matrix());
  }
  result.iterations = config.steps;
  result.converged = true;

  state = GuideState::unpack(params, k);
  const Guide guide = state.guide();
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d scatter = Eigen::Matrix4d::Zero();
  std::vector<Eigen::Vector4d> draws(static_cast<std::size_t>(config.moment_samples));
  for (auto& d : draws) {
    const Coefficients c = model.bijection.forward(guide.loc + guide.scale_tril * standard_normal(k, rng));
    d = Eigen::Vector4d(c[0], c[1], c[2], c[3]);
    mean += d;
  }
  mean /= static_cast<double>(draws.size());
  for (const auto& d : draws) scatter += (d - mean) * (d - mean).transpose();
  Eigen::Matrix4d cov = scatter / static_cast<double>(draws.size() - 1);
  if (config.fixed_c) {
    cov.row(kC).setZero();
    cov.col(kC).setZero();
    mean(kC) = *config.fixed_c;
  }
  result.covariance = 0.5 * (cov + cov.transpose());
  for (int i = 0; i < kNumCoefficients; ++i) result.mean[i] = mean(i);
  result.mean = config.bounds.clamp(result.mean);
  if (config.fixed_c) result.mean[kC] = *config.fixed_c;
  result.sigma_noise = std::exp(state.log_sigma);
  result.guide = guide;
  return result;
}

std::vector<TireParams> posterior_samples(const FitResult& result, std::size_t n,
                                          std::mt19937_64& rng) {
  if (result.method != FitMethod::Svi || !result.guide) {
    throw Error(ErrorKind::NotAPosterior, "posterior samples need an SVI result");
  }
  const BoxBijection bijection(result.bounds, result.fixed_c);
  const auto& g = *result.guide;
  std::vector<TireParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd u = g.loc + g.scale_tril * standard_normal(bijection.dim(), rng);
    out.push_back(TireParams::from_coefficients(bijection.forward(u), result.Sh, result.Sv));
  }
  return out;
}

}  // namespace tirefit
