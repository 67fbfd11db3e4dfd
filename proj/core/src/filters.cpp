#include "tirefit/filters.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "tirefit/errors.hpp"

namespace tirefit {

std::string_view to_string(FilterKind kind) noexcept {
  switch (kind) {
    case FilterKind::MovingAverage: return "moving-average";
    case FilterKind::SavitzkyGolay: return "savitzky-golay";
    case FilterKind::Gaussian: return "gaussian";
  }
  return "unknown";
}

FilterKind filter_kind_from_string(std::string_view name) {
  if (name == "moving-average") return FilterKind::MovingAverage;
  if (name == "savitzky-golay") return FilterKind::SavitzkyGolay;
  if (name == "gaussian") return FilterKind::Gaussian;
  throw Error(ErrorKind::Schema, "unknown filter kind '" + std::string(name) + "'");
}

FilterSpec FilterSpec::normalized() const {
  FilterSpec out = *this;
  if (out.window % 2 == 0) out.window += 1;
  return out;
}

void FilterSpec::validate() const {
  if (window < 3 || window % 2 == 0) {
    throw Error(ErrorKind::InvalidArgument, "filter window must be odd and >= 3");
  }
  if (kind == FilterKind::SavitzkyGolay && (order < 0 || order >= window)) {
    throw Error(ErrorKind::InvalidArgument, "Savitzky-Golay order must be in [0, window)");
  }
}

namespace {

std::size_t mirror_index(std::ptrdiff_t i, std::size_t n) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (i < 0) i = -i;
  if (i > last) i = 2 * last - i;
  return static_cast<std::size_t>(i);
}

std::vector<double> convolve_mirror(std::span<const double> x, const std::vector<double>& kernel) {
  const auto n = x.size();
  const auto half = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const auto ci = static_cast<std::ptrdiff_t>(i);
    if (ci >= half && ci + half < static_cast<std::ptrdiff_t>(n)) {
      const double* base = x.data() + (ci - half);
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * base[k];
    } else {
      for (std::ptrdiff_t k = -half; k <= half; ++k) {
        acc += kernel[static_cast<std::size_t>(k + half)] * x[mirror_index(ci + k, n)];
      }
    }
    out[i] = acc;
  }
  return out;
}

// Least-squares polynomial projection over one window. Abscissae are scaled
// to [-1, 1] to keep the Vandermonde system well conditioned for long
// windows.
class SavGolFit {
 public:
  SavGolFit(int window, int order) : half_(window / 2), order_(order) {
    const double h = half_ > 0 ? static_cast<double>(half_) : 1.0;
    Eigen::MatrixXd vander(window, order + 1);
    for (int k = 0; k < window; ++k) {
      const double s = (k - half_) / h;
      double p = 1.0;
      for (int j = 0; j <= order; ++j) {
        vander(k, j) = p;
        p *= s;
      }
    }
    projection_ = vander.householderQr().solve(Eigen::MatrixXd::Identity(window, window));
  }

  // Weights that produce the fitted value (deriv = 0) or d/d(sample index)
  // (deriv = 1) at window position k.
  std::vector<double> weights(int k, int deriv) const {
    const double h = half_ > 0 ? static_cast<double>(half_) : 1.0;
    const double s = (k - half_) / h;
    Eigen::RowVectorXd basis = Eigen::RowVectorXd::Zero(order_ + 1);
    for (int j = deriv; j <= order_; ++j) {
      double coeff = 1.0;
      for (int d = 0; d < deriv; ++d) coeff *= (j - d);
      basis(j) = coeff * std::pow(s, j - deriv) / std::pow(h, deriv);
    }
    const Eigen::RowVectorXd w = basis * projection_;
    return {w.data(), w.data() + w.size()};
  }

 private:
  int half_;
  int order_;
  Eigen::MatrixXd projection_;
};

std::vector<double> savgol_apply(std::span<const double> x, int window, int order, int deriv) {
  const auto n = x.size();
  const int half = window / 2;
  const SavGolFit fit(window, order);
  std::vector<double> out(n);

  const auto centre = fit.weights(half, deriv);
  for (std::size_t i = static_cast<std::size_t>(half); i + static_cast<std::size_t>(half) < n; ++i) {
    const double* base = x.data() + (i - static_cast<std::size_t>(half));
    double acc = 0.0;
    for (int k = 0; k < window; ++k) acc += centre[static_cast<std::size_t>(k)] * base[k];
    out[i] = acc;
  }
  for (int k = 0; k < half; ++k) {
    const auto head = fit.weights(k, deriv);
    const auto tail = fit.weights(window - 1 - k, deriv);
    const std::size_t tail_base = n - static_cast<std::size_t>(window);
    double acc_head = 0.0;
    double acc_tail = 0.0;
    for (int j = 0; j < window; ++j) {
      acc_head += head[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
      acc_tail += tail[static_cast<std::size_t>(j)] * x[tail_base + static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(k)] = acc_head;
    out[n - 1 - static_cast<std::size_t>(k)] = acc_tail;
  }
  return out;
}

void require_length(std::size_t n, int window) {
  if (n < static_cast<std::size_t>(window)) {
    throw Error(ErrorKind::SeriesTooShort, "series has " + std::to_string(n) +
                                               " samples, filter window needs " +
                                               std::to_string(window));
  }
}

}  // namespace

std::vector<double> filter_channel(std::span<const double> series, const FilterSpec& raw_spec) {
  const FilterSpec spec = raw_spec.normalized();
  spec.validate();
  require_length(series.size(), spec.window);

  switch (spec.kind) {
    case FilterKind::MovingAverage: {
      std::vector<double> kernel(static_cast<std::size_t>(spec.window), 1.0 / spec.window);
      return convolve_mirror(series, kernel);
    }
    case FilterKind::Gaussian: {
      const double sigma = spec.sigma > 0.0 ? spec.sigma : spec.window / 6.0;
      const int half = spec.window / 2;
      std::vector<double> kernel(static_cast<std::size_t>(spec.window));
      double total = 0.0;
      for (int k = -half; k <= half; ++k) {
        const double w = std::exp(-0.5 * (k / sigma) * (k / sigma));
        kernel[static_cast<std::size_t>(k + half)] = w;
        total += w;
      }
      for (auto& w : kernel) w /= total;
      return convolve_mirror(series, kernel);
    }
    case FilterKind::SavitzkyGolay:
      return savgol_apply(series, spec.window, spec.order, 0);
  }
  return {series.begin(), series.end()};
}

std::vector<double> savgol_derivative(std::span<const double> series, int window, int order,
                                      double dt) {
  FilterSpec spec{FilterKind::SavitzkyGolay, window, order, 0.0};
  spec = spec.normalized();
  spec.validate();
  if (spec.order < 1) throw Error(ErrorKind::InvalidArgument, "derivative needs order >= 1");
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample period must be positive");
  require_length(series.size(), spec.window);
  auto out = savgol_apply(series, spec.window, spec.order, 1);
  for (auto& v : out) v /= dt;
  return out;
}

}  // namespace tirefit
