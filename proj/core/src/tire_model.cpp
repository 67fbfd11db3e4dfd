#include "tirefit/tire_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tirefit/errors.hpp"

namespace tirefit {

void ParamBounds::validate() const {
  for (int i = 0; i < kNumCoefficients; ++i) {
    const auto& iv = (*this)[i];
    if (!std::isfinite(iv.min) || !std::isfinite(iv.max) || !(iv.min < iv.max)) {
      throw Error(ErrorKind::InvalidArgument, std::string("bounds for ") + kCoefficientNames[i] +
                                                  " must satisfy min < max");
    }
  }
}

bool ParamBounds::contains(const Coefficients& c) const {
  for (int i = 0; i < kNumCoefficients; ++i) {
    if (!(*this)[i].contains(c[i])) return false;
  }
  return true;
}

Coefficients ParamBounds::clamp(const Coefficients& c) const {
  Coefficients out{};
  for (int i = 0; i < kNumCoefficients; ++i) out[i] = std::clamp(c[i], (*this)[i].min, (*this)[i].max);
  return out;
}

Coefficients ParamBounds::midpoint() const {
  Coefficients out{};
  for (int i = 0; i < kNumCoefficients; ++i) out[i] = (*this)[i].mid();
  return out;
}

double evaluate(const TireParams& p, double excitation) noexcept {
  const double x = excitation + p.Sh;
  const double bx = p.B * x;
  const double phi = bx - p.E * (bx - std::atan(bx));
  return p.D * std::sin(p.C * std::atan(phi)) + p.Sv;
}

std::vector<double> evaluate_batch(const TireParams& params, std::span<const double> excitations) {
  std::vector<double> out(excitations.size());
  std::transform(excitations.begin(), excitations.end(), out.begin(),
                 [&](double x) { return evaluate(params, x); });
  return out;
}

double stiffness_at_origin(const TireParams& p) noexcept { return p.B * p.C * p.D; }

double evaluate_with_gradient(const TireParams& p, double excitation,
                              CoefficientGradient& grad) noexcept {
  const double x = excitation + p.Sh;
  const double bx = p.B * x;
  const double atan_bx = std::atan(bx);
  const double phi = bx - p.E * (bx - atan_bx);
  const double theta = std::atan(phi);
  const double s = std::sin(p.C * theta);
  const double c = std::cos(p.C * theta);

  // chain: y -> theta -> phi -> (B, E)
  const double dy_dtheta = p.D * p.C * c;
  const double dtheta_dphi = 1.0 / (1.0 + phi * phi);
  const double dphi_dbx = 1.0 - p.E + p.E / (1.0 + bx * bx);

  grad.dD = s;
  grad.dC = p.D * c * theta;
  grad.dB = dy_dtheta * dtheta_dphi * dphi_dbx * x;
  grad.dE = -dy_dtheta * dtheta_dphi * (bx - atan_bx);
  return p.D * s + p.Sv;
}

CoefficientGradient gradients(const TireParams& params, double excitation) noexcept {
  CoefficientGradient g;
  evaluate_with_gradient(params, excitation, g);
  return g;
}

double slope(const TireParams& p, double excitation) noexcept {
  const double x = excitation + p.Sh;
  const double bx = p.B * x;
  const double phi = bx - p.E * (bx - std::atan(bx));
  const double theta = std::atan(phi);
  return p.D * p.C * std::cos(p.C * theta) / (1.0 + phi * phi) *
         (1.0 - p.E + p.E / (1.0 + bx * bx)) * p.B;
}

}  // namespace tirefit
