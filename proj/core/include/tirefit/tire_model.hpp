#pragma once

#include <array>
#include <span>
#include <vector>

namespace tirefit {

// Indices of the four fitted Magic Formula coefficients.
enum Coefficient : int { kB = 0, kC = 1, kD = 2, kE = 3 };
inline constexpr int kNumCoefficients = 4;
inline constexpr std::array<const char*, kNumCoefficients> kCoefficientNames = {"B", "C", "D",
                                                                                 "E"};

using Coefficients = std::array<double, kNumCoefficients>;

/**
 * Magic Formula Simple coefficient set.
 *
 * Output is the force coefficient F/Fz. Excitation is a slip ratio
 * (dimensionless) or a slip angle (rad). Sh and Sv are estimated ahead of
 * fitting and are never free variables of an optimizer.
 */
struct TireParams {
  double B = 15.0;  ///< stiffness factor
  double C = 2.0;   ///< shape factor
  double D = 1.5;   ///< peak factor
  double E = 0.8;   ///< curvature factor
  double Sh = 0.0;  ///< horizontal shift, excitation units
  double Sv = 0.0;  ///< vertical shift, force-coefficient units

  Coefficients coefficients() const { return {B, C, D, E}; }
  static TireParams from_coefficients(const Coefficients& c, double sh = 0.0, double sv = 0.0) {
    return {c[kB], c[kC], c[kD], c[kE], sh, sv};
  }

  bool operator==(const TireParams&) const = default;
};

struct Interval {
  double min;
  double max;
  double width() const { return max - min; }
  double mid() const { return 0.5 * (min + max); }
  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const Interval&) const = default;
};

// Box constraint over (B, C, D, E). Defaults are the physical ranges
// B in [5, 40], C in [1, 3], D in [0.1, 2], E in [-1, 1].
struct ParamBounds {
  std::array<Interval, kNumCoefficients> box = {
      Interval{5.0, 40.0}, Interval{1.0, 3.0}, Interval{0.1, 2.0}, Interval{-1.0, 1.0}};

  const Interval& operator[](int i) const { return box[static_cast<std::size_t>(i)]; }
  Interval& operator[](int i) { return box[static_cast<std::size_t>(i)]; }

  // Throws InvalidArgument unless min < max (and both finite) for every coefficient.
  void validate() const;
  bool contains(const Coefficients& c) const;
  Coefficients clamp(const Coefficients& c) const;
  Coefficients midpoint() const;

  bool operator==(const ParamBounds&) const = default;
};

// Partial derivatives of the model output with respect to B, C, D, E.
struct CoefficientGradient {
  double dB = 0.0;
  double dC = 0.0;
  double dD = 0.0;
  double dE = 0.0;

  Coefficients as_array() const { return {dB, dC, dD, dE}; }
};

// Y(X) = D sin(C atan(B x - E (B x - atan(B x)))) + Sv, x = X + Sh.
double evaluate(const TireParams& params, double excitation) noexcept;

std::vector<double> evaluate_batch(const TireParams& params, std::span<const double> excitations);

// Slope of the curve at x = 0, i.e. B*C*D.
double stiffness_at_origin(const TireParams& params) noexcept;

CoefficientGradient gradients(const TireParams& params, double excitation) noexcept;

// Value and coefficient gradient in one pass.
double evaluate_with_gradient(const TireParams& params, double excitation,
                              CoefficientGradient& grad) noexcept;

// dY/dX.
double slope(const TireParams& params, double excitation) noexcept;

}  // namespace tirefit
