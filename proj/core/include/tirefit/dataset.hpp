#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tirefit {

enum class Axle { Front, Rear };
enum class Direction { Longitudinal, Lateral };

std::string_view to_string(Axle axle) noexcept;
std::string_view to_string(Direction direction) noexcept;

struct Sample {
  double excitation = 0.0;   ///< slip ratio or slip angle [rad]
  double force_coeff = 0.0;  ///< F / Fz
  double weight = 1.0;

  bool operator==(const Sample&) const = default;
};

inline constexpr double kMaxAbsExcitation = 1.5;
inline constexpr double kMaxAbsForceCoeff = 3.0;

// Fitter input: (excitation, normalized force) pairs for one axle and direction.
struct AxleDataset {
  std::vector<Sample> samples;
  Axle axle = Axle::Front;
  Direction direction = Direction::Lateral;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }

  std::vector<double> excitations() const;
  std::vector<double> forces() const;
  double max_abs_excitation() const;

  // Finite values, |excitation| <= 1.5, |force_coeff| <= 3, weight >= 0.
  static bool passes_sanity_gate(const Sample& s);
  // Throws Schema naming the first offending row.
  void validate() const;
};

struct ShiftEstimate {
  double Sh = 0.0;
  double Sv = 0.0;
  double slope = 0.0;       ///< fitted linear stiffness
  double intercept = 0.0;   ///< fitted force at zero excitation
  std::size_t samples_used = 0;
};

inline constexpr std::size_t kMinLinearSamples = 50;

/**
 * Shift pre-estimate from the linear region |excitation| < linear_cut.
 *
 * A least-squares line a*x + b through the linear subset is read as the
 * model's linearization a*(x + Sh) + Sv with Sv = 0, giving Sh = b / a; the
 * fitted line's zero crossing then sits at x = -Sh.
 *
 * Throws InsufficientLinearData (fewer than 50 linear samples) or
 * DegenerateSlope (|a| < 1e-6).
 */
ShiftEstimate estimate_shifts(const AxleDataset& dataset, double linear_cut);

// Greedy order-preserving thinning in (excitation, force) space scaled to
// unit ranges: a sample is kept iff no already-kept sample lies closer than
// radius. Kept samples are pairwise >= radius apart.
AxleDataset thin_nearest_neighbor(const AxleDataset& dataset, double radius);

}  // namespace tirefit
