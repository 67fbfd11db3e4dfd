#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tirefit {

enum class FilterKind { MovingAverage, SavitzkyGolay, Gaussian };

std::string_view to_string(FilterKind kind) noexcept;
FilterKind filter_kind_from_string(std::string_view name);

/**
 * Smoothing filter settings. Window and sigma are in samples at the
 * channel's native rate. An even window is rounded up to the next odd size
 * by normalized(), so a 200-sample setting runs as 201.
 */
struct FilterSpec {
  FilterKind kind = FilterKind::SavitzkyGolay;
  int window = 31;
  int order = 3;       ///< Savitzky-Golay only
  double sigma = 0.0;  ///< Gaussian only; <= 0 selects window / 6

  FilterSpec normalized() const;
  // Throws InvalidArgument: window odd and >= 3, order < window, order >= 0.
  void validate() const;

  bool operator==(const FilterSpec&) const = default;
};

// Same-length smoothing. Moving average and Gaussian reflect the series at
// both ends (mirror, edge sample not repeated). Savitzky-Golay fits the
// first/last full window at the edges, so any polynomial of degree <= order
// is reproduced over the whole series. Throws SeriesTooShort when the
// series is shorter than the (normalized) window.
std::vector<double> filter_channel(std::span<const double> series, const FilterSpec& spec);

// First derivative by a Savitzky-Golay fit, scaled by the sample period dt.
std::vector<double> savgol_derivative(std::span<const double> series, int window, int order,
                                      double dt);

}  // namespace tirefit
