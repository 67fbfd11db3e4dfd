#include "tirefit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "tirefit/errors.hpp"

namespace tirefit {

std::string_view to_string(Axle axle) noexcept { return axle == Axle::Front ? "front" : "rear"; }

std::string_view to_string(Direction direction) noexcept {
  return direction == Direction::Longitudinal ? "longitudinal" : "lateral";
}

std::vector<double> AxleDataset::excitations() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.excitation);
  return out;
}

std::vector<double> AxleDataset::forces() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.force_coeff);
  return out;
}

double AxleDataset::max_abs_excitation() const {
  double m = 0.0;
  for (const auto& s : samples) m = std::max(m, std::abs(s.excitation));
  return m;
}

bool AxleDataset::passes_sanity_gate(const Sample& s) {
  return std::isfinite(s.excitation) && std::isfinite(s.force_coeff) && std::isfinite(s.weight) &&
         std::abs(s.excitation) <= kMaxAbsExcitation && std::abs(s.force_coeff) <= kMaxAbsForceCoeff &&
         s.weight >= 0.0;
}

void AxleDataset::validate() const {
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!passes_sanity_gate(samples[i])) {
      throw Error(ErrorKind::Schema, "dataset row " + std::to_string(i + 1) +
                                         " is non-finite or outside the sanity gate");
    }
  }
}

ShiftEstimate estimate_shifts(const AxleDataset& dataset, double linear_cut) {
  if (!(linear_cut > 0.0)) throw Error(ErrorKind::InvalidArgument, "linear cut must be > 0");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (const auto& s : dataset.samples) {
    if (std::abs(s.excitation) >= linear_cut) continue;
    ++n;
    sx += s.excitation;
    sy += s.force_coeff;
  }
  if (n < kMinLinearSamples) {
    throw Error(ErrorKind::InsufficientLinearData,
                std::to_string(n) + " samples inside the linear region, need " +
                    std::to_string(kMinLinearSamples));
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  for (const auto& s : dataset.samples) {
    if (std::abs(s.excitation) >= linear_cut) continue;
    const double dx = s.excitation - mx;
    sxx += dx * dx;
    sxy += dx * (s.force_coeff - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorKind::DegenerateSlope, "linear-region excitation is constant");
  const double a = sxy / sxx;
  if (!(std::abs(a) >= 1e-6)) throw Error(ErrorKind::DegenerateSlope, "linear-region slope ~ 0");
  const double b = my - a * mx;

  ShiftEstimate est;
  est.slope = a;
  est.intercept = b;
  est.Sh = b / a;
  est.Sv = 0.0;
  est.samples_used = n;
  return est;
}

AxleDataset thin_nearest_neighbor(const AxleDataset& dataset, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "thinning radius must be > 0");
  AxleDataset out;
  out.axle = dataset.axle;
  out.direction = dataset.direction;
  if (dataset.empty()) return out;

  auto [xmin_it, xmax_it] = std::minmax_element(
      dataset.samples.begin(), dataset.samples.end(),
      [](const Sample& a, const Sample& b) { return a.excitation < b.excitation; });
  auto [ymin_it, ymax_it] = std::minmax_element(
      dataset.samples.begin(), dataset.samples.end(),
      [](const Sample& a, const Sample& b) { return a.force_coeff < b.force_coeff; });
  const double xmin = xmin_it->excitation;
  const double ymin = ymin_it->force_coeff;
  const double xr = xmax_it->excitation - xmin;
  const double yr = ymax_it->force_coeff - ymin;
  const double xs = xr > 0.0 ? 1.0 / xr : 1.0;
  const double ys = yr > 0.0 ? 1.0 / yr : 1.0;

  // Uniform grid with cell size = radius; any neighbour closer than radius
  // lives in the 3x3 block around the query cell.
  using Key = std::uint64_t;
  auto cell = [radius](double v) { return static_cast<std::int64_t>(std::floor(v / radius)); };
  auto key = [](std::int64_t i, std::int64_t j) {
    return (static_cast<Key>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<Key>(static_cast<std::uint32_t>(j));
  };
  std::unordered_map<Key, std::vector<std::pair<double, double>>> grid;
  const double r2 = radius * radius;

  for (const auto& s : dataset.samples) {
    const double px = (s.excitation - xmin) * xs;
    const double py = (s.force_coeff - ymin) * ys;
    const auto ci = cell(px);
    const auto cj = cell(py);
    bool crowded = false;
    for (std::int64_t di = -1; di <= 1 && !crowded; ++di) {
      for (std::int64_t dj = -1; dj <= 1 && !crowded; ++dj) {
        auto it = grid.find(key(ci + di, cj + dj));
        if (it == grid.end()) continue;
        for (const auto& [qx, qy] : it->second) {
          const double dx = px - qx;
          const double dy = py - qy;
          if (dx * dx + dy * dy < r2) {
            crowded = true;
            break;
          }
        }
      }
    }
    if (crowded) continue;
    grid[key(ci, cj)].emplace_back(px, py);
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace tirefit
