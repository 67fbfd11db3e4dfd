#include "tirefit/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tirefit/errors.hpp"

namespace tirefit {

NelderMeadResult minimize_nelder_mead(const Objective& f, std::vector<double> x0,
                                      std::span<const double> initial_step,
                                      const NelderMeadOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0 || initial_step.size() != n) {
    throw Error(ErrorKind::InvalidArgument, "simplex dimension mismatch");
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += initial_step[i];
  std::vector<double> values(n + 1);
  for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

  NelderMeadResult result;
  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);

  auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s(n + 1);
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      s[i] = std::move(simplex[order[i]]);
      v[i] = values[order[i]];
    }
    simplex = std::move(s);
    values = std::move(v);
  };

  auto along = [&](double t, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
  };

  sort_vertices();
  while (result.iterations < options.max_iterations) {
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = simplex[i][j] - simplex[0][j];
        d2 += d * d;
      }
      diameter = std::max(diameter, std::sqrt(d2));
    }
    if (diameter < options.x_tol || values[n] - values[0] < options.f_tol) {
      result.converged = true;
      break;
    }
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    along(-1.0, trial);
    const double fr = f(trial);
    if (fr < values[0]) {
      along(-2.0, trial2);
      const double fe = f(trial2);
      if (fe < fr) {
        simplex[n] = trial2;
        values[n] = fe;
      } else {
        simplex[n] = trial;
        values[n] = fr;
      }
    } else if (fr < values[n - 1]) {
      simplex[n] = trial;
      values[n] = fr;
    } else {
      const bool outside = fr < values[n];
      along(outside ? -0.5 : 0.5, trial2);
      const double fc = f(trial2);
      if (fc < (outside ? fr : values[n])) {
        simplex[n] = trial2;
        values[n] = fc;
      } else {
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
          }
          values[i] = f(simplex[i]);
        }
      }
    }
    sort_vertices();
    result.trace.push_back(values[0]);
  }

  result.x = simplex[0];
  result.value = values[0];
  return result;
}

}  // namespace tirefit
