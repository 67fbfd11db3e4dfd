#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tirefit {

struct NelderMeadOptions {
  double x_tol = 1e-8;   ///< simplex diameter (max vertex distance to best)
  double f_tol = 1e-12;  ///< objective spread across vertices
  int max_iterations = 10000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  ///< best vertex value after each iteration
};

using Objective = std::function<double(std::span<const double>)>;

// Standard simplex method (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Ties between vertices of equal value keep the lower index
// first, so runs are deterministic.
NelderMeadResult minimize_nelder_mead(const Objective& f, std::vector<double> x0,
                                      std::span<const double> initial_step,
                                      const NelderMeadOptions& options = {});

}  // namespace tirefit
