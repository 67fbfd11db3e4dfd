#pragma once

#include <functional>
#include <vector>

// Independent numerical references used to check library outputs.
namespace tirefit::testing {

using ScalarFn = std::function<double(double)>;

// Richardson-extrapolated central difference.
double central_difference(const ScalarFn& f, double x, double h = 1e-4);

// Composite Simpson rule on [a, b] with an even number of panels.
double simpson(const ScalarFn& f, double a, double b, int panels = 2000);

struct GridArgmax {
  double x;
  double value;
};

// Dense scan followed by golden-section refinement around the best cell.
GridArgmax grid_argmax(const ScalarFn& f, double a, double b, int points = 20001);

// Least-squares polynomial of given degree, coefficients lowest order first.
// Solved by normal equations in long double for an independent path.
std::vector<double> polyfit_normal(const std::vector<double>& x, const std::vector<double>& y,
                                   int degree);

double polyval(const std::vector<double>& coeffs, double x);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);  // sample (n - 1)

}  // namespace tirefit::testing
