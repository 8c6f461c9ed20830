#pragma once

#include <functional>

namespace tfkpp::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;      // estimated absolute error
  int subdivisions = 0;
  bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
///
/// Bisects the interval with the largest error estimate until the total
/// estimate drops below max(abs_tol, rel_tol * |value|) or the subdivision
/// budget is spent. Endpoints are never evaluated.
Result integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol, double rel_tol, int max_subdivisions = 2000);

}  // namespace tfkpp::quadrature
