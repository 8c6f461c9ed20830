#pragma once

// Test-only reference computations, independent of the library code paths.

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_100;

inline Big big_gamma(double x) { return boost::math::tgamma(Big(x)); }

/// Mittag-Leffler series summed in 100-digit arithmetic.
inline double ml_series(double alpha, double z) {
  Big sum = 0, zb = z, power = 1;
  const Big eps = Big("1e-45");
  for (int k = 0; k < 5000; ++k) {
    const Big term = power / boost::math::tgamma(Big(alpha) * k + 1);
    sum += term;
    if (k > 10 && abs(term) < eps * abs(sum) && alpha * k > std::pow(std::abs(z), 1.0 / alpha) + 2) break;
    power *= zb;
  }
  return static_cast<double>(sum);
}

/// E_{1/2}(-x) = exp(x^2) erfc(x), in 100-digit arithmetic.
inline double ml_half_negative(double x) {
  const Big xb = x;
  return static_cast<double>(exp(xb * xb) * boost::math::erfc(xb));
}

/// Large-argument expansion E_alpha(-x) ~ sum_k (-1)^{k+1} x^{-k} / Gamma(1 - alpha k).
inline double ml_asymptotic(double alpha, double x, int terms = 10) {
  double sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double arg = 1.0 - alpha * k;
    const bool pole = arg <= 0.0 && std::floor(arg) == arg;
    const double rgamma = pole ? 0.0 : 1.0 / std::tgamma(arg);
    sum += ((k % 2) ? 1.0 : -1.0) * std::pow(x, -k) * rgamma;
  }
  return sum;
}

/// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

/// Observed convergence orders log2(e_k / e_{k+1}) for successive halvings.
inline std::vector<double> observed_orders(const std::vector<double>& errors,
                                           const std::vector<double>& sizes) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
    out.push_back(std::log(errors[k] / errors[k + 1]) / std::log(sizes[k] / sizes[k + 1]));
  }
  return out;
}

}  // namespace oracle
