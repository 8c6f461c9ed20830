#pragma once

// Temporal machinery for Caputo-type fractional problems: graded grids,
// kernel quadrature weights, the L1 scheme, and the Mittag-Leffler function.

#include <span>
#include <string>
#include <vector>

namespace tfkpp::fractime {

/// Graded time grid t_n = (n/N)^gamma * T, n = 0..N.
class TimeGrid {
 public:
  TimeGrid(int steps, double gamma, double final_time);

  int steps() const { return steps_; }
  double gamma() const { return gamma_; }
  double final_time() const { return final_time_; }

  double t(int n) const { return points_[n]; }
  /// Step size dt_n = t_n - t_{n-1}, valid for n = 1..N.
  double dt(int n) const { return sizes_[n]; }

  std::span<const double> points() const { return points_; }

 private:
  int steps_;
  double gamma_;
  double final_time_;
  std::vector<double> points_;
  std::vector<double> sizes_;  // sizes_[0] is unused (0)
};

TimeGrid graded_grid(int steps, double gamma, double final_time);

/// g_alpha(t) = t^(alpha-1) / Gamma(alpha).
double kernel_g(double alpha, double t);

/// Integrals of g_{1-alpha} over [t_j, t_{j+1}] seen from t_n, j = 0..n-1.
struct ConvWeights {
  int n = 0;
  double alpha = 1.0;
  std::vector<double> b;
};

/// L1 coefficients; a[m] holds a_m^(n) = b_{n-m-1}^(n) / dt_{n-m}, m = 0..n-1.
struct L1Coeffs {
  int n = 0;
  double alpha = 1.0;
  std::vector<double> a;
};

ConvWeights conv_weights(const TimeGrid& grid, double alpha, int n);

L1Coeffs l1_coeffs(const TimeGrid& grid, double alpha, int n);

/// L1 approximation of the Caputo derivative at t_n from samples u_0..u_n.
double caputo_l1_apply(const TimeGrid& grid, double alpha,
                       std::span<const double> samples);

/// sum_j b_j^(n) f^j, approximating (g_{1-alpha} * f)(t_n) with
/// left-endpoint samples f^0..f^{n-1}.
double discrete_convolution(const TimeGrid& grid, double alpha,
                            std::span<const double> f_samples, int n);

/// One-parameter Mittag-Leffler function E_alpha(z), alpha in (0, 1].
///
/// Power series (compensated summation) for -1 <= z <= 5 with log-domain
/// terms for z > 0; for z < -1 a Laplace-type integral representation
/// mapped onto a finite angle interval, where the integrand is smooth and
/// positive. alpha == 1 returns exp(z).
double mittag_leffler(double alpha, double z);

/// Switch point between series and integral evaluation for negative z.
inline constexpr double kMittagLefflerSeriesLimit = -1.0;

enum class SonineStatus { Pass, Fail, QuadratureFailure };

struct SonineCheck {
  SonineStatus status = SonineStatus::Fail;
  double convolution = 0.0;  // numerical (g_alpha * g_beta)(t)
  double target = 0.0;       // g_{alpha+beta}(t), or the override
  double quadrature_error = 0.0;

  bool passed() const { return status == SonineStatus::Pass; }
};

/// Numerically verifies g_alpha * g_beta = g_{alpha+beta} at t.
/// `target_override` replaces the right side (for negative controls).
SonineCheck check_sonine(double alpha, double beta, double t, double tol,
                         const double* target_override = nullptr);

std::string to_string(SonineStatus status);

}  // namespace tfkpp::fractime
