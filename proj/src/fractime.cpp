#include "tfkpp/fractime.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tfkpp/quadrature.hpp"

namespace tfkpp::fractime {

TimeGrid::TimeGrid(int steps, double gamma, double final_time)
    : steps_(steps), gamma_(gamma), final_time_(final_time) {
  if (steps < 1) throw std::invalid_argument("time grid needs N >= 1 steps");
  if (!(final_time > 0.0)) throw std::invalid_argument("final time T must be positive");
  if (!(gamma >= 1.0)) throw std::invalid_argument("grading exponent gamma must be >= 1");

  points_.resize(steps + 1);
  sizes_.assign(steps + 1, 0.0);
  for (int n = 0; n <= steps; ++n) {
    points_[n] = std::pow(static_cast<double>(n) / steps, gamma) * final_time;
  }
  points_[0] = 0.0;
  points_[steps] = final_time;
  for (int n = 1; n <= steps; ++n) sizes_[n] = points_[n] - points_[n - 1];
}

TimeGrid graded_grid(int steps, double gamma, double final_time) {
  return TimeGrid(steps, gamma, final_time);
}

double kernel_g(double alpha, double t) {
  if (!(alpha > 0.0)) throw std::invalid_argument("kernel order alpha must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("kernel g_alpha is singular at t <= 0");
  if (alpha == 1.0) return 1.0;
  return std::pow(t, alpha - 1.0) / std::tgamma(alpha);
}

namespace {

void check_order(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("fractional order alpha must lie in (0, 1]");
  }
}

void check_step(const TimeGrid& grid, int n) {
  if (n < 1 || n > grid.steps()) {
    throw std::out_of_range("step index " + std::to_string(n) + " outside 1.." +
                            std::to_string(grid.steps()));
  }
}

// A^p - B^p for A > B >= 0 with A - B = d supplied directly, so that the
// near-diagonal differences never subtract two rounded powers.
double power_difference(double A, double d, double p) {
  if (p == 0.0) return d >= A ? 1.0 : 0.0;
  if (d >= A) return std::pow(A, p);
  return -std::pow(A, p) * std::expm1(p * std::log1p(-d / A));
}

}  // namespace

ConvWeights conv_weights(const TimeGrid& grid, double alpha, int n) {
  check_order(alpha);
  check_step(grid, n);
  const double p = 1.0 - alpha;
  const double scale = 1.0 / std::tgamma(2.0 - alpha);
  const double tn = grid.t(n);

  ConvWeights w;
  w.n = n;
  w.alpha = alpha;
  w.b.resize(n);
  for (int j = 0; j < n - 1; ++j) {
    w.b[j] = power_difference(tn - grid.t(j), grid.dt(j + 1), p) * scale;
  }
  // Last interval: (t_n - t_{n-1})^p exactly.
  w.b[n - 1] = (p == 0.0 ? 1.0 : std::pow(grid.dt(n), p)) * scale;
  return w;
}

L1Coeffs l1_coeffs(const TimeGrid& grid, double alpha, int n) {
  const ConvWeights w = conv_weights(grid, alpha, n);
  L1Coeffs c;
  c.n = n;
  c.alpha = alpha;
  c.a.resize(n);
  for (int m = 0; m < n; ++m) {
    const int k = n - m;
    c.a[m] = w.b[k - 1] / grid.dt(k);
  }
  return c;
}

double caputo_l1_apply(const TimeGrid& grid, double alpha,
                       std::span<const double> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("L1 scheme needs samples u_0..u_n with n >= 1");
  }
  const int n = static_cast<int>(samples.size()) - 1;
  const ConvWeights w = conv_weights(grid, alpha, n);
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    sum += w.b[k - 1] / grid.dt(k) * (samples[k] - samples[k - 1]);
  }
  return sum;
}

double discrete_convolution(const TimeGrid& grid, double alpha,
                            std::span<const double> f_samples, int n) {
  if (static_cast<int>(f_samples.size()) != n) {
    throw std::invalid_argument("convolution at t_n needs exactly n samples f^0..f^{n-1}");
  }
  const ConvWeights w = conv_weights(grid, alpha, n);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) sum += w.b[j] * f_samples[j];
  return sum;
}

namespace {

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double ml_series(double alpha, double z) {
  Kahan acc;
  acc.add(1.0);
  if (z == 0.0) return 1.0;
  const double log_abs = std::log(std::abs(z));
  const bool negative = z < 0.0;
  double peak = 1.0;
  for (int k = 1; k < 100000; ++k) {
    const double magnitude = std::exp(k * log_abs - std::lgamma(alpha * k + 1.0));
    const double term = (negative && (k % 2 == 1)) ? -magnitude : magnitude;
    acc.add(term);
    peak = std::max(peak, magnitude);
    // Terms decrease monotonically once alpha*k + 1 exceeds |z|^(1/alpha).
    if (magnitude < 1e-17 * std::abs(acc.sum) &&
        alpha * k + 1.0 > std::pow(std::abs(z), 1.0 / alpha) + 1.0) {
      break;
    }
  }
  return acc.sum;
}

// E_alpha(-x), x > 0, alpha in (0,1):
//   (1/(alpha pi)) * int_{pi/2 - alpha pi}^{pi/2} exp(-x^{1/alpha} s(phi)^{1/alpha}) dphi,
//   s(phi) = -cos(alpha pi) + sin(alpha pi) tan(phi).
// Obtained from the completely monotone spectral representation by a
// tangent substitution that flattens its Lorentzian factor.
double ml_integral(double alpha, double x) {
  const double theta = alpha * std::numbers::pi;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double inv_alpha = 1.0 / alpha;
  const double tau = std::pow(x, inv_alpha);
  auto integrand = [=](double phi) {
    const double arg = -c + s * std::tan(phi);
    if (arg <= 0.0) return 1.0;
    return std::exp(-tau * std::pow(arg, inv_alpha));
  };
  const double lo = 0.5 * std::numbers::pi - theta;
  const double hi = 0.5 * std::numbers::pi;
  const auto r = quadrature::integrate(integrand, lo, hi, 1e-300, 1e-14, 5000);
  if (!r.converged && r.error > 1e-11 * std::abs(r.value)) {
    throw std::runtime_error("Mittag-Leffler quadrature did not converge");
  }
  return r.value / theta;
}

}  // namespace

double mittag_leffler(double alpha, double z) {
  check_order(alpha);
  if (!std::isfinite(z)) throw std::invalid_argument("Mittag-Leffler argument must be finite");
  if (alpha == 1.0) return std::exp(z);
  if (z >= kMittagLefflerSeriesLimit) return ml_series(alpha, z);
  return ml_integral(alpha, -z);
}

SonineCheck check_sonine(double alpha, double beta, double t, double tol,
                         const double* target_override) {
  if (!(alpha > 0.0 && beta > 0.0)) throw std::invalid_argument("Sonine orders must be positive");
  if (!(t > 0.0)) throw std::invalid_argument("Sonine check needs t > 0");

  const double half = 0.5 * t;
  // s = half * v^(1/beta) absorbs the s^(beta-1) singularity at s = 0.
  auto left = [&](double v) {
    return kernel_g(alpha, t - half * std::pow(v, 1.0 / beta));
  };
  // t - s = half * v^(1/alpha) absorbs the singularity at s = t.
  auto right = [&](double v) {
    return kernel_g(beta, t - half * std::pow(v, 1.0 / alpha));
  };
  const auto ql = quadrature::integrate(left, 0.0, 1.0, 1e-300, 1e-13);
  const auto qr = quadrature::integrate(right, 0.0, 1.0, 1e-300, 1e-13);
  const double left_scale = std::pow(half, beta) / std::tgamma(beta + 1.0);
  const double right_scale = std::pow(half, alpha) / std::tgamma(alpha + 1.0);

  SonineCheck out;
  out.convolution = left_scale * ql.value + right_scale * qr.value;
  out.quadrature_error = left_scale * ql.error + right_scale * qr.error;
  out.target = target_override ? *target_override : kernel_g(alpha + beta, t);
  if (!ql.converged || !qr.converged || out.quadrature_error > 0.1 * tol * std::abs(out.target)) {
    out.status = SonineStatus::QuadratureFailure;
    return out;
  }
  out.status = std::abs(out.convolution - out.target) <= tol * std::abs(out.target)
                   ? SonineStatus::Pass
                   : SonineStatus::Fail;
  return out;
}

std::string to_string(SonineStatus status) {
  switch (status) {
    case SonineStatus::Pass: return "pass";
    case SonineStatus::Fail: return "fail";
    case SonineStatus::QuadratureFailure: return "quadrature-failure";
  }
  return "unknown";
}

}  // namespace tfkpp::fractime
