#include "tfkpp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tfkpp::la {

SparseCSR::SparseCSR(int rows, int cols, std::vector<int> offsets, std::vector<int> columns,
                     std::vector<double> values, bool symmetric)
    : rows_(rows),
      cols_(cols),
      offsets_(std::move(offsets)),
      columns_(std::move(columns)),
      values_(std::move(values)),
      symmetric_(symmetric) {
  if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix dimension");
  if (static_cast<int>(offsets_.size()) != rows + 1 || offsets_.front() != 0 ||
      offsets_.back() != static_cast<int>(columns_.size()) || columns_.size() != values_.size()) {
    throw std::invalid_argument("inconsistent CSR arrays");
  }
  for (int i = 0; i < rows; ++i) {
    if (offsets_[i] > offsets_[i + 1]) throw std::invalid_argument("CSR offsets must be nondecreasing");
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      if (columns_[k] < 0 || columns_[k] >= cols) throw std::invalid_argument("CSR column out of range");
      if (k > offsets_[i] && columns_[k] <= columns_[k - 1]) {
        throw std::invalid_argument("CSR columns must be sorted and unique within a row");
      }
    }
  }
  if (symmetric_) {
    if (rows != cols) throw std::invalid_argument("symmetric flag on a non-square matrix");
    for (int i = 0; i < rows; ++i) {
      for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
        if (find(columns_[k], i) < 0) throw std::invalid_argument("symmetric flag on a structurally unsymmetric matrix");
      }
    }
  }
}

SparseCSR SparseCSR::from_triplets(int rows, int cols, std::span<const Triplet> entries,
                                   bool symmetric) {
  std::vector<Triplet> sorted(entries.begin(), entries.end());
  for (const auto& e : sorted) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw std::invalid_argument("triplet index out of range");
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<int> offsets(rows + 1, 0);
  std::vector<int> columns;
  std::vector<double> values;
  columns.reserve(sorted.size());
  values.reserve(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto& e = sorted[k];
    if (k > 0 && e.row == sorted[k - 1].row && e.col == sorted[k - 1].col) {
      values.back() += e.value;
      continue;
    }
    columns.push_back(e.col);
    values.push_back(e.value);
    ++offsets[e.row + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return SparseCSR(rows, cols, std::move(offsets), std::move(columns), std::move(values),
                   symmetric);
}

SparseCSR SparseCSR::identity(int n) {
  std::vector<int> offsets(n + 1);
  std::vector<int> columns(n);
  std::iota(offsets.begin(), offsets.end(), 0);
  std::iota(columns.begin(), columns.end(), 0);
  return SparseCSR(n, n, std::move(offsets), std::move(columns), std::vector<double>(n, 1.0), true);
}

long SparseCSR::find(int row, int col) const {
  const auto begin = columns_.begin() + offsets_[row];
  const auto end = columns_.begin() + offsets_[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return -1;
  return it - columns_.begin();
}

double SparseCSR::at(int row, int col) const {
  const long k = find(row, col);
  return k < 0 ? 0.0 : values_[k];
}

Vector SparseCSR::diagonal() const {
  Vector d(std::min(rows_, cols_), 0.0);
  for (int i = 0; i < static_cast<int>(d.size()); ++i) d[i] = at(i, i);
  return d;
}

bool SparseCSR::same_pattern(const SparseCSR& other) const {
  return rows_ == other.rows_ && cols_ == other.cols_ && offsets_ == other.offsets_ &&
         columns_ == other.columns_;
}

void matvec(const SparseCSR& A, std::span<const double> x, std::span<double> y) {
  if (static_cast<int>(x.size()) != A.cols() || static_cast<int>(y.size()) != A.rows()) {
    throw std::invalid_argument("matvec dimension mismatch");
  }
  const auto off = A.offsets();
  const auto col = A.columns();
  const auto val = A.values();
  for (int i = 0; i < A.rows(); ++i) {
    double s = 0.0;
    for (int k = off[i]; k < off[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

Vector matvec(const SparseCSR& A, std::span<const double> x) {
  Vector y(A.rows());
  matvec(A, x, y);
  return y;
}

SparseCSR combine(double a, const SparseCSR& A, double b, const SparseCSR& B) {
  if (!A.same_pattern(B)) throw std::invalid_argument("combine needs a shared sparsity pattern");
  std::vector<double> values(A.nonzeros());
  const auto va = A.values();
  const auto vb = B.values();
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = a * va[k] + b * vb[k];
  return SparseCSR(A.rows(), A.cols(), {A.offsets().begin(), A.offsets().end()},
                   {A.columns().begin(), A.columns().end()}, std::move(values),
                   A.symmetric() && B.symmetric());
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Indefinite: return "indefinite";
    case SolveStatus::Breakdown: return "breakdown";
    case SolveStatus::InnerSolverFailure: return "inner-solver-failure";
    case SolveStatus::DampingFloor: return "damping-floor";
  }
  return "unknown";
}

namespace {

void check_system(const SparseCSR& A, std::span<const double> b, Vector& x) {
  if (A.rows() != A.cols()) throw std::invalid_argument("linear solve needs a square matrix");
  if (static_cast<int>(b.size()) != A.rows()) throw std::invalid_argument("rhs dimension mismatch");
  if (x.empty()) x.assign(b.size(), 0.0);
  if (x.size() != b.size()) throw std::invalid_argument("initial guess dimension mismatch");
}

Vector residual_of(const SparseCSR& A, std::span<const double> b, const Vector& x) {
  Vector r = matvec(A, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return r;
}

}  // namespace

SolveReport cg_solve(const SparseCSR& A, std::span<const double> b, Vector& x, double tol,
                     int max_iterations, Preconditioner pc) {
  check_system(A, b, x);
  const std::size_t n = b.size();
  SolveReport report;

  Vector inv_diag(n, 1.0);
  if (pc == Preconditioner::Jacobi) {
    const Vector d = A.diagonal();
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
  }

  const double bnorm = norm2(b);
  const double target = tol * bnorm;
  Vector r = residual_of(A, b, x);
  double rnorm = norm2(r);
  report.history.push_back(rnorm);
  if (rnorm <= target || bnorm == 0.0) {
    if (bnorm == 0.0) std::fill(x.begin(), x.end(), 0.0);
    report.residual = bnorm == 0.0 ? 0.0 : rnorm;
    report.converged = true;
    report.status = SolveStatus::Converged;
    return report;
  }

  Vector z(n), p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rho = dot(r, z);

  for (int it = 1; it <= max_iterations; ++it) {
    matvec(A, p, q);
    const double curvature = dot(p, q);
    if (!(curvature > 0.0)) {
      report.iterations = it - 1;
      report.residual = rnorm;
      report.status = SolveStatus::Indefinite;
      return report;
    }
    const double step = rho / curvature;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += step * p[i];
      r[i] -= step * q[i];
    }
    rnorm = norm2(r);
    report.history.push_back(rnorm);
    report.iterations = it;
    if (rnorm <= target) {
      report.residual = rnorm;
      report.converged = true;
      report.status = SolveStatus::Converged;
      return report;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rho_next = dot(r, z);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  report.residual = rnorm;
  report.status = SolveStatus::MaxIterations;
  return report;
}

SolveReport minres_solve(const SparseCSR& A, std::span<const double> b, Vector& x, double tol,
                         int max_iterations) {
  check_system(A, b, x);
  const std::size_t n = b.size();
  SolveReport report;

  Vector inv_diag(n);
  {
    const Vector d = A.diagonal();
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = d[i] != 0.0 ? 1.0 / std::abs(d[i]) : 1.0;
  }
  const double bnorm = norm2(b);
  const double target = tol * bnorm;

  Vector r1 = residual_of(A, b, x);
  double rnorm = norm2(r1);
  report.history.push_back(rnorm);
  if (rnorm <= target || bnorm == 0.0) {
    if (bnorm == 0.0) std::fill(x.begin(), x.end(), 0.0);
    report.residual = bnorm == 0.0 ? 0.0 : rnorm;
    report.converged = true;
    report.status = SolveStatus::Converged;
    return report;
  }

  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = inv_diag[i] * r1[i];
  const double beta1 = std::sqrt(dot(r1, y));
  Vector r2 = r1, v(n), w(n, 0.0), w1(n), w2(n, 0.0);

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  constexpr double tiny = std::numeric_limits<double>::epsilon();

  for (int it = 1; it <= max_iterations; ++it) {
    const double s = 1.0 / beta;
    for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
    matvec(A, v, y);
    if (it >= 2) {
      for (std::size_t i = 0; i < n; ++i) y[i] -= (beta / oldb) * r1[i];
    }
    const double alfa = dot(v, y);
    for (std::size_t i = 0; i < n; ++i) y[i] -= (alfa / beta) * r2[i];
    r1.swap(r2);
    r2 = y;
    for (std::size_t i = 0; i < n; ++i) y[i] = inv_diag[i] * r2[i];
    oldb = beta;
    const double beta_sq = dot(r2, y);
    if (beta_sq < 0.0) {
      report.iterations = it;
      report.status = SolveStatus::Breakdown;
      report.residual = norm2(residual_of(A, b, x));
      return report;
    }
    beta = std::sqrt(beta_sq);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    const double gamma = std::max(std::hypot(gbar, beta), tiny);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1.swap(w2);
    w2.swap(w);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
      x[i] += phi * w[i];
    }
    report.iterations = it;
    report.history.push_back(phibar);

    // phibar tracks the preconditioned residual; confirm against the true one.
    if (phibar <= tol * beta1 || beta == 0.0 || it % 50 == 0) {
      rnorm = norm2(residual_of(A, b, x));
      if (rnorm <= target) {
        report.residual = rnorm;
        report.converged = true;
        report.status = SolveStatus::Converged;
        return report;
      }
      if (beta == 0.0) break;
    }
  }
  report.residual = norm2(residual_of(A, b, x));
  report.converged = report.residual <= target;
  report.status = report.converged ? SolveStatus::Converged : SolveStatus::MaxIterations;
  return report;
}

SolveReport newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector& x,
                         const NewtonOptions& options) {
  SolveReport report;
  Vector F = residual(x);
  double fnorm = norm2(F);
  report.history.push_back(fnorm);
  report.residual = fnorm;
  if (fnorm <= options.tol) {
    report.converged = true;
    report.status = SolveStatus::Converged;
    return report;
  }

  for (int it = 1; it <= options.max_iterations; ++it) {
    const SparseCSR J = jacobian(x);
    Vector rhs(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) rhs[i] = -F[i];

    Vector delta(F.size(), 0.0);
    SolveReport lin = cg_solve(J, rhs, delta, options.linear_tol, options.linear_max_iterations);
    report.inner_iterations += lin.iterations;
    if (lin.status == SolveStatus::Indefinite) {
      std::fill(delta.begin(), delta.end(), 0.0);
      lin = minres_solve(J, rhs, delta, options.linear_tol, options.linear_max_iterations);
      report.inner_iterations += lin.iterations;
    }
    // An inexact direction is still usable when it reduced the residual well.
    if (!lin.converged && !(lin.residual <= 1e-6 * fnorm)) {
      report.iterations = it;
      report.status = SolveStatus::InnerSolverFailure;
      return report;
    }

    double damping = 1.0;
    Vector trial(x.size());
    Vector F_trial;
    double trial_norm = 0.0;
    while (true) {
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + damping * delta[i];
      F_trial = residual(trial);
      trial_norm = norm2(F_trial);
      if (trial_norm < fnorm) break;
      damping *= 0.5;
      if (damping < options.min_damping) {
        report.iterations = it;
        report.status = SolveStatus::DampingFloor;
        return report;
      }
    }
    x.swap(trial);
    F.swap(F_trial);
    fnorm = trial_norm;
    report.history.push_back(fnorm);
    report.iterations = it;
    report.residual = fnorm;
    if (fnorm <= options.tol) {
      report.converged = true;
      report.status = SolveStatus::Converged;
      return report;
    }
  }
  report.status = SolveStatus::MaxIterations;
  return report;
}

}  // namespace tfkpp::la
