#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tfkpp::la {

using Vector = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted and unique per row.
class SparseCSR {
 public:
  SparseCSR() = default;
  SparseCSR(int rows, int cols, std::vector<int> offsets, std::vector<int> columns,
            std::vector<double> values, bool symmetric = false);

  /// Sums duplicate entries.
  static SparseCSR from_triplets(int rows, int cols, std::span<const Triplet> entries,
                                 bool symmetric = false);
  static SparseCSR identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }
  bool symmetric() const { return symmetric_; }
  void set_symmetric(bool flag) { symmetric_ = flag; }

  std::span<const int> offsets() const { return offsets_; }
  std::span<const int> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  /// Position of (row, col) in values(), or -1 if structurally zero.
  long find(int row, int col) const;
  double at(int row, int col) const;
  Vector diagonal() const;

  bool same_pattern(const SparseCSR& other) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

Vector matvec(const SparseCSR& A, std::span<const double> x);
void matvec(const SparseCSR& A, std::span<const double> x, std::span<double> y);

/// a*A + b*B for operators sharing one sparsity pattern.
SparseCSR combine(double a, const SparseCSR& A, double b, const SparseCSR& B);

double dot(std::span<const double> x, std::span<const double> y);
double norm2(std::span<const double> x);

enum class SolveStatus {
  Converged,
  MaxIterations,
  Indefinite,          // CG met non-positive curvature
  Breakdown,           // Krylov recurrence broke down
  InnerSolverFailure,  // Newton: linear solve failed
  DampingFloor,        // Newton: backtracking hit its floor
};

std::string to_string(SolveStatus status);

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  int inner_iterations = 0;       // Newton: summed Krylov iterations
  std::vector<double> history;    // residual norms, one per iteration (plus initial)
};

enum class Preconditioner { None, Jacobi };

/// Preconditioned conjugate gradients on an SPD matrix.
///
/// Stops when ||b - Ax||_2 <= tol * ||b||_2. `x` carries the initial guess
/// in and the best iterate out. Non-positive curvature aborts with
/// SolveStatus::Indefinite and leaves the last iterate in `x`.
SolveReport cg_solve(const SparseCSR& A, std::span<const double> b, Vector& x, double tol,
                     int max_iterations, Preconditioner pc = Preconditioner::Jacobi);

/// MINRES for symmetric (possibly indefinite) systems, preconditioned by
/// |diag(A)|. Same stopping rule as cg_solve.
SolveReport minres_solve(const SparseCSR& A, std::span<const double> b, Vector& x,
                         double tol, int max_iterations);

struct NewtonOptions {
  double tol = 1e-10;          // absolute, on ||residual||_2
  int max_iterations = 50;
  double min_damping = 1.0 / 256.0;
  double linear_tol = 1e-12;
  int linear_max_iterations = 10000;
};

using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<SparseCSR(const Vector&)>;

/// Damped Newton iteration. Linear systems go through Jacobi-CG, falling
/// back to MINRES when CG detects indefiniteness. The step is halved until
/// the residual norm decreases, down to `min_damping`.
SolveReport newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Vector& x,
                         const NewtonOptions& options = {});

}  // namespace tfkpp::la
