#pragma once

// Conforming P1 elements on a structured triangulation of a rectangle.

#include <array>
#include <span>
#include <vector>

#include "tfkpp/sparse.hpp"

namespace tfkpp::fem {

struct Bounds {
  double x_min = -1.0;
  double x_max = 1.0;
  double y_min = -1.0;
  double y_max = 1.0;

  double area() const { return (x_max - x_min) * (y_max - y_min); }
  bool operator==(const Bounds&) const = default;
};

struct Point {
  double x;
  double y;
};

/// Row-major vertex lattice; every cell is split along its bottom-left to
/// top-right diagonal into two counter-clockwise triangles.
class TriMesh {
 public:
  TriMesh(int nx, int ny, Bounds bounds);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Bounds& bounds() const { return bounds_; }
  double hx() const { return (bounds_.x_max - bounds_.x_min) / nx_; }
  double hy() const { return (bounds_.y_max - bounds_.y_min) / ny_; }
  /// Cell edge length used for the interface width; max(hx, hy).
  double h() const;

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }
  int vertex_index(int i, int j) const { return j * (nx_ + 1) + i; }

  std::span<const Point> vertices() const { return vertices_; }
  std::span<const std::array<int, 3>> triangles() const { return triangles_; }
  std::span<const int> boundary_vertices() const { return boundary_; }
  const std::vector<bool>& boundary_mask() const { return on_boundary_; }

  double signed_area(int triangle) const;

  /// Zero-valued operator with the P1 coupling pattern.
  const la::SparseCSR& pattern() const { return pattern_; }
  /// For each triangle, positions in pattern().values() of its 3x3 block.
  std::span<const std::array<int, 9>> element_slots() const { return slots_; }

 private:
  int nx_, ny_;
  Bounds bounds_;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> boundary_;
  std::vector<bool> on_boundary_;
  la::SparseCSR pattern_;
  std::vector<std::array<int, 9>> slots_;
};

TriMesh build_mesh(int nx, int ny, Bounds bounds);

/// Nodal coefficients of a P1 function.
using Field = std::vector<double>;

struct FemMatrices {
  la::SparseCSR mass;
  la::SparseCSR stiffness;
};

la::SparseCSR assemble_mass(const TriMesh& mesh);
la::SparseCSR assemble_stiffness(const TriMesh& mesh);
FemMatrices assemble_matrices(const TriMesh& mesh);

/// Entries int u(1-u) phi_i dx for the P1 interpolant u (exact integration).
la::Vector assemble_reaction(const TriMesh& mesh, std::span<const double> u);

/// Entries int (1-2u) phi_i phi_j dx (exact integration).
la::SparseCSR assemble_reaction_jacobian(const TriMesh& mesh, std::span<const double> u);

/// Replaces the given rows with identity rows and the rhs with `value`;
/// the matching columns are eliminated into the rhs so symmetry survives.
void apply_dirichlet(la::SparseCSR& A, std::span<double> rhs, std::span<const int> boundary,
                     double value);

double integrate(const TriMesh& mesh, std::span<const double> u);
double integrate_cube(const TriMesh& mesh, std::span<const double> u);
double l2_norm(const TriMesh& mesh, std::span<const double> u);

/// int D/2 |grad u|^2 - r/2 u^2 + r/3 u^3 dx.
double energy(const TriMesh& mesh, std::span<const double> u, double D, double r);
/// Same, reusing assembled operators.
double energy(const TriMesh& mesh, const FemMatrices& ops, std::span<const double> u, double D,
              double r);

enum class BoundaryKind { Neumann, Dirichlet };

struct EigenPair {
  double lambda = 0.0;
  Field mode;  // M-normalised, nonnegative mean
  int iterations = 0;
};

/// Smallest eigenpair of K v = lambda M v (Dirichlet: interior dofs only).
/// The returned eigenvalue is the Laplacian eigenvalue scaled by D.
EigenPair min_eigpair(const TriMesh& mesh, BoundaryKind bc, double D = 1.0,
                      double tol = 1e-8, int max_iterations = 500);

}  // namespace tfkpp::fem
