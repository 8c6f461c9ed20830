#include "tfkpp/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tfkpp::fem {

TriMesh::TriMesh(int nx, int ny, Bounds bounds) : nx_(nx), ny_(ny), bounds_(bounds) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("mesh needs at least one cell per axis");
  if (!(bounds.x_max > bounds.x_min) || !(bounds.y_max > bounds.y_min) ||
      !std::isfinite(bounds.area())) {
    throw std::invalid_argument("degenerate mesh bounds");
  }

  vertices_.reserve((nx + 1) * (ny + 1));
  on_boundary_.assign((nx + 1) * (ny + 1), false);
  for (int j = 0; j <= ny; ++j) {
    // Last row/column pinned to the bound to avoid drift.
    const double y = j == ny ? bounds.y_max : bounds.y_min + j * hy();
    for (int i = 0; i <= nx; ++i) {
      const double x = i == nx ? bounds.x_max : bounds.x_min + i * hx();
      vertices_.push_back({x, y});
      if (i == 0 || j == 0 || i == nx || j == ny) {
        boundary_.push_back(vertex_index(i, j));
        on_boundary_[vertex_index(i, j)] = true;
      }
    }
  }

  triangles_.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int v00 = vertex_index(i, j), v10 = vertex_index(i + 1, j);
      const int v01 = vertex_index(i, j + 1), v11 = vertex_index(i + 1, j + 1);
      triangles_.push_back({v00, v10, v11});
      triangles_.push_back({v00, v11, v01});
    }
  }

  std::vector<la::Triplet> entries;
  entries.reserve(9 * triangles_.size());
  for (const auto& tri : triangles_) {
    for (int a : tri) {
      for (int b : tri) entries.push_back({a, b, 0.0});
    }
  }
  pattern_ = la::SparseCSR::from_triplets(vertex_count(), vertex_count(), entries, true);

  slots_.reserve(triangles_.size());
  for (const auto& tri : triangles_) {
    std::array<int, 9> slot{};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) slot[3 * a + b] = static_cast<int>(pattern_.find(tri[a], tri[b]));
    }
    slots_.push_back(slot);
  }
}

double TriMesh::h() const { return std::max(hx(), hy()); }

double TriMesh::signed_area(int triangle) const {
  const auto& t = triangles_[triangle];
  const Point& p0 = vertices_[t[0]];
  const Point& p1 = vertices_[t[1]];
  const Point& p2 = vertices_[t[2]];
  return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

TriMesh build_mesh(int nx, int ny, Bounds bounds) { return TriMesh(nx, ny, bounds); }

namespace {

// int_T lambda_a lambda_b lambda_c dx / |T|.
double cubic_moment(int a, int b, int c) {
  if (a == b && b == c) return 1.0 / 10.0;
  if (a == b || b == c || a == c) return 1.0 / 30.0;
  return 1.0 / 60.0;
}

// int_T lambda_a lambda_b dx / |T|.
double quadratic_moment(int a, int b) { return a == b ? 1.0 / 6.0 : 1.0 / 12.0; }

void check_field(const TriMesh& mesh, std::span<const double> u) {
  if (static_cast<int>(u.size()) != mesh.vertex_count()) {
    throw std::invalid_argument("field length does not match mesh vertex count");
  }
}

template <typename ElementFn>
la::SparseCSR assemble_operator(const TriMesh& mesh, ElementFn&& element) {
  la::SparseCSR A = mesh.pattern();
  auto values = A.values();
  const auto slots = mesh.element_slots();
  std::array<double, 9> local{};
  for (int e = 0; e < mesh.triangle_count(); ++e) {
    element(e, local);
    for (int k = 0; k < 9; ++k) values[slots[e][k]] += local[k];
  }
  return A;
}

}  // namespace

la::SparseCSR assemble_mass(const TriMesh& mesh) {
  return assemble_operator(mesh, [&](int e, std::array<double, 9>& local) {
    const double area = mesh.signed_area(e);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) local[3 * a + b] = area * quadratic_moment(a, b);
    }
  });
}

la::SparseCSR assemble_stiffness(const TriMesh& mesh) {
  const auto verts = mesh.vertices();
  const auto tris = mesh.triangles();
  return assemble_operator(mesh, [&](int e, std::array<double, 9>& local) {
    const auto& t = tris[e];
    const double area = mesh.signed_area(e);
    // grad lambda_a = (y_b - y_c, x_c - x_b) / (2|T|) for cyclic (a, b, c).
    std::array<Point, 3> grad{};
    for (int a = 0; a < 3; ++a) {
      const Point& pb = verts[t[(a + 1) % 3]];
      const Point& pc = verts[t[(a + 2) % 3]];
      grad[a] = {(pb.y - pc.y) / (2.0 * area), (pc.x - pb.x) / (2.0 * area)};
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        local[3 * a + b] = area * (grad[a].x * grad[b].x + grad[a].y * grad[b].y);
      }
    }
  });
}

FemMatrices assemble_matrices(const TriMesh& mesh) {
  return {assemble_mass(mesh), assemble_stiffness(mesh)};
}

la::Vector assemble_reaction(const TriMesh& mesh, std::span<const double> u) {
  check_field(mesh, u);
  la::Vector out(mesh.vertex_count(), 0.0);
  const auto tris = mesh.triangles();
  for (int e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = tris[e];
    const double area = mesh.signed_area(e);
    const double ul[3] = {u[t[0]], u[t[1]], u[t[2]]};
    for (int i = 0; i < 3; ++i) {
      double linear = 0.0, quadratic = 0.0;
      for (int a = 0; a < 3; ++a) {
        linear += ul[a] * quadratic_moment(a, i);
        for (int b = 0; b < 3; ++b) quadratic += ul[a] * ul[b] * cubic_moment(a, b, i);
      }
      out[t[i]] += area * (linear - quadratic);
    }
  }
  return out;
}

la::SparseCSR assemble_reaction_jacobian(const TriMesh& mesh, std::span<const double> u) {
  check_field(mesh, u);
  const auto tris = mesh.triangles();
  return assemble_operator(mesh, [&](int e, std::array<double, 9>& local) {
    const auto& t = tris[e];
    const double area = mesh.signed_area(e);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        double weighted = 0.0;
        for (int a = 0; a < 3; ++a) weighted += u[t[a]] * cubic_moment(a, i, j);
        local[3 * i + j] = area * (quadratic_moment(i, j) - 2.0 * weighted);
      }
    }
  });
}

void apply_dirichlet(la::SparseCSR& A, std::span<double> rhs, std::span<const int> boundary,
                     double value) {
  if (A.rows() != A.cols() || static_cast<int>(rhs.size()) != A.rows()) {
    throw std::invalid_argument("Dirichlet elimination needs a square system matching the rhs");
  }
  std::vector<bool> fixed(A.rows(), false);
  for (int b : boundary) fixed.at(b) = true;

  const auto off = A.offsets();
  const auto col = A.columns();
  auto val = A.values();
  for (int i = 0; i < A.rows(); ++i) {
    if (fixed[i]) {
      for (int k = off[i]; k < off[i + 1]; ++k) val[k] = col[k] == i ? 1.0 : 0.0;
      rhs[i] = value;
      continue;
    }
    for (int k = off[i]; k < off[i + 1]; ++k) {
      if (fixed[col[k]]) {
        rhs[i] -= val[k] * value;
        val[k] = 0.0;
      }
    }
  }
}

double integrate(const TriMesh& mesh, std::span<const double> u) {
  check_field(mesh, u);
  double total = 0.0;
  const auto tris = mesh.triangles();
  for (int e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = tris[e];
    total += mesh.signed_area(e) * (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
  }
  return total;
}

double integrate_cube(const TriMesh& mesh, std::span<const double> u) {
  check_field(mesh, u);
  double total = 0.0;
  const auto tris = mesh.triangles();
  for (int e = 0; e < mesh.triangle_count(); ++e) {
    const auto& t = tris[e];
    double local = 0.0;
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        for (int c = 0; c < 3; ++c) local += u[t[a]] * u[t[b]] * u[t[c]] * cubic_moment(a, b, c);
      }
    }
    total += mesh.signed_area(e) * local;
  }
  return total;
}

double l2_norm(const TriMesh& mesh, std::span<const double> u) {
  check_field(mesh, u);
  const auto M = assemble_mass(mesh);
  return std::sqrt(std::max(0.0, la::dot(u, la::matvec(M, u))));
}

double energy(const TriMesh& mesh, const FemMatrices& ops, std::span<const double> u, double D,
              double r) {
  check_field(mesh, u);
  const double grad2 = la::dot(u, la::matvec(ops.stiffness, u));
  const double mass2 = la::dot(u, la::matvec(ops.mass, u));
  return 0.5 * D * grad2 - 0.5 * r * mass2 + r / 3.0 * integrate_cube(mesh, u);
}

double energy(const TriMesh& mesh, std::span<const double> u, double D, double r) {
  return energy(mesh, assemble_matrices(mesh), u, D, r);
}

EigenPair min_eigpair(const TriMesh& mesh, BoundaryKind bc, double D, double tol,
                      int max_iterations) {
  const int n = mesh.vertex_count();
  const auto ops = assemble_matrices(mesh);
  EigenPair out;
  if (bc == BoundaryKind::Neumann) {
    out.lambda = 0.0;
    out.mode.assign(n, 1.0 / std::sqrt(mesh.bounds().area()));
    return out;
  }

  const auto& fixed = mesh.boundary_mask();
  if (static_cast<int>(mesh.boundary_vertices().size()) == n) {
    throw std::invalid_argument("Dirichlet eigenproblem has no interior vertices");
  }
  la::SparseCSR K = ops.stiffness;
  la::Vector scratch(n, 0.0);
  apply_dirichlet(K, scratch, mesh.boundary_vertices(), 0.0);

  la::Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = fixed[i] ? 0.0 : 1.0;
  auto normalise = [&](la::Vector& x) {
    const double s = std::sqrt(la::dot(x, la::matvec(ops.mass, x)));
    for (double& xi : x) xi /= s;
  };
  normalise(v);

  double lambda = la::dot(v, la::matvec(ops.stiffness, v));
  for (int it = 1; it <= max_iterations; ++it) {
    la::Vector rhs = la::matvec(ops.mass, v);
    for (int i = 0; i < n; ++i) {
      if (fixed[i]) rhs[i] = 0.0;
    }
    la::Vector w = v;
    const auto rep = la::cg_solve(K, rhs, w, 1e-13, 20 * n);
    if (!rep.converged) throw std::runtime_error("eigen solve: inner CG failed (" + la::to_string(rep.status) + ")");
    normalise(w);
    const double next = la::dot(w, la::matvec(ops.stiffness, w));
    v.swap(w);
    const bool done = std::abs(next - lambda) <= tol * std::abs(next);
    lambda = next;
    if (done) {
      double mean = 0.0;
      for (double x : v) mean += x;
      if (mean < 0.0) {
        for (double& x : v) x = -x;
      }
      out.lambda = D * lambda;
      out.mode = std::move(v);
      out.iterations = it;
      return out;
    }
  }
  throw std::runtime_error("eigen solve: inverse iteration did not converge");
}

}  // namespace tfkpp::fem
