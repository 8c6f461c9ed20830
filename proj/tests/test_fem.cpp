#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tfkpp/fem.hpp"

using namespace tfkpp;
using namespace tfkpp::fem;

namespace {

Field nodal(const TriMesh& mesh, double (*f)(double, double)) {
  Field u(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) u[i] = f(mesh.vertices()[i].x, mesh.vertices()[i].y);
  return u;
}

double quad_form(const la::SparseCSR& A, const Field& u) { return la::dot(u, la::matvec(A, u)); }

}  // namespace

TEST_CASE("mesh structure") {
  const auto one = build_mesh(1, 1, {0, 1, 0, 1});
  CHECK(one.vertex_count() == 4);
  CHECK(one.triangle_count() == 2);
  CHECK(one.boundary_vertices().size() == 4);

  for (auto [nx, ny] : {std::pair{1, 1}, {3, 5}, {16, 16}, {7, 2}}) {
    const auto m = build_mesh(nx, ny, {-1, 1, -0.5, 2});
    CHECK(m.vertex_count() == (nx + 1) * (ny + 1));
    CHECK(m.triangle_count() == 2 * nx * ny);
    CHECK(static_cast<int>(m.boundary_vertices().size()) == 2 * (nx + ny));
    double area = 0.0;
    for (int e = 0; e < m.triangle_count(); ++e) {
      CHECK(m.signed_area(e) > 0.0);
      area += m.signed_area(e);
    }
    CHECK(std::abs(area - 5.0) <= 1e-12 * 5.0);
    // row-major ordering
    CHECK(m.vertices()[m.vertex_index(1, 0)].x == doctest::Approx(-1.0 + 2.0 / nx));
    CHECK(m.vertices()[m.vertex_index(0, 1)].y == doctest::Approx(-0.5 + 2.5 / ny));
  }

  CHECK(build_mesh(256, 256, {-1, 1, -1, 1}).h() == std::ldexp(1.0, -7));
  CHECK(build_mesh(64, 64, {-1, 1, -1, 1}).h() == std::ldexp(1.0, -5));

  CHECK_THROWS_AS(build_mesh(0, 4, {}), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(4, 4, {1, 1, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(4, 4, {0, 1, 2, 1}), std::invalid_argument);
}

TEST_CASE("mass matrix") {
  const auto unit = build_mesh(1, 1, {0, 1, 0, 1});
  const auto M1 = assemble_mass(unit);
  // triangle (v0, v1, v3): block (1/24)[[2,1,1],[1,2,1],[1,1,2]]; v1 lies in only this triangle
  CHECK(M1.at(1, 1) == doctest::Approx(2.0 / 24.0).epsilon(1e-15));
  CHECK(M1.at(0, 1) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  CHECK(M1.at(1, 3) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  CHECK(M1.at(1, 2) == 0.0);
  CHECK(M1.at(0, 0) == doctest::Approx(4.0 / 24.0).epsilon(1e-15));

  for (int n : {4, 16, 64}) {
    const auto mesh = build_mesh(n, n, {-1, 1, -1, 1});
    const auto M = assemble_mass(mesh);
    CHECK(M.symmetric());
    double sum = 0.0;
    for (double v : M.values()) sum += v;
    CHECK(std::abs(sum - 4.0) <= 1e-12 * 4.0);
    const auto m1 = la::matvec(M, Field(mesh.vertex_count(), 1.0));
    double s2 = 0.0;
    for (double v : m1) s2 += v;
    CHECK(std::abs(s2 - 4.0) <= 1e-12 * 4.0);
    for (int i = 0; i < mesh.vertex_count(); ++i)
      for (int k = M.offsets()[i]; k < M.offsets()[i + 1]; ++k)
        CHECK(M.values()[k] == M.at(M.columns()[k], i));
  }

  // positive definite on random vectors
  const auto mesh = build_mesh(8, 8, {0, 1, 0, 1});
  const auto M = assemble_mass(mesh);
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Field u(mesh.vertex_count());
    for (double& v : u) v = g(rng);
    CHECK(quad_form(M, u) > 0.0);
  }
}

TEST_CASE("stiffness matrix") {
  const auto mesh = build_mesh(6, 6, {0, 6, 0, 6});  // unit square cells
  const auto K = assemble_stiffness(mesh);
  CHECK(K.symmetric());
  const auto k1 = la::matvec(K, Field(mesh.vertex_count(), 1.0));
  for (double v : k1) CHECK(std::abs(v) <= 1e-12);

  // interior stencil = 5-point Laplacian
  const int c = mesh.vertex_index(3, 3);
  CHECK(K.at(c, c) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(K.at(c, mesh.vertex_index(2, 3)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(K.at(c, mesh.vertex_index(4, 3)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(K.at(c, mesh.vertex_index(3, 2)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(K.at(c, mesh.vertex_index(3, 4)) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(std::abs(K.at(c, mesh.vertex_index(4, 4))) <= 1e-14);
  CHECK(std::abs(K.at(c, mesh.vertex_index(2, 2))) <= 1e-14);

  const auto sq = build_mesh(10, 7, {0, 1, 0, 1});
  const auto Ks = assemble_stiffness(sq);
  CHECK(quad_form(Ks, nodal(sq, [](double x, double) { return x; })) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(quad_form(Ks, nodal(sq, [](double x, double y) { return 2 * x - 3 * y; })) ==
        doctest::Approx(13.0).epsilon(1e-13));

  // positive semidefinite
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Field u(sq.vertex_count());
    for (double& v : u) v = g(rng);
    CHECK(quad_form(Ks, u) >= -1e-12);
  }
}

TEST_CASE("affine interpolants are discretely harmonic at interior vertices") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const auto mesh = build_mesh(13, 9, {-1, 2, -0.5, 0.5});
  const auto K = assemble_stiffness(mesh);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = coef(rng), b = coef(rng), c = coef(rng);
    Field u(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) u[i] = a + b * mesh.vertices()[i].x + c * mesh.vertices()[i].y;
    const auto Ku = la::matvec(K, u);
    for (int i = 0; i < mesh.vertex_count(); ++i)
      if (!mesh.boundary_mask()[i]) CHECK(std::abs(Ku[i]) <= 1e-12);
  }
}

TEST_CASE("mass sum is the area at every refinement") {
  for (int n = 1; n <= 128; n *= 2) {
    const auto M = assemble_mass(build_mesh(n, n + 1, {-1, 1, -1, 1}));
    double sum = 0.0;
    for (double v : M.values()) sum += v;
    CHECK(std::abs(sum - 4.0) <= 1e-12 * 4.0);
  }
}

TEST_CASE("reaction vector and Jacobian: constant states") {
  const auto mesh = build_mesh(5, 4, {-1, 1, -1, 1});
  const auto M = assemble_mass(mesh);
  const int n = mesh.vertex_count();
  for (double v : assemble_reaction(mesh, Field(n, 0.0))) CHECK(v == 0.0);
  for (double v : assemble_reaction(mesh, Field(n, 1.0))) CHECK(std::abs(v) <= 1e-16);
  const auto half = assemble_reaction(mesh, Field(n, 0.5));
  const auto m1 = la::matvec(M, Field(n, 1.0));
  for (int i = 0; i < n; ++i) CHECK(half[i] == doctest::Approx(0.25 * m1[i]).epsilon(1e-14));

  const auto J0 = assemble_reaction_jacobian(mesh, Field(n, 0.0));
  const auto Jh = assemble_reaction_jacobian(mesh, Field(n, 0.5));
  const auto J1 = assemble_reaction_jacobian(mesh, Field(n, 1.0));
  REQUIRE(J0.same_pattern(M));
  for (std::size_t k = 0; k < M.nonzeros(); ++k) {
    CHECK(J0.values()[k] == doctest::Approx(M.values()[k]).epsilon(1e-14));
    CHECK(std::abs(Jh.values()[k]) <= 1e-16);
    CHECK(J1.values()[k] == doctest::Approx(-M.values()[k]).epsilon(1e-14));
  }
}

TEST_CASE("reaction vector is exact against a fine quadrature") {
  // Single triangle (0,0),(1,0),(1,1) of the unit-cell mesh; u = nodal values (a,b,c).
  const auto mesh = build_mesh(1, 1, {0, 1, 0, 1});
  const Field u = {0.2, 0.9, 0.0, 0.6};
  const auto R = assemble_reaction(mesh, u);
  // vertex 1 only touches triangle (v0, v1, v3): phi_1 = x - y on it
  auto uh = [&](double x, double y) { return u[0] * (1 - x) + u[1] * (x - y) + u[3] * y; };
  auto inner = [&](double x) {
    return oracle::simpson([&](double y) { const double w = uh(x, y); return w * (1 - w) * (x - y); }, 0.0, x, 200);
  };
  const double ref = oracle::simpson(inner, 0.0, 1.0, 200);
  CHECK(R[1] == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("reaction Jacobian matches finite differences") {
  const auto mesh = build_mesh(4, 3, {0, 1, 0, 1});
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> dist(-0.2, 1.2);
  const int n = mesh.vertex_count();
  for (int trial = 0; trial < 3; ++trial) {
    Field u(n);
    for (double& v : u) v = dist(rng);
    const auto J = assemble_reaction_jacobian(mesh, u);
    const double step = 1e-6;
    for (int j = 0; j < n; ++j) {
      Field up = u, um = u;
      up[j] += step;
      um[j] -= step;
      const auto Rp = assemble_reaction(mesh, up);
      const auto Rm = assemble_reaction(mesh, um);
      double col_norm = 0.0, err = 0.0;
      for (int i = 0; i < n; ++i) {
        const double fd = (Rp[i] - Rm[i]) / (2 * step);
        col_norm = std::max(col_norm, std::abs(J.at(i, j)));
        err = std::max(err, std::abs(fd - J.at(i, j)));
      }
      CHECK(err <= 1e-6 * col_norm);
    }
  }
}

TEST_CASE("reaction vector is minus the gradient of the reaction energy") {
  const auto mesh = build_mesh(8, 8, {0, 1, 0, 1});
  const Field u = nodal(mesh, [](double x, double y) { return 0.3 + 0.2 * x * x + 0.4 * std::sin(3.0 * y); });
  const double r = 5.0, step = 1e-5;
  const auto R = assemble_reaction(mesh, u);
  for (int i = 0; i < mesh.vertex_count(); i += 7) {
    Field up = u, um = u;
    up[i] += step;
    um[i] -= step;
    auto part = [&](const Field& x) { return energy(mesh, x, 1.0, r) - energy(mesh, x, 1.0, 0.0); };
    const double fd = (part(up) - part(um)) / (2 * step);
    CHECK(std::abs(fd + r * R[i]) <= 1e-6 * std::abs(r * R[i]));
  }
}

TEST_CASE("integrals, norms and energy") {
  const auto big = build_mesh(10, 10, {-1, 1, -1, 1});
  const int n = big.vertex_count();
  CHECK(integrate(big, Field(n, 1.0)) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(integrate(big, Field(n, 0.0)) == 0.0);
  CHECK(l2_norm(big, Field(n, 1.0)) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(l2_norm(big, Field(n, 0.0)) == 0.0);
  CHECK(energy(big, Field(n, 0.0), 1e-3, 5.0) == 0.0);
  CHECK(energy(big, Field(n, 1.0), 0.7, 5.0) == doctest::Approx(-10.0 / 3.0).epsilon(1e-13));
  CHECK(integrate_cube(big, Field(n, 2.0)) == doctest::Approx(32.0).epsilon(1e-13));

  const auto sq = build_mesh(9, 5, {0, 1, 0, 1});
  CHECK(integrate(sq, nodal(sq, [](double x, double) { return x; })) == doctest::Approx(0.5).epsilon(1e-14));
  // int x^3 over the unit square is exact for the linear interpolant of x
  CHECK(integrate_cube(sq, nodal(sq, [](double x, double) { return x; })) ==
        doctest::Approx(0.25).epsilon(1e-13));

  const auto ops = assemble_matrices(sq);
  const Field w = nodal(sq, [](double x, double y) { return std::cos(x) * y; });
  CHECK(energy(sq, ops, w, 0.3, 2.0) == energy(sq, w, 0.3, 2.0));
}

TEST_CASE("Dirichlet elimination") {
  {
    const auto mesh = build_mesh(1, 1, {0, 1, 0, 1});
    auto A = assemble_stiffness(mesh);
    Field rhs(4, 3.0);
    std::vector<int> all(mesh.boundary_vertices().begin(), mesh.boundary_vertices().end());
    apply_dirichlet(A, rhs, all, 0.0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(A.at(i, j) == (i == j ? 1.0 : 0.0));
    for (double v : rhs) CHECK(v == 0.0);
  }
  {
    const auto mesh = build_mesh(12, 12, {0, 1, 0, 1});
    auto K = assemble_stiffness(mesh);
    Field rhs(mesh.vertex_count(), 0.0);
    apply_dirichlet(K, rhs, mesh.boundary_vertices(), 0.0);
    CHECK(K.symmetric());
    for (int i = 0; i < mesh.vertex_count(); ++i)
      for (int k = K.offsets()[i]; k < K.offsets()[i + 1]; ++k)
        CHECK(K.values()[k] == K.at(K.columns()[k], i));
    Field u(mesh.vertex_count(), 0.5);
    const auto rep = la::cg_solve(K, rhs, u, 1e-14, 2000);
    CHECK(rep.converged);
    for (double v : u) CHECK(std::abs(v) <= 1e-12);
  }
  {
    // nonzero value: the discrete harmonic extension of a constant is that constant
    const auto mesh = build_mesh(8, 8, {0, 1, 0, 1});
    auto K = assemble_stiffness(mesh);
    Field rhs(mesh.vertex_count(), 0.0);
    apply_dirichlet(K, rhs, mesh.boundary_vertices(), 0.75);
    Field u(mesh.vertex_count(), 0.0);
    CHECK(la::cg_solve(K, rhs, u, 1e-14, 2000).converged);
    for (double v : u) CHECK(v == doctest::Approx(0.75).epsilon(1e-12));
  }
}

TEST_CASE("smallest eigenpair") {
  const auto mesh = build_mesh(16, 16, {-1, 1, -1, 1});
  const auto neu = min_eigpair(mesh, BoundaryKind::Neumann);
  CHECK(neu.lambda == 0.0);
  const auto M = assemble_mass(mesh);
  CHECK(quad_form(M, neu.mode) == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : neu.mode) CHECK(v == doctest::Approx(neu.mode[0]).epsilon(1e-14));

  const double pi2 = std::numbers::pi * std::numbers::pi;
  const auto unit = min_eigpair(build_mesh(64, 64, {0, 1, 0, 1}), BoundaryKind::Dirichlet);
  CHECK(std::abs(unit.lambda - 2 * pi2) <= 1e-2 * 2 * pi2);
  const auto big_mesh = build_mesh(64, 64, {-1, 1, -1, 1});
  const auto big = min_eigpair(big_mesh, BoundaryKind::Dirichlet);
  CHECK(std::abs(big.lambda - pi2 / 2) <= 1e-2 * pi2 / 2);
  // D scales the eigenvalue
  CHECK(min_eigpair(big_mesh, BoundaryKind::Dirichlet, 2.0).lambda == doctest::Approx(2.0 * big.lambda).epsilon(1e-7));

  // eigen-residual and boundary values; the eigenvector error scales like sqrt(tol)
  const auto tight = min_eigpair(big_mesh, BoundaryKind::Dirichlet, 1.0, 1e-13);
  CHECK(tight.lambda == doctest::Approx(big.lambda).epsilon(1e-7));
  const auto ops = assemble_matrices(big_mesh);
  const auto Kv = la::matvec(ops.stiffness, tight.mode);
  const auto Mv = la::matvec(ops.mass, tight.mode);
  double res = 0.0, scale = 0.0;
  for (int i = 0; i < big_mesh.vertex_count(); ++i) {
    if (big_mesh.boundary_mask()[i]) {
      CHECK(tight.mode[i] == 0.0);
      continue;
    }
    res = std::max(res, std::abs(Kv[i] - tight.lambda * Mv[i]));
    scale = std::max(scale, std::abs(Kv[i]));
    CHECK(tight.mode[i] > 0.0);
  }
  CHECK(res <= 1e-5 * scale);
  CHECK_THROWS(min_eigpair(mesh, BoundaryKind::Dirichlet, 1.0, 1e-14, 1));
}

TEST_CASE("Dirichlet eigenvalue converges at second order") {
  const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
  std::vector<double> errors, sizes;
  for (int n : {8, 16, 32, 64}) {
    const auto mesh = build_mesh(n, n, {0, 1, 0, 1});
    errors.push_back(std::abs(min_eigpair(mesh, BoundaryKind::Dirichlet, 1.0, 1e-12).lambda - exact));
    sizes.push_back(mesh.h());
  }
  const auto orders = oracle::observed_orders(errors, sizes);
  for (double p : orders) CHECK(p >= 1.8);
}
