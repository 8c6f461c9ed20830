#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "tfkpp/fem.hpp"
#include "tfkpp/fractime.hpp"
#include "tfkpp/models.hpp"

using namespace tfkpp;
using namespace tfkpp::models;

namespace {

struct Setup {
  fem::TriMesh mesh;
  fem::FemMatrices ops;
  explicit Setup(int n, fem::Bounds b = {}) : mesh(fem::build_mesh(n, n, b)), ops(fem::assemble_matrices(mesh)) {}
};

fem::Field bump(const fem::TriMesh& mesh) {
  fem::Field u(mesh.vertex_count());
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    const auto p = mesh.vertices()[i];
    u[i] = 1.0 / (1.0 + std::exp(2.0 * (std::hypot(p.x, p.y) - 0.4) / 0.4));
  }
  return u;
}

double max_diff(const fem::Field& a, const fem::Field& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

ModelParams params(double alpha, ModelKind model, ReactionMode mode = ReactionMode::ExplicitHistory) {
  ModelParams p;
  p.alpha = alpha;
  p.model = model;
  p.reaction_mode = mode;
  return p;
}

}  // namespace

TEST_CASE("parameter validation and names") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.alpha = 1.0;
  p.D = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.D = 0.0;
  CHECK_NOTHROW(p.validate());
  p.r = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  for (auto k : {ModelKind::Consistent, ModelKind::CaputoInTime}) CHECK(parse_model_kind(to_string(k)) == k);
  for (auto m : {ReactionMode::ExplicitHistory, ReactionMode::ImplicitLastInterval})
    CHECK(parse_reaction_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_model_kind("wrong"), std::invalid_argument);
  CHECK_THROWS_AS(parse_reaction_mode("wrong"), std::invalid_argument);
}

TEST_CASE("scalar mode: closed forms") {
  const auto g = fractime::graded_grid(40, 1.0, 2.0);
  const double dt = 2.0 / 40;
  for (auto model : {ModelKind::CaputoInTime, ModelKind::Consistent}) {
    const auto y = scalar_solve(1.0, -1.0, 1.0, g, model, ScalarReaction::Linear,
                                ReactionMode::ImplicitLastInterval);
    for (int n = 0; n <= 40; ++n) CHECK(y[n] == doctest::Approx(std::pow(1.0 + dt, -n)).epsilon(1e-13));
  }
  for (double alpha : {0.3, 0.7, 1.0}) {
    for (auto model : {ModelKind::CaputoInTime, ModelKind::Consistent}) {
      for (auto reaction : {ScalarReaction::Linear, ScalarReaction::Logistic}) {
        for (double v : scalar_solve(alpha, 0.0, 0.37, g, model, reaction)) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("scalar mode: fractional relaxation against Mittag-Leffler") {
  const auto g = fractime::graded_grid(1024, 3.0, 1.0);
  const auto y = scalar_solve(0.5, -1.0, 1.0, g, ModelKind::CaputoInTime);
  const double exact = oracle::ml_half_negative(1.0);
  CHECK(std::abs(y.back() - exact) <= 1e-2 * exact);
  // decays monotonically and stays positive
  for (std::size_t n = 1; n < y.size(); ++n) {
    CHECK(y[n] < y[n - 1]);
    CHECK(y[n] > 0.0);
  }
}

TEST_CASE("scalar mode: consistent model reduces to exponential growth") {
  // g_alpha * (C d^alpha y) = y - y0 turns C d^alpha y = lambda g_{1-alpha} * y into y' = lambda y.
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto g = fractime::graded_grid(2048, 1.0, 1.0);
    for (auto mode : {ReactionMode::ExplicitHistory, ReactionMode::ImplicitLastInterval}) {
      const auto y = scalar_solve(alpha, -1.0, 1.0, g, ModelKind::Consistent, ScalarReaction::Linear, mode);
      CHECK(std::abs(y.back() - std::exp(-1.0)) <= 1e-2 * std::exp(-1.0));
    }
  }
}

TEST_CASE("scalar mode: logistic growth") {
  // Only the Caputo-in-time form has a comparison principle; the memory in the
  // consistent reaction term lets it overshoot the carrying capacity slightly.
  const auto g = fractime::graded_grid(200, 2.0, 5.0);
  for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
    for (auto model : {ModelKind::CaputoInTime, ModelKind::Consistent}) {
      const auto y = scalar_solve(alpha, 5.0, 0.05, g, model, ScalarReaction::Logistic,
                                  ReactionMode::ImplicitLastInterval);
      double peak = 0.0;
      for (std::size_t n = 1; n < y.size(); ++n) {
        CHECK(y[n] > 0.0);
        peak = std::max(peak, y[n]);
      }
      if (model == ModelKind::CaputoInTime) CHECK(peak <= 1.0 + 1e-12);
      else CHECK(peak <= 1.01);
      CHECK(y.back() > 0.85);
    }
  }
}

TEST_CASE("equilibria are fixed points of both steppers") {
  Setup s(8);
  const auto grid = fractime::graded_grid(6, 2.0, 5.0);
  for (double alpha : {0.25, 0.5, 0.75, 1.0}) {
    for (auto model : {ModelKind::Consistent, ModelKind::CaputoInTime}) {
      for (auto mode : {ReactionMode::ExplicitHistory, ReactionMode::ImplicitLastInterval}) {
        for (double c : {0.0, 1.0}) {
          Stepper st(s.mesh, s.ops, grid, params(alpha, model, mode), fem::Field(s.mesh.vertex_count(), c));
          while (!st.finished()) st.advance();
          for (double v : st.current()) CHECK(std::abs(v - c) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("alpha = 1, r = 0 consistent step is a backward Euler heat step") {
  Setup s(10);
  const auto grid = fractime::graded_grid(5, 2.0, 1.0);
  auto p = params(1.0, ModelKind::Consistent);
  p.r = 0.0;
  p.D = 0.05;
  Stepper st(s.mesh, s.ops, grid, p, bump(s.mesh));
  while (!st.finished()) {
    const int n = st.index() + 1;
    const fem::Field prev = st.current();
    const auto& res = st.advance();
    const double dt = grid.dt(n);
    const auto A = la::combine(1.0 / dt, s.ops.mass, p.D, s.ops.stiffness);
    auto rhs = la::matvec(s.ops.mass, prev);
    for (double& v : rhs) v /= dt;
    fem::Field ref(prev.size(), 0.0);
    REQUIRE(la::cg_solve(A, rhs, ref, 1e-14, 5000).converged);
    CHECK(max_diff(res.u, ref) <= 1e-10);
  }
}

TEST_CASE("alpha = 1: Caputo step is backward-Euler Fisher-KPP") {
  Setup s(10);
  const auto grid = fractime::graded_grid(4, 1.0, 0.5);
  auto p = params(1.0, ModelKind::CaputoInTime);
  p.D = 0.01;
  const auto u0 = bump(s.mesh);
  Stepper st(s.mesh, s.ops, grid, p, u0);
  const auto& res = st.advance();
  // independent Newton on u/dt M + D K u - r R(u) = M u0 / dt
  const double dt = grid.dt(1);
  const auto A = la::combine(1.0 / dt, s.ops.mass, p.D, s.ops.stiffness);
  auto rhs = la::matvec(s.ops.mass, u0);
  for (double& v : rhs) v /= dt;
  fem::Field u = u0;
  auto F = [&](const la::Vector& x) {
    auto f = la::matvec(A, x);
    const auto R = fem::assemble_reaction(s.mesh, x);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= p.r * R[i] + rhs[i];
    return f;
  };
  auto J = [&](const la::Vector& x) { return la::combine(1.0, A, -p.r, fem::assemble_reaction_jacobian(s.mesh, x)); };
  la::NewtonOptions opt;
  opt.tol = 1e-13;
  REQUIRE(la::newton_solve(F, J, u, opt).converged);
  CHECK(max_diff(res.u, u) <= 1e-10);
}

TEST_CASE("alpha = 1: the two models coincide stepwise") {
  Setup s(12);
  const auto grid = fractime::graded_grid(20, 2.0, 2.0);
  Stepper a(s.mesh, s.ops, grid, params(1.0, ModelKind::Consistent, ReactionMode::ImplicitLastInterval), bump(s.mesh));
  Stepper b(s.mesh, s.ops, grid, params(1.0, ModelKind::CaputoInTime), bump(s.mesh));
  while (!a.finished()) {
    a.advance();
    b.advance();
    CHECK(max_diff(a.current(), b.current()) <= 1e-10);
  }
}

TEST_CASE("alpha = 1: discrete mass balance under Neumann") {
  Setup s(12);
  const auto grid = fractime::graded_grid(15, 2.0, 2.0);
  struct Case {
    ModelKind model;
    ReactionMode mode;
    bool implicit;
  };
  for (auto c : {Case{ModelKind::Consistent, ReactionMode::ImplicitLastInterval, true},
                 Case{ModelKind::Consistent, ReactionMode::ExplicitHistory, false},
                 Case{ModelKind::CaputoInTime, ReactionMode::ExplicitHistory, true}}) {
    const auto p = params(1.0, c.model, c.mode);
    Stepper st(s.mesh, s.ops, grid, p, bump(s.mesh));
    while (!st.finished()) {
      const int n = st.index() + 1;
      const double m_prev = fem::integrate(s.mesh, st.current());
      const auto R_prev = st.history().reaction(n - 1);
      const auto& res = st.advance();
      const auto& R = c.implicit ? res.reaction : R_prev;
      double total = 0.0;
      for (double v : R) total += v;
      const double balance = (fem::integrate(s.mesh, res.u) - m_prev) / grid.dt(n) - p.r * total;
      CHECK(std::abs(balance) <= 1e-8);
    }
  }
}

TEST_CASE("history cache, determinism and Dirichlet data") {
  Setup s(10);
  const auto grid = fractime::graded_grid(12, 2.0, 0.2);
  for (auto model : {ModelKind::Consistent, ModelKind::CaputoInTime}) {
    auto p = params(0.5, model);
    Stepper a(s.mesh, s.ops, grid, p, bump(s.mesh));
    Stepper b(s.mesh, s.ops, grid, p, bump(s.mesh));
    while (!a.finished()) {
      a.advance();
      b.advance();
      REQUIRE(std::memcmp(a.current().data(), b.current().data(), a.current().size() * sizeof(double)) == 0);
    }
    for (int j = 0; j < a.history().size(); j += 4) {
      const auto R = fem::assemble_reaction(s.mesh, a.history().field(j));
      CHECK(max_diff(R, a.history().reaction(j)) <= 1e-14);
    }
    CHECK(a.history().size() == 13);
    CHECK(a.time() == 0.2);
    CHECK_THROWS_AS(a.advance(), std::logic_error);

    p.bc = {fem::BoundaryKind::Dirichlet, 0.0};
    Stepper d(s.mesh, s.ops, grid, p, bump(s.mesh));
    while (!d.finished()) d.advance();
    for (int v : s.mesh.boundary_vertices()) CHECK(d.current()[v] == 0.0);
  }
}

TEST_CASE("identity evolution for r = 0, D = 0") {
  Setup s(6);
  const auto grid = fractime::graded_grid(5, 2.0, 1.0);
  for (auto model : {ModelKind::Consistent, ModelKind::CaputoInTime}) {
    auto p = params(0.5, model);
    p.r = 0.0;
    p.D = 0.0;
    const auto u0 = bump(s.mesh);
    Stepper st(s.mesh, s.ops, grid, p, u0);
    while (!st.finished()) st.advance();
    CHECK(max_diff(st.current(), u0) <= 1e-12);
  }
}

TEST_CASE("Newton converges quadratically on the Caputo per-step system") {
  Setup s(16);
  const auto grid = fractime::graded_grid(8, 2.0, 0.2);
  const auto p = params(0.5, ModelKind::CaputoInTime);
  Stepper st(s.mesh, s.ops, grid, p, bump(s.mesh));
  for (int k = 0; k < 3; ++k) st.advance();

  // Rebuild step 4 independently and log the Newton trace.
  const int n = 4;
  const auto coeffs = fractime::l1_coeffs(grid, p.alpha, n);
  const double a0 = coeffs.a[0];
  const auto memory = st.history().l1_memory(coeffs);
  fem::Field w(memory.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = a0 * st.current()[i] - memory[i];
  const auto rhs = la::matvec(s.ops.mass, w);
  const auto A = la::combine(a0, s.ops.mass, p.D, s.ops.stiffness);
  auto F = [&](const la::Vector& x) {
    auto f = la::matvec(A, x);
    const auto R = fem::assemble_reaction(s.mesh, x);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= p.r * R[i] + rhs[i];
    return f;
  };
  auto J = [&](const la::Vector& x) { return la::combine(1.0, A, -p.r, fem::assemble_reaction_jacobian(s.mesh, x)); };
  fem::Field u = st.current();
  la::NewtonOptions opt;
  opt.tol = 1e-13;
  const auto rep = la::newton_solve(F, J, u, opt);
  REQUIRE(rep.converged);
  const auto& h = rep.history;
  int checked = 0;
  for (std::size_t k = 1; k < h.size(); ++k) {
    if (h[k - 1] < 1e-3 && h[k] > 1e-13) {
      CHECK(h[k] <= 10.0 * h[k - 1] * h[k - 1]);
      ++checked;
    }
  }
  CHECK(checked >= 1);

  const auto& res = st.advance();
  CHECK(max_diff(res.u, u) <= 1e-10);
}

TEST_CASE("solver failures carry the step index") {
  Setup s(6);
  const auto grid = fractime::graded_grid(4, 2.0, 1.0);
  la::NewtonOptions bad;
  bad.tol = 1e-300;
  bad.max_iterations = 2;
  Stepper st(s.mesh, s.ops, grid, params(0.5, ModelKind::CaputoInTime), bump(s.mesh), bad);
  try {
    st.advance();
    FAIL("expected a solver failure");
  } catch (const SolverError& e) {
    CHECK(e.step() == 1);
    CHECK_FALSE(e.report().converged);
  }

  la::NewtonOptions lin;
  lin.linear_max_iterations = 1;
  lin.linear_tol = 1e-16;
  Stepper c(s.mesh, s.ops, grid, params(0.5, ModelKind::Consistent), bump(s.mesh), lin);
  CHECK_THROWS_AS(c.advance(), SolverError);

  CHECK_THROWS_AS(Stepper(s.mesh, s.ops, grid, params(0.5, ModelKind::Consistent), fem::Field(3, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("Alikhanov diagnostic runs without failing") {
  Setup s(8);
  const auto grid = fractime::graded_grid(60, 2.0, 1.0);
  Stepper st(s.mesh, s.ops, grid, params(0.5, ModelKind::CaputoInTime), bump(s.mesh));
  while (!st.finished()) st.advance();
  MESSAGE("Alikhanov violations: " << st.alikhanov_violations().size() << " of 60 steps");
  for (int n : st.alikhanov_violations()) CHECK((n >= 1 && n <= 60));
}

TEST_CASE("coarse Caputo steps: leading coefficient below r") {
  // a0 = dt^-alpha / Gamma(2 - alpha) < r gives two roots per node and an
  // indefinite Jacobian; the step either succeeds or reports a SolverError.
  Setup s(16);
  const auto grid = fractime::graded_grid(8, 2.0, 5.0);
  CHECK(fractime::l1_coeffs(grid, 0.5, 1).a[0] < 5.0);
  Stepper st(s.mesh, s.ops, grid, params(0.5, ModelKind::CaputoInTime), bump(s.mesh));
  try {
    while (!st.finished()) st.advance();
  } catch (const SolverError& e) {
    CHECK(e.step() >= 1);
    CHECK(e.report().status != la::SolveStatus::Converged);
  }
}
