#include "tfkpp/models.hpp"

#include <cmath>
#include <stdexcept>

namespace tfkpp::models {

void ModelParams::validate() const {
  if (!(D >= 0.0) || !std::isfinite(D)) throw std::invalid_argument("diffusion coefficient D must be nonnegative");
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::invalid_argument("growth rate r must be nonnegative");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (!std::isfinite(bc.value)) throw std::invalid_argument("boundary value must be finite");
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::Consistent ? "consistent" : "caputo";
}

std::string to_string(ReactionMode mode) {
  return mode == ReactionMode::ExplicitHistory ? "explicit_history" : "implicit_last_interval";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "consistent") return ModelKind::Consistent;
  if (text == "caputo" || text == "caputo_in_time") return ModelKind::CaputoInTime;
  throw std::invalid_argument("unknown model '" + text + "' (expected consistent|caputo)");
}

ReactionMode parse_reaction_mode(const std::string& text) {
  if (text == "explicit_history") return ReactionMode::ExplicitHistory;
  if (text == "implicit_last_interval") return ReactionMode::ImplicitLastInterval;
  throw std::invalid_argument("unknown reaction_mode '" + text +
                              "' (expected explicit_history|implicit_last_interval)");
}

SolverError::SolverError(int step, la::SolveReport report, const std::string& what)
    : std::runtime_error("step " + std::to_string(step) + ": " + what + " (" +
                         la::to_string(report.status) + ", " +
                         std::to_string(report.iterations) + " iterations, residual " +
                         std::to_string(report.residual) + ")"),
      step_(step),
      report_(std::move(report)) {}

void History::push(fem::Field u, la::Vector reaction) {
  if (!fields_.empty() && u.size() != fields_.front().size()) {
    throw std::invalid_argument("history field length changed");
  }
  fields_.push_back(std::move(u));
  reactions_.push_back(std::move(reaction));
}

la::Vector History::l1_memory(const fractime::L1Coeffs& coeffs) const {
  const int n = size();
  la::Vector out(fields_.front().size(), 0.0);
  for (int k = 1; k <= n - 1; ++k) {
    const double a = coeffs.a[n - k];
    if (a == 0.0) continue;
    const auto& uk = fields_[k];
    const auto& ukm = fields_[k - 1];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * (uk[i] - ukm[i]);
  }
  return out;
}

la::Vector History::reaction_memory(const fractime::ConvWeights& weights, int last) const {
  la::Vector out(fields_.front().size(), 0.0);
  for (int j = 0; j <= last; ++j) {
    const double b = weights.b[j];
    if (b == 0.0) continue;
    const auto& R = reactions_[j];
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b * R[i];
  }
  return out;
}

namespace {

void check_state(const StepState& s) {
  if (s.n < 1 || s.n > s.grid.steps()) throw std::out_of_range("step index outside grid");
  if (s.history.size() != s.n) throw std::logic_error("history must hold levels 0..n-1");
}

// M (a0 u^{n-1} - memory): the L1 part of every right-hand side.
la::Vector l1_rhs(const StepState& s, double a0, const la::Vector& memory) {
  const auto& prev = s.history.field(s.n - 1);
  la::Vector w(prev.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = a0 * prev[i] - memory[i];
  return la::matvec(s.ops.mass, w);
}

// Solves a0 M u + D K u - c R(u) = rhs by damped Newton from u^{n-1}.
StepResult newton_step(const StepState& s, double a0, double c, const la::Vector& rhs,
                       la::Vector memory) {
  const auto& p = s.params;
  const bool dirichlet = p.bc.kind == fem::BoundaryKind::Dirichlet;
  const auto boundary = s.mesh.boundary_vertices();
  const auto linear = la::combine(a0, s.ops.mass, p.D, s.ops.stiffness);

  la::Vector u = s.history.field(s.n - 1);
  if (dirichlet) {
    for (int b : boundary) u[b] = p.bc.value;
  }

  auto residual = [&](const la::Vector& x) {
    la::Vector F = la::matvec(linear, x);
    if (c != 0.0) {
      const la::Vector R = fem::assemble_reaction(s.mesh, x);
      for (std::size_t i = 0; i < F.size(); ++i) F[i] -= c * R[i];
    }
    for (std::size_t i = 0; i < F.size(); ++i) F[i] -= rhs[i];
    if (dirichlet) {
      for (int b : boundary) F[b] = x[b] - p.bc.value;
    }
    return F;
  };
  auto jacobian = [&](const la::Vector& x) {
    la::SparseCSR J = c != 0.0
                          ? la::combine(1.0, linear, -c, fem::assemble_reaction_jacobian(s.mesh, x))
                          : linear;
    if (dirichlet) {
      la::Vector scratch(J.rows(), 0.0);
      fem::apply_dirichlet(J, scratch, boundary, 0.0);
    }
    return J;
  };

  const auto report = la::newton_solve(residual, jacobian, u, s.newton);
  if (!report.converged) throw SolverError(s.n, report, "Newton solve failed");

  StepResult out;
  out.reaction = fem::assemble_reaction(s.mesh, u);
  out.u = std::move(u);
  out.l1_memory = std::move(memory);
  out.newton_iterations = report.iterations;
  out.linear_iterations = report.inner_iterations;
  out.residual = report.residual;
  return out;
}

}  // namespace

StepResult step_consistent(const StepState& s) {
  check_state(s);
  const auto& p = s.params;
  const auto coeffs = fractime::l1_coeffs(s.grid, p.alpha, s.n);
  const auto weights = fractime::conv_weights(s.grid, p.alpha, s.n);
  const double a0 = coeffs.a[0];
  la::Vector memory = s.history.l1_memory(coeffs);
  la::Vector rhs = l1_rhs(s, a0, memory);

  if (p.reaction_mode == ReactionMode::ImplicitLastInterval) {
    const la::Vector hist = s.history.reaction_memory(weights, s.n - 2);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += p.r * hist[i];
    return newton_step(s, a0, p.r * weights.b[s.n - 1], rhs, std::move(memory));
  }

  const la::Vector hist = s.history.reaction_memory(weights, s.n - 1);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += p.r * hist[i];

  la::SparseCSR A = la::combine(a0, s.ops.mass, p.D, s.ops.stiffness);
  if (p.bc.kind == fem::BoundaryKind::Dirichlet) {
    fem::apply_dirichlet(A, rhs, s.mesh.boundary_vertices(), p.bc.value);
  }
  la::Vector u = s.history.field(s.n - 1);
  if (p.bc.kind == fem::BoundaryKind::Dirichlet) {
    for (int b : s.mesh.boundary_vertices()) u[b] = p.bc.value;
  }
  const auto report = la::cg_solve(A, rhs, u, s.newton.linear_tol, s.newton.linear_max_iterations);
  if (!report.converged) throw SolverError(s.n, report, "linear solve failed");

  StepResult out;
  out.reaction = fem::assemble_reaction(s.mesh, u);
  out.u = std::move(u);
  out.l1_memory = std::move(memory);
  out.linear_iterations = report.iterations;
  out.residual = report.residual;
  return out;
}

StepResult step_caputo(const StepState& s) {
  check_state(s);
  const auto coeffs = fractime::l1_coeffs(s.grid, s.params.alpha, s.n);
  const double a0 = coeffs.a[0];
  la::Vector memory = s.history.l1_memory(coeffs);
  const la::Vector rhs = l1_rhs(s, a0, memory);
  return newton_step(s, a0, s.params.r, rhs, std::move(memory));
}

Stepper::Stepper(const fem::TriMesh& mesh, const fem::FemMatrices& ops, fractime::TimeGrid grid,
                 ModelParams params, fem::Field u0, la::NewtonOptions newton)
    : mesh_(mesh), ops_(ops), grid_(std::move(grid)), params_(params), newton_(newton) {
  params_.validate();
  if (static_cast<int>(u0.size()) != mesh.vertex_count()) {
    throw std::invalid_argument("initial field does not match the mesh");
  }
  squared_norms_.push_back(la::dot(u0, la::matvec(ops_.mass, u0)));
  la::Vector R0 = fem::assemble_reaction(mesh_, u0);
  history_.push(std::move(u0), std::move(R0));
}

const StepResult& Stepper::advance() {
  if (finished()) throw std::logic_error("trajectory already reached the final time");
  const int n = index() + 1;
  const StepState state{n, history_, grid_, mesh_, ops_, params_, newton_};
  last_ = params_.model == ModelKind::Consistent ? step_consistent(state) : step_caputo(state);

  // Discrete Alikhanov check: 1/2 L1(|u|^2) <= (u^n, L1 u)_M.
  const auto coeffs = fractime::l1_coeffs(grid_, params_.alpha, n);
  const auto& prev = history_.field(n - 1);
  const la::Vector Mu = la::matvec(ops_.mass, last_.u);
  const double sq = la::dot(last_.u, Mu);
  double lhs = 0.5 * coeffs.a[0] * (sq - squared_norms_[n - 1]);
  for (int k = 1; k < n; ++k) lhs += 0.5 * coeffs.a[n - k] * (squared_norms_[k] - squared_norms_[k - 1]);
  double rhs = 0.0;
  for (std::size_t i = 0; i < Mu.size(); ++i) {
    rhs += Mu[i] * (coeffs.a[0] * (last_.u[i] - prev[i]) + last_.l1_memory[i]);
  }
  if (lhs > rhs + 1e-12 * coeffs.a[0] * std::max(sq, 1.0)) alikhanov_violations_.push_back(n);
  squared_norms_.push_back(sq);

  history_.push(last_.u, last_.reaction);
  return last_;
}

namespace {

double scalar_reaction(ScalarReaction kind, double lambda, double y) {
  return kind == ScalarReaction::Linear ? lambda * y : lambda * y * (1.0 - y);
}

double scalar_reaction_derivative(ScalarReaction kind, double lambda, double y) {
  return kind == ScalarReaction::Linear ? lambda : lambda * (1.0 - 2.0 * y);
}

// Solves a0*y - c*f(y) = rhs starting from guess.
double scalar_implicit(double a0, double c, double rhs, double guess, ScalarReaction kind,
                       double lambda) {
  if (kind == ScalarReaction::Linear) return rhs / (a0 - c * lambda);
  double y = guess;
  for (int it = 0; it < 100; ++it) {
    const double g = a0 * y - c * scalar_reaction(kind, lambda, y) - rhs;
    const double dg = a0 - c * scalar_reaction_derivative(kind, lambda, y);
    const double step = g / dg;
    y -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(y))) return y;
  }
  throw std::runtime_error("scalar Newton iteration did not converge");
}

}  // namespace

std::vector<double> scalar_solve(double alpha, double lambda, double y0,
                                 const fractime::TimeGrid& grid, ModelKind model,
                                 ScalarReaction reaction, ReactionMode mode) {
  std::vector<double> y{y0};
  std::vector<double> f{scalar_reaction(reaction, lambda, y0)};
  y.reserve(grid.steps() + 1);
  for (int n = 1; n <= grid.steps(); ++n) {
    const auto coeffs = fractime::l1_coeffs(grid, alpha, n);
    const double a0 = coeffs.a[0];
    double memory = 0.0;
    for (int k = 1; k < n; ++k) memory += coeffs.a[n - k] * (y[k] - y[k - 1]);
    const double rhs = a0 * y[n - 1] - memory;

    double next = 0.0;
    if (model == ModelKind::CaputoInTime) {
      next = scalar_implicit(a0, 1.0, rhs, y[n - 1], reaction, lambda);
    } else {
      const auto w = fractime::conv_weights(grid, alpha, n);
      if (mode == ReactionMode::ExplicitHistory) {
        double hist = 0.0;
        for (int j = 0; j < n; ++j) hist += w.b[j] * f[j];
        next = (rhs + hist) / a0;
      } else {
        double hist = 0.0;
        for (int j = 0; j < n - 1; ++j) hist += w.b[j] * f[j];
        next = scalar_implicit(a0, w.b[n - 1], rhs + hist, y[n - 1], reaction, lambda);
      }
    }
    y.push_back(next);
    f.push_back(scalar_reaction(reaction, lambda, next));
  }
  return y;
}

}  // namespace tfkpp::models
