#pragma once

// Fully discrete time steppers for the time-fractional Fisher-KPP problem.
//
//   Consistent:    C d^alpha u = D Lap u + r g_{1-alpha} * (u - u^2)
//   CaputoInTime:  C d^alpha u = D Lap u + r (u - u^2)
//
// Both use the graded L1 scheme in time and P1 elements in space; the
// memory integral of the consistent model uses the same kernel weights.

#include <stdexcept>
#include <string>
#include <vector>

#include "tfkpp/fem.hpp"
#include "tfkpp/fractime.hpp"
#include "tfkpp/sparse.hpp"

namespace tfkpp::models {

enum class ModelKind { Consistent, CaputoInTime };

/// How the consistent model treats the newest interval of the memory sum.
enum class ReactionMode {
  ExplicitHistory,       // left-endpoint rule on every interval; linear SPD step
  ImplicitLastInterval,  // last interval uses u^n; Newton step
};

struct BoundaryCondition {
  fem::BoundaryKind kind = fem::BoundaryKind::Neumann;
  double value = 0.0;  // Dirichlet value

  bool operator==(const BoundaryCondition&) const = default;
};

struct ModelParams {
  double D = 1e-3;
  double r = 5.0;
  double alpha = 0.5;
  ModelKind model = ModelKind::Consistent;
  BoundaryCondition bc{};
  ReactionMode reaction_mode = ReactionMode::ExplicitHistory;

  /// Throws std::invalid_argument on D < 0, r < 0 or alpha outside (0, 1].
  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

std::string to_string(ModelKind kind);
std::string to_string(ReactionMode mode);
ModelKind parse_model_kind(const std::string& text);
ReactionMode parse_reaction_mode(const std::string& text);

/// Error raised when a per-step solve fails; carries the step index.
class SolverError : public std::runtime_error {
 public:
  SolverError(int step, la::SolveReport report, const std::string& what);
  int step() const { return step_; }
  const la::SolveReport& report() const { return report_; }

 private:
  int step_;
  la::SolveReport report_;
};

/// Every past field u^0..u^{n-1} and its cached reaction vector.
class History {
 public:
  void push(fem::Field u, la::Vector reaction);
  int size() const { return static_cast<int>(fields_.size()); }
  const fem::Field& field(int k) const { return fields_.at(k); }
  const la::Vector& reaction(int j) const { return reactions_.at(j); }

  /// sum_{k=1}^{n-1} a_{n-k}^(n) (u^k - u^{k-1}) with n = size().
  la::Vector l1_memory(const fractime::L1Coeffs& coeffs) const;
  /// sum_{j=0}^{last} b_j^(n) R^j.
  la::Vector reaction_memory(const fractime::ConvWeights& weights, int last) const;

 private:
  std::vector<fem::Field> fields_;
  std::vector<la::Vector> reactions_;
};

struct StepState {
  int n;  // index of the level being computed; history holds 0..n-1
  const History& history;
  const fractime::TimeGrid& grid;
  const fem::TriMesh& mesh;
  const fem::FemMatrices& ops;
  const ModelParams& params;
  la::NewtonOptions newton{};
};

struct StepResult {
  fem::Field u;
  la::Vector reaction;  // assemble_reaction(u), cached for the history
  la::Vector l1_memory; // nodal L1 history sum used by the step
  int newton_iterations = 0;
  int linear_iterations = 0;
  double residual = 0.0;
};

StepResult step_consistent(const StepState& state);
StepResult step_caputo(const StepState& state);

/// Owns the history of one trajectory and advances it level by level.
class Stepper {
 public:
  Stepper(const fem::TriMesh& mesh, const fem::FemMatrices& ops, fractime::TimeGrid grid,
          ModelParams params, fem::Field u0, la::NewtonOptions newton = {});

  /// Computes u^{n+1}. Throws SolverError on failure.
  const StepResult& advance();

  int index() const { return history_.size() - 1; }
  bool finished() const { return index() >= grid_.steps(); }
  double time() const { return grid_.t(index()); }
  const fem::Field& current() const { return history_.field(index()); }
  const History& history() const { return history_; }
  const fractime::TimeGrid& grid() const { return grid_; }
  const ModelParams& params() const { return params_; }

  /// Steps at which the discrete Alikhanov inequality
  /// 1/2 L1(||u||_M^2) <= (u, L1 u)_M failed (diagnostic only).
  const std::vector<int>& alikhanov_violations() const { return alikhanov_violations_; }

 private:
  const fem::TriMesh& mesh_;
  const fem::FemMatrices& ops_;
  fractime::TimeGrid grid_;
  ModelParams params_;
  la::NewtonOptions newton_;
  History history_;
  std::vector<double> squared_norms_;
  std::vector<int> alikhanov_violations_;
  StepResult last_;
};

enum class ScalarReaction { Linear, Logistic };

/// 0-D analogue of the steppers (M = 1, K = 0) for f(y) = lambda*y or
/// lambda*y*(1-y). Returns y at every grid point.
std::vector<double> scalar_solve(double alpha, double lambda, double y0,
                                 const fractime::TimeGrid& grid, ModelKind model,
                                 ScalarReaction reaction = ScalarReaction::Linear,
                                 ReactionMode mode = ReactionMode::ExplicitHistory);

}  // namespace tfkpp::models
