#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tfkpp/simulation.hpp"

namespace tfkpp::experiments {

/// First time the mass reaches `threshold`, linearly interpolated between
/// levels; nullopt if never reached.
std::optional<double> threshold_time(std::span<const observe::ObservableRow> rows, double threshold);

struct ComparisonReport {
  simulation::Trajectory consistent;
  simulation::Trajectory caputo;
  double half_capacity = 0.0;  // 0.5 * |Omega|
  std::optional<double> t_half_consistent;
  std::optional<double> t_half_caputo;
  std::filesystem::path mass_csv;  // empty unless outputs were written
};

/// Runs both models on identical grids and initial data. The config's model
/// selection is ignored.
ComparisonReport compare_models(const scenarios::RunConfig& config,
                                const simulation::RunOptions& options = {});

std::string format_t_half(const std::optional<double>& t);

/// One run per alpha, run names suffixed with the alpha value.
std::vector<simulation::Trajectory> sweep(const scenarios::RunConfig& config,
                                          const std::vector<double>& alphas,
                                          const simulation::RunOptions& options = {});

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Self-checks of the temporal and finite-element building blocks against
/// closed-form values and independent numerical identities.
std::vector<CheckResult> run_verification();

}  // namespace tfkpp::experiments
