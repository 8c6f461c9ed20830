#pragma once

// Drives one trajectory from a RunConfig: interpolates the initial datum,
// advances the selected model, records observables at every level and
// writes snapshots and the time series when an output directory is set.

#include <filesystem>
#include <functional>
#include <vector>

#include "tfkpp/models.hpp"
#include "tfkpp/observe.hpp"
#include "tfkpp/scenarios.hpp"

namespace tfkpp::simulation {

struct StepInfo {
  int n;
  double t;
  const fem::Field& u;
  const observe::ObservableRow& row;
};

using StepObserver = std::function<void(const StepInfo&)>;

struct RunOptions {
  bool write_outputs = false;
  bool keep_fields = false;
  StepObserver observer{};
  la::NewtonOptions newton{};
};

struct Trajectory {
  std::vector<observe::ObservableRow> rows;
  std::vector<fem::Field> fields;  // every level when keep_fields is set
  fem::Field final_field;
  std::vector<int> alikhanov_violations;
  std::filesystem::path output_dir;  // empty unless outputs were written
  std::vector<std::filesystem::path> snapshots;
};

/// Grid indices of the snapshot times, each rounded to the nearest level.
std::vector<int> snapshot_indices(const fractime::TimeGrid& grid, const std::vector<double>& times);

/// Runs one trajectory. Throws models::SolverError on a failed step after
/// flushing the rows computed so far (when writing outputs).
Trajectory run(const scenarios::RunConfig& config, const RunOptions& options = {});

/// <directory>/<run-name>
std::filesystem::path run_directory(const scenarios::RunConfig& config);

}  // namespace tfkpp::simulation
