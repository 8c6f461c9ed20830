#include "tfkpp/simulation.hpp"

#include <cmath>
#include <cstdio>

namespace tfkpp::simulation {

std::vector<int> snapshot_indices(const fractime::TimeGrid& grid, const std::vector<double>& times) {
  std::vector<int> out;
  for (double t : times) {
    int best = 0;
    for (int n = 1; n <= grid.steps(); ++n) {
      if (std::abs(grid.t(n) - t) < std::abs(grid.t(best) - t)) best = n;
    }
    out.push_back(best);
  }
  return out;
}

std::filesystem::path run_directory(const scenarios::RunConfig& config) {
  return std::filesystem::path(config.output.directory) / config.run_name();
}

namespace {

std::string time_label(double t) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

void write_snapshots(const scenarios::RunConfig& config, const fem::TriMesh& mesh,
                     const fem::Field& u, double t, Trajectory& traj) {
  for (auto format : config.output.formats) {
    const bool vtk = format == scenarios::SnapshotFormat::Vtk;
    const auto path = traj.output_dir / "snapshots" / ("u_" + time_label(t) + (vtk ? ".vtk" : ".csv"));
    observe::write_snapshot(mesh, u, t, path, format);
    traj.snapshots.push_back(path);
  }
}

}  // namespace

Trajectory run(const scenarios::RunConfig& config, const RunOptions& options) {
  config.validate();
  const fem::TriMesh mesh = scenarios::make_mesh(config);
  const fem::FemMatrices ops = fem::assemble_matrices(mesh);
  const auto grid = fractime::graded_grid(config.time.N, config.time.gamma, config.time.T);
  fem::Field u0 = scenarios::initial_field(config, mesh);

  Trajectory traj;
  std::vector<int> snaps = snapshot_indices(grid, config.effective_snapshot_times());
  if (options.write_outputs) {
    traj.output_dir = run_directory(config);
    std::filesystem::create_directories(traj.output_dir);
    observe::write_text(traj.output_dir / "config.resolved", scenarios::serialize_config(config));
  }

  auto on_level = [&](int n, const fem::Field& u, int newton_iters, int cg_iters) {
    traj.rows.push_back(observe::record(mesh, ops, config.physics, grid.t(n), u, newton_iters, cg_iters));
    if (options.keep_fields) traj.fields.push_back(u);
    if (options.write_outputs) {
      for (int idx : snaps) {
        if (idx == n) {
          write_snapshots(config, mesh, u, grid.t(n), traj);
          break;
        }
      }
    }
    if (options.observer) options.observer({n, grid.t(n), u, traj.rows.back()});
  };

  models::Stepper stepper(mesh, ops, grid, config.physics, std::move(u0), options.newton);
  on_level(0, stepper.current(), 0, 0);
  try {
    while (!stepper.finished()) {
      const auto& step = stepper.advance();
      on_level(stepper.index(), step.u, step.newton_iterations, step.linear_iterations);
    }
  } catch (const models::SolverError&) {
    if (options.write_outputs && !traj.rows.empty()) {
      observe::write_timeseries(traj.rows, traj.output_dir / "timeseries.csv");
    }
    throw;
  }

  traj.final_field = stepper.current();
  traj.alikhanov_violations = stepper.alikhanov_violations();
  if (options.write_outputs) observe::write_timeseries(traj.rows, traj.output_dir / "timeseries.csv");
  return traj;
}

}  // namespace tfkpp::simulation
