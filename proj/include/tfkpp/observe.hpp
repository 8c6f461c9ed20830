#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tfkpp/fem.hpp"
#include "tfkpp/models.hpp"
#include "tfkpp/scenarios.hpp"

namespace tfkpp::observe {

struct ObservableRow {
  double t = 0.0;
  double mass = 0.0;
  double l2 = 0.0;
  double energy = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  int newton_iters = 0;
  int cg_iters = 0;

  bool operator==(const ObservableRow&) const = default;
};

ObservableRow record(const fem::TriMesh& mesh, const fem::FemMatrices& ops,
                     const models::ModelParams& params, double t, std::span<const double> u,
                     int newton_iters = 0, int cg_iters = 0);

inline constexpr const char* kTimeseriesHeader =
    "t,mass,l2,energy,min_u,max_u,newton_iters,cg_iters";

/// CSV with 17 significant digits and LF line endings. Throws on empty
/// input (no file is created) or I/O failure.
void write_timeseries(std::span<const ObservableRow> rows, const std::filesystem::path& path);
std::vector<ObservableRow> read_timeseries(const std::filesystem::path& path);

using scenarios::SnapshotFormat;

/// Legacy ASCII VTK unstructured grid (triangles, point scalar "u") or
/// "x,y,u" rows in vertex order.
void write_snapshot(const fem::TriMesh& mesh, std::span<const double> u, double t,
                    const std::filesystem::path& path, SnapshotFormat format);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tfkpp::observe
