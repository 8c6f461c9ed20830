#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfkpp/fem.hpp"
#include "tfkpp/models.hpp"

namespace tfkpp::scenarios {

/// Signed distance-like function; negative inside the initial tumour.
using LevelSet = std::function<double(double x, double y)>;

LevelSet levelset_circle(fem::Point center, double radius);
/// Pointwise minimum of four circle level sets.
LevelSet levelset_four_circles(const std::array<fem::Point, 4>& centers, double radius);
/// Irregular blob; clamped to kBlobOutside outside 0.05<x<0.9, 0.1<y<0.85.
LevelSet levelset_blob();
/// The blob formula without the window clamp.
double blob_formula(double x, double y);

inline constexpr double kBlobOutside = 1e3;

/// Nodal values of 1/2 (1 - tanh(s/epsilon)).
fem::Field ic_smoothed(const fem::TriMesh& mesh, const LevelSet& s, double epsilon);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class IcKind { Circle, FourCircles, Blob, FromFile };

std::string to_string(IcKind kind);
IcKind parse_ic_kind(const std::string& text);

enum class SnapshotFormat { Vtk, CsvGrid };

struct MeshSpec {
  int nx = 256;
  int ny = 256;
  fem::Bounds bounds{};
  bool operator==(const MeshSpec&) const = default;
};

struct TimeSpec {
  int N = 256;
  double gamma = 2.0;
  double T = 5.0;
  bool operator==(const TimeSpec&) const = default;
};

struct InitialCondition {
  IcKind kind = IcKind::Circle;
  fem::Point center{0.0, 0.0};
  std::array<fem::Point, 4> centers{{{0.5, 0.5}, {-0.5, 0.5}, {0.5, -0.5}, {-0.5, -0.5}}};
  std::optional<double> radius;  // defaults: 0.2 (circle), 0.15 (four circles)
  std::string path;              // FromFile: x,y,u CSV in vertex order

  double effective_radius() const;
  bool operator==(const InitialCondition& o) const;
};

struct OutputSpec {
  std::string directory = "out";
  std::string name;                            // empty: derived from the run
  std::optional<std::vector<double>> snapshot_times;  // default {0, T/4, T/2, T}
  std::vector<SnapshotFormat> formats{SnapshotFormat::Vtk};
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  MeshSpec mesh{};
  TimeSpec time{};
  models::ModelParams physics{};
  InitialCondition ic{};
  double epsilon_factor = 10.0;
  OutputSpec output{};

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
  std::vector<double> effective_snapshot_times() const;
  std::string run_name() const;
  bool operator==(const RunConfig&) const = default;
};

/// Parses the sectioned key = value format; unset fields keep their defaults.
RunConfig load_config(const std::string& text);
RunConfig load_config_file(const std::string& path);
std::string serialize_config(const RunConfig& config);

fem::TriMesh make_mesh(const RunConfig& config);
LevelSet make_levelset(const InitialCondition& ic);
/// u^0 as the nodal interpolant of the configured initial datum.
fem::Field initial_field(const RunConfig& config, const fem::TriMesh& mesh);

}  // namespace tfkpp::scenarios
