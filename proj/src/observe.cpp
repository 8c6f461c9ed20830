#include "tfkpp/observe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tfkpp::observe {

ObservableRow record(const fem::TriMesh& mesh, const fem::FemMatrices& ops,
                     const models::ModelParams& params, double t, std::span<const double> u,
                     int newton_iters, int cg_iters) {
  if (static_cast<int>(u.size()) != mesh.vertex_count()) {
    throw std::invalid_argument("observable field does not match the mesh");
  }
  const la::Vector Mu = la::matvec(ops.mass, u);
  const la::Vector Ku = la::matvec(ops.stiffness, u);
  const double mass2 = la::dot(u, Mu);

  ObservableRow row;
  row.t = t;
  row.mass = 0.0;
  for (double v : Mu) row.mass += v;  // 1^T M u
  row.l2 = std::sqrt(std::max(0.0, mass2));
  row.energy = 0.5 * params.D * la::dot(u, Ku) - 0.5 * params.r * mass2 +
               params.r / 3.0 * fem::integrate_cube(mesh, u);
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  row.min_u = *lo;
  row.max_u = *hi;
  row.newton_iters = newton_iters;
  row.cg_iters = cg_iters;
  return row;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  finish(out, path);
}

void write_timeseries(std::span<const ObservableRow> rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("no observable rows to write");
  auto out = open_for_write(path);
  out << kTimeseriesHeader << '\n';
  for (const auto& r : rows) {
    out << fmt(r.t) << ',' << fmt(r.mass) << ',' << fmt(r.l2) << ',' << fmt(r.energy) << ','
        << fmt(r.min_u) << ',' << fmt(r.max_u) << ',' << r.newton_iters << ',' << r.cg_iters
        << '\n';
  }
  finish(out, path);
}

std::vector<ObservableRow> read_timeseries(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTimeseriesHeader) {
    throw std::runtime_error("'" + path.string() + "' lacks the timeseries header");
  }
  std::vector<ObservableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw std::runtime_error("malformed timeseries row: " + line);
    ObservableRow r;
    r.t = std::stod(cells[0]);
    r.mass = std::stod(cells[1]);
    r.l2 = std::stod(cells[2]);
    r.energy = std::stod(cells[3]);
    r.min_u = std::stod(cells[4]);
    r.max_u = std::stod(cells[5]);
    r.newton_iters = std::stoi(cells[6]);
    r.cg_iters = std::stoi(cells[7]);
    rows.push_back(r);
  }
  return rows;
}

void write_snapshot(const fem::TriMesh& mesh, std::span<const double> u, double t,
                    const std::filesystem::path& path, SnapshotFormat format) {
  if (static_cast<int>(u.size()) != mesh.vertex_count()) {
    throw std::invalid_argument("snapshot field does not match the mesh");
  }
  auto out = open_for_write(path);
  const auto verts = mesh.vertices();
  if (format == SnapshotFormat::CsvGrid) {
    out << "x,y,u\n";
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      out << fmt(verts[i].x) << ',' << fmt(verts[i].y) << ',' << fmt(u[i]) << '\n';
    }
    finish(out, path);
    return;
  }

  const auto tris = mesh.triangles();
  out << "# vtk DataFile Version 3.0\n"
      << "u at t=" << fmt(t) << "\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& p : verts) out << fmt(p.x) << ' ' << fmt(p.y) << " 0\n";
  out << "CELLS " << tris.size() << ' ' << 4 * tris.size() << '\n';
  for (const auto& tri : tris) out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
  out << "CELL_TYPES " << tris.size() << '\n';
  for (std::size_t k = 0; k < tris.size(); ++k) out << "5\n";
  out << "POINT_DATA " << mesh.vertex_count() << '\n'
      << "SCALARS u double 1\n"
      << "LOOKUP_TABLE default\n";
  for (double v : u) out << fmt(v) << '\n';
  finish(out, path);
}

}  // namespace tfkpp::observe
