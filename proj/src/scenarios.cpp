#include "tfkpp/scenarios.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tfkpp::scenarios {

LevelSet levelset_circle(fem::Point center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  return [center, radius](double x, double y) {
    return std::hypot(x - center.x, y - center.y) - radius;
  };
}

LevelSet levelset_four_circles(const std::array<fem::Point, 4>& centers, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("circle radius must be positive");
  return [centers, radius](double x, double y) {
    double s = std::hypot(x - centers[0].x, y - centers[0].y);
    for (int k = 1; k < 4; ++k) s = std::min(s, std::hypot(x - centers[k].x, y - centers[k].y));
    return s - radius;
  };
}

double blob_formula(double x, double y) {
  const double dx = x - 0.6;
  const double dy = y - 0.5;
  const double a = 7.0 * dx - 0.2;
  const double b = 9.0 * dy + 0.1;
  return (std::sin(6.0 * dx + 2.0 * dy) + 1.0) * a * a +
         (std::sin(-8.0 * dx + 10.0 * dy) + 1.1) * b * b - 1.0;
}

LevelSet levelset_blob() {
  return [](double x, double y) {
    if (!(x > 0.05 && x < 0.9 && y > 0.1 && y < 0.85)) return kBlobOutside;
    return blob_formula(x, y);
  };
}

fem::Field ic_smoothed(const fem::TriMesh& mesh, const LevelSet& s, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("interface width epsilon must be positive");
  fem::Field u(mesh.vertex_count());
  const auto verts = mesh.vertices();
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    // 1/2 (1 - tanh q) == 1 / (1 + e^{2q}), which keeps the far tail positive.
    const double q = s(verts[i].x, verts[i].y) / epsilon;
    u[i] = 1.0 / (1.0 + std::exp(2.0 * q));
  }
  return u;
}

std::string to_string(IcKind kind) {
  switch (kind) {
    case IcKind::Circle: return "circle";
    case IcKind::FourCircles: return "four_circles";
    case IcKind::Blob: return "blob";
    case IcKind::FromFile: return "from_file";
  }
  return "unknown";
}

IcKind parse_ic_kind(const std::string& text) {
  if (text == "circle") return IcKind::Circle;
  if (text == "four_circles") return IcKind::FourCircles;
  if (text == "blob") return IcKind::Blob;
  if (text == "from_file") return IcKind::FromFile;
  throw ConfigError("unknown ic type '" + text + "' (expected circle|four_circles|blob|from_file)");
}

double InitialCondition::effective_radius() const {
  if (radius) return *radius;
  return kind == IcKind::FourCircles ? 0.15 : 0.2;
}

bool InitialCondition::operator==(const InitialCondition& o) const {
  auto same = [](fem::Point a, fem::Point b) { return a.x == b.x && a.y == b.y; };
  if (kind != o.kind || !same(center, o.center) || radius != o.radius || path != o.path) return false;
  for (int k = 0; k < 4; ++k) {
    if (!same(centers[k], o.centers[k])) return false;
  }
  return true;
}

std::vector<double> RunConfig::effective_snapshot_times() const {
  if (output.snapshot_times) return *output.snapshot_times;
  return {0.0, 0.25 * time.T, 0.5 * time.T, time.T};
}

std::string RunConfig::run_name() const {
  if (!output.name.empty()) return output.name;
  char alpha[32];
  std::snprintf(alpha, sizeof alpha, "%g", physics.alpha);
  return models::to_string(physics.model) + "_alpha" + alpha + "_" + to_string(ic.kind);
}

void RunConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
  };
  if (mesh.nx < 1) fail("mesh.nx", "must be >= 1");
  if (mesh.ny < 1) fail("mesh.ny", "must be >= 1");
  if (!(mesh.bounds.x_max > mesh.bounds.x_min)) fail("mesh.x_max", "must exceed x_min");
  if (!(mesh.bounds.y_max > mesh.bounds.y_min)) fail("mesh.y_max", "must exceed y_min");
  if (time.N < 1) fail("time.N", "must be >= 1");
  if (!(time.gamma >= 1.0)) fail("time.gamma", "grading exponent must be >= 1");
  if (!(time.T > 0.0)) fail("time.T", "final time must be positive");
  if (!(physics.D >= 0.0)) fail("physics.D", "must be nonnegative");
  if (!(physics.r >= 0.0)) fail("physics.r", "must be nonnegative");
  if (!(physics.alpha > 0.0 && physics.alpha <= 1.0)) fail("physics.alpha", "out of range (0, 1]");
  if (!std::isfinite(physics.bc.value)) fail("physics.bc_value", "must be finite");
  if (!(epsilon_factor > 0.0)) fail("ic.epsilon_factor", "must be positive");
  if (!(ic.effective_radius() > 0.0)) fail("ic.radius", "must be positive");

  const auto& b = mesh.bounds;
  auto inside = [&](fem::Point c, double rad) {
    return c.x - rad >= b.x_min && c.x + rad <= b.x_max && c.y - rad >= b.y_min &&
           c.y + rad <= b.y_max;
  };
  if (ic.kind == IcKind::Circle && !inside(ic.center, ic.effective_radius())) {
    fail("ic.center", "circle does not fit inside the domain");
  }
  if (ic.kind == IcKind::FourCircles) {
    for (const auto& c : ic.centers) {
      if (!inside(c, ic.effective_radius())) fail("ic.centers", "a circle does not fit inside the domain");
    }
  }
  if (ic.kind == IcKind::FromFile && ic.path.empty()) fail("ic.path", "from_file needs a path");
  for (double t : effective_snapshot_times()) {
    if (!(t >= 0.0 && t <= time.T)) fail("output.snapshot_times", "times must lie in [0, T]");
  }
  if (output.directory.empty()) fail("output.directory", "must not be empty");
}

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) parts.push_back(trim(item));
  return parts;
}

double parse_double(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(where + ": expected a real number, got '" + t + "'");
  }
  return v;
}

int parse_int(const std::string& text, const std::string& where) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || v < INT32_MIN || v > INT32_MAX) {
    throw ConfigError(where + ": expected an integer, got '" + t + "'");
  }
  return static_cast<int>(v);
}

fem::Point parse_point(const std::string& text, const std::string& where) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError(where + ": expected 'x, y'");
  return {parse_double(parts[0], where), parse_double(parts[1], where)};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

RunConfig load_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  std::set<std::string> seen;
  bool ic_section = false;
  bool ic_type_given = false;

  static const std::map<std::string, std::set<std::string>> known = {
      {"mesh", {"nx", "ny", "x_min", "x_max", "y_min", "y_max"}},
      {"time", {"N", "gamma", "T"}},
      {"physics", {"D", "r", "alpha", "model", "bc", "bc_value", "reaction_mode"}},
      {"ic", {"type", "center", "radius", "centers", "path", "epsilon_factor"}},
      {"output", {"directory", "name", "snapshot_times", "formats"}},
  };

  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string at = "line " + std::to_string(line_no);

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(at + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!known.count(section)) throw ConfigError(at + ": unknown section [" + section + "]");
      if (section == "ic") ic_section = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(at + ": key '" + key + "' outside any section");
    if (!known.at(section).count(key)) {
      throw ConfigError(at + ": unknown key '" + key + "' in [" + section + "]");
    }
    const std::string where = at + " (" + section + "." + key + ")";
    if (!seen.insert(section + "." + key).second) throw ConfigError(where + ": duplicate key");

    try {
      if (section == "mesh") {
        if (key == "nx") cfg.mesh.nx = parse_int(value, where);
        else if (key == "ny") cfg.mesh.ny = parse_int(value, where);
        else if (key == "x_min") cfg.mesh.bounds.x_min = parse_double(value, where);
        else if (key == "x_max") cfg.mesh.bounds.x_max = parse_double(value, where);
        else if (key == "y_min") cfg.mesh.bounds.y_min = parse_double(value, where);
        else if (key == "y_max") cfg.mesh.bounds.y_max = parse_double(value, where);
      } else if (section == "time") {
        if (key == "N") cfg.time.N = parse_int(value, where);
        else if (key == "gamma") cfg.time.gamma = parse_double(value, where);
        else if (key == "T") cfg.time.T = parse_double(value, where);
      } else if (section == "physics") {
        if (key == "D") cfg.physics.D = parse_double(value, where);
        else if (key == "r") cfg.physics.r = parse_double(value, where);
        else if (key == "alpha") cfg.physics.alpha = parse_double(value, where);
        else if (key == "model") cfg.physics.model = models::parse_model_kind(value);
        else if (key == "reaction_mode") cfg.physics.reaction_mode = models::parse_reaction_mode(value);
        else if (key == "bc_value") cfg.physics.bc.value = parse_double(value, where);
        else if (key == "bc") {
          if (value == "neumann") cfg.physics.bc.kind = fem::BoundaryKind::Neumann;
          else if (value == "dirichlet") cfg.physics.bc.kind = fem::BoundaryKind::Dirichlet;
          else throw ConfigError(where + ": expected neumann|dirichlet");
        }
      } else if (section == "ic") {
        if (key == "type") {
          cfg.ic.kind = parse_ic_kind(value);
          ic_type_given = true;
        } else if (key == "center") {
          cfg.ic.center = parse_point(value, where);
        } else if (key == "radius") {
          cfg.ic.radius = parse_double(value, where);
        } else if (key == "centers") {
          const auto pts = split(value, ';');
          if (pts.size() != 4) throw ConfigError(where + ": expected four 'x, y' pairs separated by ';'");
          for (int k = 0; k < 4; ++k) cfg.ic.centers[k] = parse_point(pts[k], where);
        } else if (key == "path") {
          cfg.ic.path = value;
        } else if (key == "epsilon_factor") {
          cfg.epsilon_factor = parse_double(value, where);
        }
      } else if (section == "output") {
        if (key == "directory") cfg.output.directory = value;
        else if (key == "name") cfg.output.name = value;
        else if (key == "snapshot_times") {
          std::vector<double> times;
          if (!value.empty()) {
            for (const auto& p : split(value, ',')) times.push_back(parse_double(p, where));
          }
          cfg.output.snapshot_times = times;
        } else if (key == "formats") {
          cfg.output.formats.clear();
          for (const auto& p : split(value, ',')) {
            if (p == "vtk") cfg.output.formats.push_back(SnapshotFormat::Vtk);
            else if (p == "csv_grid") cfg.output.formats.push_back(SnapshotFormat::CsvGrid);
            else if (!p.empty()) throw ConfigError(where + ": unknown format '" + p + "'");
          }
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  if (ic_section && !ic_type_given) throw ConfigError("[ic]: missing initial condition 'type'");
  cfg.validate();
  return cfg;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream out;
  out << "[mesh]\n"
      << "nx = " << c.mesh.nx << "\n"
      << "ny = " << c.mesh.ny << "\n"
      << "x_min = " << fmt(c.mesh.bounds.x_min) << "\n"
      << "x_max = " << fmt(c.mesh.bounds.x_max) << "\n"
      << "y_min = " << fmt(c.mesh.bounds.y_min) << "\n"
      << "y_max = " << fmt(c.mesh.bounds.y_max) << "\n\n"
      << "[time]\n"
      << "N = " << c.time.N << "\n"
      << "gamma = " << fmt(c.time.gamma) << "\n"
      << "T = " << fmt(c.time.T) << "\n\n"
      << "[physics]\n"
      << "D = " << fmt(c.physics.D) << "\n"
      << "r = " << fmt(c.physics.r) << "\n"
      << "alpha = " << fmt(c.physics.alpha) << "\n"
      << "model = " << models::to_string(c.physics.model) << "\n"
      << "bc = " << (c.physics.bc.kind == fem::BoundaryKind::Neumann ? "neumann" : "dirichlet") << "\n"
      << "bc_value = " << fmt(c.physics.bc.value) << "\n"
      << "reaction_mode = " << models::to_string(c.physics.reaction_mode) << "\n\n"
      << "[ic]\n"
      << "type = " << to_string(c.ic.kind) << "\n"
      << "center = " << fmt(c.ic.center.x) << ", " << fmt(c.ic.center.y) << "\n";
  if (c.ic.radius) out << "radius = " << fmt(*c.ic.radius) << "\n";
  out << "centers = ";
  for (int k = 0; k < 4; ++k) {
    out << (k ? "; " : "") << fmt(c.ic.centers[k].x) << ", " << fmt(c.ic.centers[k].y);
  }
  out << "\n";
  if (!c.ic.path.empty()) out << "path = " << c.ic.path << "\n";
  out << "epsilon_factor = " << fmt(c.epsilon_factor) << "\n\n"
      << "[output]\n"
      << "directory = " << c.output.directory << "\n";
  if (!c.output.name.empty()) out << "name = " << c.output.name << "\n";
  if (c.output.snapshot_times) {
    out << "snapshot_times = ";
    for (std::size_t k = 0; k < c.output.snapshot_times->size(); ++k) {
      out << (k ? ", " : "") << fmt((*c.output.snapshot_times)[k]);
    }
    out << "\n";
  }
  out << "formats = ";
  for (std::size_t k = 0; k < c.output.formats.size(); ++k) {
    out << (k ? ", " : "") << (c.output.formats[k] == SnapshotFormat::Vtk ? "vtk" : "csv_grid");
  }
  out << "\n";
  return out.str();
}

fem::TriMesh make_mesh(const RunConfig& config) {
  return fem::build_mesh(config.mesh.nx, config.mesh.ny, config.mesh.bounds);
}

LevelSet make_levelset(const InitialCondition& ic) {
  switch (ic.kind) {
    case IcKind::Circle: return levelset_circle(ic.center, ic.effective_radius());
    case IcKind::FourCircles: return levelset_four_circles(ic.centers, ic.effective_radius());
    case IcKind::Blob: return levelset_blob();
    case IcKind::FromFile: break;
  }
  throw std::invalid_argument("initial condition from file has no level set");
}

namespace {

fem::Field load_field(const std::string& path, const fem::TriMesh& mesh) {
  std::ifstream in(path);
  if (!in) throw ConfigError("ic.path: cannot read '" + path + "'");
  std::string line;
  fem::Field u;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line == "x,y,u") continue;
    const auto parts = split(line, ',');
    if (parts.size() != 3) throw ConfigError(path + ":" + std::to_string(line_no) + ": expected x,y,u");
    u.push_back(parse_double(parts[2], path + ":" + std::to_string(line_no)));
  }
  if (static_cast<int>(u.size()) != mesh.vertex_count()) {
    throw ConfigError("ic.path: '" + path + "' holds " + std::to_string(u.size()) +
                      " values, mesh has " + std::to_string(mesh.vertex_count()) + " vertices");
  }
  return u;
}

}  // namespace

fem::Field initial_field(const RunConfig& config, const fem::TriMesh& mesh) {
  if (config.ic.kind == IcKind::FromFile) return load_field(config.ic.path, mesh);
  return ic_smoothed(mesh, make_levelset(config.ic), config.epsilon_factor * mesh.h());
}

}  // namespace tfkpp::scenarios
