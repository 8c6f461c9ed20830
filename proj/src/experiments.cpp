#include "tfkpp/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "tfkpp/fractime.hpp"

namespace tfkpp::experiments {

std::optional<double> threshold_time(std::span<const observe::ObservableRow> rows, double threshold) {
  if (rows.empty()) return std::nullopt;
  if (rows.front().mass >= threshold) return rows.front().t;
  for (std::size_t n = 1; n < rows.size(); ++n) {
    if (rows[n].mass >= threshold) {
      const auto& a = rows[n - 1];
      const auto& b = rows[n];
      const double theta = (threshold - a.mass) / (b.mass - a.mass);
      return a.t + theta * (b.t - a.t);
    }
  }
  return std::nullopt;
}

std::string format_t_half(const std::optional<double>& t) {
  if (!t) return "not reached";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", *t);
  return buf;
}

ComparisonReport compare_models(const scenarios::RunConfig& config,
                                const simulation::RunOptions& options) {
  ComparisonReport report;
  const std::string base = config.output.name.empty() ? "compare" : config.output.name;

  auto run_model = [&](models::ModelKind kind) {
    scenarios::RunConfig c = config;
    c.physics.model = kind;
    c.output.name = base + "/" + models::to_string(kind);
    try {
      return simulation::run(c, options);
    } catch (const models::SolverError& e) {
      throw models::SolverError(e.step(), e.report(), models::to_string(kind) + " model: " + e.what());
    }
  };
  report.consistent = run_model(models::ModelKind::Consistent);
  report.caputo = run_model(models::ModelKind::CaputoInTime);

  report.half_capacity = 0.5 * config.mesh.bounds.area();
  report.t_half_consistent = threshold_time(report.consistent.rows, report.half_capacity);
  report.t_half_caputo = threshold_time(report.caputo.rows, report.half_capacity);

  if (options.write_outputs) {
    std::ostringstream csv;
    csv << "t,mass_consistent,mass_caputo\n";
    char buf[128];
    for (std::size_t n = 0; n < report.consistent.rows.size(); ++n) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", report.consistent.rows[n].t,
                    report.consistent.rows[n].mass, report.caputo.rows[n].mass);
      csv << buf;
    }
    csv << "# t_half_consistent=" << format_t_half(report.t_half_consistent)
        << " t_half_caputo=" << format_t_half(report.t_half_caputo) << "\n";
    report.mass_csv = std::filesystem::path(config.output.directory) / base / "mass_comparison.csv";
    observe::write_text(report.mass_csv, csv.str());
  }
  return report;
}

std::vector<simulation::Trajectory> sweep(const scenarios::RunConfig& config,
                                          const std::vector<double>& alphas,
                                          const simulation::RunOptions& options) {
  std::vector<simulation::Trajectory> out;
  for (double alpha : alphas) {
    scenarios::RunConfig c = config;
    c.physics.alpha = alpha;
    if (!config.output.name.empty()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "_alpha%g", alpha);
      c.output.name = config.output.name + buf;
    }
    c.validate();
    out.push_back(simulation::run(c, options));
  }
  return out;
}

namespace {

std::string sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

std::vector<CheckResult> run_verification() {
  using namespace fractime;
  std::vector<CheckResult> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  {
    const auto g = graded_grid(4, 2.0, 5.0);
    const double expect[] = {0.0, 0.3125, 1.25, 2.8125, 5.0};
    double worst = 0.0;
    for (int n = 0; n <= 4; ++n) worst = std::max(worst, std::abs(g.t(n) - expect[n]));
    add("graded grid points", worst <= 1e-14, "max dev " + sci(worst));
  }
  {
    const double e = std::abs(kernel_g(0.5, 1.0) - 1.0 / std::sqrt(std::numbers::pi));
    add("kernel g_1/2(1) = 1/sqrt(pi)", e <= 1e-15, "dev " + sci(e));
  }
  {
    double worst = 0.0;
    bool positive = true;
    for (double alpha : {0.25, 0.5, 0.75}) {
      const auto g = graded_grid(1000, 2.0, 5.0);
      for (int n : {1, 2, 10, 500, 1000}) {
        const auto w = conv_weights(g, alpha, n);
        double s = 0.0;
        for (double b : w.b) {
          s += b;
          positive = positive && b > 0.0;
        }
        const double exact = std::pow(g.t(n), 1.0 - alpha) / std::tgamma(2.0 - alpha);
        worst = std::max(worst, rel(s, exact));
      }
    }
    add("weight telescoping + positivity", worst <= 1e-12 && positive, "max rel dev " + sci(worst));
  }
  {
    double worst = 0.0;
    for (double gamma : {1.0, 2.0}) {
      const auto g = graded_grid(256, gamma, 1.0);
      for (double alpha : {0.25, 0.5, 0.75}) {
        std::vector<double> u(257);
        for (int n = 0; n <= 256; ++n) u[n] = 0.3 + 1.7 * g.t(n);
        const double d = caputo_l1_apply(g, alpha, u);
        worst = std::max(worst, rel(d, 1.7 * std::pow(1.0, 1.0 - alpha) / std::tgamma(2.0 - alpha)));
      }
    }
    add("L1 exact on affine functions", worst <= 1e-12, "max rel dev " + sci(worst));
  }
  {
    bool ok = true;
    std::string detail;
    for (auto [a, b] : {std::pair{0.5, 0.5}, {0.3, 0.4}, {0.25, 0.5}}) {
      const auto c = check_sonine(a, b, a == 0.3 ? 2.0 : 1.0, 1e-10);
      ok = ok && c.passed();
      detail += to_string(c.status) + " ";
    }
    const double wrong = 1.1;
    const auto neg = check_sonine(0.5, 0.5, 1.0, 1e-6, &wrong);
    ok = ok && neg.status == SonineStatus::Fail;
    add("Sonine identity (3 pairs + negative control)", ok, detail + "control:" + to_string(neg.status));
  }
  {
    // g_alpha * (C d^alpha u) = u - u_0 for u = t^2, then the reverse order for u = 1 + t^2.
    const int N = 2048;
    const auto g = graded_grid(N, 1.0, 1.0);
    const double alpha = 0.5;
    std::vector<double> u(N + 1), deriv(N + 1, 0.0);
    for (int n = 0; n <= N; ++n) u[n] = g.t(n) * g.t(n);
    for (int n = 1; n <= N; ++n) deriv[n] = caputo_l1_apply(g, alpha, std::span(u).first(n + 1));
    std::vector<double> right(deriv.begin() + 1, deriv.end());
    const double inv = discrete_convolution(g, 1.0 - alpha, right, N);
    const double e1 = rel(inv, u[N] - u[0]);

    std::vector<double> v(N + 1, 0.0), f(N + 1);
    for (int n = 0; n <= N; ++n) f[n] = 1.0 + g.t(n) * g.t(n);
    for (int n = 1; n <= N; ++n) v[n] = discrete_convolution(g, 1.0 - alpha, std::span(f).first(n), n);
    const double back = caputo_l1_apply(g, alpha, v);
    const double e2 = rel(back, f[N]);
    add("inverse-convolution / derivative-of-kernel", e1 <= 1e-2 && e2 <= 1e-2,
        "rel devs " + sci(e1) + ", " + sci(e2));
  }
  {
    double worst = std::abs(mittag_leffler(1.0, -1.0) - std::exp(-1.0));
    for (double x = 0.0; x <= 5.0; x += 0.25) {
      worst = std::max(worst, rel(mittag_leffler(0.5, -x), std::exp(x * x) * std::erfc(x)));
    }
    bool monotone = true;
    for (double alpha : {0.25, 0.5, 0.75}) {
      double prev = mittag_leffler(alpha, 0.0);
      for (int k = 1; k <= 1000; ++k) {
        const double cur = mittag_leffler(alpha, -0.05 * k);
        monotone = monotone && cur < prev && cur > 0.0;
        prev = cur;
      }
    }
    add("Mittag-Leffler (exp, erfc identity, monotone)", worst <= 1e-10 && monotone,
        "max rel dev " + sci(worst));
  }
  {
    const auto mesh = fem::build_mesh(16, 16, {-1.0, 1.0, -1.0, 1.0});
    const auto ops = fem::assemble_matrices(mesh);
    double msum = 0.0;
    for (double v : ops.mass.values()) msum += v;
    const la::Vector ones(mesh.vertex_count(), 1.0);
    const auto k1 = la::matvec(ops.stiffness, ones);
    double krow = 0.0;
    for (double v : k1) krow = std::max(krow, std::abs(v));
    add("mass sums to area, stiffness rows to zero", rel(msum, 4.0) <= 1e-12 && krow <= 1e-12,
        "mass dev " + sci(rel(msum, 4.0)) + ", row sum " + sci(krow));
  }
  {
    const auto mesh = fem::build_mesh(8, 8, {0.0, 1.0, 0.0, 1.0});
    la::Vector u(mesh.vertex_count());
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      const auto p = mesh.vertices()[i];
      u[i] = 0.3 + 0.2 * p.x * p.x + 0.4 * std::sin(3.0 * p.y);
    }
    const double r = 5.0, step = 1e-5;
    const auto R = fem::assemble_reaction(mesh, u);
    double worst = 0.0;
    for (int i : {0, 13, 40, 80}) {
      la::Vector up = u, um = u;
      up[i] += step;
      um[i] -= step;
      auto cubic_part = [&](const la::Vector& x) {
        return fem::energy(mesh, x, 1.0, r) - fem::energy(mesh, x, 1.0, 0.0);
      };
      const double fd = (cubic_part(up) - cubic_part(um)) / (2.0 * step);
      worst = std::max(worst, rel(fd, -r * R[i]));
    }
    add("reaction vector = -grad of energy reaction part", worst <= 1e-6, "max rel dev " + sci(worst));
  }
  {
    const auto mesh = fem::build_mesh(64, 64, {0.0, 1.0, 0.0, 1.0});
    const auto eig = fem::min_eigpair(mesh, fem::BoundaryKind::Dirichlet);
    const double exact = 2.0 * std::numbers::pi * std::numbers::pi;
    add("Dirichlet eigenvalue on unit square", rel(eig.lambda, exact) <= 1e-2,
        "lambda_h = " + sci(eig.lambda) + " vs " + sci(exact));
  }
  return out;
}

}  // namespace tfkpp::experiments
