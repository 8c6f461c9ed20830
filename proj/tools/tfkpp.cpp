// tfkpp: command-line driver for the time-fractional Fisher-KPP solvers.
//
// Exit codes: 0 success, 1 usage/config error, 2 solver failure,
// 3 verification failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tfkpp/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kSolverError = 2;
constexpr int kVerifyError = 3;

struct Overrides {
  std::optional<double> alpha;
  std::optional<std::string> model;
  std::optional<int> N;
  std::optional<int> nx;
  std::optional<double> gamma;
  std::optional<std::string> ic;
  std::optional<std::string> bc;
  std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& o, bool with_alpha) {
  if (with_alpha) cmd->add_option("--alpha", o.alpha, "fractional order in (0, 1]");
  cmd->add_option("--model", o.model, "consistent | caputo");
  cmd->add_option("--N", o.N, "number of time steps");
  cmd->add_option("--nx", o.nx, "cells per axis (sets nx and ny)");
  cmd->add_option("--gamma", o.gamma, "temporal grading exponent (>= 1)");
  cmd->add_option("--ic", o.ic, "circle | four_circles | blob | from_file");
  cmd->add_option("--bc", o.bc, "neumann | dirichlet");
  cmd->add_option("--out", o.out, "output directory");
}

tfkpp::scenarios::RunConfig resolve(const std::string& path, const Overrides& o) {
  using namespace tfkpp;
  scenarios::RunConfig cfg = scenarios::load_config_file(path);
  if (o.alpha) cfg.physics.alpha = *o.alpha;
  if (o.model) {
    try {
      cfg.physics.model = models::parse_model_kind(*o.model);
    } catch (const std::invalid_argument& e) {
      throw scenarios::ConfigError(std::string("--model: ") + e.what());
    }
  }
  if (o.N) cfg.time.N = *o.N;
  if (o.nx) cfg.mesh.nx = cfg.mesh.ny = *o.nx;
  if (o.gamma) cfg.time.gamma = *o.gamma;
  if (o.ic) cfg.ic.kind = scenarios::parse_ic_kind(*o.ic);
  if (o.bc) {
    if (*o.bc == "neumann") cfg.physics.bc.kind = fem::BoundaryKind::Neumann;
    else if (*o.bc == "dirichlet") cfg.physics.bc.kind = fem::BoundaryKind::Dirichlet;
    else throw scenarios::ConfigError("--bc: expected neumann|dirichlet");
  }
  if (o.out) cfg.output.directory = *o.out;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_alpha_list(const std::string& text) {
  std::vector<double> alphas;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      alphas.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw tfkpp::scenarios::ConfigError("--alpha: cannot parse '" + item + "'");
    }
  }
  if (alphas.empty()) throw tfkpp::scenarios::ConfigError("--alpha: empty list");
  return alphas;
}

void print_summary(const tfkpp::simulation::Trajectory& t) {
  const auto& last = t.rows.back();
  std::printf("%s: %zu levels, final t=%.6g mass=%.6g min=%.3g max=%.3g\n",
              t.output_dir.string().c_str(), t.rows.size(), last.t, last.mass, last.min_u,
              last.max_u);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace tfkpp;
  CLI::App app{"Time-fractional Fisher-KPP solver (consistent and Caputo-in-time models)"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_o, cmp_o, sweep_o;
  std::string sweep_alphas;

  auto* run_cmd = app.add_subcommand("run", "run a single trajectory");
  run_cmd->add_option("config", config_path, "configuration file")->required();
  add_overrides(run_cmd, run_o, true);

  auto* cmp_cmd = app.add_subcommand("compare", "run both models and compare mass curves");
  cmp_cmd->add_option("config", config_path, "configuration file")->required();
  add_overrides(cmp_cmd, cmp_o, true);

  auto* verify_cmd = app.add_subcommand("verify", "run the built-in oracle checks");

  auto* sweep_cmd = app.add_subcommand("sweep", "one run per fractional order");
  sweep_cmd->add_option("config", config_path, "configuration file")->required();
  sweep_cmd->add_option("--alpha", sweep_alphas, "comma-separated list, e.g. 0.25,0.5,0.75,1")
      ->required();
  add_overrides(sweep_cmd, sweep_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    simulation::RunOptions options;
    options.write_outputs = true;

    if (*run_cmd) {
      const auto cfg = resolve(config_path, run_o);
      print_summary(simulation::run(cfg, options));
      return kOk;
    }
    if (*cmp_cmd) {
      const auto cfg = resolve(config_path, cmp_o);
      const auto report = experiments::compare_models(cfg, options);
      std::printf("t_half consistent: %s\n", experiments::format_t_half(report.t_half_consistent).c_str());
      std::printf("t_half caputo:     %s\n", experiments::format_t_half(report.t_half_caputo).c_str());
      std::printf("mass table: %s\n", report.mass_csv.string().c_str());
      return kOk;
    }
    if (*sweep_cmd) {
      const auto cfg = resolve(config_path, sweep_o);
      for (const auto& t : experiments::sweep(cfg, parse_alpha_list(sweep_alphas), options)) {
        print_summary(t);
      }
      return kOk;
    }
    if (*verify_cmd) {
      bool all = true;
      for (const auto& c : experiments::run_verification()) {
        std::printf("%-48s %s  %s\n", c.name.c_str(), c.passed ? "pass" : "FAIL", c.detail.c_str());
        all = all && c.passed;
      }
      return all ? kOk : kVerifyError;
    }
  } catch (const scenarios::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const models::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverError;
  }
  return kOk;
}
