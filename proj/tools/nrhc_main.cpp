// nrhc: run the consensus benchmarks, validate configs, print oracle reports.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <system_error>

#include <CLI11.hpp>

#include "nrhc/certify.hpp"
#include "nrhc/config.hpp"
#include "nrhc/errors.hpp"

namespace {

using nrhc::config::ExitCode;

struct RunArgs {
  std::string preset;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<double> t_end;
  std::optional<double> delay;
  std::size_t workers = 1;
};

int load(const RunArgs& a, nrhc::sim::SimConfig& cfg) {
  try {
    if (!a.config_path.empty()) {
      cfg = nrhc::config::load_config(a.config_path);
      if (a.t_end) cfg.t_end = *a.t_end;
      if (a.delay) cfg.delay = *a.delay;
      cfg.validate();
    } else {
      cfg = nrhc::config::preset(a.preset, a.t_end, a.delay);
    }
  } catch (const nrhc::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return ExitCode::kValidation;
  } catch (const std::system_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ExitCode::kIo;
  }
  return ExitCode::kOk;
}

int cmd_run(const RunArgs& a) {
  nrhc::sim::SimConfig cfg;
  if (int rc = load(a, cfg); rc != ExitCode::kOk) return rc;
  return nrhc::config::run_and_emit(cfg, a.out_dir, std::cout, std::cerr, {a.workers});
}

int cmd_check(const RunArgs& a) {
  nrhc::sim::SimConfig cfg;
  if (int rc = load(a, cfg); rc != ExitCode::kOk) return rc;
  std::cout << cfg.name << ": ok (" << cfg.agent_count() << " agents, " << cfg.step_count()
            << " steps, " << cfg.schedule.topologies().size() << " topologies, "
            << (cfg.schedule.is_auto() ? "automatic" : "fixed") << " switching)\n";
  return ExitCode::kOk;
}

int cmd_riccati_scalar() {
  const auto rep = nrhc::certify::certify_riccati();
  std::cout << "scalar S(0)               " << nrhc::config::format_number(rep.scalar_S0) << '\n'
            << "tanh(1)                   " << nrhc::config::format_number(std::tanh(1.0)) << '\n'
            << "max |S - tanh(T - tau)|   " << rep.scalar_vs_closed_form << '\n'
            << "lti sweep vs reference    " << rep.sweep_vs_reference << " (relative)\n";
  const bool ok = rep.scalar_vs_closed_form < 1e-9 && rep.sweep_vs_reference < 1e-8;
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

int cmd_fd_check(const RunArgs& a, std::size_t points) {
  nrhc::sim::SimConfig cfg;
  if (int rc = load(a, cfg); rc != ExitCode::kOk) return rc;
  const auto rep = nrhc::certify::certify_gradients(cfg, points, 20240601);
  std::cout << "points             " << rep.points << '\n'
            << "grad_H_x           " << rep.grad_H_x << '\n'
            << "grad_H_u           " << rep.grad_H_u << '\n'
            << "terminal_gradient  " << rep.terminal_gradient << '\n'
            << "jacobian           " << rep.jacobian << '\n'
            << "hessian_contract   " << rep.hessian_contract << '\n'
            << "variational C      " << rep.variational_C << '\n';
  const bool ok = rep.worst_first_order() < 1e-6 && rep.hessian_contract < 1e-6 &&
                  rep.variational_C < 1e-4;
  std::cout << (ok ? "PASS" : "FAIL") << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed receding-horizon consensus of networked Lorenz agents"};
  app.require_subcommand(1);
  RunArgs args;
  std::size_t fd_points = 1000;

  auto* run = app.add_subcommand("run", "simulate a preset or config file");
  auto* source = run->add_option("--preset", args.preset, "example1 | example2 | example3")
                     ->check(CLI::IsMember(nrhc::config::preset_names()));
  run->add_option("--config", args.config_path, "JSON config file")->excludes(source);
  run->add_option("--out", args.out_dir, "output directory");
  run->add_option("--t-end", args.t_end, "simulation end time [s]");
  run->add_option("--delay", args.delay, "communication delay [s]");
  run->add_option("--workers", args.workers, "agents solved concurrently")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "validate a config without running");
  check->add_option("--config", args.config_path, "JSON config file")->required();

  auto* show = app.add_subcommand("show", "print a preset as a config file");
  show->add_option("--preset", args.preset, "example1 | example2 | example3")
      ->check(CLI::IsMember(nrhc::config::preset_names()))
      ->required();
  show->add_option("--t-end", args.t_end, "simulation end time [s]");
  show->add_option("--delay", args.delay, "communication delay [s]");

  auto* oracle = app.add_subcommand("oracle", "certification reports");
  oracle->require_subcommand(1);
  auto* ric = oracle->add_subcommand("riccati-scalar", "sweep vs closed-form Riccati solutions");
  auto* fd = oracle->add_subcommand("fd-check", "analytic derivatives vs finite differences");
  fd->add_option("--preset", args.preset, "preset supplying model and weights")
      ->check(CLI::IsMember(nrhc::config::preset_names()))
      ->required();
  fd->add_option("--points", fd_points, "random evaluation points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ExitCode::kValidation;
  }

  try {
    if (*run) {
      if (args.preset.empty() && args.config_path.empty()) {
        std::cerr << "run: one of --preset or --config is required\n";
        return ExitCode::kValidation;
      }
      return cmd_run(args);
    }
    if (*check) return cmd_check(args);
    if (*show) {
      nrhc::sim::SimConfig cfg;
      if (int rc = load(args, cfg); rc != ExitCode::kOk) return rc;
      std::cout << nrhc::config::to_json(cfg).dump(2) << '\n';
      return ExitCode::kOk;
    }
    if (*ric) return cmd_riccati_scalar();
    if (*fd) return cmd_fd_check(args, fd_points);
  } catch (const nrhc::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return ExitCode::kDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
