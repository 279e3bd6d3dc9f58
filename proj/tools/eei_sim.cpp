// Command-line front end: run, validate, sweep, trajopt.
#include "eei/scenario_runner.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

struct Common {
  std::string scenario;
  std::string out;
  int threads{1};
  double stride{0.0};
};

void add_run_options(CLI::App* app, Common& c) {
  app->add_option("--scenario", c.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "Output directory (default: output.directory of the scenario)");
  app->add_option("--threads", c.threads, "Worker threads; 1 gives bitwise-reproducible files")
      ->check(CLI::PositiveNumber);
  app->add_option("--stride", c.stride, "Output stride in seconds, a whole multiple of dt")
      ->check(CLI::PositiveNumber);
}

void print_summary(const eei::RunSummary& s) {
  std::printf("scenario %s  config %s  wall %.2f s\n", std::string(eei::to_string(s.scenario)).c_str(),
              s.config_hash.c_str(), s.wall_clock);
  for (const auto& w : s.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  for (const auto& sc : s.spacecraft) {
    std::printf("  %-12s %-16s rms %.6f deg  final %.6f deg  settling %s  spin err %.3e rad/s  power %.4f W%s%s\n",
                sc.name.c_str(), std::string(eei::to_string(sc.controller)).c_str(),
                sc.metrics.rms_attitude_error_deg, sc.metrics.final_error_deg,
                sc.metrics.settling_time ? (std::to_string(*sc.metrics.settling_time) + " s").c_str() : "never",
                sc.metrics.spin_rate_error, sc.metrics.avg_power,
                sc.target_met ? (*sc.target_met ? "  target met" : "  target missed") : "",
                sc.failed ? ("  FAILED: " + sc.message).c_str() : "");
  }
  for (const auto& c : s.sweep) {
    std::printf("  coils %d  intensity %.4g  m_max %.4g  spin err %.4e rad/s  power %.4e W%s\n", c.coils, c.intensity,
                c.m_max, c.spin_rate_error, c.avg_power, c.failed ? "  FAILED" : "");
  }
  for (const auto& t : s.trajopt) {
    std::printf("  %-12s %s  iterations %d  cost %.6g  min sep %.3f m  max |u| %.6g  defect %.3e m", t.name.c_str(),
                t.report.converged ? "converged" : "NOT CONVERGED", t.report.iterations, t.report.cost,
                t.min_separation, t.max_control, t.report.max_defect);
    if (t.validation) std::printf("  nonlinear miss %.3f m", t.validation->terminal_miss);
    std::printf("\n");
  }
}

int execute(const Common& c, std::optional<eei::ScenarioKind> force) {
  eei::ScenarioConfig cfg = eei::load_scenario(c.scenario);
  if (force) cfg.scenario = *force;
  cfg.validate();
  eei::RunOptions opt;
  opt.out_dir = c.out.empty() ? cfg.output.directory : c.out;
  opt.threads = c.threads;
  if (c.stride > 0.0) opt.stride = c.stride;
  const eei::RunSummary s = eei::run_scenario(cfg, opt);
  print_summary(s);
  return s.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled orbit/attitude simulator for small-satellite formations"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts, traj_opts;
  std::string validate_file;
  CLI::App* run = app.add_subcommand("run", "Run the scenario named in the file");
  add_run_options(run, run_opts);
  CLI::App* validate = app.add_subcommand("validate", "Schema check only");
  validate->add_option("--scenario", validate_file, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  CLI::App* sweep = app.add_subcommand("sweep", "Magnetorquer coils x intensity sweep");
  add_run_options(sweep, sweep_opts);
  CLI::App* trajopt = app.add_subcommand("trajopt", "Leader-relative transfer optimization");
  add_run_options(trajopt, traj_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) {
      const eei::ScenarioConfig cfg = eei::load_scenario(validate_file);
      for (const auto& w : cfg.warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("%s: valid (%s, config %s)\n", validate_file.c_str(), std::string(eei::to_string(cfg.scenario)).c_str(),
                  eei::config_hash(cfg).c_str());
      return 0;
    }
    if (*run) return execute(run_opts, std::nullopt);
    if (*sweep) return execute(sweep_opts, eei::ScenarioKind::Sweep);
    if (*trajopt) return execute(traj_opts, eei::ScenarioKind::TrajOpt);
  } catch (const eei::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const eei::PropagationFailure& e) {
    std::fprintf(stderr, "propagation failure: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
