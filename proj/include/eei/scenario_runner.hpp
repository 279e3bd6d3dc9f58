// Experiment runners: pointing stabilization (Scenario I), slews (Scenario
// II), magnetorquer sweeps, leader-relative transfer optimization and the
// per-facet albedo composite. Spacecraft and sweep cells are independent jobs.
#pragma once

#include "eei/scenario_config.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eei {

struct RunOptions {
  std::filesystem::path out_dir;          // empty: no files
  int threads{1};
  std::optional<double> stride;           // overrides integrator.output_stride
};

struct SpacecraftSummary {
  std::string name;
  ControllerKind controller{ControllerKind::None};
  ControlMetrics metrics;
  std::array<double, kNumAccel> accel_rms{};   // m/s^2 over the output samples
  std::size_t samples{0};
  double max_field_dot{0.0};
  std::size_t control_steps{0};
  std::optional<bool> target_met;              // Scenario II: final error within the terminal threshold
  bool failed{false};
  std::string message;
};

struct SweepCell {
  int coils{0};
  double intensity{0.0};
  double m_max{0.0};
  double spin_rate_error{0.0};    // rad/s
  double avg_power{0.0};          // W
  double max_field_dot{0.0};
  bool failed{false};
  std::string message;
};

struct TrajOptSummary {
  std::string name;
  SolveReport report;
  std::optional<NonlinearValidation> validation;
  double min_separation{0.0};     // m, over the nodes
  double max_control{0.0};        // m/s^2
};

struct RunSummary {
  ScenarioKind scenario{ScenarioKind::Custom};
  std::string config_hash;
  double wall_clock{0.0};         // s; reported on the console, kept out of the files
  std::vector<std::string> warnings;
  std::vector<SpacecraftSummary> spacecraft;
  std::vector<SweepCell> sweep;
  std::vector<TrajOptSummary> trajopt;

  /// 0 success, 3 propagation failure, 4 optimizer non-convergence.
  int exit_code() const;
  /// Deterministic JSON (no wall clock).
  std::string to_json() const;
};

RunSummary run_scenario_i(const ScenarioConfig& cfg, const RunOptions& opt = {});
RunSummary run_scenario_ii(const ScenarioConfig& cfg, const RunOptions& opt = {});
RunSummary run_sweep(const ScenarioConfig& cfg, const RunOptions& opt = {});
RunSummary run_trajopt(const ScenarioConfig& cfg, const RunOptions& opt = {});
/// Propagates every spacecraft with the configured controller and target.
RunSummary run_custom(const ScenarioConfig& cfg, const RunOptions& opt = {});
/// Dispatch on cfg.scenario; writes summary.json when opt.out_dir is set.
RunSummary run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {});

struct FacetComposite {
  double t{0.0};
  std::vector<BodyVector> albedo_accel;   // per facet, m/s^2
  std::vector<BodyVector> srp_accel;      // per facet, m/s^2
  BodyVector albedo_sum;                  // facet-order sum
  BodyVector srp_sum;
  EciVector breakdown_albedo;             // albedo channel of the breakdown
};

/// Evaluates the facet radiation path (SRP and albedo both on, facet models
/// selected) at one state.
FacetComposite facet_composite(const StateVector13& s, const Epoch& epoch, double t, const FacetedSpacecraft& sc,
                               const PerturbationSet& base);

/// facets.csv: t, facet, normal(3), albedo accel(3), |albedo|, |srp|.
void write_facet_composite_csv(const std::filesystem::path& file, const FacetedSpacecraft& sc,
                               const std::vector<FacetComposite>& maps);

/// Initial leader state at the scenario epoch, attitude on the LVLH triad.
StateVector13 leader_initial_state(const ScenarioConfig& cfg);

/// Controller callback for the propagator.
Controller make_controller(const ControllerConfig& c, const AttitudeTarget& target, const DynamicsModel& model);

}  // namespace eei
