// Scenario file ingestion: a JSON document with a fixed schema. Unknown keys
// anywhere in the document are rejected.
#pragma once

#include "eei/control.hpp"
#include "eei/propagator.hpp"
#include "eei/traj_opt.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace eei {

enum class ScenarioKind { ScenarioI, ScenarioII, Sweep, TrajOpt, Custom };
enum class ControllerKind { None, Magnetorquer, ReactionWheels };

/// Classical elements of the leader orbit.
struct OrbitalElements {
  double altitude{600e3};                  // m above the reference radius (semi-major axis minus Re)
  double eccentricity{0.0};
  std::optional<double> inclination_deg;   // empty: sun-synchronous for the given a, e
  double raan_deg{0.0};
  double arg_perigee_deg{0.0};
  double true_anomaly_deg{0.0};
};

/// Inclination (rad) whose J2 nodal precession matches the mean motion of the
/// Sun, 2 pi per tropical year.
double sun_synchronous_inclination(double semi_major_axis, double eccentricity);

/// Position and velocity for the elements about a central body of parameter mu.
std::pair<EciVector, EciVector> elements_to_state(const OrbitalElements& el, double mu, double body_radius);

struct FollowerConfig {
  std::string name;
  Vec6 relative_state{Vec6::Zero()};      // LVLH about the leader, m and m/s
  Vec6 target_state{Vec6::Zero()};        // trajopt terminal state
};

struct SpacecraftConfig {
  double mass{50.0};
  double radius{1.0};
  int facet_level{2};
  double reflectivity{0.3};
  std::optional<std::string> facet_file;  // replaces the icosphere
  Vec3 inertia_diag{30.0, 33.0, 36.0};    // kg m^2, principal axes along BODY
  Vec3 cp_offset{2e-3, 1e-3, -1e-3};      // m
  double drag_coefficient{2.2};
  double bulk_reflectivity{0.3};
  std::optional<double> cross_section;    // m^2; empty: pi R^2
};

struct PerturbationConfig {
  std::array<bool, kNumAccel> accel{true, true, true, true, true, true, true, true};
  std::array<bool, kNumTorque> torque{true, true, true, true, false};
  SrpModel srp_model{SrpModel::Lumped};
  AlbedoModel albedo_model{AlbedoModel::ElementGrid};
  int gravity_degree{20};
  int gravity_order{20};
  int albedo_elements{2000};
  bool freeze_environment{true};
  Vec3 bias_torque{Vec3::Zero()};         // N m, BODY
};

struct ControllerConfig {
  ControllerKind kind{ControllerKind::ReactionWheels};
  std::optional<double> kp;               // empty: per-actuator default
  std::optional<double> kd;               // empty: critically damped from kp
  MagnetorquerLaw law{MagnetorquerLaw::Projected};
  MagnetorquerBank bank{};
  ReactionWheelSet wheels{ReactionWheelSet::orthogonal(1e-2, 5e-3, 0.5)};
  MomentumDumpConfig dump{};

  static constexpr double kDefaultKpWheels = 0.05;        // N m
  static constexpr double kDefaultKpMagnetorquer = 1e-4;  // N m
  PdGains gains(const Mat3& inertia) const;
};

struct TargetConfig {
  TargetMode mode{TargetMode::NadirFixed};
  double spin_rate{0.0};                  // rad/s
  double initial_offset_deg{0.0};         // rotation of the initial attitude away from the target
  Vec3 initial_offset_axis{1.0, 1.0, 0.0};
};

struct SlewConfig {
  double start_deg{0.0};                  // start attitude: LVLH at t0 rotated by start_deg about start_axis
  Vec3 start_axis{1.0, 0.0, 0.0};
  double angle_deg{20.0};                 // end attitude: LVLH at t0 rotated by angle_deg about axis
  Vec3 axis{0.3, 0.2, 1.0};
  double terminal_threshold_deg{0.05};
};

struct SweepConfig {
  std::vector<int> coils{1, 2, 3};
  std::vector<double> intensity{0.5, 1.0, 2.0, 4.0};   // A m^2 per coil; m_max = coils * intensity
  double spin_rate{0.002};                              // rad/s
};

struct TrajOptConfig {
  TranscriptionProblem problem{};         // x0/xf come from the followers
  bool validate_nonlinear{true};
  int validation_substeps{10};
};

struct IntegratorSettings {
  double dt{1.0};
  std::optional<double> duration;         // s; empty: `orbits` leader periods
  double orbits{1.0};
  double output_stride{10.0};
  int renormalize_every{1};
};

struct OutputConfig {
  std::string directory{"out"};
  std::vector<std::string> channels{"orbit", "attitude", "control", "breakdown"};
  std::vector<double> facet_composite_times;   // s after t0; facet albedo map written at each
};

struct ScenarioConfig {
  ScenarioKind scenario{ScenarioKind::ScenarioI};
  double epoch{0.0};                      // s since J2000
  OrbitalElements orbit{};
  std::vector<FollowerConfig> followers;
  SpacecraftConfig spacecraft{};
  PerturbationConfig perturbations{};
  ControllerConfig controller{};
  TargetConfig target{};
  SlewConfig slew{};
  SweepConfig sweep{};
  TrajOptConfig trajopt{};
  IntegratorSettings integrator{};
  OutputConfig output{};
  MetricsConfig metrics{};

  /// Leader plus followers.
  std::size_t spacecraft_count() const { return 1 + followers.size(); }
  /// Warnings that do not stop a run (formation size outside 3..6).
  std::vector<std::string> warnings() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or
/// out-of-range values.
ScenarioConfig parse_scenario(const std::string& json_text);
ScenarioConfig load_scenario(const std::filesystem::path& file);

/// Canonical JSON of every field, defaults included.
std::string to_json(const ScenarioConfig& cfg);
/// FNV-1a 64 of the canonical JSON, hex.
std::string config_hash(const ScenarioConfig& cfg);

std::string_view to_string(ScenarioKind k);
std::string_view to_string(ControllerKind k);

// Model construction shared by the runners.
FacetedSpacecraft build_spacecraft(const SpacecraftConfig& c);
std::shared_ptr<const EnvironmentModels> build_environment(const ScenarioConfig& cfg);
PerturbationSet build_perturbations(const ScenarioConfig& cfg, std::shared_ptr<const EnvironmentModels> env);
double leader_period(const ScenarioConfig& cfg);
double run_duration(const ScenarioConfig& cfg);

}  // namespace eei
