// Attitude targets, PD magnetorquer and reaction-wheel laws, momentum
// dumping and the tracking metrics used by the scenario runners.
#pragma once

#include "eei/frames.hpp"
#include "eei/state.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace eei {

struct MagnetorquerBank {
  int n_coils{1};            // coils per axis
  int turns{200};            // turns per coil
  double coil_area{0.02};    // m^2
  double resistance{20.0};   // ohm per coil
  double m_max{1.0};         // A m^2 per axis

  /// Dipole produced per ampere on one axis, n_coils * turns * area.
  double dipole_per_amp() const { return n_coils * turns * coil_area; }
  void validate() const;
};

struct ReactionWheelSet {
  std::vector<Vec3> axes;         // BODY unit spin axes
  double J_w{1e-3};               // kg m^2 about the spin axis
  double tau_max{5e-3};           // N m per wheel
  double h_max{0.05};             // N m s per wheel
  double friction{0.0};           // N m s/rad, viscous
  bool enforce_saturation{true};

  static ReactionWheelSet orthogonal(double J_w = 1e-3, double tau_max = 5e-3, double h_max = 0.05);
  std::size_t size() const { return axes.size(); }
  /// 3 x n matrix of spin axes.
  Eigen::MatrixXd axis_matrix() const;
  void validate() const;
};

enum class TargetMode { NadirFixed, OrbitNormalSpin, SlewTo };

struct AttitudeTarget {
  TargetMode mode{TargetMode::NadirFixed};
  Quaternion q_target{};     // BODY -> ECI, SlewTo only
  double spin_rate{0.0};     // rad/s about the orbit normal, OrbitNormalSpin only
  double spin_phase{0.0};    // rad at t = 0
};

struct ControlCommand {
  BodyVector dipole;                 // A m^2
  Eigen::VectorXd wheel_torque;      // N m applied to each wheel by its motor
  BodyVector torque;                 // realized torque on the body
  BodyVector magnetic_torque;        // m x B part of torque
  BodyVector field;                  // B in BODY used for the magnetic part, T
  EciVector thrust_accel;            // m/s^2, translational control
  double power{0.0};                 // W
  bool saturated{false};
};

struct AttitudeError {
  Quaternion q_error;    // q_target^-1 (x) q, scalar part >= 0
  BodyVector omega_error;
  Quaternion q_target;
  BodyVector omega_desired;
};

/// Target attitude and rate at time t (seconds since the run start). Nadir and
/// orbit-normal modes build the target from the LVLH triad at (r, v); the body
/// axes coincide with LVLH (x radial, y along-track, z orbit normal), spun
/// about z by spin_phase + spin_rate t in the spin mode.
AttitudeError attitude_error(const StateVector13& s, const AttitudeTarget& target, double t);

/// Pointing error angle 2 asin(|vec(q_error)|), rad.
double error_angle(const Quaternion& q_error);

struct PdGains {
  double kp{0.0};
  double kd{0.0};
  /// Kd = 2 sqrt(Kp * J_mean).
  static PdGains critically_damped(double kp, const Mat3& inertia);
};

// Direct: the PD output is the dipole itself. Its torque m x B is orthogonal
// to both q_error and omega_error, so it cannot remove rotational energy.
// Projected: the PD output u is a torque demand and m = B x u / |B|^2, which
// realizes the part of u perpendicular to B.
enum class MagnetorquerLaw { Projected, Direct };

/// Dipole clamped per axis to m_max; torque m x B; power sum of n_coils I^2 R.
ControlCommand pd_magnetorquer(const AttitudeError& err, const BodyVector& B, const PdGains& gains,
                               const MagnetorquerBank& bank, MagnetorquerLaw law = MagnetorquerLaw::Projected);

ControlCommand pd_reaction_wheels(const AttitudeError& err, const PdGains& gains, const ReactionWheelSet& wheels,
                                  const Eigen::VectorXd& h_w);

struct MomentumDumpConfig {
  bool enabled{false};
  double gain{1e-3};         // 1/s
  double threshold{0.0};     // N m s, |h| below this is left alone
};

/// Magnetic dipole that bleeds off wheel momentum above the threshold,
/// m = k (h_excess x B) / |B|^2, clamped per axis to the bank limit.
BodyVector momentum_dump(const ReactionWheelSet& wheels, const Eigen::VectorXd& h_w, const BodyVector& B,
                         const MagnetorquerBank& bank, const MomentumDumpConfig& cfg);

struct ControlSample {
  double t;
  Quaternion q_error;
  BodyVector omega_error;
  double power;
};

struct ControlMetrics {
  double rms_attitude_error_deg{0.0};
  double spin_rate_error{0.0};      // rad/s, RMS of |omega_error| over the window
  double avg_power{0.0};            // W
  std::optional<double> settling_time;  // s from the first sample
  double settling_threshold_deg{0.0};
  double final_error_deg{0.0};
};

struct MetricsConfig {
  double band_factor{2.0};            // threshold = band_factor * final RMS
  std::optional<double> threshold_deg;  // fixed threshold instead of the band
  double hold_time{0.0};              // s the error must stay inside; 0 = until the end
  double final_window{0.0};           // s over which the "final RMS" is taken; 0 = last 10 %
};

/// RMS error after settling, window-average spin-rate error and power, and
/// the first time after which the error stays inside the band for hold_time.
/// When the error never settles, the RMS is taken over the full window and
/// settling_time is empty.
ControlMetrics spin_rate_metrics(const std::vector<ControlSample>& samples, const MetricsConfig& cfg = {});

}  // namespace eei
