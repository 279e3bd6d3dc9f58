#include "eei/control.hpp"

#include "eei/errors.hpp"

#include <algorithm>
#include <cmath>

namespace eei {

void MagnetorquerBank::validate() const {
  if (n_coils < 1 || turns < 1) throw ConfigError("magnetorquer needs at least one coil and one turn");
  if (!(coil_area > 0.0) || !(resistance >= 0.0)) throw ConfigError("magnetorquer coil area/resistance invalid");
  if (!(m_max > 0.0)) throw ConfigError("magnetorquer m_max must be positive");
}

ReactionWheelSet ReactionWheelSet::orthogonal(double J_w, double tau_max, double h_max) {
  ReactionWheelSet w;
  w.axes = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};
  w.J_w = J_w;
  w.tau_max = tau_max;
  w.h_max = h_max;
  return w;
}

Eigen::MatrixXd ReactionWheelSet::axis_matrix() const {
  Eigen::MatrixXd A(3, axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) A.col(i) = axes[i];
  return A;
}

void ReactionWheelSet::validate() const {
  if (axes.empty() || axes.size() > 3) throw ConfigError("reaction wheel set needs 1 to 3 wheels");
  for (const auto& a : axes) {
    if (std::abs(a.norm() - 1.0) > 1e-9) throw ConfigError("reaction wheel axis is not unit");
  }
  if (!(J_w > 0.0) || !(tau_max > 0.0) || !(h_max > 0.0) || !(friction >= 0.0)) {
    throw ConfigError("reaction wheel J_w, tau_max, h_max must be positive");
  }
}

AttitudeError attitude_error(const StateVector13& s, const AttitudeTarget& target, double t) {
  AttitudeError out;
  Vec3 w_des_eci = Vec3::Zero();
  if (target.mode == TargetMode::SlewTo) {
    out.q_target = target.q_target;
  } else {
    const LvlhBasis b = lvlh_basis(s.r, s.v);
    Mat3 R = b.matrix();
    const double n = s.r.cross(s.v).norm() / s.r.squaredNorm();
    double rate = n;
    if (target.mode == TargetMode::OrbitNormalSpin) {
      const double phi = target.spin_phase + target.spin_rate * t;
      R = R * Eigen::AngleAxisd(phi, Vec3::UnitZ()).toRotationMatrix();
      rate += target.spin_rate;
    }
    out.q_target = rotation_to_quat(R);
    w_des_eci = rate * b.z_hat;
  }
  out.q_error = hamilton(out.q_target.conjugate(), s.q).canonical();
  out.omega_desired = to_body(s.q, EciVector(w_des_eci));
  out.omega_error = s.omega - out.omega_desired;
  return out;
}

double error_angle(const Quaternion& q_error) {
  return 2.0 * std::asin(std::min(1.0, q_error.vec().norm()));
}

PdGains PdGains::critically_damped(double kp, const Mat3& inertia) {
  const double j_mean = inertia.trace() / 3.0;
  return {kp, 2.0 * std::sqrt(kp * j_mean)};
}

ControlCommand pd_magnetorquer(const AttitudeError& err, const BodyVector& B, const PdGains& gains,
                               const MagnetorquerBank& bank, MagnetorquerLaw law) {
  ControlCommand cmd;
  const Vec3 u = -gains.kp * err.q_error.vec() - gains.kd * err.omega_error.eigen();
  Vec3 m = u;
  if (law == MagnetorquerLaw::Projected) {
    const double b2 = B.squaredNorm();
    m = b2 > 0.0 ? Vec3(B.eigen().cross(u) / b2) : Vec3::Zero();
  }
  for (int i = 0; i < 3; ++i) {
    if (std::abs(m[i]) > bank.m_max) {
      m[i] = std::copysign(bank.m_max, m[i]);
      cmd.saturated = true;
    }
  }
  cmd.dipole = BodyVector(m);
  cmd.field = B;
  cmd.magnetic_torque = cmd.dipole.cross(B);
  cmd.torque = cmd.magnetic_torque;
  // Every coil on an axis carries the same current I = m / (n_coils turns area).
  const double per_amp = bank.dipole_per_amp();
  for (int i = 0; i < 3; ++i) {
    const double I = m[i] / per_amp;
    cmd.power += bank.n_coils * I * I * bank.resistance;
  }
  return cmd;
}

ControlCommand pd_reaction_wheels(const AttitudeError& err, const PdGains& gains, const ReactionWheelSet& wheels,
                                  const Eigen::VectorXd& h_w) {
  ControlCommand cmd;
  const Vec3 tau_des = -gains.kp * err.q_error.vec() - gains.kd * err.omega_error.eigen();
  const Eigen::MatrixXd A = wheels.axis_matrix();
  // Body reaction is -A tau_w, so the motors are driven with -A^+ tau_des.
  Eigen::VectorXd tau_w = -A.completeOrthogonalDecomposition().pseudoInverse() * tau_des;
  for (Eigen::Index i = 0; i < tau_w.size(); ++i) {
    if (std::abs(tau_w[i]) > wheels.tau_max) {
      tau_w[i] = std::copysign(wheels.tau_max, tau_w[i]);
      cmd.saturated = true;
    }
    if (wheels.enforce_saturation && std::abs(h_w[i]) >= wheels.h_max && tau_w[i] * h_w[i] > 0.0) {
      tau_w[i] = 0.0;
      cmd.saturated = true;
    }
  }
  cmd.wheel_torque = tau_w;
  cmd.torque = BodyVector(-(A * tau_w));
  for (Eigen::Index i = 0; i < tau_w.size(); ++i) {
    const double w_wheel = h_w[i] / wheels.J_w;
    cmd.power += std::abs(tau_w[i] * w_wheel) + wheels.friction * w_wheel * w_wheel;
  }
  return cmd;
}

BodyVector momentum_dump(const ReactionWheelSet& wheels, const Eigen::VectorXd& h_w, const BodyVector& B,
                         const MagnetorquerBank& bank, const MomentumDumpConfig& cfg) {
  if (!cfg.enabled) return BodyVector::Zero();
  const Vec3 h = wheels.axis_matrix() * h_w;
  const double hn = h.norm();
  const double b2 = B.squaredNorm();
  if (hn <= cfg.threshold || !(b2 > 0.0)) return BodyVector::Zero();
  const Vec3 h_excess = h * ((hn - cfg.threshold) / hn);
  Vec3 m = cfg.gain * h_excess.cross(B.eigen()) / b2;
  // Uniform scaling keeps the direction, and with it the sign condition.
  const double peak = m.cwiseAbs().maxCoeff();
  if (peak > bank.m_max) m *= bank.m_max / peak;
  return BodyVector(m);
}

namespace {
double rms(const std::vector<double>& v, std::size_t from, std::size_t to) {
  if (to <= from) return 0.0;
  double acc = 0.0;
  for (std::size_t i = from; i < to; ++i) acc += v[i] * v[i];
  return std::sqrt(acc / static_cast<double>(to - from));
}
}  // namespace

ControlMetrics spin_rate_metrics(const std::vector<ControlSample>& samples, const MetricsConfig& cfg) {
  if (samples.empty()) throw ConfigError("metrics need at least one sample");
  const std::size_t n = samples.size();
  std::vector<double> err(n), rate(n);
  double power = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    err[i] = error_angle(samples[i].q_error) * kRadToDeg;
    rate[i] = samples[i].omega_error.norm();
    power += samples[i].power;
  }
  ControlMetrics out;
  out.avg_power = power / static_cast<double>(n);
  out.spin_rate_error = rms(rate, 0, n);
  out.final_error_deg = err.back();

  const double t0 = samples.front().t, t1 = samples.back().t;
  const double final_window = cfg.final_window > 0.0 ? cfg.final_window : 0.1 * (t1 - t0);
  std::size_t tail = n - 1;
  while (tail > 0 && samples[tail - 1].t >= t1 - final_window) --tail;
  const double threshold = cfg.threshold_deg ? *cfg.threshold_deg : cfg.band_factor * rms(err, tail, n);
  out.settling_threshold_deg = threshold;

  // next_bad[i]: first index >= i whose error is outside the band (n if none).
  std::vector<std::size_t> next_bad(n + 1, n);
  for (std::size_t i = n; i-- > 0;) next_bad[i] = err[i] > threshold ? i : next_bad[i + 1];
  for (std::size_t i = 0; i < n; ++i) {
    if (err[i] > threshold) continue;
    if (cfg.hold_time > 0.0) {
      if (samples[i].t + cfg.hold_time > t1) break;
      const std::size_t b = next_bad[i];
      if (b < n && samples[b].t <= samples[i].t + cfg.hold_time) continue;
    } else if (next_bad[i] < n) {
      continue;
    }
    out.settling_time = samples[i].t - t0;
    out.rms_attitude_error_deg = rms(err, i, n);
    return out;
  }
  out.rms_attitude_error_deg = rms(err, 0, n);
  return out;
}

}  // namespace eei
