#include "eei/propagator.hpp"

#include <cmath>
#include <string>

namespace eei {

StateVector13::Array StateVector13::to_array() const {
  Array x;
  x << r.eigen(), v.eigen(), q.coeffs(), omega.eigen();
  return x;
}

StateVector13 StateVector13::from_array(const Array& x) {
  return {EciVector(x.segment<3>(0)), EciVector(x.segment<3>(3)), Quaternion(x[6], x[7], x[8], x[9]),
          BodyVector(x.segment<3>(10))};
}

Eigen::VectorXd ExtendedState::to_vector() const {
  Eigen::VectorXd x(13 + wheel_momentum.size());
  x << body.to_array(), wheel_momentum;
  return x;
}

ExtendedState ExtendedState::from_vector(const Eigen::VectorXd& x) {
  if (x.size() < 13) throw ConfigError("extended state needs at least 13 entries");
  return {StateVector13::from_array(x.head<13>()), x.tail(x.size() - 13)};
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("integrator dt must be positive");
  if (renormalize_every < 1) throw ConfigError("renormalize_every must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (output_stride < 0.0) throw ConfigError("output stride must be non-negative");
  if (output_stride > 0.0) {
    const double k = std::round(output_stride / dt);
    if (k < 1.0 || std::abs(k * dt - output_stride) > 1e-9 * output_stride) {
      throw ConfigError("output stride must be a whole multiple of dt");
    }
  }
}

Eigen::VectorXd derivatives(const ExtendedState& x, const Epoch& epoch, const DynamicsModel& model,
                            const ControlCommand& cmd, AccelBreakdown* breakdown) {
  // RK4 stage states carry a slightly non-unit quaternion; the physics sees the
  // normalized attitude, the kinematics the raw one.
  StateVector13 s = x.body;
  s.q = x.body.q.normalized();
  const AccelBreakdown bd = evaluate_all(s, model.sc, model.perturbations, epoch);

  const Mat3& J = model.sc.inertia;
  const Vec3 w = x.body.omega.eigen();
  Vec3 H = Vec3::Zero();
  if (x.wheel_momentum.size() > 0) H = model.wheels.axis_matrix() * x.wheel_momentum;
  const Vec3 torque = bd.total_torque.eigen() + model.bias_torque.eigen() + cmd.torque.eigen();

  Eigen::VectorXd dx(13 + x.wheel_momentum.size());
  dx.segment<3>(0) = x.body.v.eigen();
  dx.segment<3>(3) = (bd.total_accel + cmd.thrust_accel).eigen();
  dx.segment<4>(6) = quat_rate(x.body.q, w);
  dx.segment<3>(10) = J.ldlt().solve(torque - w.cross(J * w + H));
  if (x.wheel_momentum.size() > 0) {
    if (cmd.wheel_torque.size() == x.wheel_momentum.size()) {
      dx.tail(x.wheel_momentum.size()) = cmd.wheel_torque;
    } else {
      dx.tail(x.wheel_momentum.size()).setZero();
    }
  }
  if (breakdown) *breakdown = bd;
  return dx;
}

namespace {

ControlCommand idle_command(const ExtendedState& x) {
  ControlCommand c;
  c.wheel_torque = Eigen::VectorXd::Zero(x.wheel_momentum.size());
  return c;
}

bool state_ok(const ExtendedState& x, double min_radius, std::string& why) {
  if (!x.body.finite() || !x.wheel_momentum.allFinite()) {
    why = "non-finite state";
    return false;
  }
  if (!(x.body.r.norm() > min_radius)) {
    why = "orbit radius at or below the reference radius";
    return false;
  }
  return true;
}

}  // namespace

Trajectory propagate(const ExtendedState& x0, const Epoch& t0, double duration, const IntegratorConfig& cfg,
                     const DynamicsModel& model, const Controller& controller, bool detail) {
  cfg.validate();
  model.perturbations.validate();
  model.sc.validate();
  if (!model.perturbations.on(AccelContributor::Geopotential)) {
    throw ConfigError("propagation requires the geopotential contributor (it carries the central force)");
  }
  if (!(duration > 0.0)) throw ConfigError("propagation duration must be positive");
  if (static_cast<std::size_t>(x0.wheel_momentum.size()) != model.wheels.size()) {
    throw ConfigError("wheel momentum count does not match the wheel set");
  }
  if (model.wheels.size() > 0) model.wheels.validate();
  if (std::abs(x0.body.q.norm() - 1.0) > 1e-9) throw InvalidQuaternion("initial attitude quaternion is not unit");

  const double h_nominal = cfg.dt;
  const long n_steps = static_cast<long>(std::ceil(duration / h_nominal - 1e-9));
  if (n_steps > cfg.max_steps) throw ConfigError("propagation exceeds max_steps");
  const long stride = cfg.output_stride > 0.0 ? std::lround(cfg.output_stride / h_nominal) : 1;
  const double min_radius = model.perturbations.env->gravity.radius();

  auto traj = std::make_shared<Trajectory>();
  traj->t0 = t0;
  traj->samples.reserve(static_cast<std::size_t>(n_steps / stride + 2));

  auto record = [&](double t, const ExtendedState& x, const AccelBreakdown& bd, const ControlCommand& cmd) {
    if (detail) {
      StateVector13 s = x.body;
      traj->samples.push_back({t, x, evaluate_all(s, model.sc, model.perturbations, t0 + t, true), cmd});
    } else {
      traj->samples.push_back({t, x, bd, cmd});
    }
  };

  ExtendedState x = x0;
  std::string why;
  if (!state_ok(x, min_radius, why)) throw PropagationFailure("invalid initial state: " + why, 0.0, x, traj);

  for (long k = 0; k <= n_steps; ++k) {
    const double t = k == n_steps ? duration : static_cast<double>(k) * h_nominal;
    const Epoch ep = t0 + t;
    const bool output = (k == n_steps) || (k % stride == 0);
    try {
      ControlCommand cmd = controller ? controller(t, x, ep) : idle_command(x);
      if (cmd.dipole.squaredNorm() > 0.0 && cmd.field.squaredNorm() > 0.0) {
        const double rel =
            std::abs(cmd.magnetic_torque.dot(cmd.field)) / (cmd.dipole.norm() * cmd.field.squaredNorm());
        traj->max_field_dot = std::max(traj->max_field_dot, rel);
      }
      ++traj->control_steps;
      AccelBreakdown bd;
      const Eigen::VectorXd y = x.to_vector();
      const Eigen::VectorXd k1 = derivatives(x, ep, model, cmd, &bd);
      if (output) record(t, x, bd, cmd);
      if (k == n_steps) break;

      const double h = std::min(h_nominal, duration - t);
      const Eigen::VectorXd k2 = derivatives(ExtendedState::from_vector(y + 0.5 * h * k1), ep + 0.5 * h, model, cmd);
      const Eigen::VectorXd k3 = derivatives(ExtendedState::from_vector(y + 0.5 * h * k2), ep + 0.5 * h, model, cmd);
      const Eigen::VectorXd k4 = derivatives(ExtendedState::from_vector(y + h * k3), ep + h, model, cmd);
      ExtendedState next = ExtendedState::from_vector(y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      if ((k + 1) % cfg.renormalize_every == 0) {
        const double n = next.body.q.norm();
        traj->max_renorm = std::max(traj->max_renorm, std::abs(n - 1.0));
        next.body.q = next.body.q.normalized();
      }
      if (!state_ok(next, min_radius, why)) {
        throw PropagationFailure(why + " at t = " + std::to_string(t + h) + " s", t, x, traj);
      }
      x = next;
      ++traj->steps;
    } catch (const PropagationFailure&) {
      throw;
    } catch (const Error& e) {
      throw PropagationFailure(std::string("dynamics evaluation failed: ") + e.what(), t, x, traj);
    }
  }
  return std::move(*traj);
}

}  // namespace eei
