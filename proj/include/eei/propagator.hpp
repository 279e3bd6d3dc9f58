// Fixed-step RK4 integration of the coupled orbit/attitude/wheel state.
#pragma once

#include "eei/control.hpp"
#include "eei/errors.hpp"
#include "eei/facet_model.hpp"
#include "eei/perturbations.hpp"
#include "eei/state.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace eei {

struct IntegratorConfig {
  double dt{1.0};                 // s
  int renormalize_every{1};       // steps between quaternion renormalizations
  long max_steps{50'000'000};
  double output_stride{0.0};      // s between output samples; 0 = every step

  void validate() const;
};

/// Everything the right-hand side needs besides the state.
struct DynamicsModel {
  FacetedSpacecraft sc;
  PerturbationSet perturbations;
  ReactionWheelSet wheels;        // empty axes = no wheels
  BodyVector bias_torque;         // constant extra body torque, N m
};

/// Derivative of ExtendedState::to_vector() layout. The breakdown evaluated
/// on the way is returned through `breakdown` when non-null.
Eigen::VectorXd derivatives(const ExtendedState& x, const Epoch& epoch, const DynamicsModel& model,
                            const ControlCommand& cmd, AccelBreakdown* breakdown = nullptr);

struct TrajectorySample {
  double t;                       // s since t0
  ExtendedState state;
  AccelBreakdown breakdown;
  ControlCommand command;
};

struct Trajectory {
  Epoch t0;
  std::vector<TrajectorySample> samples;
  long steps{0};
  double max_renorm{0.0};          // largest | |q| - 1 | removed by renormalization
  double max_field_dot{0.0};       // largest |tau_m . B| / (|m| |B|^2) over all control steps
  std::size_t control_steps{0};
};

/// Called once per step with (t since t0, state, epoch); the command is held
/// over the step.
using Controller = std::function<ControlCommand(double, const ExtendedState&, const Epoch&)>;

class PropagationFailure : public Error {
 public:
  PropagationFailure(const std::string& what, double t, ExtendedState last_valid, std::shared_ptr<Trajectory> partial)
      : Error(what), t_(t), last_valid_(std::move(last_valid)), partial_(std::move(partial)) {}

  double time() const { return t_; }
  const ExtendedState& last_valid_state() const { return last_valid_; }
  const std::shared_ptr<Trajectory>& partial() const { return partial_; }

 private:
  double t_;
  ExtendedState last_valid_;
  std::shared_ptr<Trajectory> partial_;
};

/// Output rows fall on t0 + k * stride and on tf, giving
/// ceil((tf - t0) / stride) + 1 samples; the last step is shortened to land on tf.
Trajectory propagate(const ExtendedState& x0, const Epoch& t0, double duration, const IntegratorConfig& cfg,
                     const DynamicsModel& model, const Controller& controller = {}, bool detail = false);

}  // namespace eei
