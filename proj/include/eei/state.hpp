// Spacecraft state shared by the dynamics, perturbation and control modules.
#pragma once

#include "eei/frames.hpp"

#include <Eigen/Dense>

namespace eei {

/// Translational and rotational state of one spacecraft: r, v in ECI, the
/// attitude quaternion (BODY relative to ECI) and the body rate w_B/I in BODY.
struct StateVector13 {
  EciVector r;
  EciVector v;
  Quaternion q;
  BodyVector omega;

  using Array = Eigen::Matrix<double, 13, 1>;
  Array to_array() const;
  static StateVector13 from_array(const Array& x);
  bool finite() const { return to_array().allFinite(); }
};

/// StateVector13 plus stored wheel momenta (0 to 3 wheels).
struct ExtendedState {
  StateVector13 body;
  Eigen::VectorXd wheel_momentum;  // N m s, one entry per wheel

  Eigen::VectorXd to_vector() const;
  static ExtendedState from_vector(const Eigen::VectorXd& x);
};

}  // namespace eei
