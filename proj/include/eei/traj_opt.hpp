// Leader-relative transfer optimization: ZOH Clohessy-Wiltshire transcription,
// successive convexification of the keep-out sphere, QP subproblems.
//
// Relative states are [x y z vx vy vz] in the leader's LVLH frame (x radial,
// y along-track, z orbit normal); controls are LVLH accelerations in m/s^2.
#pragma once

#include "eei/propagator.hpp"
#include "eei/qp_solver.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace eei {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat63 = Eigen::Matrix<double, 6, 3>;

/// Leader orbit seen by the relative-motion model.
struct OrbitalParams {
  double mu{GravityModel::kDefaultMu};
  double radius{6378137.0 + 600e3};    // m, circular reference radius
  double eccentricity{0.0};
  double eccentricity_tolerance{1e-3};

  double mean_motion() const;
};

/// Continuous CW matrices, x_dot = A x + B u.
Mat6 cw_state_matrix(double n);
Mat63 cw_input_matrix();

/// Nonlinear relative motion about a circular leader, integrated with RK4
/// (`substeps` per interval) under a held control.
Vec6 propagate_relative_nonlinear(const Vec6& x, const Eigen::Vector3d& u, double dt, const OrbitalParams& gamma,
                                  int substeps = 10);

enum class ControlBoundForm { Ball, Polytope26 };
enum class CostForm { Energy, Fuel };

struct TranscriptionProblem {
  int n_nodes{100};
  double duration{1500.0};        // s; node spacing is duration / (n_nodes - 1)
  Vec6 x0{Vec6::Zero()};
  Vec6 xf{Vec6::Zero()};
  double u_max{1e-2};             // m/s^2
  double r_col{0.0};              // m
  OrbitalParams gamma{};
  double weight{1.0};
  CostForm cost{CostForm::Energy};
  double fuel_smoothing{1e-6};    // m/s^2, epsilon of sqrt(|u|^2 + eps^2)
  ControlBoundForm bound{ControlBoundForm::Ball};
  double bound_margin{1e-6};      // ball radius is u_max (1 - margin) inside the QP
  bool nonlinear_correction{true};
  double trust_radius{0.0};       // m; 0 picks a radius from the problem size
  int max_iterations{40};
  double tolerance{1e-3};         // m, successive-solution position change
  double defect_tolerance{1e-2};  // m, position defect against nonlinear relative motion
  QpSettings qp{};

  double dt() const { return duration / (n_nodes - 1); }
  void validate() const;
};

struct RelativeTrajectory {
  std::vector<Vec6> x;            // n_nodes
  std::vector<Eigen::Vector3d> u; // n_nodes - 1

  double cost(const TranscriptionProblem& p) const;
};

struct DiscreteDynamics {
  std::vector<Mat6> A;
  std::vector<Mat63> B;
  std::vector<Vec6> c;
  bool model_mismatch{false};     // leader eccentricity beyond tolerance
};

/// Exact ZOH discretization of CW (matrix exponential of the augmented
/// system); with correction, c_k = nonlinear step minus the linear step about
/// the reference.
DiscreteDynamics linearize_dynamics(const RelativeTrajectory& reference, const OrbitalParams& gamma, double dt,
                                    bool nonlinear_correction);

struct VariableLayout {
  int n_nodes;
  int x(int k) const { return 6 * k; }
  int u(int k) const { return 6 * n_nodes + 3 * k; }
  int size() const { return 9 * n_nodes - 3; }
};

/// The QP is posed in nondimensional variables: lengths over `length_scale`,
/// times over the node spacing, and the cost divided by a constant.
struct ConvexSubproblem {
  QpProblem qp;
  VariableLayout layout;
  double trust_radius;
  int collision_rows{0};
  double length_scale{1.0};   // m
  double time_scale{1.0};     // s

  /// Physical trajectory from a QP solution vector.
  RelativeTrajectory unpack(const Eigen::VectorXd& z) const;
};

/// Throws InfeasibleReference when a reference node sits on the leader while
/// a keep-out radius is set. trust_radius = inf drops the trust-region rows.
ConvexSubproblem build_subproblem(const TranscriptionProblem& problem, const RelativeTrajectory& reference,
                                  const DiscreteDynamics& dynamics, double trust_radius, bool with_collision = true);

struct SolveReport {
  int iterations{0};
  double cost{0.0};
  double max_defect{0.0};          // m
  double max_violation{0.0};       // worst of boundary, control-norm and keep-out violations
  bool converged{false};
  bool model_mismatch{false};
  std::string message;
  std::vector<double> cost_history;   // accepted iterates
  std::vector<double> defect_profile; // per interval, m
  QpReport last_qp;
};

struct ScpResult {
  RelativeTrajectory trajectory;
  SolveReport report;
};

ScpResult solve_scp(const TranscriptionProblem& problem);

/// Per-interval position defect |x_{k+1} - f_nl(x_k, u_k)| in metres.
std::vector<double> dynamics_defects(const RelativeTrajectory& t, const TranscriptionProblem& p);

struct NonlinearValidation {
  double terminal_miss{0.0};              // m
  std::vector<double> node_divergence;    // m, per node
  double max_divergence{0.0};
};

/// Replays the controls open loop: leader and follower are propagated in the
/// full dynamics of `model`, the follower thrusting u_k rotated out of the
/// leader's instantaneous LVLH frame. `leader` is the leader ECI state at t0.
NonlinearValidation validate_on_nonlinear(const RelativeTrajectory& solution, const TranscriptionProblem& problem,
                                          const StateVector13& leader, const Epoch& t0, const DynamicsModel& model,
                                          int substeps = 10);

/// Follower ECI state for a relative LVLH state about `leader`, and back.
StateVector13 relative_to_eci(const StateVector13& leader, const Vec6& rel);
Vec6 eci_to_relative(const StateVector13& leader, const StateVector13& follower);

}  // namespace eei
