#include "eei/traj_opt.hpp"

#include "eei/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <array>
#include <cmath>

namespace eei {

double OrbitalParams::mean_motion() const { return std::sqrt(mu / (radius * radius * radius)); }

Mat6 cw_state_matrix(double n) {
  Mat6 A = Mat6::Zero();
  A.topRightCorner<3, 3>().setIdentity();
  A(3, 0) = 3.0 * n * n;
  A(3, 4) = 2.0 * n;
  A(4, 3) = -2.0 * n;
  A(5, 2) = -n * n;
  return A;
}

Mat63 cw_input_matrix() {
  Mat63 B = Mat63::Zero();
  B.bottomRows<3>().setIdentity();
  return B;
}

namespace {

Vec6 relative_rhs(const Vec6& x, const Eigen::Vector3d& u, const OrbitalParams& g) {
  const double R = g.radius;
  const double n2 = g.mu / (R * R * R);
  const double n = std::sqrt(n2);
  const double rx = R + x[0];
  const double d = std::sqrt(rx * rx + x[1] * x[1] + x[2] * x[2]);
  const double k = g.mu / (d * d * d);
  Vec6 dx;
  dx.head<3>() = x.tail<3>();
  dx[3] = 2.0 * n * x[4] + n2 * rx - k * rx + u[0];
  dx[4] = -2.0 * n * x[3] + n2 * x[1] - k * x[1] + u[1];
  dx[5] = -k * x[2] + u[2];
  return dx;
}

std::vector<Eigen::Vector3d> polytope_directions() {
  std::vector<Eigen::Vector3d> d;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k)
        if (i || j || k) d.push_back(Eigen::Vector3d(i, j, k).normalized());
  return d;
}

}  // namespace

Vec6 propagate_relative_nonlinear(const Vec6& x0, const Eigen::Vector3d& u, double dt, const OrbitalParams& g,
                                  int substeps) {
  Vec6 x = x0;
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Vec6 k1 = relative_rhs(x, u, g);
    const Vec6 k2 = relative_rhs(x + 0.5 * h * k1, u, g);
    const Vec6 k3 = relative_rhs(x + 0.5 * h * k2, u, g);
    const Vec6 k4 = relative_rhs(x + h * k3, u, g);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

void TranscriptionProblem::validate() const {
  if (n_nodes < 2) throw ConfigError("trajectory needs at least 2 nodes");
  if (!(duration > 0.0)) throw ConfigError("transfer duration must be positive");
  if (!x0.allFinite() || !xf.allFinite()) throw ConfigError("boundary states must be finite");
  if (!(u_max > 0.0)) throw ConfigError("u_max must be positive");
  if (!(r_col >= 0.0)) throw ConfigError("R_col must be non-negative");
  if (!(weight > 0.0)) throw ConfigError("cost weight must be positive");
  if (!(bound_margin >= 0.0 && bound_margin < 0.1)) throw ConfigError("bound margin must be in [0, 0.1)");
}

double RelativeTrajectory::cost(const TranscriptionProblem& p) const {
  double J = 0.0;
  for (const auto& uk : u) {
    J += p.cost == CostForm::Energy ? uk.squaredNorm()
                                     : std::sqrt(uk.squaredNorm() + p.fuel_smoothing * p.fuel_smoothing);
  }
  return p.weight * p.dt() * J;
}

DiscreteDynamics linearize_dynamics(const RelativeTrajectory& ref, const OrbitalParams& gamma, double dt,
                                    bool nonlinear_correction) {
  if (ref.x.size() < 2 || ref.u.size() + 1 != ref.x.size()) throw ConfigError("reference trajectory sizes disagree");
  Eigen::Matrix<double, 9, 9> M = Eigen::Matrix<double, 9, 9>::Zero();
  M.topLeftCorner<6, 6>() = cw_state_matrix(gamma.mean_motion()) * dt;
  M.topRightCorner<6, 3>() = cw_input_matrix() * dt;
  const Eigen::Matrix<double, 9, 9> E = M.exp();
  const Mat6 Ad = E.topLeftCorner<6, 6>();
  const Mat63 Bd = E.topRightCorner<6, 3>();

  DiscreteDynamics d;
  d.model_mismatch = gamma.eccentricity > gamma.eccentricity_tolerance;
  const std::size_t K = ref.u.size();
  d.A.assign(K, Ad);
  d.B.assign(K, Bd);
  d.c.assign(K, Vec6::Zero());
  if (nonlinear_correction) {
    for (std::size_t k = 0; k < K; ++k) {
      d.c[k] = propagate_relative_nonlinear(ref.x[k], ref.u[k], dt, gamma) - Ad * ref.x[k] - Bd * ref.u[k];
    }
  }
  return d;
}

ConvexSubproblem build_subproblem(const TranscriptionProblem& p, const RelativeTrajectory& ref,
                                  const DiscreteDynamics& dyn, double trust_radius, bool with_collision) {
  const int N = p.n_nodes;
  const VariableLayout L{N};
  const int nv = L.size();
  const double dt = p.dt();
  if (static_cast<int>(ref.x.size()) != N) throw ConfigError("reference has the wrong node count");

  // Positions of order one, velocities per node spacing, accelerations per
  // node spacing squared.
  const double Ls = std::max({p.x0.head<3>().norm(), p.xf.head<3>().norm(), p.r_col, 1.0});
  const double Ts = dt;
  const double Us = Ls / (Ts * Ts);
  Vec6 S;
  S << Vec3::Constant(1.0 / Ls), Vec3::Constant(Ts / Ls);
  const Mat6 Sm = S.asDiagonal();
  const Mat6 Sinv = S.cwiseInverse().asDiagonal();

  std::vector<Eigen::Triplet<double>> Pt, At;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(nv);
  std::vector<double> lo, hi;
  std::vector<BallGroup> balls;
  int row = 0;
  auto add_row = [&](double l, double u) {
    lo.push_back(l);
    hi.push_back(u);
    return row++;
  };

  // Cost, divided by weight * dt * Us^2 (the argmin does not change).
  for (int k = 0; k < N - 1; ++k) {
    if (p.cost == CostForm::Energy) {
      for (int i = 0; i < 3; ++i) Pt.emplace_back(L.u(k) + i, L.u(k) + i, 2.0);
    } else {
      // Second-order model of sqrt(|u|^2 + eps^2) about the reference control.
      const Eigen::Vector3d ub = ref.u[k];
      const double s = std::sqrt(ub.squaredNorm() + p.fuel_smoothing * p.fuel_smoothing);
      const Eigen::Matrix3d H = (Eigen::Matrix3d::Identity() - ub * ub.transpose() / (s * s)) / s;
      const Eigen::Vector3d g = (ub / s - H * ub) / Us;
      for (int i = 0; i < 3; ++i) {
        q[L.u(k) + i] = g[i];
        for (int j = 0; j < 3; ++j) Pt.emplace_back(L.u(k) + i, L.u(k) + j, H(i, j));
      }
    }
  }

  // Boundary states.
  const Vec6 x0s = Sm * p.x0, xfs = Sm * p.xf;
  for (int i = 0; i < 6; ++i) {
    const int r = add_row(x0s[i], x0s[i]);
    At.emplace_back(r, L.x(0) + i, 1.0);
  }
  for (int i = 0; i < 6; ++i) {
    const int r = add_row(xfs[i], xfs[i]);
    At.emplace_back(r, L.x(N - 1) + i, 1.0);
  }
  // Dynamics: x_{k+1} - A x_k - B u_k = c_k.
  for (int k = 0; k < N - 1; ++k) {
    const Mat6 As = Sm * dyn.A[k] * Sinv;
    const Mat63 Bs = Sm * dyn.B[k] * Us;
    const Vec6 cs = Sm * dyn.c[k];
    for (int i = 0; i < 6; ++i) {
      const int r = add_row(cs[i], cs[i]);
      At.emplace_back(r, L.x(k + 1) + i, 1.0);
      for (int j = 0; j < 6; ++j) {
        if (As(i, j) != 0.0) At.emplace_back(r, L.x(k) + j, -As(i, j));
      }
      for (int j = 0; j < 3; ++j) {
        if (Bs(i, j) != 0.0) At.emplace_back(r, L.u(k) + j, -Bs(i, j));
      }
    }
  }
  // Control bound.
  const auto dirs = polytope_directions();
  for (int k = 0; k < N - 1; ++k) {
    if (p.bound == ControlBoundForm::Ball) {
      BallGroup g{{}, p.u_max * (1.0 - p.bound_margin) / Us};
      for (int i = 0; i < 3; ++i) {
        const int r = add_row(-kInf, kInf);
        At.emplace_back(r, L.u(k) + i, 1.0);
        g.rows.push_back(r);
      }
      balls.push_back(std::move(g));
    } else {
      for (const auto& d : dirs) {
        const int r = add_row(-kInf, p.u_max / Us);
        for (int i = 0; i < 3; ++i) {
          if (d[i] != 0.0) At.emplace_back(r, L.u(k) + i, d[i]);
        }
      }
    }
  }
  // Keep-out sphere about the leader (the origin), through supporting half-spaces.
  int collision_rows = 0;
  if (with_collision && p.r_col > 0.0) {
    for (int k = 0; k < N; ++k) {
      const Eigen::Vector3d rb = ref.x[k].head<3>();
      const double rn = rb.norm();
      if (!(rn > 1e-9 * std::max(1.0, p.r_col))) {
        throw InfeasibleReference("reference node " + std::to_string(k) + " coincides with the leader");
      }
      const Eigen::Vector3d nh = rb / rn;
      const int r = add_row(p.r_col * (1.0 + p.bound_margin) / Ls, kInf);
      for (int i = 0; i < 3; ++i) At.emplace_back(r, L.x(k) + i, nh[i]);
      ++collision_rows;
    }
  }
  // Trust region on positions.
  if (std::isfinite(trust_radius)) {
    for (int k = 0; k < N; ++k) {
      for (int i = 0; i < 3; ++i) {
        const int r = add_row((ref.x[k][i] - trust_radius) / Ls, (ref.x[k][i] + trust_radius) / Ls);
        At.emplace_back(r, L.x(k) + i, 1.0);
      }
    }
  }

  ConvexSubproblem sub{QpProblem{}, L, trust_radius, collision_rows, Ls, Ts};
  sub.qp.P.resize(nv, nv);
  sub.qp.P.setFromTriplets(Pt.begin(), Pt.end());
  sub.qp.q = q;
  sub.qp.A.resize(row, nv);
  sub.qp.A.setFromTriplets(At.begin(), At.end());
  sub.qp.l = Eigen::Map<Eigen::VectorXd>(lo.data(), row);
  sub.qp.u = Eigen::Map<Eigen::VectorXd>(hi.data(), row);
  sub.qp.balls = std::move(balls);
  return sub;
}

RelativeTrajectory ConvexSubproblem::unpack(const Eigen::VectorXd& z) const {
  Vec6 Sinv;
  Sinv << Vec3::Constant(length_scale), Vec3::Constant(length_scale / time_scale);
  const double Us = length_scale / (time_scale * time_scale);
  RelativeTrajectory t;
  for (int k = 0; k < layout.n_nodes; ++k) t.x.push_back(Sinv.cwiseProduct(z.segment<6>(layout.x(k))));
  for (int k = 0; k < layout.n_nodes - 1; ++k) t.u.push_back(Us * z.segment<3>(layout.u(k)));
  return t;
}

std::vector<double> dynamics_defects(const RelativeTrajectory& t, const TranscriptionProblem& p) {
  std::vector<double> out(t.u.size());
  for (std::size_t k = 0; k < t.u.size(); ++k) {
    const Vec6 nl = propagate_relative_nonlinear(t.x[k], t.u[k], p.dt(), p.gamma);
    out[k] = (t.x[k + 1].head<3>() - nl.head<3>()).norm();
  }
  return out;
}

namespace {

double keep_out_violation(const RelativeTrajectory& t, double r_col) {
  double v = 0.0;
  for (const auto& x : t.x) v = std::max(v, r_col - x.head<3>().norm());
  return v;
}

double max_position_change(const RelativeTrajectory& a, const RelativeTrajectory& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.x.size(); ++k) d = std::max(d, (a.x[k].head<3>() - b.x[k].head<3>()).norm());
  return d;
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

}  // namespace

ScpResult solve_scp(const TranscriptionProblem& p) {
  p.validate();
  const int N = p.n_nodes;
  const double dt = p.dt();
  ScpResult res;
  SolveReport& rep = res.report;

  // Straight-line seed, then the keep-out-free optimum as the first reference.
  RelativeTrajectory ref;
  for (int k = 0; k < N; ++k) {
    const double s = static_cast<double>(k) / (N - 1);
    ref.x.push_back((1.0 - s) * p.x0 + s * p.xf);
  }
  ref.u.assign(N - 1, Eigen::Vector3d::Zero());
  {
    const DiscreteDynamics dyn = linearize_dynamics(ref, p.gamma, dt, p.nonlinear_correction);
    rep.model_mismatch = dyn.model_mismatch;
    const ConvexSubproblem sub = build_subproblem(p, ref, dyn, kInf, false);
    const QpSolution sol = solve_qp(sub.qp, p.qp);
    rep.last_qp = sol.report;
    if (!sol.report.converged()) {
      res.trajectory = sub.unpack(sol.x);
      rep.defect_profile = dynamics_defects(res.trajectory, p);
      rep.max_defect = max_of(rep.defect_profile);
      rep.message = "initial subproblem did not converge (u_max too small for the transfer time?)";
      return res;
    }
    ref = sub.unpack(sol.x);
  }

  double radius = p.trust_radius > 0.0
                      ? p.trust_radius
                      : std::max({10.0 * p.x0.head<3>().norm(), 10.0 * p.xf.head<3>().norm(), 10.0 * p.r_col, 100.0});
  double J_ref = ref.cost(p);
  auto feasible = [&](const RelativeTrajectory& t, double& defect) {
    defect = max_of(dynamics_defects(t, p));
    return keep_out_violation(t, p.r_col) <= 0.0 && defect <= p.defect_tolerance;
  };

  bool converged = false;
  for (int it = 1; it <= p.max_iterations; ++it) {
    rep.iterations = it;
    double ref_defect = 0.0;
    const bool ref_ok = feasible(ref, ref_defect);
    const DiscreteDynamics dyn = linearize_dynamics(ref, p.gamma, dt, p.nonlinear_correction);
    const ConvexSubproblem sub = build_subproblem(p, ref, dyn, radius, true);
    const QpSolution sol = solve_qp(sub.qp, p.qp);
    rep.last_qp = sol.report;
    if (!sol.report.converged()) {
      radius *= 0.5;
      continue;
    }
    const RelativeTrajectory cand = sub.unpack(sol.x);
    const double J = cand.cost(p);
    // Once the reference satisfies every true constraint, only non-increasing
    // cost steps are taken.
    if (ref_ok && J > J_ref) {
      radius *= 0.5;
      // Every remaining step would move the trajectory by less than the
      // tolerance: the current reference is the answer.
      if (radius < p.tolerance) {
        converged = true;
        break;
      }
      continue;
    }
    const double change = max_position_change(cand, ref);
    ref = cand;
    J_ref = J;
    double defect = 0.0;
    const bool ok = feasible(ref, defect);
    if (ok) rep.cost_history.push_back(J);
    if (change < p.tolerance && ok) {
      converged = true;
      break;
    }
  }

  // The QP works on a slightly shrunk ball; clip the last ulp-level excess so
  // the control bound holds exactly.
  for (auto& uk : ref.u) {
    const double nrm = uk.norm();
    if (nrm > p.u_max) {
      uk *= p.u_max / nrm;
      // the rescaled norm can still round one ulp high
      while (uk.norm() > p.u_max) uk *= 1.0 - std::numeric_limits<double>::epsilon();
    }
  }
  res.trajectory = ref;
  rep.cost = ref.cost(p);
  rep.defect_profile = dynamics_defects(ref, p);
  rep.max_defect = max_of(rep.defect_profile);
  double viol = std::max((ref.x.front() - p.x0).cwiseAbs().maxCoeff(), (ref.x.back() - p.xf).cwiseAbs().maxCoeff());
  double u_excess = 0.0;
  for (const auto& uk : ref.u) u_excess = std::max(u_excess, uk.norm() - p.u_max);
  viol = std::max({viol, u_excess, keep_out_violation(ref, p.r_col)});
  rep.max_violation = viol;
  rep.converged = converged && keep_out_violation(ref, p.r_col) <= 0.0 && u_excess <= 0.0 &&
                  rep.max_defect <= p.defect_tolerance;
  if (rep.converged) {
    rep.message = "converged";
  } else if (!converged) {
    rep.message = "iteration limit or trust region collapse before convergence";
  } else {
    rep.message = "solution violates a true constraint";
  }
  return res;
}

StateVector13 relative_to_eci(const StateVector13& leader, const Vec6& rel) {
  const LvlhBasis b = lvlh_basis(leader.r, leader.v);
  const Mat3 C = b.matrix();
  const double n = leader.r.cross(leader.v).norm() / leader.r.squaredNorm();
  const Vec3 w(0.0, 0.0, n);
  StateVector13 f = leader;
  f.r = leader.r + EciVector(C * rel.head<3>());
  f.v = leader.v + EciVector(C * (rel.tail<3>() + w.cross(Vec3(rel.head<3>()))));
  return f;
}

Vec6 eci_to_relative(const StateVector13& leader, const StateVector13& follower) {
  const LvlhBasis b = lvlh_basis(leader.r, leader.v);
  const Mat3 C = b.matrix();
  const double n = leader.r.cross(leader.v).norm() / leader.r.squaredNorm();
  const Vec3 w(0.0, 0.0, n);
  Vec6 rel;
  rel.head<3>() = C.transpose() * (follower.r - leader.r).eigen();
  rel.tail<3>() = C.transpose() * (follower.v - leader.v).eigen() - w.cross(Vec3(rel.head<3>()));
  return rel;
}

NonlinearValidation validate_on_nonlinear(const RelativeTrajectory& sol, const TranscriptionProblem& p,
                                          const StateVector13& leader, const Epoch& t0, const DynamicsModel& model,
                                          int substeps) {
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  const int N = static_cast<int>(sol.x.size());
  IntegratorConfig cfg;
  cfg.dt = p.dt() / substeps;
  const double duration = p.dt() * (N - 1);

  ExtendedState xl{leader, Eigen::VectorXd::Zero(model.wheels.size())};
  const Trajectory lead = propagate(xl, t0, duration, cfg, model);

  const long last = static_cast<long>(lead.samples.size()) - 1;
  Controller thrust = [&](double t, const ExtendedState& x, const Epoch&) {
    ControlCommand c;
    c.wheel_torque = Eigen::VectorXd::Zero(x.wheel_momentum.size());
    const long step = std::min(std::lround(t / cfg.dt), last);
    const int node = std::min<int>(static_cast<int>(step / substeps), N - 2);
    const StateVector13& L = lead.samples[step].state.body;
    c.thrust_accel = EciVector(lvlh_basis(L.r, L.v).matrix() * sol.u[node]);
    return c;
  };
  ExtendedState xf{relative_to_eci(leader, sol.x.front()), Eigen::VectorXd::Zero(model.wheels.size())};
  const Trajectory foll = propagate(xf, t0, duration, cfg, model, thrust);

  NonlinearValidation v;
  for (int k = 0; k < N; ++k) {
    const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(k) * substeps, lead.samples.size() - 1);
    const Vec6 rel = eci_to_relative(lead.samples[i].state.body, foll.samples[i].state.body);
    v.node_divergence.push_back((rel.head<3>() - sol.x[k].head<3>()).norm());
  }
  v.terminal_miss = v.node_divergence.back();
  v.max_divergence = max_of(v.node_divergence);
  return v;
}

}  // namespace eei
