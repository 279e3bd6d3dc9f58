// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance <path to eei_sim>

#include "eei/scenario_runner.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace eei;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = EEI_SCENARIO_DIR;
const double mu = GravityModel::kDefaultMu;
const double Re = GravityModel::kDefaultRadius;

struct Outcome {
  bool pass{false};
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::shared_ptr<const EnvironmentModels> point_mass_env() {
  static const auto env = std::make_shared<const EnvironmentModels>();
  return env;
}

DynamicsModel two_body_model(const Mat3& J) {
  DynamicsModel m;
  m.sc = build_icosphere(1.0, 0, 0.3);
  m.sc.inertia = J;
  m.sc.cross_section = kPi;
  m.perturbations = PerturbationSet::two_body(point_mass_env());
  return m;
}

ExtendedState circular_600(const Vec3& omega) {
  const double r = Re + 600e3, v = std::sqrt(mu / r);
  const Mat3 R = (Eigen::AngleAxisd(0.6, Vec3::UnitZ()) * Eigen::AngleAxisd(97.8 * kDegToRad, Vec3::UnitX()))
                     .toRotationMatrix();
  ExtendedState x;
  x.body.r = EciVector(R * Vec3(r, 0, 0));
  x.body.v = EciVector(R * Vec3(0, v, 0));
  x.body.q = Quaternion::identity();
  x.body.omega = BodyVector(omega);
  return x;
}

double period_600() {
  const double a = Re + 600e3;
  return kTwoPi * std::sqrt(a * a * a / mu);
}

// --- 1 -----------------------------------------------------------------------

Outcome conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const DynamicsModel model = two_body_model(Vec3(30, 33, 36).asDiagonal());
  IntegratorConfig cfg;
  cfg.dt = 10.0;
  const Trajectory tr = propagate(circular_600(Vec3::Zero()), Epoch{}, 10.0 * period_600(), cfg, model);
  const double runtime = seconds_since(t0);

  const auto& s0 = tr.samples.front().state.body;
  const double E0 = 0.5 * s0.v.squaredNorm() - mu / s0.r.norm();
  const Vec3 h0 = s0.r.eigen().cross(s0.v.eigen());
  double dE = 0.0, dh = 0.0;
  for (const auto& s : tr.samples) {
    const auto& b = s.state.body;
    const double E = 0.5 * b.v.squaredNorm() - mu / b.r.norm();
    const Vec3 h = b.r.eigen().cross(b.v.eigen());
    dE = std::max(dE, std::abs(E - E0) / std::abs(E0));
    dh = std::max(dh, std::atan2(h.cross(h0).norm(), h.dot(h0)));
  }
  return {dE < 1e-10 && dh < 1e-9 && runtime < 10.0,
          "energy drift " + fmt(dE) + " (< 1e-10), momentum direction drift " + fmt(dh) + " rad (< 1e-9), " +
              fmt(runtime) + " s (< 10)"};
}

// --- 2 -----------------------------------------------------------------------

struct SpinDrift {
  double energy{0.0}, momentum{0.0}, quat{0.0};
  std::size_t samples{0};
};

SpinDrift torque_free_drift(const Mat3& J, const Vec3& w0) {
  const DynamicsModel model = two_body_model(J);
  IntegratorConfig cfg;
  cfg.dt = 1.0;
  const Trajectory tr = propagate(circular_600(w0), Epoch{}, period_600(), cfg, model);
  const double T0 = 0.5 * w0.dot(J * w0), H0 = (J * w0).norm();
  SpinDrift d;
  for (const auto& s : tr.samples) {
    const Vec3 w = s.state.body.omega.eigen();
    d.energy = std::max(d.energy, std::abs(0.5 * w.dot(J * w) - T0) / T0);
    d.momentum = std::max(d.momentum, std::abs((J * w).norm() - H0) / H0);
    d.quat = std::max(d.quat, std::abs(s.state.body.q.norm() - 1.0));
  }
  d.samples = tr.samples.size();
  return d;
}

Outcome torque_free() {
  // Reference spacecraft inertia, tumbling at 3.5 deg/s.
  const SpinDrift d = torque_free_drift(Vec3(30.0, 33.0, 36.0).asDiagonal(), Vec3(0.02, -0.03, 0.05));
  // Strongly asymmetric 1:2:3 body, reported alongside: RK4 error grows as (|w| dt)^4.
  const SpinDrift x = torque_free_drift(Vec3(10.0, 20.0, 30.0).asDiagonal(), Vec3(0.01, 0.05, 0.02));
  return {d.energy < 1e-9 && d.momentum < 1e-9 && d.quat < 1e-12,
          "kinetic energy " + fmt(d.energy) + ", |J w| " + fmt(d.momentum) + " (< 1e-9), |q| - 1 " + fmt(d.quat) +
              " (< 1e-12), " + std::to_string(d.samples) + " samples; 1:2:3 inertia at 0.055 rad/s: energy " +
              fmt(x.energy) + ", |J w| " + fmt(x.momentum)};
}

// --- 3 -----------------------------------------------------------------------

Outcome facet_convergence() {
  const double P = 1361.0 / kSpeedOfLight, R = 1.0;
  RadiationFieldSample s;
  s.sun_dir = BodyVector(Vec3(0.2, 0.3, 0.9).normalized());
  s.albedo_dir = BodyVector(Vec3::UnitX());
  s.solar_pressure = P;
  std::vector<double> err;
  double torque_ratio = 0.0;
  for (int level = 1; level <= 5; ++level) {
    const RadiationWrench w = total_radiation_wrench(build_icosphere(R, level, 0.0), s);
    err.push_back(std::abs(w.force.norm() - P * kPi * R * R) / (P * kPi * R * R));
    if (level >= 3) torque_ratio = std::max(torque_ratio, w.torque.norm() / (w.force.norm() * R));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < err.size(); ++i) monotone = monotone && err[i] < err[i - 1];
  return {err[2] < 0.01 && monotone && torque_ratio < 1e-6,
          "force error level 3 " + fmt(err[2]) + " (< 0.01), level 5 " + fmt(err[4]) + ", monotone " +
              (monotone ? "yes" : "no") + ", torque ratio " + fmt(torque_ratio) + " (< 1e-6)"};
}

// --- 4 -----------------------------------------------------------------------

bool bit_equal(const Vec3& a, const Vec3& b) { return a.x() == b.x() && a.y() == b.y() && a.z() == b.z(); }

Outcome additivity() {
  std::size_t samples = 0, mismatches = 0;
  for (const char* file : {"scenario_i_rw.json", "facet_composite.json"}) {
    ScenarioConfig cfg = load_scenario(kScenarios / file);
    const auto env = build_environment(cfg);
    DynamicsModel model;
    model.sc = build_spacecraft(cfg.spacecraft);
    model.perturbations = build_perturbations(cfg, env);
    IntegratorConfig ic;
    ic.dt = 1.0;
    ic.output_stride = 10.0;
    ExtendedState x0{leader_initial_state(cfg), {}};
    x0.body.omega = BodyVector(1e-3, -2e-3, 1.5e-3);
    const Trajectory tr = propagate(x0, Epoch{cfg.epoch}, 1200.0, ic, model);
    for (const auto& smp : tr.samples) {
      StateVector13 s = smp.state.body;
      s.q = s.q.normalized();
      const Epoch ep = tr.t0 + smp.t;
      const AccelBreakdown& full = smp.breakdown;
      EciVector acc = EciVector::Zero();
      std::array<EciVector, kNumAccel> chan{};
      std::array<BodyVector, kNumTorque> tchan{};
      BodyVector tq = BodyVector::Zero();
      for (std::size_t c = 0; c < kNumAccel; ++c) {
        const AccelBreakdown one = evaluate_all(s, model.sc, model.perturbations.only(static_cast<AccelContributor>(c)), ep);
        acc += one.total_accel;
        tq += one.total_torque;
        for (std::size_t k = 0; k < kNumAccel; ++k) chan[k] += one.accel[k];
        for (std::size_t k = 0; k < kNumTorque; ++k) tchan[k] += one.torque[k];
      }
      bool ok = bit_equal(acc.eigen(), full.total_accel.eigen()) && bit_equal(tq.eigen(), full.total_torque.eigen());
      for (std::size_t k = 0; k < kNumAccel; ++k) ok = ok && bit_equal(chan[k].eigen(), full.accel[k].eigen());
      for (std::size_t k = 0; k < kNumTorque; ++k) ok = ok && bit_equal(tchan[k].eigen(), full.torque[k].eigen());
      ++samples;
      if (!ok) ++mismatches;
    }
  }
  return {mismatches == 0 && samples > 0, std::to_string(samples) + " samples (lumped and facet radiation), " +
                                               std::to_string(mismatches) + " not bit-identical"};
}

// --- 5, 6, 7 ----------------------------------------------------------------

struct FieldDot {
  double worst{0.0};
  std::size_t steps{0};
  void add(double v, std::size_t n) {
    worst = std::max(worst, v);
    steps += n;
  }
};
FieldDot field_dot;

RunSummary run_file(const char* file) { return run_scenario(load_scenario(kScenarios / file), RunOptions{}); }

Outcome scenario_i() {
  const RunSummary rw = run_file("scenario_i_rw.json");
  const RunSummary mtq = run_file("scenario_i_mtq.json");
  double rw_max = 0.0, mtq_min = kInf, mtq_max = 0.0;
  bool failed = false;
  for (const auto& s : rw.spacecraft) {
    rw_max = std::max(rw_max, s.metrics.rms_attitude_error_deg);
    failed = failed || s.failed;
  }
  for (const auto& s : mtq.spacecraft) {
    mtq_min = std::min(mtq_min, s.metrics.rms_attitude_error_deg);
    mtq_max = std::max(mtq_max, s.metrics.rms_attitude_error_deg);
    failed = failed || s.failed;
    field_dot.add(s.max_field_dot, s.control_steps);
  }
  const double runtime = std::max(rw.wall_clock, mtq.wall_clock);
  const bool pass = !failed && rw_max < 0.01 && mtq_min >= 0.02 && mtq_max <= 0.5 && mtq_min >= 5.0 * rw_max &&
                    runtime < 60.0;
  return {pass, "RW RMS " + fmt(rw_max) + " deg (< 0.01), MTQ RMS " + fmt(mtq_min) + ".." + fmt(mtq_max) +
                    " deg (in [0.02, 0.5], >= 5x RW), slowest run " + fmt(runtime) + " s (< 60)"};
}

Outcome scenario_ii() {
  const RunSummary rw = run_file("scenario_ii_rw.json");
  const RunSummary mtq = run_file("scenario_ii_mtq.json");
  bool pass = rw.spacecraft.size() == mtq.spacecraft.size() && !rw.spacecraft.empty();
  std::string detail;
  for (std::size_t i = 0; pass && i < rw.spacecraft.size(); ++i) {
    const auto& a = rw.spacecraft[i];
    const auto& b = mtq.spacecraft[i];
    field_dot.add(b.max_field_dot, b.control_steps);
    const double ta = a.metrics.settling_time.value_or(kInf);
    const double tb = b.metrics.settling_time.value_or(kInf);
    const bool longer = std::isfinite(ta) && tb > ta;
    const bool misses = b.target_met.has_value() && !*b.target_met;
    pass = pass && longer && misses && !a.failed && !b.failed;
    if (i == 0) {
      detail = "leader settling RW " + fmt(ta) + " s, MTQ " + (std::isfinite(tb) ? fmt(tb) + " s" : "never") +
               "; MTQ final error " + fmt(b.metrics.final_error_deg) + " deg vs threshold " +
               fmt(load_scenario(kScenarios / "scenario_ii_rw.json").slew.terminal_threshold_deg) + " deg";
    }
  }
  return {pass, detail + " (" + std::to_string(rw.spacecraft.size()) + " spacecraft checked)"};
}

Outcome sweep() {
  const RunSummary s = run_file("sweep.json");
  std::map<int, std::vector<SweepCell>> by_coils;
  bool failed = false;
  for (const auto& c : s.sweep) {
    by_coils[c.coils].push_back(c);
    failed = failed || c.failed;
    field_dot.add(c.max_field_dot, 1);
  }
  bool err_ok = true, pow_ok = true;
  for (auto& [coils, cells] : by_coils) {
    std::sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) { return a.intensity < b.intensity; });
    for (std::size_t i = 1; i < cells.size(); ++i) {
      err_ok = err_ok && cells[i].spin_rate_error <= cells[i - 1].spin_rate_error;
      pow_ok = pow_ok && cells[i].avg_power >= cells[i - 1].avg_power;
    }
  }
  return {!failed && err_ok && pow_ok && !s.sweep.empty(),
          std::to_string(s.sweep.size()) + " cells, spin-rate error non-increasing " + (err_ok ? "yes" : "no") +
              ", power non-decreasing " + (pow_ok ? "yes" : "no")};
}

// --- 8 -----------------------------------------------------------------------

double brute_force_objective(const Eigen::MatrixXd& P, const Eigen::VectorXd& q, const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& l, const Eigen::VectorXd& u) {
  const int n = static_cast<int>(q.size()), m = static_cast<int>(l.size());
  double best = kInf;
  std::vector<int> state(m, 0);
  while (true) {
    std::vector<int> rows;
    std::vector<double> target;
    bool ok = true;
    for (int i = 0; i < m; ++i) {
      if (l[i] == u[i]) {
        if (state[i] != 0) ok = false;
        rows.push_back(i);
        target.push_back(l[i]);
      } else if (state[i] != 0) {
        const double b = state[i] == 1 ? l[i] : u[i];
        if (!std::isfinite(b)) ok = false;
        rows.push_back(i);
        target.push_back(b);
      }
    }
    if (ok && static_cast<int>(rows.size()) <= n) {
      const int k = static_cast<int>(rows.size());
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + k, n + k);
      Eigen::VectorXd rhs(n + k);
      K.topLeftCorner(n, n) = P;
      rhs.head(n) = -q;
      for (int a = 0; a < k; ++a) {
        K.block(n + a, 0, 1, n) = A.row(rows[a]);
        K.block(0, n + a, n, 1) = A.row(rows[a]).transpose();
        rhs[n + a] = target[a];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
      if (lu.isInvertible()) {
        const Eigen::VectorXd x = lu.solve(rhs).head(n);
        const Eigen::VectorXd Ax = A * x;
        bool feasible = true;
        for (int i = 0; i < m; ++i) feasible = feasible && Ax[i] >= l[i] - 1e-9 && Ax[i] <= u[i] + 1e-9;
        if (feasible) best = std::min(best, 0.5 * x.dot(P * x) + q.dot(x));
      }
    }
    int i = 0;
    while (i < m && state[i] == 2) state[i++] = 0;
    if (i == m) break;
    ++state[i];
  }
  return best;
}

Vec6 rel_state(double x, double y, double z, double vx = 0, double vy = 0, double vz = 0) {
  Vec6 v;
  v << x, y, z, vx, vy, vz;
  return v;
}

Outcome trajectory_optimization() {
  const auto t0 = std::chrono::steady_clock::now();

  // (a) random QPs against exhaustive active-set enumeration
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> N(0.0, 1.0);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double qp_worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 19, m = 1 + (t * 7) % 8;
    Eigen::MatrixXd M(n, n), A(m, n);
    for (int i = 0; i < n * n; ++i) M.data()[i] = N(rng);
    for (int i = 0; i < m * n; ++i) A.data()[i] = N(rng);
    const Eigen::MatrixXd P = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd q(n), xf(n), l(m), u(m);
    for (auto& v : q) v = 5.0 * N(rng);
    for (auto& v : xf) v = N(rng);
    const Eigen::VectorXd Ax = A * xf;
    for (int i = 0; i < m; ++i) {
      const double c = U(rng);
      if (c < 0.15) {
        l[i] = u[i] = Ax[i];
      } else {
        l[i] = c < 0.5 ? -kInf : Ax[i] - U(rng);
        u[i] = c > 0.85 ? kInf : Ax[i] + U(rng);
      }
    }
    QpProblem p;
    p.P = P.sparseView();
    p.q = q;
    p.A = A.sparseView();
    p.l = l;
    p.u = u;
    const QpSolution sol = solve_qp(p);
    const double oracle = brute_force_objective(P, q, A, l, u);
    const double rel = std::abs(sol.report.objective - oracle) / std::max(1.0, std::abs(oracle));
    qp_worst = std::max(qp_worst, sol.report.converged() ? rel : kInf);
  }

  // (b) keep-out-free linear CW transfer against the continuous Gramian
  TranscriptionProblem g;
  g.n_nodes = 100;
  g.duration = 1500.0;
  g.u_max = 1.0;
  g.r_col = 0.0;
  g.nonlinear_correction = false;
  g.x0 = rel_state(50, -400, 30, 0, 0.1, 0);
  g.xf = rel_state(0, 400, 0);
  const ScpResult gr = solve_scp(g);
  const double n = g.gamma.mean_motion();
  Eigen::Matrix<double, 12, 12> VL = Eigen::Matrix<double, 12, 12>::Zero();
  const Mat6 Ac = cw_state_matrix(n);
  const Mat63 Bc = cw_input_matrix();
  VL.topLeftCorner<6, 6>() = -Ac * g.duration;
  VL.topRightCorner<6, 6>() = Bc * Bc.transpose() * g.duration;
  VL.bottomRightCorner<6, 6>() = Ac.transpose() * g.duration;
  const Eigen::Matrix<double, 12, 12> E = VL.exp();
  const Mat6 Phi = E.bottomRightCorner<6, 6>().transpose();
  const Mat6 W = Phi * E.topRightCorner<6, 6>();
  const Vec6 d = g.xf - Phi * g.x0;
  const double J_gram = d.dot(W.ldlt().solve(d));
  const double gram_err = std::abs(gr.report.cost - J_gram) / J_gram;

  // (c) transfer whose straight line crosses the keep-out sphere
  TranscriptionProblem c;
  c.n_nodes = 100;
  c.duration = 800.0;
  c.u_max = 0.02;
  c.r_col = 200.0;
  c.x0 = rel_state(100, -800, 0);
  c.xf = rel_state(60, 800, 0);
  const ScpResult cr = solve_scp(c);
  double min_sep = kInf, max_u = 0.0;
  for (const auto& x : cr.trajectory.x) min_sep = std::min(min_sep, x.head<3>().norm());
  for (const auto& u : cr.trajectory.u) max_u = std::max(max_u, u.norm());
  const bool crossing_ok = cr.report.converged && min_sep >= c.r_col && max_u <= c.u_max;

  const double runtime = seconds_since(t0);
  return {qp_worst < 1e-6 && gr.report.converged && gram_err < 5e-3 && crossing_ok && runtime < 120.0,
          "QP worst gap " + fmt(qp_worst) + " (< 1e-6), Gramian error " + fmt(gram_err) +
              " (< 0.005), crossing min separation " + fmt(min_sep) + " m (>= 200), max |u| " + fmt(max_u) +
              " (<= 0.02), " + fmt(runtime) + " s (< 120)"};
}

// --- 9 -----------------------------------------------------------------------

Outcome magnetorquer_orthogonality() {
  // scaled |tau . B| / (|m| |B|^2); a few roundings of a cross and a dot product
  const double bound = 8.0 * std::numeric_limits<double>::epsilon();
  return {field_dot.steps > 0 && field_dot.worst <= bound,
          "worst normalized tau.B " + fmt(field_dot.worst) + " (<= " + fmt(bound) + ") over " +
              std::to_string(field_dot.steps) + " magnetorquer control steps"};
}

// --- 10 ----------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<fs::path> files_under(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::string>> csv_cells(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

// Largest per-column difference relative to the column's magnitude.
double csv_relative_difference(const fs::path& a, const fs::path& b) {
  const auto A = csv_cells(a), B = csv_cells(b);
  if (A.size() != B.size() || A.empty() || A[0] != B[0]) return kInf;
  const std::size_t cols = A[0].size();
  double worst = 0.0;
  for (std::size_t j = 0; j < cols; ++j) {
    double scale = 0.0, diff = 0.0;
    for (std::size_t i = 1; i < A.size(); ++i) {
      if (A[i].size() != cols || B[i].size() != cols) return kInf;
      const double x = std::stod(A[i][j]), y = std::stod(B[i][j]);
      scale = std::max({scale, std::abs(x), std::abs(y)});
      diff = std::max(diff, std::abs(x - y));
    }
    if (diff > 0.0) worst = std::max(worst, diff / scale);
  }
  return worst;
}

Outcome determinism(const std::string& sim) {
  const fs::path root = fs::temp_directory_path() / "eei_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path scenario = kScenarios / "scenario_i_mtq.json";
  auto run = [&](const std::string& name, int threads) {
    const std::string cmd = "\"" + sim + "\" run --scenario \"" + scenario.string() + "\" --out \"" +
                            (root / name).string() + "\" --threads " + std::to_string(threads) + " > \"" +
                            (root / (name + ".log")).string() + "\" 2>&1";
    return std::system(cmd.c_str());
  };
  if (run("a", 1) != 0 || run("b", 1) != 0 || run("c", 3) != 0) return {false, "eei_sim run failed"};

  const auto fa = files_under(root / "a");
  if (fa != files_under(root / "b") || fa != files_under(root / "c")) return {false, "output file sets differ"};
  std::size_t identical = 0;
  double worst = 0.0;
  bool bitwise = true;
  for (const auto& f : fa) {
    const std::string a = read_file(root / "a" / f);
    if (a == read_file(root / "b" / f)) {
      ++identical;
    } else {
      bitwise = false;
    }
    if (f.extension() == ".csv") {
      worst = std::max(worst, csv_relative_difference(root / "a" / f, root / "c" / f));
    } else if (a != read_file(root / "c" / f)) {
      worst = kInf;
    }
  }
  fs::remove_all(root);
  return {bitwise && worst <= 1e-12 && !fa.empty(),
          std::to_string(identical) + "/" + std::to_string(fa.size()) +
              " files bit-identical across --threads 1 runs, 3-thread run worst relative channel difference " +
              fmt(worst) + " (<= 1e-12)"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <eei_sim executable>\n";
    return 2;
  }
  const std::string sim = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"conservation (two-body, dt 10 s, 10 orbits)", conservation},
      {"torque-free attitude kinematics", torque_free},
      {"facet SRP convergence and symmetric-sphere torque", facet_convergence},
      {"breakdown additivity", additivity},
      {"scenario I pointing accuracy", scenario_i},
      {"scenario II slew settling", scenario_ii},
      {"sweep monotonicity", sweep},
      {"trajectory optimization", trajectory_optimization},
      {"magnetorquer torque orthogonal to B", magnetorquer_orthogonality},
      {"output determinism", [&] { return determinism(sim); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << " [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
