#include "eei/scenario_runner.hpp"

#include "eei/csv_output.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

namespace eei {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Runs fn(0..n-1) on up to `threads` workers. Results go to per-index slots,
// so the thread count never changes what a job computes.
template <typename Fn>
void run_jobs(std::size_t n, int threads, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Job {
  std::string name;
  ExtendedState x0;
  AttitudeTarget target;
  ControllerConfig controller;
};

struct JobResult {
  SpacecraftSummary summary;
};

IntegratorConfig integrator_config(const ScenarioConfig& cfg, const RunOptions& opt) {
  IntegratorConfig ic;
  ic.dt = cfg.integrator.dt;
  ic.renormalize_every = cfg.integrator.renormalize_every;
  ic.output_stride = opt.stride.value_or(cfg.integrator.output_stride);
  ic.validate();
  return ic;
}

DynamicsModel base_model(const ScenarioConfig& cfg, std::shared_ptr<const EnvironmentModels> env) {
  DynamicsModel m;
  m.sc = build_spacecraft(cfg.spacecraft);
  m.perturbations = build_perturbations(cfg, std::move(env));
  m.bias_torque = BodyVector(cfg.perturbations.bias_torque);
  return m;
}

// Attitude and rate that put the body on `target` at t = 0, rotated by the
// configured offset.
void place_on_target(StateVector13& s, const AttitudeTarget& target, double offset_deg, const Vec3& offset_axis) {
  const AttitudeError e0 = attitude_error(s, target, 0.0);
  s.q = e0.q_target;
  if (offset_deg != 0.0) s.q = quat_multiply(s.q, Quaternion::from_axis_angle(offset_axis, offset_deg * kDegToRad));
  s.omega = attitude_error(s, target, 0.0).omega_desired;
}

std::vector<StateVector13> formation_states(const ScenarioConfig& cfg) {
  const StateVector13 leader = leader_initial_state(cfg);
  std::vector<StateVector13> out{leader};
  for (const auto& f : cfg.followers) out.push_back(relative_to_eci(leader, f.relative_state));
  return out;
}

std::vector<std::string> formation_names(const ScenarioConfig& cfg) {
  std::vector<std::string> n{"leader"};
  for (const auto& f : cfg.followers) n.push_back(f.name);
  return n;
}

std::vector<ControlSample> control_samples(const Trajectory& traj, const AttitudeTarget& target) {
  std::vector<ControlSample> out;
  out.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const AttitudeError e = attitude_error(s.state.body, target, s.t);
    out.push_back({s.t, e.q_error, e.omega_error, s.command.power});
  }
  return out;
}

bool wants(const ScenarioConfig& cfg, const std::string& channel) {
  return std::find(cfg.output.channels.begin(), cfg.output.channels.end(), channel) != cfg.output.channels.end();
}

void write_job_files(const ScenarioConfig& cfg, const fs::path& dir, const Trajectory& traj, const Job& job,
                     const DynamicsModel& model) {
  fs::create_directories(dir);
  if (wants(cfg, "orbit")) write_orbit_csv(dir / "orbit.csv", traj);
  if (wants(cfg, "attitude")) write_attitude_csv(dir / "attitude.csv", traj, job.target);
  if (wants(cfg, "control")) write_control_csv(dir / "control.csv", traj, model.wheels.size());
  if (wants(cfg, "breakdown")) write_breakdown_csv(dir / "breakdown.csv", traj);
  if (!cfg.output.facet_composite_times.empty() && !traj.samples.empty()) {
    std::vector<FacetComposite> maps;
    for (double t : cfg.output.facet_composite_times) {
      auto it = std::find_if(traj.samples.begin(), traj.samples.end(),
                             [&](const TrajectorySample& s) { return s.t >= t - 1e-9; });
      if (it == traj.samples.end()) continue;
      maps.push_back(facet_composite(it->state.body, traj.t0 + it->t, it->t, model.sc, model.perturbations));
    }
    write_facet_composite_csv(dir / "facets.csv", model.sc, maps);
  }
}

SpacecraftSummary run_job(const ScenarioConfig& cfg, const RunOptions& opt, const Job& job,
                          std::shared_ptr<const EnvironmentModels> env, std::optional<double> terminal_threshold) {
  DynamicsModel model = base_model(cfg, std::move(env));
  ExtendedState x0 = job.x0;
  if (job.controller.kind == ControllerKind::ReactionWheels) {
    model.wheels = job.controller.wheels;
    x0.wheel_momentum = Eigen::VectorXd::Zero(model.wheels.size());
  } else {
    x0.wheel_momentum.resize(0);
  }
  const IntegratorConfig ic = integrator_config(cfg, opt);
  const Controller ctrl = make_controller(job.controller, job.target, model);

  SpacecraftSummary sum;
  sum.name = job.name;
  sum.controller = job.controller.kind;
  Trajectory traj;
  try {
    traj = propagate(x0, Epoch{cfg.epoch}, run_duration(cfg), ic, model, ctrl);
  } catch (const PropagationFailure& e) {
    sum.failed = true;
    sum.message = e.what();
    if (e.partial()) traj = *e.partial();
  }
  sum.samples = traj.samples.size();
  sum.max_field_dot = traj.max_field_dot;
  sum.control_steps = traj.control_steps;
  if (!traj.samples.empty()) {
    sum.metrics = spin_rate_metrics(control_samples(traj, job.target), cfg.metrics);
    for (std::size_t c = 0; c < kNumAccel; ++c) {
      double acc = 0.0;
      for (const auto& s : traj.samples) acc += s.breakdown.accel[c].squaredNorm();
      sum.accel_rms[c] = std::sqrt(acc / static_cast<double>(traj.samples.size()));
    }
    if (terminal_threshold) sum.target_met = !sum.failed && sum.metrics.final_error_deg <= *terminal_threshold;
  }
  if (!opt.out_dir.empty()) {
    const fs::path dir = opt.out_dir / job.name;
    write_job_files(cfg, dir, traj, job, model);
    if (sum.failed) {
      std::ofstream(dir / "FAILED") << sum.message << '\n';
    }
  }
  return sum;
}

RunSummary run_formation(const ScenarioConfig& cfg, const RunOptions& opt, const std::vector<Job>& jobs,
                         std::optional<double> terminal_threshold) {
  RunSummary out;
  out.scenario = cfg.scenario;
  out.config_hash = config_hash(cfg);
  out.warnings = cfg.warnings();
  const auto env = build_environment(cfg);
  out.spacecraft.resize(jobs.size());
  run_jobs(jobs.size(), opt.threads,
           [&](std::size_t i) { out.spacecraft[i] = run_job(cfg, opt, jobs[i], env, terminal_threshold); });
  return out;
}

AttitudeTarget configured_target(const ScenarioConfig& cfg) {
  AttitudeTarget t;
  t.mode = cfg.target.mode;
  t.spin_rate = cfg.target.spin_rate;
  return t;
}

template <typename F>
RunSummary timed(F f) {
  const auto start = std::chrono::steady_clock::now();
  RunSummary s = f();
  s.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return s;
}

json metrics_json(const ControlMetrics& m) {
  return {{"rms_attitude_error_deg", m.rms_attitude_error_deg},
          {"spin_rate_error", m.spin_rate_error},
          {"avg_power", m.avg_power},
          {"settling_time", m.settling_time ? json(*m.settling_time) : json(nullptr)},
          {"settled", m.settling_time.has_value()},
          {"settling_threshold_deg", m.settling_threshold_deg},
          {"final_error_deg", m.final_error_deg}};
}

void write_trajopt_csv(const fs::path& file, const RelativeTrajectory& t, const TranscriptionProblem& p,
                       const std::vector<double>& defects) {
  CsvWriter w(file, {"k", "t", "x", "y", "z", "vx", "vy", "vz", "ux", "uy", "uz", "defect"});
  for (std::size_t k = 0; k < t.x.size(); ++k) {
    w << static_cast<double>(k) << p.dt() * static_cast<double>(k);
    w << Vec3(t.x[k].head<3>()) << Vec3(t.x[k].tail<3>());
    if (k < t.u.size()) {
      w << t.u[k] << defects[k];
    } else {
      w << Vec3::Zero() << 0.0;
    }
    w.end_row();
  }
}

}  // namespace

StateVector13 leader_initial_state(const ScenarioConfig& cfg) {
  StateVector13 s;
  const auto [r, v] = elements_to_state(cfg.orbit, GravityModel::kDefaultMu, GravityModel::kDefaultRadius);
  s.r = r;
  s.v = v;
  s.q = rotation_to_quat(lvlh_basis(r, v).matrix());
  s.omega = BodyVector::Zero();
  return s;
}

Controller make_controller(const ControllerConfig& c, const AttitudeTarget& target, const DynamicsModel& model) {
  if (c.kind == ControllerKind::None) return {};
  const PdGains gains = c.gains(model.sc.inertia);
  const auto env = model.perturbations.env;
  const ReactionWheelSet wheels = model.wheels;
  if (c.kind == ControllerKind::Magnetorquer) {
    return [=](double t, const ExtendedState& x, const Epoch&) {
      const AttitudeError e = attitude_error(x.body, target, t);
      const BodyVector B = to_body(x.body.q, magnetic_field(env->dipole, x.body.r));
      ControlCommand cmd = pd_magnetorquer(e, B, gains, c.bank, c.law);
      cmd.wheel_torque = Eigen::VectorXd::Zero(x.wheel_momentum.size());
      return cmd;
    };
  }
  return [=](double t, const ExtendedState& x, const Epoch&) {
    const AttitudeError e = attitude_error(x.body, target, t);
    ControlCommand cmd = pd_reaction_wheels(e, gains, wheels, x.wheel_momentum);
    if (c.dump.enabled) {
      const BodyVector B = to_body(x.body.q, magnetic_field(env->dipole, x.body.r));
      const BodyVector m = momentum_dump(wheels, x.wheel_momentum, B, c.bank, c.dump);
      cmd.dipole = m;
      cmd.field = B;
      cmd.magnetic_torque = m.cross(B);
      cmd.torque += cmd.magnetic_torque;
      const double per_amp = c.bank.dipole_per_amp();
      for (int i = 0; i < 3; ++i) {
        const double I = m[i] / per_amp;
        cmd.power += c.bank.n_coils * I * I * c.bank.resistance;
      }
    }
    return cmd;
  };
}

FacetComposite facet_composite(const StateVector13& s, const Epoch& epoch, double t, const FacetedSpacecraft& sc,
                               const PerturbationSet& base) {
  PerturbationSet set = base;
  set.set(AccelContributor::Srp, true).set(AccelContributor::Albedo, true);
  set.srp_model = SrpModel::Facet;
  set.albedo_model = AlbedoModel::Facet;
  const AccelBreakdown bd = evaluate_all(s, sc, set, epoch, true);
  FacetComposite fc;
  fc.t = t;
  fc.albedo_accel = bd.wrench->albedo_accel;
  fc.srp_accel = bd.wrench->srp_accel;
  fc.albedo_sum = bd.wrench->albedo_accel_sum;
  fc.srp_sum = bd.wrench->srp_accel_sum;
  fc.breakdown_albedo = bd[AccelContributor::Albedo];
  return fc;
}

void write_facet_composite_csv(const fs::path& file, const FacetedSpacecraft& sc,
                               const std::vector<FacetComposite>& maps) {
  CsvWriter w(file, {"t", "facet", "nx", "ny", "nz", "albedo_ax", "albedo_ay", "albedo_az", "albedo_accel",
                     "srp_accel"});
  for (const auto& m : maps) {
    for (std::size_t j = 0; j < sc.facets.size(); ++j) {
      w << m.t << static_cast<double>(j) << sc.facets[j].normal.eigen() << m.albedo_accel[j].eigen()
        << m.albedo_accel[j].norm() << m.srp_accel[j].norm();
      w.end_row();
    }
  }
}

int RunSummary::exit_code() const {
  for (const auto& s : spacecraft) {
    if (s.failed) return 3;
  }
  for (const auto& c : sweep) {
    if (c.failed) return 3;
  }
  for (const auto& t : trajopt) {
    if (!t.report.converged) return 4;
  }
  return 0;
}

std::string RunSummary::to_json() const {
  json j;
  j["scenario"] = std::string(to_string(scenario));
  j["config_hash"] = config_hash;
  j["warnings"] = warnings;
  j["spacecraft"] = json::array();
  for (const auto& s : spacecraft) {
    json a;
    for (std::size_t c = 0; c < kNumAccel; ++c) a[std::string(kAccelNames[c])] = s.accel_rms[c];
    j["spacecraft"].push_back({{"name", s.name},
                               {"controller", std::string(to_string(s.controller))},
                               {"metrics", metrics_json(s.metrics)},
                               {"accel_rms", a},
                               {"samples", s.samples},
                               {"max_field_dot", s.max_field_dot},
                               {"target_met", s.target_met ? json(*s.target_met) : json(nullptr)},
                               {"failed", s.failed},
                               {"message", s.message}});
  }
  j["sweep"] = json::array();
  for (const auto& c : sweep) {
    j["sweep"].push_back({{"coils", c.coils},
                          {"intensity", c.intensity},
                          {"m_max", c.m_max},
                          {"spin_rate_error", c.spin_rate_error},
                          {"avg_power", c.avg_power},
                          {"failed", c.failed},
                          {"message", c.message}});
  }
  j["trajopt"] = json::array();
  for (const auto& t : trajopt) {
    json v = nullptr;
    if (t.validation) v = {{"terminal_miss", t.validation->terminal_miss}, {"max_divergence", t.validation->max_divergence}};
    j["trajopt"].push_back({{"name", t.name},
                            {"converged", t.report.converged},
                            {"message", t.report.message},
                            {"iterations", t.report.iterations},
                            {"cost", t.report.cost},
                            {"max_defect", t.report.max_defect},
                            {"max_violation", t.report.max_violation},
                            {"model_mismatch", t.report.model_mismatch},
                            {"min_separation", t.min_separation},
                            {"max_control", t.max_control},
                            {"cost_history", t.report.cost_history},
                            {"nonlinear_validation", v}});
  }
  return j.dump(2) + "\n";
}

RunSummary run_scenario_i(const ScenarioConfig& cfg, const RunOptions& opt) {
  return timed([&] {
    const AttitudeTarget target = configured_target(cfg);
    std::vector<Job> jobs;
    const auto states = formation_states(cfg);
    const auto names = formation_names(cfg);
    for (std::size_t i = 0; i < states.size(); ++i) {
      StateVector13 s = states[i];
      place_on_target(s, target, cfg.target.initial_offset_deg, cfg.target.initial_offset_axis);
      jobs.push_back({names[i], {s, {}}, target, cfg.controller});
    }
    return run_formation(cfg, opt, jobs, std::nullopt);
  });
}

RunSummary run_scenario_ii(const ScenarioConfig& cfg, const RunOptions& opt) {
  return timed([&] {
    std::vector<Job> jobs;
    const auto states = formation_states(cfg);
    const auto names = formation_names(cfg);
    for (std::size_t i = 0; i < states.size(); ++i) {
      StateVector13 s = states[i];
      const Quaternion q_lvlh = rotation_to_quat(lvlh_basis(s.r, s.v).matrix());
      AttitudeTarget target;
      target.mode = TargetMode::SlewTo;
      target.q_target = quat_multiply(q_lvlh, Quaternion::from_axis_angle(cfg.slew.axis, cfg.slew.angle_deg * kDegToRad));
      s.q = cfg.slew.start_deg == 0.0
                ? q_lvlh
                : quat_multiply(q_lvlh, Quaternion::from_axis_angle(cfg.slew.start_axis, cfg.slew.start_deg * kDegToRad));
      s.omega = BodyVector::Zero();
      jobs.push_back({names[i], {s, {}}, target, cfg.controller});
    }
    return run_formation(cfg, opt, jobs, cfg.slew.terminal_threshold_deg);
  });
}

RunSummary run_custom(const ScenarioConfig& cfg, const RunOptions& opt) {
  return run_scenario_i(cfg, opt);
}

RunSummary run_sweep(const ScenarioConfig& cfg, const RunOptions& opt) {
  return timed([&] {
    RunSummary out;
    out.scenario = ScenarioKind::Sweep;
    out.config_hash = config_hash(cfg);
    out.warnings = cfg.warnings();
    const auto env = build_environment(cfg);
    AttitudeTarget target;
    target.mode = TargetMode::OrbitNormalSpin;
    target.spin_rate = cfg.sweep.spin_rate;
    // Starts on the LVLH triad without the spin, so every cell opens with a
    // saturated spin-up.
    StateVector13 s0 = leader_initial_state(cfg);
    place_on_target(s0, AttitudeTarget{}, 0.0, Vec3::UnitX());

    const std::size_t nc = cfg.sweep.coils.size(), ni = cfg.sweep.intensity.size();
    out.sweep.resize(nc * ni);
    const IntegratorConfig ic = integrator_config(cfg, opt);
    run_jobs(nc * ni, opt.threads, [&](std::size_t k) {
      SweepCell& cell = out.sweep[k];
      cell.coils = cfg.sweep.coils[k / ni];
      cell.intensity = cfg.sweep.intensity[k % ni];
      cell.m_max = cell.coils * cell.intensity;
      ControllerConfig cc = cfg.controller;
      cc.kind = ControllerKind::Magnetorquer;
      cc.bank.n_coils = cell.coils;
      cc.bank.m_max = cell.m_max;
      DynamicsModel model = base_model(cfg, env);
      const Controller ctrl = make_controller(cc, target, model);
      Trajectory traj;
      try {
        traj = propagate({s0, {}}, Epoch{cfg.epoch}, run_duration(cfg), ic, model, ctrl);
      } catch (const PropagationFailure& e) {
        cell.failed = true;
        cell.message = e.what();
        if (e.partial()) traj = *e.partial();
      }
      if (!traj.samples.empty()) {
        const ControlMetrics m = spin_rate_metrics(control_samples(traj, target), cfg.metrics);
        cell.spin_rate_error = m.spin_rate_error;
        cell.avg_power = m.avg_power;
      }
      cell.max_field_dot = traj.max_field_dot;
    });
    if (!opt.out_dir.empty()) {
      fs::create_directories(opt.out_dir);
      CsvWriter w(opt.out_dir / "sweep.csv",
                  {"coils", "intensity", "m_max", "spin_rate_error", "avg_power", "failed"});
      for (const auto& c : out.sweep) {
        w << static_cast<double>(c.coils) << c.intensity << c.m_max << c.spin_rate_error << c.avg_power
          << (c.failed ? 1.0 : 0.0);
        w.end_row();
      }
    }
    return out;
  });
}

RunSummary run_trajopt(const ScenarioConfig& cfg, const RunOptions& opt) {
  return timed([&] {
    RunSummary out;
    out.scenario = ScenarioKind::TrajOpt;
    out.config_hash = config_hash(cfg);
    out.warnings = cfg.warnings();
    const StateVector13 leader = leader_initial_state(cfg);
    std::shared_ptr<const EnvironmentModels> env;
    if (cfg.trajopt.validate_nonlinear) env = build_environment(cfg);
    out.trajopt.resize(cfg.followers.size());
    run_jobs(cfg.followers.size(), opt.threads, [&](std::size_t i) {
      const FollowerConfig& f = cfg.followers[i];
      TranscriptionProblem p = cfg.trajopt.problem;
      p.x0 = f.relative_state;
      p.xf = f.target_state;
      p.gamma.radius = leader.r.norm();
      p.gamma.eccentricity = cfg.orbit.eccentricity;
      TrajOptSummary& ts = out.trajopt[i];
      ts.name = f.name;
      const ScpResult res = solve_scp(p);
      ts.report = res.report;
      ts.min_separation = kInf;
      for (const auto& x : res.trajectory.x) ts.min_separation = std::min(ts.min_separation, x.head<3>().norm());
      for (const auto& u : res.trajectory.u) ts.max_control = std::max(ts.max_control, u.norm());
      if (cfg.trajopt.validate_nonlinear) {
        DynamicsModel model;
        model.sc = build_spacecraft(cfg.spacecraft);
        model.perturbations = build_perturbations(cfg, env);
        ts.validation =
            validate_on_nonlinear(res.trajectory, p, leader, Epoch{cfg.epoch}, model, cfg.trajopt.validation_substeps);
      }
      if (!opt.out_dir.empty()) {
        const fs::path dir = opt.out_dir / f.name;
        fs::create_directories(dir);
        write_trajopt_csv(dir / "trajopt.csv", res.trajectory, p, res.report.defect_profile);
      }
    });
    return out;
  });
}

RunSummary run_scenario(const ScenarioConfig& cfg, const RunOptions& opt) {
  RunSummary s;
  switch (cfg.scenario) {
    case ScenarioKind::ScenarioI:
      s = run_scenario_i(cfg, opt);
      break;
    case ScenarioKind::ScenarioII:
      s = run_scenario_ii(cfg, opt);
      break;
    case ScenarioKind::Sweep:
      s = run_sweep(cfg, opt);
      break;
    case ScenarioKind::TrajOpt:
      s = run_trajopt(cfg, opt);
      break;
    case ScenarioKind::Custom:
      s = run_custom(cfg, opt);
      break;
  }
  if (!opt.out_dir.empty()) {
    fs::create_directories(opt.out_dir);
    std::ofstream(opt.out_dir / "summary.json", std::ios::binary) << s.to_json();
    std::ofstream(opt.out_dir / "scenario.json", std::ios::binary) << to_json(cfg) << '\n';
  }
  return s;
}

}  // namespace eei
