#include "eei/scenario_config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace eei {

using nlohmann::json;

namespace {

constexpr double kJ2 = 1.08262668e-3;
constexpr double kTropicalYear = 365.2421897 * 86400.0;

// Object view that remembers which keys were read; finish() rejects the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + "must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    out = convert<T>(j_.at(key), key);
  }

  template <typename T>
  void get(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    out = convert<T>(j_.at(key), key);
  }

  std::optional<Reader> object(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return Reader(j_.at(key), path_ + key + ".");
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    return has(key) ? &j_.at(key) : nullptr;
  }

  std::string where(const std::string& key = "") const {
    const std::string p = path_ + key;
    return p.empty() ? "scenario: " : "'" + (key.empty() ? path_.substr(0, path_.size() - 1) : p) + "': ";
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key '" + path_ + it.key() + "'");
    }
  }

  template <typename T>
  T convert(const json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, Vec3>) {
        if (!v.is_array() || v.size() != 3) throw ConfigError(where(key) + "expected an array of 3 numbers");
        return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
      } else if constexpr (std::is_same_v<T, Vec6>) {
        if (!v.is_array() || v.size() != 6) throw ConfigError(where(key) + "expected an array of 6 numbers");
        Vec6 x;
        for (int i = 0; i < 6; ++i) x[i] = v[i].get<double>();
        return x;
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
        return v.get<double>();
      } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ConfigError(where(key) + "expected an integer");
        return v.get<int>();
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where(key) + "expected true or false");
        return v.get<bool>();
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
        return v.get<std::string>();
      } else {
        return v.get<T>();
      }
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<std::pair<const char*, E>, N>& table, const std::string& what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  std::string options;
  for (const auto& [name, value] : table) options += std::string(options.empty() ? "" : ", ") + name;
  throw ConfigError("unknown " + what + " '" + s + "' (expected one of: " + options + ")");
}

template <typename E, std::size_t N>
std::string enum_name(E v, const std::array<std::pair<const char*, E>, N>& table) {
  for (const auto& [name, value] : table) {
    if (v == value) return name;
  }
  return "?";
}

constexpr std::array<std::pair<const char*, ScenarioKind>, 5> kScenarioNames{{{"scenario_i", ScenarioKind::ScenarioI},
                                                                             {"scenario_ii", ScenarioKind::ScenarioII},
                                                                             {"sweep", ScenarioKind::Sweep},
                                                                             {"trajopt", ScenarioKind::TrajOpt},
                                                                             {"custom", ScenarioKind::Custom}}};
constexpr std::array<std::pair<const char*, ControllerKind>, 3> kControllerNames{
    {{"none", ControllerKind::None},
     {"magnetorquer", ControllerKind::Magnetorquer},
     {"reaction_wheels", ControllerKind::ReactionWheels}}};
constexpr std::array<std::pair<const char*, TargetMode>, 3> kTargetNames{{{"nadir", TargetMode::NadirFixed},
                                                                         {"orbit_normal_spin", TargetMode::OrbitNormalSpin},
                                                                         {"slew", TargetMode::SlewTo}}};
constexpr std::array<std::pair<const char*, SrpModel>, 2> kSrpNames{{{"lumped", SrpModel::Lumped},
                                                                     {"facet", SrpModel::Facet}}};
constexpr std::array<std::pair<const char*, AlbedoModel>, 2> kAlbedoNames{{{"element_grid", AlbedoModel::ElementGrid},
                                                                           {"facet", AlbedoModel::Facet}}};
constexpr std::array<std::pair<const char*, MagnetorquerLaw>, 2> kLawNames{{{"projected", MagnetorquerLaw::Projected},
                                                                            {"direct", MagnetorquerLaw::Direct}}};
constexpr std::array<std::pair<const char*, CostForm>, 2> kCostNames{{{"energy", CostForm::Energy},
                                                                      {"fuel", CostForm::Fuel}}};
constexpr std::array<std::pair<const char*, ControlBoundForm>, 2> kBoundNames{
    {{"ball", ControlBoundForm::Ball}, {"polytope26", ControlBoundForm::Polytope26}}};

template <typename E, std::size_t N>
void get_enum(Reader& r, const std::string& key, E& out, const std::array<std::pair<const char*, E>, N>& table) {
  std::optional<std::string> s;
  r.get(key, s);
  if (s) out = parse_enum(*s, table, "value for '" + key + "'");
}

void read_orbit(Reader r, OrbitalElements& o) {
  r.get("altitude", o.altitude);
  r.get("eccentricity", o.eccentricity);
  r.get("inclination_deg", o.inclination_deg);
  r.get("raan_deg", o.raan_deg);
  r.get("arg_perigee_deg", o.arg_perigee_deg);
  r.get("true_anomaly_deg", o.true_anomaly_deg);
  r.finish();
}

void read_spacecraft(Reader r, SpacecraftConfig& s) {
  r.get("mass", s.mass);
  r.get("radius", s.radius);
  r.get("facet_level", s.facet_level);
  r.get("reflectivity", s.reflectivity);
  r.get("facet_file", s.facet_file);
  r.get("inertia", s.inertia_diag);
  r.get("cp_offset", s.cp_offset);
  r.get("drag_coefficient", s.drag_coefficient);
  r.get("bulk_reflectivity", s.bulk_reflectivity);
  r.get("cross_section", s.cross_section);
  r.finish();
}

void read_perturbations(Reader r, PerturbationConfig& p) {
  for (std::size_t i = 0; i < kNumAccel; ++i) r.get(std::string(kAccelNames[i]), p.accel[i]);
  for (std::size_t i = 0; i < kNumTorque; ++i) r.get(std::string(kTorqueNames[i]), p.torque[i]);
  get_enum(r, "srp_model", p.srp_model, kSrpNames);
  get_enum(r, "albedo_model", p.albedo_model, kAlbedoNames);
  r.get("gravity_degree", p.gravity_degree);
  r.get("gravity_order", p.gravity_order);
  r.get("albedo_elements", p.albedo_elements);
  r.get("freeze_environment", p.freeze_environment);
  r.get("bias_torque", p.bias_torque);
  r.finish();
}

void read_controller(Reader r, ControllerConfig& c) {
  get_enum(r, "type", c.kind, kControllerNames);
  r.get("kp", c.kp);
  r.get("kd", c.kd);
  get_enum(r, "magnetorquer_law", c.law, kLawNames);
  if (auto m = r.object("magnetorquer")) {
    m->get("n_coils", c.bank.n_coils);
    m->get("turns", c.bank.turns);
    m->get("coil_area", c.bank.coil_area);
    m->get("resistance", c.bank.resistance);
    m->get("m_max", c.bank.m_max);
    m->finish();
  }
  if (auto w = r.object("wheels")) {
    w->get("inertia", c.wheels.J_w);
    w->get("tau_max", c.wheels.tau_max);
    w->get("h_max", c.wheels.h_max);
    w->get("friction", c.wheels.friction);
    w->get("enforce_saturation", c.wheels.enforce_saturation);
    if (const json* axes = w->raw("axes")) {
      if (!axes->is_array() || axes->empty()) throw ConfigError("'controller.wheels.axes': expected a list of 3-vectors");
      c.wheels.axes.clear();
      for (const auto& a : *axes) c.wheels.axes.push_back(w->convert<Vec3>(a, "axes").normalized());
    }
    w->finish();
  }
  if (auto d = r.object("momentum_dump")) {
    d->get("enabled", c.dump.enabled);
    d->get("gain", c.dump.gain);
    d->get("threshold", c.dump.threshold);
    d->finish();
  }
  r.finish();
}

void read_trajopt(Reader r, TrajOptConfig& t) {
  TranscriptionProblem& p = t.problem;
  r.get("n_nodes", p.n_nodes);
  r.get("duration", p.duration);
  r.get("u_max", p.u_max);
  r.get("r_col", p.r_col);
  r.get("weight", p.weight);
  get_enum(r, "cost", p.cost, kCostNames);
  r.get("fuel_smoothing", p.fuel_smoothing);
  get_enum(r, "bound", p.bound, kBoundNames);
  r.get("bound_margin", p.bound_margin);
  r.get("nonlinear_correction", p.nonlinear_correction);
  r.get("trust_radius", p.trust_radius);
  r.get("max_iterations", p.max_iterations);
  r.get("tolerance", p.tolerance);
  r.get("defect_tolerance", p.defect_tolerance);
  r.get("validate_nonlinear", t.validate_nonlinear);
  r.get("validation_substeps", t.validation_substeps);
  r.finish();
}

json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

double sun_synchronous_inclination(double a, double e) {
  const double mu = GravityModel::kDefaultMu;
  const double Re = GravityModel::kDefaultRadius;
  const double n = std::sqrt(mu / (a * a * a));
  const double p = a * (1.0 - e * e);
  const double node_rate = kTwoPi / kTropicalYear;
  const double c = -node_rate / (1.5 * n * kJ2 * (Re / p) * (Re / p));
  if (std::abs(c) > 1.0) throw ConfigError("no sun-synchronous inclination for this orbit");
  return std::acos(c);
}

std::pair<EciVector, EciVector> elements_to_state(const OrbitalElements& el, double mu, double body_radius) {
  const double a = body_radius + el.altitude;
  const double e = el.eccentricity;
  const double inc = el.inclination_deg ? *el.inclination_deg * kDegToRad : sun_synchronous_inclination(a, e);
  const double p = a * (1.0 - e * e);
  const double nu = el.true_anomaly_deg * kDegToRad;
  const double r = p / (1.0 + e * std::cos(nu));
  const Vec3 r_pf(r * std::cos(nu), r * std::sin(nu), 0.0);
  const Vec3 v_pf = std::sqrt(mu / p) * Vec3(-std::sin(nu), e + std::cos(nu), 0.0);
  const Mat3 R = (Eigen::AngleAxisd(el.raan_deg * kDegToRad, Vec3::UnitZ()) * Eigen::AngleAxisd(inc, Vec3::UnitX()) *
                  Eigen::AngleAxisd(el.arg_perigee_deg * kDegToRad, Vec3::UnitZ()))
                     .toRotationMatrix();
  return {EciVector(R * r_pf), EciVector(R * v_pf)};
}

PdGains ControllerConfig::gains(const Mat3& inertia) const {
  const double k = kp.value_or(kind == ControllerKind::Magnetorquer ? kDefaultKpMagnetorquer : kDefaultKpWheels);
  PdGains g = PdGains::critically_damped(k, inertia);
  if (kd) g.kd = *kd;
  return g;
}

std::vector<std::string> ScenarioConfig::warnings() const {
  std::vector<std::string> w;
  const std::size_t n = spacecraft_count();
  if (n < 3 || n > 6) {
    w.push_back("formation of " + std::to_string(n) + " spacecraft is outside the usual 3 to 6");
  }
  return w;
}

void ScenarioConfig::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be positive");
  };
  if (!std::isfinite(epoch)) throw ConfigError("epoch must be finite");
  positive(orbit.altitude, "orbit.altitude");
  if (!(orbit.eccentricity >= 0.0 && orbit.eccentricity < 1.0)) throw ConfigError("orbit.eccentricity must be in [0, 1)");
  positive(spacecraft.mass, "spacecraft.mass");
  positive(spacecraft.radius, "spacecraft.radius");
  if (spacecraft.facet_level < 0 || spacecraft.facet_level > 6) throw ConfigError("spacecraft.facet_level must be in 0..6");
  if (!(spacecraft.reflectivity >= 0.0 && spacecraft.reflectivity <= 1.0)) {
    throw ConfigError("spacecraft.reflectivity must be in [0, 1]");
  }
  if ((spacecraft.inertia_diag.array() <= 0.0).any()) throw ConfigError("spacecraft.inertia must be positive");
  if (spacecraft.cross_section) positive(*spacecraft.cross_section, "spacecraft.cross_section");
  if (perturbations.gravity_degree < 0 || perturbations.gravity_order < 0 ||
      perturbations.gravity_order > perturbations.gravity_degree) {
    throw ConfigError("perturbations.gravity_degree/order out of range");
  }
  if (perturbations.albedo_elements < 1) throw ConfigError("perturbations.albedo_elements must be >= 1");
  if (!perturbations.accel[static_cast<std::size_t>(AccelContributor::Geopotential)]) {
    throw ConfigError("perturbations.geopotential carries the central force and cannot be disabled");
  }
  if (controller.kp) positive(*controller.kp, "controller.kp");
  if (controller.kd && !(*controller.kd >= 0.0)) throw ConfigError("controller.kd must be non-negative");
  controller.bank.validate();
  controller.wheels.validate();
  if (!std::isfinite(target.spin_rate)) throw ConfigError("target.spin_rate must be finite");
  if (target.initial_offset_deg != 0.0 && !(target.initial_offset_axis.norm() > 0.0)) {
    throw ConfigError("target.initial_offset_axis must be non-zero");
  }
  if (!(slew.axis.norm() > 0.0) || !(slew.start_axis.norm() > 0.0)) throw ConfigError("slew axes must be non-zero");
  positive(slew.terminal_threshold_deg, "slew.terminal_threshold_deg");
  if (sweep.coils.empty() || sweep.intensity.empty()) throw ConfigError("sweep grid must not be empty");
  for (int c : sweep.coils) {
    if (c < 1) throw ConfigError("sweep.coils entries must be >= 1");
  }
  for (double v : sweep.intensity) positive(v, "sweep.intensity entries");
  positive(integrator.dt, "integrator.dt");
  if (integrator.duration) positive(*integrator.duration, "integrator.duration");
  positive(integrator.orbits, "integrator.orbits");
  if (integrator.output_stride < 0.0) throw ConfigError("integrator.output_stride must be non-negative");
  IntegratorConfig ic{integrator.dt, integrator.renormalize_every, IntegratorConfig{}.max_steps, integrator.output_stride};
  ic.validate();
  for (const auto& ch : output.channels) {
    if (ch != "orbit" && ch != "attitude" && ch != "control" && ch != "breakdown") {
      throw ConfigError("unknown output channel '" + ch + "'");
    }
  }
  for (double t : output.facet_composite_times) {
    if (!(t >= 0.0)) throw ConfigError("output.facet_composite_times must be non-negative");
  }
  if (output.directory.empty()) throw ConfigError("output.directory must not be empty");
  if (scenario == ScenarioKind::TrajOpt) {
    if (followers.empty()) throw ConfigError("trajopt needs at least one follower");
    TranscriptionProblem p = trajopt.problem;
    p.validate();
  }
  std::set<std::string> names;
  for (const auto& f : followers) {
    if (!names.insert(f.name).second) throw ConfigError("duplicate follower name '" + f.name + "'");
    if (f.name == "leader") throw ConfigError("'leader' is reserved");
    if (f.name.find_first_of("/\\") != std::string::npos || f.name.empty()) {
      throw ConfigError("follower names must be non-empty and free of path separators");
    }
  }
}

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  Reader r(j, "");
  get_enum(r, "scenario", c.scenario, kScenarioNames);
  r.get("epoch", c.epoch);
  if (auto o = r.object("orbit")) read_orbit(std::move(*o), c.orbit);
  if (const json* fs = r.raw("followers")) {
    if (!fs->is_array()) throw ConfigError("'followers': expected a list");
    for (std::size_t i = 0; i < fs->size(); ++i) {
      Reader fr((*fs)[i], "followers[" + std::to_string(i) + "].");
      FollowerConfig f;
      f.name = "follower" + std::to_string(i + 1);
      fr.get("name", f.name);
      fr.get("relative_state", f.relative_state);
      fr.get("target_state", f.target_state);
      fr.finish();
      c.followers.push_back(f);
    }
  }
  if (auto o = r.object("spacecraft")) read_spacecraft(std::move(*o), c.spacecraft);
  if (auto o = r.object("perturbations")) read_perturbations(std::move(*o), c.perturbations);
  if (auto o = r.object("controller")) read_controller(std::move(*o), c.controller);
  if (auto o = r.object("target")) {
    get_enum(*o, "mode", c.target.mode, kTargetNames);
    o->get("spin_rate", c.target.spin_rate);
    o->get("initial_offset_deg", c.target.initial_offset_deg);
    o->get("initial_offset_axis", c.target.initial_offset_axis);
    o->finish();
  }
  if (auto o = r.object("slew")) {
    o->get("start_deg", c.slew.start_deg);
    o->get("start_axis", c.slew.start_axis);
    o->get("angle_deg", c.slew.angle_deg);
    o->get("axis", c.slew.axis);
    o->get("terminal_threshold_deg", c.slew.terminal_threshold_deg);
    o->finish();
  }
  if (auto o = r.object("sweep")) {
    o->get("coils", c.sweep.coils);
    o->get("intensity", c.sweep.intensity);
    o->get("spin_rate", c.sweep.spin_rate);
    o->finish();
  }
  if (auto o = r.object("trajopt")) read_trajopt(std::move(*o), c.trajopt);
  if (auto o = r.object("integrator")) {
    o->get("dt", c.integrator.dt);
    o->get("duration", c.integrator.duration);
    o->get("orbits", c.integrator.orbits);
    o->get("output_stride", c.integrator.output_stride);
    o->get("renormalize_every", c.integrator.renormalize_every);
    o->finish();
  }
  if (auto o = r.object("output")) {
    o->get("directory", c.output.directory);
    o->get("channels", c.output.channels);
    o->get("facet_composite_times", c.output.facet_composite_times);
    o->finish();
  }
  if (auto o = r.object("metrics")) {
    o->get("band_factor", c.metrics.band_factor);
    o->get("threshold_deg", c.metrics.threshold_deg);
    o->get("hold_time", c.metrics.hold_time);
    o->get("final_window", c.metrics.final_window);
    o->finish();
  }
  r.finish();
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open scenario file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = enum_name(c.scenario, kScenarioNames);
  j["epoch"] = c.epoch;
  j["orbit"] = {{"altitude", c.orbit.altitude},
                {"eccentricity", c.orbit.eccentricity},
                {"inclination_deg", opt_json(c.orbit.inclination_deg)},
                {"raan_deg", c.orbit.raan_deg},
                {"arg_perigee_deg", c.orbit.arg_perigee_deg},
                {"true_anomaly_deg", c.orbit.true_anomaly_deg}};
  j["followers"] = json::array();
  for (const auto& f : c.followers) {
    j["followers"].push_back(
        {{"name", f.name}, {"relative_state", vec_json(f.relative_state)}, {"target_state", vec_json(f.target_state)}});
  }
  const auto& s = c.spacecraft;
  j["spacecraft"] = {{"mass", s.mass},
                     {"radius", s.radius},
                     {"facet_level", s.facet_level},
                     {"reflectivity", s.reflectivity},
                     {"facet_file", opt_json(s.facet_file)},
                     {"inertia", vec_json(s.inertia_diag)},
                     {"cp_offset", vec_json(s.cp_offset)},
                     {"drag_coefficient", s.drag_coefficient},
                     {"bulk_reflectivity", s.bulk_reflectivity},
                     {"cross_section", opt_json(s.cross_section)}};
  json pj;
  for (std::size_t i = 0; i < kNumAccel; ++i) pj[std::string(kAccelNames[i])] = c.perturbations.accel[i];
  for (std::size_t i = 0; i < kNumTorque; ++i) pj[std::string(kTorqueNames[i])] = c.perturbations.torque[i];
  pj["srp_model"] = enum_name(c.perturbations.srp_model, kSrpNames);
  pj["albedo_model"] = enum_name(c.perturbations.albedo_model, kAlbedoNames);
  pj["gravity_degree"] = c.perturbations.gravity_degree;
  pj["gravity_order"] = c.perturbations.gravity_order;
  pj["albedo_elements"] = c.perturbations.albedo_elements;
  pj["freeze_environment"] = c.perturbations.freeze_environment;
  pj["bias_torque"] = vec_json(c.perturbations.bias_torque);
  j["perturbations"] = pj;
  const auto& k = c.controller;
  json axes = json::array();
  for (const auto& a : k.wheels.axes) axes.push_back(vec_json(a));
  j["controller"] = {{"type", enum_name(k.kind, kControllerNames)},
                     {"kp", opt_json(k.kp)},
                     {"kd", opt_json(k.kd)},
                     {"magnetorquer_law", enum_name(k.law, kLawNames)},
                     {"magnetorquer",
                      {{"n_coils", k.bank.n_coils},
                       {"turns", k.bank.turns},
                       {"coil_area", k.bank.coil_area},
                       {"resistance", k.bank.resistance},
                       {"m_max", k.bank.m_max}}},
                     {"wheels",
                      {{"inertia", k.wheels.J_w},
                       {"tau_max", k.wheels.tau_max},
                       {"h_max", k.wheels.h_max},
                       {"friction", k.wheels.friction},
                       {"enforce_saturation", k.wheels.enforce_saturation},
                       {"axes", axes}}},
                     {"momentum_dump", {{"enabled", k.dump.enabled}, {"gain", k.dump.gain}, {"threshold", k.dump.threshold}}}};
  j["target"] = {{"mode", enum_name(c.target.mode, kTargetNames)},
                 {"spin_rate", c.target.spin_rate},
                 {"initial_offset_deg", c.target.initial_offset_deg},
                 {"initial_offset_axis", vec_json(c.target.initial_offset_axis)}};
  j["slew"] = {{"start_deg", c.slew.start_deg},
               {"start_axis", vec_json(c.slew.start_axis)},
               {"angle_deg", c.slew.angle_deg},
               {"axis", vec_json(c.slew.axis)},
               {"terminal_threshold_deg", c.slew.terminal_threshold_deg}};
  j["sweep"] = {{"coils", c.sweep.coils}, {"intensity", c.sweep.intensity}, {"spin_rate", c.sweep.spin_rate}};
  const auto& p = c.trajopt.problem;
  j["trajopt"] = {{"n_nodes", p.n_nodes},
                  {"duration", p.duration},
                  {"u_max", p.u_max},
                  {"r_col", p.r_col},
                  {"weight", p.weight},
                  {"cost", enum_name(p.cost, kCostNames)},
                  {"fuel_smoothing", p.fuel_smoothing},
                  {"bound", enum_name(p.bound, kBoundNames)},
                  {"bound_margin", p.bound_margin},
                  {"nonlinear_correction", p.nonlinear_correction},
                  {"trust_radius", p.trust_radius},
                  {"max_iterations", p.max_iterations},
                  {"tolerance", p.tolerance},
                  {"defect_tolerance", p.defect_tolerance},
                  {"validate_nonlinear", c.trajopt.validate_nonlinear},
                  {"validation_substeps", c.trajopt.validation_substeps}};
  j["integrator"] = {{"dt", c.integrator.dt},
                     {"duration", opt_json(c.integrator.duration)},
                     {"orbits", c.integrator.orbits},
                     {"output_stride", c.integrator.output_stride},
                     {"renormalize_every", c.integrator.renormalize_every}};
  j["output"] = {{"directory", c.output.directory},
                 {"channels", c.output.channels},
                 {"facet_composite_times", c.output.facet_composite_times}};
  j["metrics"] = {{"band_factor", c.metrics.band_factor},
                  {"threshold_deg", opt_json(c.metrics.threshold_deg)},
                  {"hold_time", c.metrics.hold_time},
                  {"final_window", c.metrics.final_window}};
  return j.dump(2);
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string s = to_json(cfg);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string_view to_string(ScenarioKind k) {
  for (const auto& [name, value] : kScenarioNames) {
    if (value == k) return name;
  }
  return "?";
}

std::string_view to_string(ControllerKind k) {
  for (const auto& [name, value] : kControllerNames) {
    if (value == k) return name;
  }
  return "?";
}

FacetedSpacecraft build_spacecraft(const SpacecraftConfig& c) {
  FacetedSpacecraft sc = build_icosphere(c.radius, c.facet_level, c.reflectivity, c.mass);
  if (c.facet_file) sc.facets = load_facets(*c.facet_file);
  sc.inertia = c.inertia_diag.asDiagonal();
  sc.cp_offset = BodyVector(c.cp_offset);
  sc.drag_coefficient = c.drag_coefficient;
  sc.bulk_reflectivity = c.bulk_reflectivity;
  sc.cross_section = c.cross_section.value_or(kPi * c.radius * c.radius);
  sc.radius = c.radius;
  sc.validate();
  return sc;
}

std::shared_ptr<const EnvironmentModels> build_environment(const ScenarioConfig& cfg) {
  const auto& p = cfg.perturbations;
  auto env = std::make_shared<EnvironmentModels>(EnvironmentModels::standard(p.gravity_degree, p.gravity_order));
  if (p.albedo_elements != AlbedoGridConfig{}.target_elements) {
    AlbedoGridConfig g;
    g.target_elements = p.albedo_elements;
    env->albedo_grid = AlbedoGrid(g);
  }
  return env;
}

PerturbationSet build_perturbations(const ScenarioConfig& cfg, std::shared_ptr<const EnvironmentModels> env) {
  PerturbationSet set = PerturbationSet::none(std::move(env));
  set.accel = cfg.perturbations.accel;
  set.torque = cfg.perturbations.torque;
  set.srp_model = cfg.perturbations.srp_model;
  set.albedo_model = cfg.perturbations.albedo_model;
  set.freeze_environment = cfg.perturbations.freeze_environment;
  set.frozen_epoch = Epoch{cfg.epoch};
  set.validate();
  return set;
}

double leader_period(const ScenarioConfig& cfg) {
  const double a = GravityModel::kDefaultRadius + cfg.orbit.altitude;
  return kTwoPi * std::sqrt(a * a * a / GravityModel::kDefaultMu);
}

double run_duration(const ScenarioConfig& cfg) {
  return cfg.integrator.duration.value_or(cfg.integrator.orbits * leader_period(cfg));
}

}  // namespace eei
