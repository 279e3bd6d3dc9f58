#include "eei/perturbations.hpp"

#include "eei/errors.hpp"

#include <cmath>
#include <utility>

namespace eei {

EnvironmentModels EnvironmentModels::standard(int n_max, int m_max) {
  EnvironmentModels env;
  env.gravity = GravityModel::load(GravityModel::default_coefficient_file(), n_max, m_max);
  env.atmosphere = AtmosphereModel::load(AtmosphereModel::default_table_file());
  return env;
}

PerturbationSet PerturbationSet::only(AccelContributor c) const {
  PerturbationSet out = *this;
  out.accel.fill(false);
  out.set(c, true);
  return out;
}

PerturbationSet PerturbationSet::none(std::shared_ptr<const EnvironmentModels> env) {
  PerturbationSet p;
  p.env = std::move(env);
  return p;
}

PerturbationSet PerturbationSet::two_body(std::shared_ptr<const EnvironmentModels> env) {
  PerturbationSet p = none(std::move(env));
  p.set(AccelContributor::Geopotential, true);
  return p;
}

PerturbationSet PerturbationSet::all(std::shared_ptr<const EnvironmentModels> env) {
  PerturbationSet p = none(std::move(env));
  p.accel.fill(true);
  p.torque.fill(true);
  p.set(TorqueContributor::FacetRadiation, false);
  return p;
}

void PerturbationSet::validate() const {
  if (!env) throw ConfigError("perturbation set has no environment models");
  if (on(TorqueContributor::FacetRadiation) && on(TorqueContributor::Srp)) {
    throw ConfigError("facet_radiation and srp_torque both enabled: SRP torque would be counted twice");
  }
  if (on(TorqueContributor::FacetRadiation) && on(TorqueContributor::Albedo)) {
    throw ConfigError("facet_radiation and albedo_torque both enabled: albedo torque would be counted twice");
  }
  if (on(AccelContributor::Drag) && !env->atmosphere) throw ConfigError("drag enabled without an atmosphere model");
}

void AccelBreakdown::sum_totals() {
  total_accel = EciVector::Zero();
  for (const auto& a : accel) total_accel += a;
  using T = TorqueContributor;
  total_torque = BodyVector::Zero();
  total_torque += torque[static_cast<std::size_t>(T::GravityGradient)];
  total_torque += torque[static_cast<std::size_t>(T::Drag)];
  total_torque += torque[static_cast<std::size_t>(T::Srp)];
  total_torque += facet_torque_srp;
  total_torque += torque[static_cast<std::size_t>(T::Albedo)];
  total_torque += facet_torque_albedo;
}

EciVector drag_accel(const StateVector13& s, const FacetedSpacecraft& sc, const AtmosphereModel& atm,
                     const Epoch& epoch) {
  const DensitySample d = density(atm, s.r, epoch);
  if (d.rho == 0.0) return EciVector::Zero();
  const EciVector v_rel = s.v - d.v_atm;
  return (-0.5 * sc.drag_coefficient * sc.area_to_mass() * d.rho * v_rel.norm()) * v_rel;
}

EciVector srp_accel_lumped(const StateVector13& s, const FacetedSpacecraft& sc, const EciVector& sun_pos,
                           double shadow, double solar_pressure_1au) {
  if (shadow == 0.0) return EciVector::Zero();
  const EciVector d = sun_pos - s.r;
  const double dist = d.norm();
  const double p = shadow * solar_pressure_1au * (kAstronomicalUnit / dist) * (kAstronomicalUnit / dist);
  return (-p * sc.area_to_mass() * (1.0 + sc.bulk_reflectivity) / dist) * d;
}

EciVector third_body_accel(const EciVector& r, const EciVector& body_pos, double mu_body, ThirdBodyForm form) {
  const double s = body_pos.norm();
  if (!(s > 0.0)) throw Singularity("third body at the geocentre");
  if (form == ThirdBodyForm::AsPrinted) return (-mu_body / (s * s * s)) * r;
  const EciVector d = body_pos - r;
  const double dn = d.norm();
  if (!(dn > 0.0)) throw Singularity("spacecraft coincides with third body");
  return mu_body * (d / (dn * dn * dn) - body_pos / (s * s * s));
}

EciVector relativity_accel(const EciVector& r, const EciVector& v, double mu) {
  const double c2 = kSpeedOfLight * kSpeedOfLight;
  const double rn = r.norm();
  const double v2 = v.squaredNorm();
  // (mu/r^2)[(4mu/(c^2 r) - v^2/c^2) e_r + 4 v^2/c^2 (e_r.e_v) e_v], with the
  // last term written as 4 (r.v) v / (r c^2) so it stays defined at v = 0.
  const EciVector e_r = r / rn;
  return (mu / (rn * rn)) * ((4.0 * mu / (c2 * rn) - v2 / c2) * e_r + (4.0 * r.dot(v) / (rn * c2)) * v);
}

AlbedoAccelResult albedo_accel(const EciVector& r, double area, double mass, const AlbedoGrid& grid,
                               const Mat3& ecef_to_eci, const EciVector& sun_pos, bool keep_elements) {
  AlbedoAccelResult out;
  const double scale = grid.lochry_factor() * area / (mass * kSpeedOfLight);
  if (keep_elements) out.per_element.assign(grid.size(), EciVector::Zero());
  const auto& elements = grid.elements();
  for (std::size_t j = 0; j < elements.size(); ++j) {
    const ElementIrradiance e = element_irradiance(grid, j, ecef_to_eci, r, sun_pos);
    // cos(alpha) > 0 is the same test as the spacecraft standing above the
    // element's local horizon.
    if (!(e.cos_alpha > 0.0)) continue;
    const double w = (e.reflected + e.emitted) * e.cos_alpha * elements[j].area / (kPi * e.range * e.range);
    out.irradiance += w * e.r_hat;
    if (keep_elements) out.per_element[j] = EciVector(scale * w * e.r_hat);
  }
  out.accel = EciVector(scale * out.irradiance);
  return out;
}

BodyVector gravity_gradient_torque(const StateVector13& s, const Mat3& inertia, double mu) {
  const double rn = s.r.norm();
  const Vec3 rb = quat_to_rotation(s.q).transpose() * (s.r.eigen() / rn);
  return BodyVector((3.0 * mu / (rn * rn * rn)) * rb.cross(inertia * rb));
}

BodyVector offset_torque(const EciVector& accel, const Quaternion& q, const FacetedSpacecraft& sc) {
  const BodyVector f = to_body(q, accel) * sc.mass;
  return sc.cp_offset.cross(f);
}

AccelBreakdown evaluate_all(const StateVector13& s, const FacetedSpacecraft& sc, const PerturbationSet& set,
                            const Epoch& epoch, bool detail) {
  using A = AccelContributor;
  using T = TorqueContributor;
  const EnvironmentModels& env = *set.env;
  const Epoch env_epoch = set.freeze_environment ? set.frozen_epoch : epoch;
  auto at = [](auto& arr, auto c) -> auto& { return arr[static_cast<std::size_t>(c)]; };

  AccelBreakdown b;
  const bool need_sun = set.on(A::Srp) || set.on(A::ThirdBodySun) || set.on(A::SolidTide) || set.on(A::Albedo);
  if (need_sun) b.sun_pos = env.ephemeris.sun_position(env_epoch);
  if (set.on(A::Srp)) b.shadow = shadow_factor(env.shadow, s.r, b.sun_pos);

  if (set.on(A::Geopotential)) {
    at(b.accel, A::Geopotential) = gravity_accel(env.gravity, s.r, epoch, env.rotation);
    if (set.on(T::GravityGradient)) at(b.torque, T::GravityGradient) = gravity_gradient_torque(s, sc.inertia, env.gravity.mu());
  }

  if (set.on(A::Drag)) {
    at(b.accel, A::Drag) = drag_accel(s, sc, *env.atmosphere, epoch);
    if (set.on(T::Drag)) at(b.torque, T::Drag) = offset_torque(at(b.accel, A::Drag), s.q, sc);
  }

  // Albedo irradiance is needed both for the element-grid acceleration and
  // for the effective source seen by the facets.
  std::optional<AlbedoAccelResult> alb;
  if (set.on(A::Albedo)) {
    const Mat3 ecef_to_eci = env.rotation.eci_to_ecef(env_epoch).transpose();
    alb = albedo_accel(s.r, sc.cross_section, sc.mass, env.albedo_grid, ecef_to_eci, b.sun_pos, detail);
  }

  const bool facet_srp = set.on(A::Srp) && (set.srp_model == SrpModel::Facet || set.on(T::FacetRadiation));
  const bool facet_alb = set.on(A::Albedo) && (set.albedo_model == AlbedoModel::Facet || set.on(T::FacetRadiation));
  std::optional<RadiationWrench> wrench;
  if (facet_srp || facet_alb) {
    const Mat3 Rt = quat_to_rotation(s.q).transpose();
    RadiationFieldSample sample;
    sample.sun_dir = BodyVector(1.0, 0.0, 0.0);
    sample.albedo_dir = BodyVector(-1.0, 0.0, 0.0);
    if (facet_srp) {
      const Vec3 d = b.sun_pos.eigen() - s.r.eigen();
      const double dist = d.norm();
      sample.sun_dir = BodyVector(Rt * (d / dist));
      sample.solar_pressure =
          b.shadow * env.solar_pressure * (kAstronomicalUnit / dist) * (kAstronomicalUnit / dist);
    }
    if (facet_alb) {
      // The facets carry their own reflectivity, so the Lochry factor is not
      // applied on this path.
      const double flux = alb->irradiance.norm();
      if (flux > 0.0) {
        sample.albedo_dir = BodyVector(Rt * (-alb->irradiance / flux));
        sample.albedo_pressure = flux / kSpeedOfLight;
      }
    }
    wrench = total_radiation_wrench(sc, sample);
  }

  if (set.on(A::Srp)) {
    at(b.accel, A::Srp) = set.srp_model == SrpModel::Facet
                              ? to_eci(s.q, wrench->srp_accel_sum)
                              : srp_accel_lumped(s, sc, b.sun_pos, b.shadow, env.solar_pressure);
    if (set.on(T::Srp)) at(b.torque, T::Srp) = offset_torque(at(b.accel, A::Srp), s.q, sc);
  }

  if (set.on(A::ThirdBodySun)) {
    at(b.accel, A::ThirdBodySun) = third_body_accel(s.r, b.sun_pos, env.tide.mu_sun, set.third_body_form);
  }
  if (set.on(A::ThirdBodyMoon) || set.on(A::SolidTide)) {
    const EciVector moon = env.ephemeris.moon_position(env_epoch);
    if (set.on(A::ThirdBodyMoon)) {
      at(b.accel, A::ThirdBodyMoon) = third_body_accel(s.r, moon, env.tide.mu_moon, set.third_body_form);
    }
    if (set.on(A::SolidTide)) {
      const GravityModel base = env.gravity.extended_to(2, 2);
      const GravityModel tided = apply_solid_tide(base, env.tide, b.sun_pos, moon, env_epoch, env.rotation);
      GravityModel delta(base.mu(), base.radius(), 2, 2);
      for (int m = 0; m <= 2; ++m) delta.set(2, m, tided.C(2, m) - base.C(2, m), tided.S(2, m) - base.S(2, m));
      at(b.accel, A::SolidTide) = gravity_accel_noncentral(delta, s.r, epoch, env.rotation);
    }
  }

  if (set.on(A::Relativity)) at(b.accel, A::Relativity) = relativity_accel(s.r, s.v, env.gravity.mu());

  if (set.on(A::Albedo)) {
    at(b.accel, A::Albedo) = set.albedo_model == AlbedoModel::Facet ? to_eci(s.q, wrench->albedo_accel_sum) : alb->accel;
    if (set.on(T::Albedo)) at(b.torque, T::Albedo) = offset_torque(at(b.accel, A::Albedo), s.q, sc);
    if (detail) b.albedo_elements = std::move(alb->per_element);
  }

  if (set.on(T::FacetRadiation) && wrench) {
    if (facet_srp) b.facet_torque_srp = wrench->torque_srp;
    if (facet_alb) b.facet_torque_albedo = wrench->torque_albedo;
    at(b.torque, T::FacetRadiation) = b.facet_torque_srp + b.facet_torque_albedo;
  }
  if (detail) b.wrench = std::move(wrench);

  b.sum_totals();
  return b;
}

}  // namespace eei
