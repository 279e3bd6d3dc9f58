// Per-contributor translational accelerations and body torques.
#pragma once

#include "eei/environment.hpp"
#include "eei/facet_model.hpp"
#include "eei/frames.hpp"
#include "eei/geopotential.hpp"
#include "eei/state.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

namespace eei {

/// Immutable bundle of the physical models a perturbation set reads.
struct EnvironmentModels {
  GravityModel gravity{GravityModel::point_mass()};
  TideCorrection tide{};
  std::optional<AtmosphereModel> atmosphere;
  EphemerisProvider ephemeris{};
  ShadowGeometry shadow{};
  DipoleField dipole{};
  AlbedoGrid albedo_grid{};
  EarthRotation rotation{};
  double solar_pressure{1361.0 / kSpeedOfLight};  // N/m^2 at 1 AU

  /// Bundled EGM2008 truncated to (n_max, m_max), bundled exponential
  /// atmosphere, default albedo grid.
  static EnvironmentModels standard(int n_max = 20, int m_max = 20);
};

enum class AccelContributor : std::size_t {
  Geopotential,
  Drag,
  Srp,
  ThirdBodySun,
  ThirdBodyMoon,
  SolidTide,
  Relativity,
  Albedo,
};
inline constexpr std::size_t kNumAccel = 8;
inline constexpr std::array<std::string_view, kNumAccel> kAccelNames = {
    "geopotential", "drag", "srp", "third_body_sun", "third_body_moon", "solid_tide", "relativity", "albedo"};

enum class TorqueContributor : std::size_t {
  GravityGradient,
  Drag,
  Srp,
  Albedo,
  FacetRadiation,
};
inline constexpr std::size_t kNumTorque = 5;
inline constexpr std::array<std::string_view, kNumTorque> kTorqueNames = {
    "gravity_gradient", "drag_torque", "srp_torque", "albedo_torque", "facet_radiation"};

enum class SrpModel { Lumped, Facet };
enum class AlbedoModel { ElementGrid, Facet };
enum class ThirdBodyForm { Differential, AsPrinted };

// Torques ride on the acceleration channel that produces them: the gravity
// gradient needs geopotential on, the drag/SRP/albedo offset torques need the
// matching acceleration, and the facet radiation torque takes its SRP and
// albedo parts from the srp and albedo channels. A single-acceleration run
// therefore carries exactly the torques attributable to that contributor.
struct PerturbationSet {
  std::array<bool, kNumAccel> accel{};
  std::array<bool, kNumTorque> torque{};
  SrpModel srp_model{SrpModel::Lumped};
  AlbedoModel albedo_model{AlbedoModel::ElementGrid};
  ThirdBodyForm third_body_form{ThirdBodyForm::Differential};
  std::shared_ptr<const EnvironmentModels> env;
  // Sun/Moon positions and the Earth orientation seen by the albedo grid are
  // held at frozen_epoch; gravity and drag still use the running epoch.
  bool freeze_environment{false};
  Epoch frozen_epoch{};

  bool on(AccelContributor c) const { return accel[static_cast<std::size_t>(c)]; }
  bool on(TorqueContributor c) const { return torque[static_cast<std::size_t>(c)]; }
  PerturbationSet& set(AccelContributor c, bool v) {
    accel[static_cast<std::size_t>(c)] = v;
    return *this;
  }
  PerturbationSet& set(TorqueContributor c, bool v) {
    torque[static_cast<std::size_t>(c)] = v;
    return *this;
  }

  /// Copy with only acceleration channel `c` enabled; torque toggles kept.
  PerturbationSet only(AccelContributor c) const;

  static PerturbationSet none(std::shared_ptr<const EnvironmentModels> env);
  static PerturbationSet two_body(std::shared_ptr<const EnvironmentModels> env);
  static PerturbationSet all(std::shared_ptr<const EnvironmentModels> env);

  /// Throws ConfigError when the facet torque and a lumped offset torque are
  /// both enabled for SRP or albedo, or a model the toggles need is missing.
  void validate() const;
};

struct AlbedoAccelResult {
  EciVector accel;
  Vec3 irradiance{Vec3::Zero()};        // sum of K-free W/m^2 contributions along element->spacecraft
  std::vector<EciVector> per_element;   // filled when requested
};

struct AccelBreakdown {
  std::array<EciVector, kNumAccel> accel{};
  EciVector total_accel;
  std::array<BodyVector, kNumTorque> torque{};
  BodyVector total_torque;

  double shadow{1.0};
  EciVector sun_pos;
  std::vector<EciVector> albedo_elements;   // detail only
  std::optional<RadiationWrench> wrench;    // detail only

  const EciVector& operator[](AccelContributor c) const { return accel[static_cast<std::size_t>(c)]; }
  const BodyVector& operator[](TorqueContributor c) const { return torque[static_cast<std::size_t>(c)]; }
  // The facet_radiation channel split by the acceleration that produces it.
  BodyVector facet_torque_srp;
  BodyVector facet_torque_albedo;

  /// Recomputes both totals from the parts. Torques are added in the order of
  /// their parent acceleration channels, so the totals of single-contributor
  /// evaluations add up to the all-on totals bit for bit.
  void sum_totals();
};

EciVector drag_accel(const StateVector13& s, const FacetedSpacecraft& sc, const AtmosphereModel& atm,
                     const Epoch& epoch);

/// Cannonball radiation pressure with the surface normal taken along the Sun
/// line: -eta P (AU/r_sun)^2 (A/m)(1 + eps) e_sun.
EciVector srp_accel_lumped(const StateVector13& s, const FacetedSpacecraft& sc, const EciVector& sun_pos,
                           double shadow, double solar_pressure_1au);

EciVector third_body_accel(const EciVector& r, const EciVector& body_pos, double mu_body,
                           ThirdBodyForm form = ThirdBodyForm::Differential);

/// Post-Newtonian correction of the central field, gravito-magnetic terms dropped.
EciVector relativity_accel(const EciVector& r, const EciVector& v, double mu = GravityModel::kDefaultMu);

/// Element-wise albedo plus Earth infrared acceleration over the grid, for
/// the spacecraft cross-section `area` and `mass`.
AlbedoAccelResult albedo_accel(const EciVector& r, double area, double mass, const AlbedoGrid& grid,
                               const Mat3& ecef_to_eci, const EciVector& sun_pos, bool keep_elements = false);

BodyVector gravity_gradient_torque(const StateVector13& s, const Mat3& inertia, double mu = GravityModel::kDefaultMu);

/// r_CP x (m a) with a rotated into BODY.
BodyVector offset_torque(const EciVector& accel, const Quaternion& q, const FacetedSpacecraft& sc);

/// Evaluates every enabled contributor once. With `detail`, the albedo
/// per-element list and the facet wrench are kept in the breakdown.
AccelBreakdown evaluate_all(const StateVector13& s, const FacetedSpacecraft& sc, const PerturbationSet& set,
                            const Epoch& epoch, bool detail = false);

}  // namespace eei
