// Non-gravitational environment: atmosphere, Sun/Moon ephemerides, Earth
// shadow, geomagnetic dipole and the discretized Earth albedo/emission grid.
#pragma once

#include "eei/frames.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace eei {

inline constexpr double kAstronomicalUnit = 1.495978707e11;  // m
inline constexpr double kSpeedOfLight = 299792458.0;        // m/s
inline constexpr double kEarthMeanRadius = 6371008.8;       // m
inline constexpr double kSunRadius = 6.957e8;               // m

// ---------------------------------------------------------------------------
// Atmosphere

struct AtmosphereLayer {
  double base_altitude;  // m
  double base_density;   // kg/m^3
  double scale_height;   // m
};

/// Piecewise-exponential density table. Altitude is measured from a
/// spherical Earth of `earth_radius`; the last layer's base marks the top of
/// the table.
class AtmosphereModel {
 public:
  AtmosphereModel(std::vector<AtmosphereLayer> layers, bool corotating = true,
                  double earth_radius = 6378137.0, double earth_rate = EarthRotation{}.rate);

  /// Rows of `base_alt_m base_density_kgm3 scale_height_m`; '#' comments.
  static AtmosphereModel load(const std::filesystem::path& file, bool corotating = true);
  static std::filesystem::path default_table_file();

  const std::vector<AtmosphereLayer>& layers() const { return layers_; }
  bool corotating() const { return corotating_; }
  double earth_radius() const { return earth_radius_; }
  double earth_rate() const { return earth_rate_; }
  double top_altitude() const { return layers_.back().base_altitude; }

 private:
  std::vector<AtmosphereLayer> layers_;
  bool corotating_;
  double earth_radius_;
  double earth_rate_;
};

struct DensitySample {
  double rho{0.0};
  EciVector v_atm{};
  bool above_table{false};  // warning: density clamped to zero
};

/// Throws OutOfRange below the bottom of the table.
DensitySample density(const AtmosphereModel& model, const EciVector& r, const Epoch& epoch);

// ---------------------------------------------------------------------------
// Ephemerides

/// Low-precision analytic Sun and Moon series (mean ecliptic and equinox of
/// J2000, rotated to the equator by the J2000 obliquity). Accuracy is a few
/// arcminutes, with geocentric distances good to a fraction of a percent.
class EphemerisProvider {
 public:
  explicit EphemerisProvider(double obliquity = 23.43929111 * kDegToRad) : obliquity_(obliquity) {}

  EciVector sun_position(const Epoch& epoch) const;
  EciVector moon_position(const Epoch& epoch) const;

 private:
  EciVector ecliptic_to_eci(double lon, double lat, double r) const;
  double obliquity_;
};

// ---------------------------------------------------------------------------
// Shadow

struct ShadowGeometry {
  double earth_radius{6378137.0};
  double sun_radius{kSunRadius};
};

/// Conical Earth shadow: 1 in sunlight, 0 in umbra, and the unocculted
/// fraction of the solar disk area in penumbra (or antumbra).
double shadow_factor(const ShadowGeometry& geom, const EciVector& r, const EciVector& sun_pos);

// ---------------------------------------------------------------------------
// Geomagnetic field

struct DipoleField {
  double B0{3.12e-5};          // T, equatorial surface field
  double radius{6378137.0};    // m
  Vec3 axis{0.0, 0.0, 1.0};    // ECI unit vector towards the north magnetic pole

  /// Dipole axis tilted by `tilt` from ECI +z towards the direction `azimuth`
  /// measured in the ECI x-y plane from +x.
  static DipoleField tilted(double tilt, double azimuth, double B0 = 3.12e-5, double radius = 6378137.0);
};

/// B = B0 (Re/r)^3 [k - 3 (k.r_hat) r_hat], i.e. B_r = -2 B0 (Re/r)^3 cos(theta)
/// and B_theta = -B0 (Re/r)^3 sin(theta) with theta measured from k.
EciVector magnetic_field(const DipoleField& field, const EciVector& r);

// ---------------------------------------------------------------------------
// Earth albedo / emission grid

struct AlbedoCoefficients {
  double a0{0.34}, a1{0.0}, a2{0.29};
  double e0{0.68}, e1{0.0}, e2{-0.18};
};

struct AlbedoGridConfig {
  AlbedoCoefficients coefficients{};
  double solar_irradiance{1361.0};     // W/m^2
  double lochry_reflectivity{0.3};     // eta_E in K = 1 + eta_E
  double radius{kEarthMeanRadius};     // m
  int target_elements{2000};
};

struct AlbedoElement {
  double latitude;   // rad
  double longitude;  // rad, Earth-fixed
  double area;       // m^2
  Vec3 normal_ecef;  // unit outward normal, Earth-fixed
  double albedo;     // a(latitude)
  double emissivity; // e(latitude)
};

struct ElementIrradiance {
  double reflected{0.0};   // nu a E_s cos(theta_s), W/m^2
  double exitance{0.0};    // M_b = E_s / 4, W/m^2
  double emitted{0.0};     // e M_b, W/m^2
  bool lit{false};         // nu
  double cos_alpha{0.0};   // element normal vs element->spacecraft
  double range{0.0};       // m
  Vec3 r_hat{Vec3::Zero()};  // unit element->spacecraft, ECI
};

/// Equal-area latitude-band tessellation of a sphere of mean Earth radius.
/// Bands share a common latitude step; each band is split in longitude into
/// cells of (nearly) the common target area, so the cell areas sum to the
/// sphere area exactly.
class AlbedoGrid {
 public:
  explicit AlbedoGrid(const AlbedoGridConfig& config = {});

  const AlbedoGridConfig& config() const { return config_; }
  const std::vector<AlbedoElement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  double lochry_factor() const { return 1.0 + config_.lochry_reflectivity; }

 private:
  AlbedoGridConfig config_;
  std::vector<AlbedoElement> elements_;
};

/// Zonal albedo and emissivity (a, e) at a geocentric latitude.
std::pair<double, double> albedo_emissivity(const AlbedoCoefficients& c, double latitude);
inline std::pair<double, double> albedo_emissivity(const AlbedoGrid& grid, double latitude) {
  return albedo_emissivity(grid.config().coefficients, latitude);
}

/// Throws ConfigError when a or e leaves [0, 1] at any latitude.
void validate_albedo_coefficients(const AlbedoCoefficients& c);

ElementIrradiance element_irradiance(const AlbedoGrid& grid, std::size_t index, const Epoch& epoch,
                                     const EciVector& spacecraft_r, const EciVector& sun_pos,
                                     const EarthRotation& rotation = {});
/// Same, with the Earth-fixed to ECI rotation already evaluated.
ElementIrradiance element_irradiance(const AlbedoGrid& grid, std::size_t index, const Mat3& ecef_to_eci,
                                     const EciVector& spacecraft_r, const EciVector& sun_pos);

}  // namespace eei
