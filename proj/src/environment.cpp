#include "eei/environment.hpp"

#include "eei/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace eei {

// ---------------------------------------------------------------------------
// Atmosphere

AtmosphereModel::AtmosphereModel(std::vector<AtmosphereLayer> layers, bool corotating, double earth_radius,
                                 double earth_rate)
    : layers_(std::move(layers)), corotating_(corotating), earth_radius_(earth_radius), earth_rate_(earth_rate) {
  if (layers_.size() < 2) throw ConfigError("atmosphere table needs at least two rows");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (!(l.base_density > 0.0) || !(l.scale_height > 0.0) || !std::isfinite(l.base_altitude)) {
      throw ConfigError("atmosphere layer " + std::to_string(i) + " needs positive density and scale height");
    }
    if (i == 0) continue;
    const auto& prev = layers_[i - 1];
    if (!(l.base_altitude > prev.base_altitude)) throw ConfigError("atmosphere layers must increase in altitude");
    const double top_of_prev = prev.base_density * std::exp(-(l.base_altitude - prev.base_altitude) / prev.scale_height);
    // Density may not rise across a boundary; allow for rounding in tabulated values.
    if (l.base_density > top_of_prev * (1.0 + 1e-6)) {
      throw ConfigError("atmosphere density increases across the boundary at " + std::to_string(l.base_altitude) + " m");
    }
  }
}

std::filesystem::path AtmosphereModel::default_table_file() {
  return std::filesystem::path(EEI_DATA_DIR) / "atmosphere_exponential.txt";
}

AtmosphereModel AtmosphereModel::load(const std::filesystem::path& file, bool corotating) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open atmosphere table " + file.string());
  std::vector<AtmosphereLayer> layers;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    AtmosphereLayer l{};
    if (!(ss >> l.base_altitude >> l.base_density >> l.scale_height)) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": expected `alt density scale_height`");
    }
    layers.push_back(l);
  }
  return AtmosphereModel(std::move(layers), corotating);
}

DensitySample density(const AtmosphereModel& model, const EciVector& r, const Epoch& /*epoch*/) {
  const double h = r.norm() - model.earth_radius();
  const auto& layers = model.layers();
  if (h < layers.front().base_altitude) throw OutOfRange("altitude " + std::to_string(h) + " m below atmosphere table");
  DensitySample out;
  if (model.corotating()) out.v_atm = EciVector(Vec3(0.0, 0.0, model.earth_rate()).cross(r.eigen()));
  if (h > model.top_altitude()) {
    out.above_table = true;
    return out;
  }
  // Last layer whose base is at or below h.
  auto it = std::upper_bound(layers.begin(), layers.end(), h,
                             [](double alt, const AtmosphereLayer& l) { return alt < l.base_altitude; });
  const AtmosphereLayer& layer = *(it - 1);
  out.rho = layer.base_density * std::exp(-(h - layer.base_altitude) / layer.scale_height);
  return out;
}

// ---------------------------------------------------------------------------
// Ephemerides

namespace {
constexpr double kArcsec = kDegToRad / 3600.0;

double deg_mod(double deg) { return std::fmod(deg, 360.0) * kDegToRad; }
}  // namespace

EciVector EphemerisProvider::ecliptic_to_eci(double lon, double lat, double r) const {
  const Vec3 ecl(r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat));
  const double ce = std::cos(obliquity_), se = std::sin(obliquity_);
  return EciVector(ecl.x(), ce * ecl.y() - se * ecl.z(), se * ecl.y() + ce * ecl.z());
}

EciVector EphemerisProvider::sun_position(const Epoch& epoch) const {
  const double T = epoch.julian_centuries();
  const double M = deg_mod(357.5256 + 35999.049 * T);
  const double lon = 282.9400 * kDegToRad + M + 6892.0 * kArcsec * std::sin(M) + 72.0 * kArcsec * std::sin(2.0 * M);
  const double r = (149.619 - 2.499 * std::cos(M) - 0.021 * std::cos(2.0 * M)) * 1e9;
  return ecliptic_to_eci(lon, 0.0, r);
}

EciVector EphemerisProvider::moon_position(const Epoch& epoch) const {
  const double T = epoch.julian_centuries();
  const double L0 = deg_mod(218.31617 + 481267.88088 * T);
  const double l = deg_mod(134.96292 + 477198.86753 * T);
  const double lp = deg_mod(357.52543 + 35999.04944 * T);
  const double F = deg_mod(93.27283 + 483202.01873 * T);
  const double D = deg_mod(297.85027 + 445267.11135 * T);

  const double dlon = 22640.0 * std::sin(l) + 769.0 * std::sin(2 * l) - 4586.0 * std::sin(l - 2 * D) +
                      2370.0 * std::sin(2 * D) - 668.0 * std::sin(lp) - 412.0 * std::sin(2 * F) -
                      212.0 * std::sin(2 * l - 2 * D) - 206.0 * std::sin(l + lp - 2 * D) + 192.0 * std::sin(l + 2 * D) -
                      165.0 * std::sin(lp - 2 * D) + 148.0 * std::sin(l - lp) - 125.0 * std::sin(D) -
                      110.0 * std::sin(l + lp) - 55.0 * std::sin(2 * F - 2 * D);
  const double lon = L0 + dlon * kArcsec;
  const double lat = 18520.0 * kArcsec * std::sin(F + lon - L0 + (412.0 * std::sin(2 * F) + 541.0 * std::sin(lp)) * kArcsec) -
                     526.0 * kArcsec * std::sin(F - 2 * D) + 44.0 * kArcsec * std::sin(l + F - 2 * D) -
                     31.0 * kArcsec * std::sin(-l + F - 2 * D) - 25.0 * kArcsec * std::sin(-2 * l + F) -
                     23.0 * kArcsec * std::sin(lp + F - 2 * D) + 21.0 * kArcsec * std::sin(-l + F) +
                     11.0 * kArcsec * std::sin(-lp + F - 2 * D);
  const double r = (385000.0 - 20905.0 * std::cos(l) - 3699.0 * std::cos(2 * D - l) - 2956.0 * std::cos(2 * D) -
                    570.0 * std::cos(2 * l) + 246.0 * std::cos(2 * l - 2 * D) - 205.0 * std::cos(lp - 2 * D) -
                    171.0 * std::cos(l + 2 * D) - 152.0 * std::cos(l + lp - 2 * D)) *
                   1e3;
  return ecliptic_to_eci(lon, lat, r);
}

// ---------------------------------------------------------------------------
// Shadow

double shadow_factor(const ShadowGeometry& geom, const EciVector& r, const EciVector& sun_pos) {
  const Vec3 to_sun = sun_pos.eigen() - r.eigen();
  const double d_sun = to_sun.norm();
  const double d_earth = r.norm();
  const double a = std::asin(std::min(1.0, geom.sun_radius / d_sun));     // apparent solar radius
  const double b = std::asin(std::min(1.0, geom.earth_radius / d_earth)); // apparent Earth radius
  const double cos_c = std::clamp(-r.eigen().dot(to_sun) / (d_earth * d_sun), -1.0, 1.0);
  const double c = std::acos(cos_c);  // separation of the disk centres

  if (c >= a + b) return 1.0;
  if (c <= b - a) return 0.0;
  if (c <= a - b) return 1.0 - (b * b) / (a * a);  // Earth disk entirely inside the solar disk
  // Partial overlap of two disks of radii a and b at centre distance c.
  const double x = (c * c + a * a - b * b) / (2.0 * c);
  const double y = std::sqrt(std::max(0.0, a * a - x * x));
  const double area = a * a * std::acos(std::clamp(x / a, -1.0, 1.0)) +
                      b * b * std::acos(std::clamp((c - x) / b, -1.0, 1.0)) - c * y;
  return std::clamp(1.0 - area / (kPi * a * a), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Geomagnetic field

DipoleField DipoleField::tilted(double tilt, double azimuth, double B0, double radius) {
  DipoleField f;
  f.B0 = B0;
  f.radius = radius;
  f.axis = Vec3(std::sin(tilt) * std::cos(azimuth), std::sin(tilt) * std::sin(azimuth), std::cos(tilt));
  return f;
}

EciVector magnetic_field(const DipoleField& field, const EciVector& r) {
  const double rn = r.norm();
  const Vec3 r_hat = r.eigen() / rn;
  const Vec3 k = field.axis.normalized();
  const double scale = field.B0 * std::pow(field.radius / rn, 3);
  return EciVector(scale * (k - 3.0 * k.dot(r_hat) * r_hat));
}

// ---------------------------------------------------------------------------
// Albedo grid

std::pair<double, double> albedo_emissivity(const AlbedoCoefficients& c, double latitude) {
  const double x = std::sin(latitude);
  const double p1 = x;
  const double p2 = 0.5 * (3.0 * x * x - 1.0);
  return {c.a0 + c.a1 * p1 + c.a2 * p2, c.e0 + c.e1 * p1 + c.e2 * p2};
}

void validate_albedo_coefficients(const AlbedoCoefficients& c) {
  // Each model is a quadratic in x = sin(latitude); check the ends and the vertex.
  auto check = [](double k0, double k1, double k2, const char* name) {
    auto f = [&](double x) { return k0 + k1 * x + k2 * 0.5 * (3.0 * x * x - 1.0); };
    std::vector<double> xs = {-1.0, 1.0};
    if (k2 != 0.0) {
      const double xv = -k1 / (3.0 * k2);
      if (xv > -1.0 && xv < 1.0) xs.push_back(xv);
    }
    for (double x : xs) {
      const double v = f(x);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(std::string(name) + " model leaves [0, 1] at sin(latitude) = " + std::to_string(x));
      }
    }
  };
  check(c.a0, c.a1, c.a2, "albedo");
  check(c.e0, c.e1, c.e2, "emissivity");
}

AlbedoGrid::AlbedoGrid(const AlbedoGridConfig& config) : config_(config) {
  validate_albedo_coefficients(config.coefficients);
  if (config.target_elements < 20) throw ConfigError("albedo grid needs at least 20 elements");
  if (!(config.radius > 0.0) || !(config.solar_irradiance >= 0.0)) throw ConfigError("invalid albedo grid constants");

  const int n_total = config.target_elements;
  const int n_bands = std::max(2, static_cast<int>(std::lround(std::sqrt(kPi * n_total / 4.0))));
  const double sphere_area = 4.0 * kPi * config.radius * config.radius;
  const double dlat = kPi / n_bands;
  for (int b = 0; b < n_bands; ++b) {
    const double lat_lo = -0.5 * kPi + b * dlat;
    const double lat_hi = lat_lo + dlat;
    const double frac = 0.5 * (std::sin(lat_hi) - std::sin(lat_lo));
    const int n_lon = std::max(3, static_cast<int>(std::lround(frac * n_total)));
    const double cell_area = frac * sphere_area / n_lon;
    const double lat = 0.5 * (lat_lo + lat_hi);
    const auto [a, e] = albedo_emissivity(config.coefficients, lat);
    for (int k = 0; k < n_lon; ++k) {
      const double lon = -kPi + (k + 0.5) * kTwoPi / n_lon;
      AlbedoElement el{lat, lon, cell_area,
                       Vec3(std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)), a, e};
      elements_.push_back(el);
    }
  }
}

ElementIrradiance element_irradiance(const AlbedoGrid& grid, std::size_t index, const Epoch& epoch,
                                     const EciVector& spacecraft_r, const EciVector& sun_pos,
                                     const EarthRotation& rotation) {
  return element_irradiance(grid, index, rotation.eci_to_ecef(epoch).transpose(), spacecraft_r, sun_pos);
}

ElementIrradiance element_irradiance(const AlbedoGrid& grid, std::size_t index, const Mat3& ecef_to_eci,
                                     const EciVector& spacecraft_r, const EciVector& sun_pos) {
  const AlbedoElement& el = grid.elements().at(index);
  const Vec3 n = ecef_to_eci * el.normal_ecef;
  const Vec3 p = grid.config().radius * n;
  const double Es = grid.config().solar_irradiance;

  ElementIrradiance out;
  const double cos_theta_s = n.dot((sun_pos.eigen() - p).normalized());
  out.lit = cos_theta_s > 0.0;
  out.reflected = out.lit ? el.albedo * Es * cos_theta_s : 0.0;
  out.exitance = Es / 4.0;
  out.emitted = el.emissivity * out.exitance;
  const Vec3 d = spacecraft_r.eigen() - p;
  out.range = d.norm();
  out.r_hat = d / out.range;
  out.cos_alpha = n.dot(out.r_hat);
  return out;
}

}  // namespace eei
