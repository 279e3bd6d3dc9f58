#include "eei/geopotential.hpp"

#include "eei/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>
#include <algorithm>

namespace eei {

namespace {

// Fills P(n, m) and the secant-scaled Q(n, m) = P(n, m) / cos(phi) (m >= 1)
// for 0 <= m <= m_cols, m <= n <= n_max.
void legendre_columns(int n_max, int m_cols, double s, double c, Eigen::MatrixXd& P, Eigen::MatrixXd& Q) {
  P.setZero(n_max + 1, m_cols + 1);
  Q.setZero(n_max + 1, m_cols + 1);
  for (int m = 0; m <= std::min(m_cols, n_max); ++m) {
    if (m == 0) {
      P(0, 0) = 1.0;
    } else if (m == 1) {
      Q(1, 1) = std::sqrt(3.0);
      P(1, 1) = Q(1, 1) * c;
    } else {
      Q(m, m) = std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * P(m - 1, m - 1);
      P(m, m) = Q(m, m) * c;
    }
    if (m + 1 <= n_max) {
      const double f = std::sqrt(2.0 * m + 3.0) * s;
      P(m + 1, m) = f * P(m, m);
      Q(m + 1, m) = f * Q(m, m);
    }
    for (int n = m + 2; n <= n_max; ++n) {
      const double a = std::sqrt((2.0 * n - 1.0) * (2.0 * n + 1.0) / ((n - m) * double(n + m)));
      const double b = std::sqrt((2.0 * n + 1.0) * (n + m - 1.0) * (n - m - 1.0) /
                                 ((n - m) * double(n + m) * (2.0 * n - 3.0)));
      P(n, m) = a * s * P(n - 1, m) - b * P(n - 2, m);
      Q(n, m) = a * s * Q(n - 1, m) - b * Q(n - 2, m);
    }
  }
}

double legendre_derivative(const Eigen::MatrixXd& P, int n, int m) {
  if (m == 0) return n == 0 ? 0.0 : std::sqrt(n * (n + 1.0) / 2.0) * P(n, 1);
  const double up = (m + 1 <= n) ? std::sqrt((n - m) * (n + m + 1.0)) * P(n, m + 1) : 0.0;
  const double down = (m == 1) ? std::sqrt(2.0 * n * (n + 1.0)) * P(n, 0) : std::sqrt((n + m) * (n - m + 1.0)) * P(n, m - 1);
  return 0.5 * (up - down);
}

Vec3 harmonic_accel_ecef(const GravityModel& model, const Vec3& r, bool include_central) {
  const double rn = r.norm();
  const double rho = std::hypot(r.x(), r.y());
  const double sphi = r.z() / rn;
  const double cphi = rho / rn;
  const double clam = rho > 0.0 ? r.x() / rho : 1.0;
  const double slam = rho > 0.0 ? r.y() / rho : 0.0;

  const int n_max = model.n_max();
  const int m_max = model.m_max();
  Vec3 acc = Vec3::Zero();
  if (n_max >= 1) {
    Eigen::MatrixXd P, Q;
    legendre_columns(n_max, m_max + 1, sphi, cphi, P, Q);

    std::vector<double> cos_m(m_max + 1), sin_m(m_max + 1);
    cos_m[0] = 1.0;
    sin_m[0] = 0.0;
    for (int m = 1; m <= m_max; ++m) {
      cos_m[m] = cos_m[m - 1] * clam - sin_m[m - 1] * slam;
      sin_m[m] = sin_m[m - 1] * clam + cos_m[m - 1] * slam;
    }

    const double ratio = model.radius() / rn;
    double g_r = 0.0, g_phi = 0.0, g_lam = 0.0;
    // Highest degree first so the small terms accumulate before the large ones.
    for (int n = n_max; n >= 1; --n) {
      double sr = 0.0, sphi_sum = 0.0, slam_sum = 0.0;
      for (int m = std::min(n, m_max); m >= 0; --m) {
        const double cs = model.C(n, m) * cos_m[m] + model.S(n, m) * sin_m[m];
        sr += P(n, m) * cs;
        sphi_sum += legendre_derivative(P, n, m) * cs;
        if (m > 0) slam_sum += m * Q(n, m) * (model.S(n, m) * cos_m[m] - model.C(n, m) * sin_m[m]);
      }
      const double rn_pow = std::pow(ratio, n);
      g_r -= (n + 1.0) * rn_pow * sr;
      g_phi += rn_pow * sphi_sum;
      g_lam += rn_pow * slam_sum;
    }
    const double k = model.mu() / (rn * rn);
    const Vec3 e_r = r / rn;
    const Vec3 e_east(-slam, clam, 0.0);
    const Vec3 e_north(-sphi * clam, -sphi * slam, cphi);
    acc = k * (g_r * e_r + g_phi * e_north + g_lam * e_east);
  }
  if (include_central) acc += -model.mu() * r / (rn * rn * rn);
  return acc;
}

EciVector accel_eci(const GravityModel& model, const EciVector& r, const Epoch& epoch, const EarthRotation& rotation,
                    bool include_central) {
  if (!(r.norm() > model.radius())) {
    throw BelowSurface("gravity evaluated at or below the reference radius");
  }
  const Mat3 M = rotation.eci_to_ecef(epoch);
  const Vec3 a_ecef = harmonic_accel_ecef(model, M * r.eigen(), include_central);
  return EciVector(M.transpose() * a_ecef);
}

}  // namespace

LegendreTable legendre_normalized(int n_max, int m_max, double sin_phi) {
  if (n_max < 0 || m_max < 0) throw OutOfRange("negative Legendre degree or order");
  if (std::abs(sin_phi) > 1.0) throw OutOfRange("|sin phi| > 1");
  m_max = std::min(m_max, n_max);
  const double c = std::sqrt(std::max(0.0, (1.0 - sin_phi) * (1.0 + sin_phi)));
  Eigen::MatrixXd P, Q;
  legendre_columns(n_max, m_max + 1, sin_phi, c, P, Q);
  LegendreTable t;
  t.P = P.leftCols(m_max + 1);
  t.dP.setZero(n_max + 1, m_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    for (int m = 0; m <= std::min(n, m_max); ++m) t.dP(n, m) = legendre_derivative(P, n, m);
  }
  return t;
}

GravityModel::GravityModel(double mu, double radius, int n_max, int m_max)
    : mu_(mu), radius_(radius), n_max_(n_max), m_max_(m_max) {
  if (n_max < 0 || m_max < 0 || m_max > n_max) throw ConfigError("gravity model requires n_max >= m_max >= 0");
  if (!(mu > 0.0) || !(radius > 0.0)) throw ConfigError("gravity model requires mu > 0 and radius > 0");
  C_.setZero(n_max + 1, n_max + 1);
  S_.setZero(n_max + 1, n_max + 1);
  C_(0, 0) = 1.0;
}

GravityModel GravityModel::point_mass(double mu, double radius) { return GravityModel(mu, radius, 0, 0); }

void GravityModel::set(int n, int m, double c, double s) {
  if (n < 0 || m < 0 || m > n || n > n_max_ || m > m_max_) throw OutOfRange("coefficient index outside model");
  if (!std::isfinite(c) || !std::isfinite(s)) throw ConfigError("non-finite Stokes coefficient");
  if (n == 0 && (c != 1.0 || s != 0.0)) throw ConfigError("C00 must be 1 and S00 must be 0");
  C_(n, m) = c;
  S_(n, m) = s;
}

GravityModel GravityModel::extended_to(int n, int m) const {
  GravityModel out(mu_, radius_, std::max(n, n_max_), std::max(m, m_max_));
  out.C_.topLeftCorner(n_max_ + 1, n_max_ + 1) = C_;
  out.S_.topLeftCorner(n_max_ + 1, n_max_ + 1) = S_;
  return out;
}

std::filesystem::path GravityModel::default_coefficient_file() {
  return std::filesystem::path(EEI_DATA_DIR) / "egm2008_deg20.txt";
}

GravityModel GravityModel::load(const std::filesystem::path& file, int n_max, int m_max, double mu, double radius) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open gravity coefficient file " + file.string());
  GravityModel model(mu, radius, n_max, m_max);
  std::set<std::pair<int, int>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    int n, m;
    double c, s;
    if (!(ss >> n)) continue;
    if (!(ss >> m >> c >> s)) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": expected `n m C S`");
    }
    std::string extra;
    if (ss >> extra) throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": trailing fields");
    if (n < 0 || m < 0 || m > n) throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": bad (n, m)");
    if (!seen.insert({n, m}).second) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": duplicate coefficient (" + std::to_string(n) +
                        ", " + std::to_string(m) + ")");
    }
    if (n <= n_max && m <= m_max) model.set(n, m, c, s);
  }
  return model;
}

EciVector gravity_accel(const GravityModel& model, const EciVector& r, const Epoch& epoch,
                        const EarthRotation& rotation) {
  return accel_eci(model, r, epoch, rotation, true);
}

EciVector gravity_accel_noncentral(const GravityModel& model, const EciVector& r, const Epoch& epoch,
                                   const EarthRotation& rotation) {
  return accel_eci(model, r, epoch, rotation, false);
}

GravityModel apply_solid_tide(const GravityModel& base, const TideCorrection& tide, const EciVector& sun_pos,
                              const EciVector& moon_pos, const Epoch& epoch, const EarthRotation& rotation) {
  GravityModel out = base.extended_to(2, 2);
  if (tide.k2 == 0.0) return out;
  double dC[3] = {0.0, 0.0, 0.0};
  double dS[3] = {0.0, 0.0, 0.0};
  const std::pair<const EciVector*, double> bodies[] = {{&sun_pos, tide.mu_sun}, {&moon_pos, tide.mu_moon}};
  for (const auto& [pos, mu_body] : bodies) {
    const GeocentricCoords g = eci_to_geodetic(*pos, epoch, rotation);
    const LegendreTable leg = legendre_normalized(2, 2, std::sin(g.latitude));
    const double scale = tide.k2 / 5.0 * (mu_body / base.mu()) * std::pow(base.radius() / g.radius, 3);
    for (int m = 0; m <= 2; ++m) {
      dC[m] += scale * leg.P(2, m) * std::cos(m * g.longitude);
      dS[m] += scale * leg.P(2, m) * std::sin(m * g.longitude);
    }
  }
  for (int m = 0; m <= 2; ++m) out.set(2, m, out.C(2, m) + dC[m], out.S(2, m) + dS[m]);
  return out;
}

}  // namespace eei
