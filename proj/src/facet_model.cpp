#include "eei/facet_model.hpp"

#include "eei/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>

namespace eei {

double FacetedSpacecraft::total_facet_area() const {
  double a = 0.0;
  for (const auto& f : facets) a += f.area;
  return a;
}

void FacetedSpacecraft::validate() const {
  if (facets.empty()) throw ConfigError("spacecraft has no facets");
  if (!(mass > 0.0)) throw ConfigError("spacecraft mass must be positive");
  for (std::size_t j = 0; j < facets.size(); ++j) {
    const Facet& f = facets[j];
    if (!(f.area > 0.0)) throw ConfigError("facet " + std::to_string(j) + " has non-positive area");
    if (std::abs(f.normal.norm() - 1.0) > 1e-12) throw ConfigError("facet " + std::to_string(j) + " normal is not unit");
    if (!(f.reflectivity >= 0.0 && f.reflectivity <= 1.0)) {
      throw ConfigError("facet " + std::to_string(j) + " reflectivity outside [0, 1]");
    }
  }
  if (!inertia.isApprox(inertia.transpose(), 1e-12)) throw ConfigError("inertia tensor is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ConfigError("inertia tensor is not positive definite");
  if (!(bulk_reflectivity >= 0.0 && bulk_reflectivity <= 1.0)) throw ConfigError("bulk reflectivity outside [0, 1]");
}

FacetedSpacecraft build_icosphere(double radius, int level, double reflectivity, double mass) {
  if (level < 0 || level > 7) throw ConfigError("icosphere subdivision level must be in [0, 7]");
  if (!(radius > 0.0)) throw ConfigError("icosphere radius must be positive");

  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                             {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : verts) v.normalize();
  std::vector<std::array<int, 3>> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                           {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                           {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                           {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int a = mid(f[0], f[1]), b = mid(f[1], f[2]), c = mid(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    faces = std::move(next);
  }

  FacetedSpacecraft sc;
  sc.mass = mass;
  sc.radius = radius;
  sc.inertia = (2.0 / 3.0) * mass * radius * radius * Mat3::Identity();
  sc.bulk_reflectivity = reflectivity;
  sc.cross_section = kPi * radius * radius;
  sc.facets.reserve(faces.size());
  for (const auto& f : faces) {
    const Vec3 p0 = radius * verts[f[0]], p1 = radius * verts[f[1]], p2 = radius * verts[f[2]];
    const double area = 0.5 * (p1 - p0).cross(p2 - p0).norm();
    const Vec3 centroid = (p0 + p1 + p2) / 3.0;
    // Sphere normal through the centroid. The flat-triangle normal is off by
    // up to ~1% at level 3, and r x n then leaves a spurious specular torque.
    sc.facets.push_back({area, BodyVector(centroid.normalized()), BodyVector(centroid), reflectivity});
  }
  return sc;
}

std::vector<Facet> load_facets(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open facet file " + file.string());
  std::vector<Facet> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double a, nx, ny, nz, rx, ry, rz, rho;
    if (!(ss >> a >> nx >> ny >> nz >> rx >> ry >> rz >> rho)) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": expected `area nx ny nz rx ry rz rho`");
    }
    const Vec3 n(nx, ny, nz);
    if (std::abs(n.norm() - 1.0) > 1e-6) {
      throw ConfigError(file.string() + ":" + std::to_string(line_no) + ": facet normal is not unit");
    }
    out.push_back({a, BodyVector(n.normalized()), BodyVector(rx, ry, rz), rho});
  }
  if (out.empty()) throw ConfigError("facet file " + file.string() + " has no facets");
  return out;
}

void jitter_reflectivity(FacetedSpacecraft& sc, double amplitude, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (auto& f : sc.facets) {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;  // [0, 1), platform independent
    f.reflectivity = std::clamp(f.reflectivity + amplitude * (2.0 * u - 1.0), 0.0, 1.0);
  }
}

namespace {
BodyVector radiation_force(const Facet& f, const BodyVector& dir, double pressure) {
  const double c = f.normal.dot(dir);
  if (!(c > 0.0) || pressure == 0.0) return BodyVector::Zero();
  const double rho = f.reflectivity;
  return -(pressure * f.area) * ((1.0 - rho) * c * dir + (2.0 * rho * c) * f.normal);
}
}  // namespace

BodyVector facet_srp_force(const Facet& f, const RadiationFieldSample& sample) {
  return radiation_force(f, sample.sun_dir, sample.solar_pressure);
}

BodyVector facet_albedo_force(const Facet& f, const RadiationFieldSample& sample, std::size_t index) {
  const double p = sample.per_facet_albedo_pressure.empty() ? sample.albedo_pressure
                                                            : sample.per_facet_albedo_pressure.at(index);
  return radiation_force(f, sample.albedo_dir, p);
}

RadiationWrench total_radiation_wrench(const FacetedSpacecraft& sc, const RadiationFieldSample& sample) {
  if (!sample.per_facet_albedo_pressure.empty() && sample.per_facet_albedo_pressure.size() != sc.facets.size()) {
    throw ConfigError("per-facet albedo pressure count does not match facet count");
  }
  RadiationWrench w;
  w.srp_accel.reserve(sc.facets.size());
  w.albedo_accel.reserve(sc.facets.size());
  for (std::size_t j = 0; j < sc.facets.size(); ++j) {
    const Facet& f = sc.facets[j];
    const BodyVector fs = facet_srp_force(f, sample);
    const BodyVector fa = facet_albedo_force(f, sample, j);
    w.force += fs + fa;
    w.torque_srp += f.position.cross(fs);
    w.torque_albedo += f.position.cross(fa);
    w.srp_accel.push_back(fs / sc.mass);
    w.albedo_accel.push_back(fa / sc.mass);
    w.srp_accel_sum += w.srp_accel.back();
    w.albedo_accel_sum += w.albedo_accel.back();
  }
  // Kept as two partial sums so each channel's torque is reproducible on its own.
  w.torque = w.torque_srp + w.torque_albedo;
  return w;
}

}  // namespace eei
