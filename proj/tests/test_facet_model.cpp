#include "eei/errors.hpp"
#include "eei/facet_model.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace eei;

namespace {

RadiationFieldSample sun_only(const Vec3& dir, double P) {
  RadiationFieldSample s;
  s.sun_dir = BodyVector(dir.normalized());
  s.albedo_dir = BodyVector(Vec3::UnitX());
  s.solar_pressure = P;
  s.albedo_pressure = 0.0;
  return s;
}

Facet plate(const Vec3& n, double area, double rho) {
  return Facet{area, BodyVector(n.normalized()), BodyVector(0.1, 0.2, 0.3), rho};
}

const double P_sun = 4.56e-6;

}  // namespace

TEST_CASE("icosphere facet counts and closure") {
  CHECK(build_icosphere(1.0, 0, 0.3).facets.size() == 20);
  CHECK(build_icosphere(1.0, 3, 0.3).facets.size() == 1280);

  const FacetedSpacecraft s3 = build_icosphere(1.0, 3, 0.3);
  CHECK_NOTHROW(s3.validate());
  Vec3 closure = Vec3::Zero();
  for (const auto& f : s3.facets) {
    closure += f.area * f.normal.eigen();
    CHECK(std::abs(f.normal.norm() - 1.0) < 1e-12);
    CHECK(f.normal.dot(f.position) > 0.0);
  }
  CHECK(closure.norm() < 1e-6 * s3.total_facet_area());
  CHECK((s3.inertia - (2.0 / 3.0) * 50.0 * Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("icosphere area converges to the sphere") {
  const double sphere = 4 * kPi * 1.5 * 1.5;
  double prev_err = 1e300;
  for (int level = 0; level <= 5; ++level) {
    const double err = std::abs(build_icosphere(1.5, level, 0.3).total_facet_area() - sphere) / sphere;
    CHECK(err < prev_err);
    prev_err = err;
    if (level == 3) CHECK(err < 0.01);
  }
}

TEST_CASE("single facet SRP hand evaluations") {
  // Facing away.
  CHECK(facet_srp_force(plate(Vec3::UnitX(), 2.0, 0.5), sun_only(-Vec3::UnitX(), P_sun)).norm() == 0.0);
  // Grazing counts as unlit.
  CHECK(facet_srp_force(plate(Vec3::UnitX(), 2.0, 0.5), sun_only(Vec3::UnitY(), P_sun)).norm() == 0.0);

  // Specular normal incidence.
  const Vec3 F1 = facet_srp_force(plate(Vec3::UnitZ(), 2.0, 1.0), sun_only(Vec3::UnitZ(), P_sun)).eigen();
  CHECK((F1 - (-2.0 * P_sun * 2.0 * Vec3::UnitZ())).norm() < 1e-20);

  // Absorbing at 60 degrees: |F| = P A cos60 along -r_sun.
  const Vec3 sdir(std::sin(kPi / 3), 0, std::cos(kPi / 3));
  const Vec3 F2 = facet_srp_force(plate(Vec3::UnitZ(), 3.0, 0.0), sun_only(sdir, P_sun)).eigen();
  CHECK(F2.norm() == doctest::Approx(P_sun * 3.0 / 2.0).epsilon(1e-14));
  CHECK((F2.normalized() + sdir).norm() < 1e-14);

  // Mixed reflectivity against the expression evaluated directly.
  const double rho = 0.3, A = 1.7;
  const Vec3 n = Vec3(1, 1, 2).normalized(), s = Vec3(0.2, 1, 1).normalized();
  const double c = n.dot(s);
  const Vec3 expected = -P_sun * A * ((1 - rho) * c * s + 2 * rho * c * n);
  const Vec3 F3 = facet_srp_force(Facet{A, BodyVector(n), BodyVector(), rho}, sun_only(s, P_sun)).eigen();
  CHECK((F3 - expected).norm() < 1e-14 * expected.norm());
}

TEST_CASE("albedo force mirrors the SRP kernel") {
  const Facet f{1.3, BodyVector(Vec3(0.3, -0.4, 0.8).normalized()), BodyVector(0.5, 0, 0), 0.4};
  const Vec3 d = Vec3(0.1, -0.2, 1).normalized();
  RadiationFieldSample s;
  s.sun_dir = BodyVector(d);
  s.albedo_dir = BodyVector(d);
  s.solar_pressure = P_sun;
  s.albedo_pressure = P_sun;
  CHECK(facet_albedo_force(f, s).eigen() == facet_srp_force(f, s).eigen());

  s.albedo_pressure = 0.0;
  CHECK(facet_albedo_force(f, s).norm() == 0.0);

  // Per-facet pressures take precedence over the single effective value.
  s.albedo_pressure = 1.0;
  s.per_facet_albedo_pressure = {0.0, P_sun};
  CHECK(facet_albedo_force(f, s, 0).norm() == 0.0);
  CHECK((facet_albedo_force(f, s, 1).eigen() - facet_srp_force(f, sun_only(d, P_sun)).eigen()).norm() <
        1e-15 * facet_srp_force(f, sun_only(d, P_sun)).norm());
}

TEST_CASE("albedo composite over a lit hemisphere points away from the source") {
  const FacetedSpacecraft sc = build_icosphere(1.0, 3, 0.4);
  const Vec3 ra = Vec3(0.3, -0.5, -0.8).normalized();
  RadiationFieldSample s;
  s.sun_dir = BodyVector(Vec3::UnitX());
  s.albedo_dir = BodyVector(ra);
  s.solar_pressure = 0.0;
  s.albedo_pressure = 1e-6;
  Vec3 F = Vec3::Zero();
  for (const auto& f : sc.facets) F += facet_albedo_force(f, s).eigen();
  const double ang = std::acos(std::clamp(F.normalized().dot(-ra), -1.0, 1.0));
  CHECK(ang < 1.0 * kDegToRad);
}

TEST_CASE("closed uniform sphere carries no radiation torque") {
  for (int level : {3, 4}) for (double rho : {0.0, 0.3, 1.0}) {
    const FacetedSpacecraft sc = build_icosphere(1.0, level, rho);
    RadiationFieldSample s;
    s.sun_dir = BodyVector(Vec3(0.3, 0.4, 0.866).normalized());
    s.albedo_dir = BodyVector(Vec3(-0.9, 0.1, -0.2).normalized());
    s.solar_pressure = P_sun;
    s.albedo_pressure = 0.2 * P_sun;
    const RadiationWrench w = total_radiation_wrench(sc, s);
    CHECK(w.torque.norm() / (w.force.norm() * 1.0) < 1e-6);
    CHECK((w.torque.eigen() - w.torque_srp.eigen() - w.torque_albedo.eigen()).norm() <= 1e-15 * w.force.norm());
  }
}

TEST_CASE("absorbing sphere force converges to the cannonball cross-section") {
  const double R = 1.0;
  double prev = 1e300;
  for (int level = 2; level <= 5; ++level) {
    const FacetedSpacecraft sc = build_icosphere(R, level, 0.0);
    const RadiationWrench w = total_radiation_wrench(sc, sun_only(Vec3(0.2, 0.3, 0.9), P_sun));
    const double err = std::abs(w.force.norm() - P_sun * kPi * R * R) / (P_sun * kPi * R * R);
    CHECK(err < prev);
    prev = err;
    if (level == 5) CHECK(err < 5e-3);
  }
}

TEST_CASE("wrench linearity, bookkeeping and covariance") {
  FacetedSpacecraft sc = build_icosphere(1.0, 2, 0.3);
  jitter_reflectivity(sc, 0.2, 42);
  for (auto& f : sc.facets) f.position = f.position + BodyVector(0.05, -0.02, 0.01);
  RadiationFieldSample s;
  s.sun_dir = BodyVector(Vec3(1, 2, 3).normalized());
  s.albedo_dir = BodyVector(Vec3(-1, 0.5, -2).normalized());
  s.solar_pressure = P_sun;
  s.albedo_pressure = 0.3 * P_sun;
  const RadiationWrench w = total_radiation_wrench(sc, s);

  FacetedSpacecraft big = sc;
  for (auto& f : big.facets) f.area *= 2.0;
  const RadiationWrench w2 = total_radiation_wrench(big, s);
  CHECK(w2.force.eigen() == 2.0 * w.force.eigen());
  CHECK(w2.torque.eigen() == 2.0 * w.torque.eigen());

  RadiationFieldSample s3 = s;
  s3.solar_pressure *= 3.0;
  s3.albedo_pressure *= 3.0;
  CHECK((total_radiation_wrench(sc, s3).force.eigen() - 3.0 * w.force.eigen()).norm() < 1e-14 * w.force.norm());

  // Per-facet accelerations sum to F/m.
  REQUIRE(w.srp_accel.size() == sc.facets.size());
  Vec3 sum = Vec3::Zero(), torque = Vec3::Zero();
  for (std::size_t j = 0; j < sc.facets.size(); ++j) {
    sum += w.srp_accel[j].eigen() + w.albedo_accel[j].eigen();
    torque += sc.facets[j].position.eigen().cross(
        sc.mass * (w.srp_accel[j].eigen() + w.albedo_accel[j].eigen()));
  }
  CHECK((sum - w.force.eigen() / sc.mass).norm() < 1e-12 * w.force.norm() / sc.mass);
  CHECK((torque - w.torque.eigen()).norm() < 1e-12 * w.torque.norm());
  CHECK((w.srp_accel_sum.eigen() + w.albedo_accel_sum.eigen() - sum).norm() < 1e-14 * sum.norm());

  // Rotate geometry and field together.
  const Mat3 R = quat_to_rotation(Quaternion::from_axis_angle(Vec3(0.3, -1, 0.2), 0.8));
  FacetedSpacecraft rot = sc;
  for (auto& f : rot.facets) {
    f.normal = BodyVector(R * f.normal.eigen());
    f.position = BodyVector(R * f.position.eigen());
  }
  RadiationFieldSample sr = s;
  sr.sun_dir = BodyVector(R * s.sun_dir.eigen());
  sr.albedo_dir = BodyVector(R * s.albedo_dir.eigen());
  const RadiationWrench wr = total_radiation_wrench(rot, sr);
  CHECK((wr.force.eigen() - R * w.force.eigen()).norm() < 1e-12 * w.force.norm());
  CHECK((wr.torque.eigen() - R * w.torque.eigen()).norm() < 1e-12 * w.force.norm());
}

TEST_CASE("reflectivity jitter is seeded and clamped") {
  FacetedSpacecraft a = build_icosphere(1.0, 1, 0.95), b = a;
  jitter_reflectivity(a, 0.2, 7);
  jitter_reflectivity(b, 0.2, 7);
  bool changed = false;
  for (std::size_t j = 0; j < a.facets.size(); ++j) {
    CHECK(a.facets[j].reflectivity == b.facets[j].reflectivity);
    CHECK(a.facets[j].reflectivity <= 1.0);
    CHECK(a.facets[j].reflectivity >= 0.75);
    changed |= a.facets[j].reflectivity != 0.95;
  }
  CHECK(changed);
}

TEST_CASE("facet file and validation") {
  const auto dir = std::filesystem::temp_directory_path() / "eei_facet_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "box.txt");
    f << "# area n r rho\n1 1 0 0 0.5 0 0 0.2\n1 -1 0 0 -0.5 0 0 0.2\n";
  }
  const auto facets = load_facets(dir / "box.txt");
  REQUIRE(facets.size() == 2);
  CHECK(facets[1].normal.x() == -1.0);
  CHECK(facets[0].reflectivity == 0.2);
  std::filesystem::remove_all(dir);

  FacetedSpacecraft sc = build_icosphere(1.0, 0, 0.3);
  sc.facets[3].reflectivity = 1.5;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = build_icosphere(1.0, 0, 0.3);
  sc.facets[0].normal = BodyVector(1, 1, 0);
  CHECK_THROWS_AS(sc.validate(), ConfigError);
  sc = build_icosphere(1.0, 0, 0.3);
  sc.inertia(0, 1) = 5.0;
  CHECK_THROWS_AS(sc.validate(), ConfigError);
}
