// Polyhedral spacecraft geometry and per-facet radiation force/torque.
#pragma once

#include "eei/frames.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace eei {

struct Facet {
  double area;           // m^2
  BodyVector normal;     // unit, outward
  BodyVector position;   // m, from the centre of mass
  double reflectivity;   // rho in [0, 1]
};

struct FacetedSpacecraft {
  std::vector<Facet> facets;
  double mass{50.0};                          // kg
  Mat3 inertia{Mat3::Identity()};             // kg m^2, BODY
  BodyVector cp_offset{};                     // m, centre of pressure relative to CM
  double drag_coefficient{2.2};
  double bulk_reflectivity{0.0};              // epsilon for the lumped radiation path
  double cross_section{0.0};                  // m^2, lumped drag/SRP area
  double radius{1.0};                         // m, bounding sphere

  double area_to_mass() const { return cross_section / mass; }
  double total_facet_area() const;
  /// Throws ConfigError on a broken invariant (non-unit normals, non-positive
  /// areas, reflectivity outside [0, 1], inertia not symmetric positive definite).
  void validate() const;
};

/// Icosahedron subdivided `level` times (20 * 4^level triangles) with
/// vertices on a sphere of `radius`. Facet positions are triangle centroids,
/// normals are the sphere normal through the centroid and areas are the flat
/// triangle areas; inertia is the thin spherical shell (2/3) m R^2 I.
FacetedSpacecraft build_icosphere(double radius, int level, double reflectivity, double mass = 50.0);

/// Rows of `area nx ny nz rx ry rz rho`; '#' comments.
std::vector<Facet> load_facets(const std::filesystem::path& file);

/// Adds a seeded uniform perturbation in [-amplitude, amplitude] to every
/// facet reflectivity, clamped to [0, 1].
void jitter_reflectivity(FacetedSpacecraft& sc, double amplitude, std::uint64_t seed);

struct RadiationFieldSample {
  BodyVector sun_dir;               // unit, spacecraft -> Sun
  BodyVector albedo_dir;            // unit, spacecraft -> effective albedo source
  double solar_pressure{0.0};       // N/m^2
  double albedo_pressure{0.0};      // N/m^2, used when per_facet_albedo_pressure is empty
  std::vector<double> per_facet_albedo_pressure;
};

// Incidence cosines are n_j . r_sun (n_j . r_albedo). With r pointing at the
// source, the leading minus sign pushes an illuminated facet away from it.
BodyVector facet_srp_force(const Facet& f, const RadiationFieldSample& sample);
BodyVector facet_albedo_force(const Facet& f, const RadiationFieldSample& sample, std::size_t index = 0);

struct RadiationWrench {
  BodyVector force;                    // N
  BodyVector torque;                   // N m, torque_srp + torque_albedo
  BodyVector torque_srp;
  BodyVector torque_albedo;
  std::vector<BodyVector> srp_accel;   // F_j_sun / m per facet
  std::vector<BodyVector> albedo_accel;// F_j_albedo / m per facet
  BodyVector srp_accel_sum;            // sum of srp_accel in facet order
  BodyVector albedo_accel_sum;         // sum of albedo_accel in facet order
};

RadiationWrench total_radiation_wrench(const FacetedSpacecraft& sc, const RadiationFieldSample& sample);

}  // namespace eei
