// Spherical-harmonic geopotential with fully normalized Stokes coefficients.
#pragma once

#include "eei/frames.hpp"

#include <Eigen/Dense>

#include <filesystem>

namespace eei {

struct LegendreTable {
  Eigen::MatrixXd P;      // P(n, m) = P_nm(sin phi), fully normalized
  Eigen::MatrixXd dP;     // dP(n, m) = d P_nm / d phi
};

/// Fully normalized associated Legendre functions (no Condon-Shortley phase)
/// and their latitude derivatives, by forward-column recursion. Entries with
/// m > n are zero. The derivative uses the neighbouring-order identity, so it
/// stays finite at the poles.
LegendreTable legendre_normalized(int n_max, int m_max, double sin_phi);

class GravityModel {
 public:
  static constexpr double kDefaultMu = 3.986004418e14;     // m^3/s^2
  static constexpr double kDefaultRadius = 6378137.0;      // m

  /// All coefficients zero except C00 = 1.
  GravityModel(double mu, double radius, int n_max, int m_max);

  static GravityModel point_mass(double mu = kDefaultMu, double radius = kDefaultRadius);

  /// Reads whitespace-separated `n m C S` rows ('#' starts a comment), keeping
  /// terms up to (n_max, m_max). Missing terms are zero. Throws ConfigError on
  /// malformed rows or duplicate (n, m).
  static GravityModel load(const std::filesystem::path& file, int n_max, int m_max, double mu = kDefaultMu,
                           double radius = kDefaultRadius);

  /// The bundled degree/order-20 EGM2008 table.
  static std::filesystem::path default_coefficient_file();

  double mu() const { return mu_; }
  double radius() const { return radius_; }
  int n_max() const { return n_max_; }
  int m_max() const { return m_max_; }
  double C(int n, int m) const { return C_(n, m); }
  double S(int n, int m) const { return S_(n, m); }
  void set(int n, int m, double c, double s);

  /// Copy with degree/order grown to at least (n, m); never shrinks.
  GravityModel extended_to(int n, int m) const;

 private:
  double mu_;
  double radius_;
  int n_max_;
  int m_max_;
  Eigen::MatrixXd C_;
  Eigen::MatrixXd S_;
};

/// Total gravitational acceleration (central term included) in ECI.
/// Throws BelowSurface for |r| <= Re.
EciVector gravity_accel(const GravityModel& model, const EciVector& r, const Epoch& epoch,
                        const EarthRotation& rotation = {});

/// Same field without the n = 0 term; used for coefficient increments.
EciVector gravity_accel_noncentral(const GravityModel& model, const EciVector& r, const Epoch& epoch,
                                   const EarthRotation& rotation = {});

struct TideCorrection {
  double k2{0.3};
  double mu_sun{1.32712440018e20};
  double mu_moon{4.9028e12};
};

/// Degree-2 solid-tide increments for the given Sun and Moon ECI positions.
/// Always derived from `base`, so repeated calls at one epoch agree.
GravityModel apply_solid_tide(const GravityModel& base, const TideCorrection& tide, const EciVector& sun_pos,
                              const EciVector& moon_pos, const Epoch& epoch, const EarthRotation& rotation = {});

}  // namespace eei
