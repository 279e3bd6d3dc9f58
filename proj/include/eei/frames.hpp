// Time scale, frame-tagged vectors, quaternion algebra and the LVLH triad.
//
// Quaternions are scalar-last, q = [q1 q2 q3 q4] with q4 the scalar part, and
// compose with the Hamilton product. A spacecraft attitude quaternion q maps
// BODY components to ECI components, v_eci = R(q) v_body, which makes the
// kinematics q_dot = 1/2 q (x) [w_body; 0] hold with w expressed in BODY.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string_view>

namespace eei {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

enum class FrameTag { ECI, LVLH, BODY };

std::string_view to_string(FrameTag tag);

/// A 3-vector bound at compile time to the frame its components live in.
/// Arithmetic is only defined between vectors of the same frame, so mixing
/// frames without an explicit transform does not compile.
template <FrameTag F>
class FrameVector {
 public:
  static constexpr FrameTag frame = F;

  FrameVector() : v_(Vec3::Zero()) {}
  explicit FrameVector(const Vec3& v) : v_(v) {}
  FrameVector(double x, double y, double z) : v_(x, y, z) {}

  static FrameVector Zero() { return FrameVector(); }

  const Vec3& eigen() const { return v_; }
  Vec3& eigen() { return v_; }

  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  double operator[](int i) const { return v_[i]; }

  double norm() const { return v_.norm(); }
  double squaredNorm() const { return v_.squaredNorm(); }
  FrameVector normalized() const { return FrameVector(v_.normalized()); }
  double dot(const FrameVector& o) const { return v_.dot(o.v_); }
  FrameVector cross(const FrameVector& o) const { return FrameVector(v_.cross(o.v_)); }

  FrameVector operator+(const FrameVector& o) const { return FrameVector(v_ + o.v_); }
  FrameVector operator-(const FrameVector& o) const { return FrameVector(v_ - o.v_); }
  FrameVector operator-() const { return FrameVector(-v_); }
  FrameVector operator*(double s) const { return FrameVector(v_ * s); }
  FrameVector operator/(double s) const { return FrameVector(v_ / s); }
  FrameVector& operator+=(const FrameVector& o) {
    v_ += o.v_;
    return *this;
  }
  FrameVector& operator-=(const FrameVector& o) {
    v_ -= o.v_;
    return *this;
  }
  bool operator==(const FrameVector& o) const { return v_ == o.v_; }

 private:
  Vec3 v_;
};

template <FrameTag F>
FrameVector<F> operator*(double s, const FrameVector<F>& v) {
  return v * s;
}

using EciVector = FrameVector<FrameTag::ECI>;
using LvlhVector = FrameVector<FrameTag::LVLH>;
using BodyVector = FrameVector<FrameTag::BODY>;

/// Uniform time scale: seconds elapsed since a fixed reference epoch
/// (J2000.0 unless the scenario says otherwise).
struct Epoch {
  double seconds_since_reference{0.0};

  static constexpr double kSecondsPerDay = 86400.0;
  static constexpr double kJ2000JulianDate = 2451545.0;

  Epoch operator+(double dt) const { return Epoch{seconds_since_reference + dt}; }
  Epoch& operator+=(double dt) {
    seconds_since_reference += dt;
    return *this;
  }
  double operator-(const Epoch& o) const { return seconds_since_reference - o.seconds_since_reference; }
  auto operator<=>(const Epoch&) const = default;

  /// Julian centuries since J2000.0, assuming the reference epoch is J2000.0.
  double julian_centuries() const { return seconds_since_reference / (kSecondsPerDay * 36525.0); }
};

class Quaternion {
 public:
  Quaternion() : vec_(Vec3::Zero()), w_(1.0) {}
  Quaternion(double x, double y, double z, double w) : vec_(x, y, z), w_(w) {}
  Quaternion(const Vec3& vector_part, double scalar_part) : vec_(vector_part), w_(scalar_part) {}

  static Quaternion identity() { return {}; }
  /// Rotation by `angle` (rad) about `axis` (need not be unit).
  static Quaternion from_axis_angle(const Vec3& axis, double angle);

  const Vec3& vec() const { return vec_; }
  double w() const { return w_; }
  double x() const { return vec_.x(); }
  double y() const { return vec_.y(); }
  double z() const { return vec_.z(); }
  Eigen::Vector4d coeffs() const { return {vec_.x(), vec_.y(), vec_.z(), w_}; }

  double norm() const { return std::sqrt(vec_.squaredNorm() + w_ * w_); }
  Quaternion normalized() const;
  Quaternion conjugate() const { return {-vec_, w_}; }
  /// Sign-canonical form with scalar part >= 0.
  Quaternion canonical() const { return w_ < 0.0 ? Quaternion(-vec_, -w_) : *this; }
  /// Rotation angle in [0, pi].
  double angle() const;

 private:
  Vec3 vec_;
  double w_;
};

/// Raw Hamilton product, no renormalization.
Quaternion hamilton(const Quaternion& a, const Quaternion& b);

/// Hamilton product of two unit quaternions; the result is renormalized.
Quaternion quat_multiply(const Quaternion& a, const Quaternion& b);

/// Rotation matrix R with v_eci = R v_body for an attitude quaternion.
/// Throws InvalidQuaternion when | |q| - 1 | > 1e-6.
Mat3 quat_to_rotation(const Quaternion& q);

/// Inverse of quat_to_rotation; returns the canonical (scalar >= 0) quaternion.
Quaternion rotation_to_quat(const Mat3& R);

/// Quaternion rate q_dot = 1/2 q (x) [w; 0] with w in BODY.
Eigen::Vector4d quat_rate(const Quaternion& q, const Vec3& omega_body);

inline BodyVector to_body(const Quaternion& q, const EciVector& v) {
  return BodyVector(quat_to_rotation(q).transpose() * v.eigen());
}
inline EciVector to_eci(const Quaternion& q, const BodyVector& v) {
  return EciVector(quat_to_rotation(q) * v.eigen());
}

/// Orthonormal right-handed LVLH triad (ECI components).
struct LvlhBasis {
  Vec3 x_hat;  // radial
  Vec3 y_hat;  // along-track
  Vec3 z_hat;  // orbit normal

  /// Columns are the LVLH axes, so v_eci = M v_lvlh.
  Mat3 matrix() const;
  LvlhVector to_lvlh(const EciVector& v) const { return LvlhVector(matrix().transpose() * v.eigen()); }
  EciVector to_eci(const LvlhVector& v) const { return EciVector(matrix() * v.eigen()); }
};

/// Throws DegenerateFrame for |r| == 0 or r parallel to v.
LvlhBasis lvlh_basis(const EciVector& r, const EciVector& v);

/// Constant-rate spin of the Earth-fixed frame about ECI z.
struct EarthRotation {
  double angle_at_reference{0.0};         // rad
  double rate{7.292115146706979e-5};      // rad/s

  double angle(const Epoch& epoch) const { return angle_at_reference + rate * epoch.seconds_since_reference; }
  /// v_ecef = M v_eci
  Mat3 eci_to_ecef(const Epoch& epoch) const;
  double sidereal_day() const { return kTwoPi / rate; }
};

struct GeocentricCoords {
  double latitude;   // rad, geocentric
  double longitude;  // rad, Earth-fixed, wrapped to (-pi, pi]
  double radius;     // m
};

GeocentricCoords eci_to_geodetic(const EciVector& r, const Epoch& epoch, const EarthRotation& rotation = {});

/// Wrap an angle to (-pi, pi].
double wrap_pi(double angle);

}  // namespace eei
