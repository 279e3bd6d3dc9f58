#include "eei/frames.hpp"

#include "eei/errors.hpp"

#include <algorithm>
#include <string>

namespace eei {

std::string_view to_string(FrameTag tag) {
  switch (tag) {
    case FrameTag::ECI:
      return "ECI";
    case FrameTag::LVLH:
      return "LVLH";
    case FrameTag::BODY:
      return "BODY";
  }
  return "?";
}

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0) return identity();
  return {axis / n * std::sin(0.5 * angle), std::cos(0.5 * angle)};
}

Quaternion Quaternion::normalized() const {
  const double n = norm();
  return {vec_ / n, w_ / n};
}

double Quaternion::angle() const {
  const Quaternion c = canonical();
  return 2.0 * std::atan2(c.vec_.norm(), c.w_);
}

Quaternion hamilton(const Quaternion& a, const Quaternion& b) {
  const Vec3 v = a.w() * b.vec() + b.w() * a.vec() + a.vec().cross(b.vec());
  const double w = a.w() * b.w() - a.vec().dot(b.vec());
  return {v, w};
}

Quaternion quat_multiply(const Quaternion& a, const Quaternion& b) { return hamilton(a, b).normalized(); }

Mat3 quat_to_rotation(const Quaternion& q_in) {
  const double n = q_in.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6) {
    throw InvalidQuaternion("quaternion norm " + std::to_string(n) + " is not unit");
  }
  const Quaternion q = q_in.normalized();
  const double x = q.x(), y = q.y(), z = q.z(), w = q.w();
  Mat3 R;
  R << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w),
      2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w),
      2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y);
  return R;
}

Quaternion rotation_to_quat(const Mat3& R) {
  // Shepperd: pick the largest of (trace, diagonal) as the pivot.
  const double tr = R.trace();
  double x, y, z, w;
  if (tr >= R(0, 0) && tr >= R(1, 1) && tr >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    w = 0.25 * s;
    x = (R(2, 1) - R(1, 2)) / s;
    y = (R(0, 2) - R(2, 0)) / s;
    z = (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) >= R(1, 1) && R(0, 0) >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    w = (R(2, 1) - R(1, 2)) / s;
    x = 0.25 * s;
    y = (R(0, 1) + R(1, 0)) / s;
    z = (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) >= R(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + R(1, 1) - R(0, 0) - R(2, 2));
    w = (R(0, 2) - R(2, 0)) / s;
    x = (R(0, 1) + R(1, 0)) / s;
    y = 0.25 * s;
    z = (R(1, 2) + R(2, 1)) / s;
  } else {
    const double s = 2.0 * std::sqrt(1.0 + R(2, 2) - R(0, 0) - R(1, 1));
    w = (R(1, 0) - R(0, 1)) / s;
    x = (R(0, 2) + R(2, 0)) / s;
    y = (R(1, 2) + R(2, 1)) / s;
    z = 0.25 * s;
  }
  return Quaternion(x, y, z, w).normalized().canonical();
}

Eigen::Vector4d quat_rate(const Quaternion& q, const Vec3& omega_body) {
  return 0.5 * hamilton(q, Quaternion(omega_body, 0.0)).coeffs();
}

Mat3 LvlhBasis::matrix() const {
  Mat3 M;
  M.col(0) = x_hat;
  M.col(1) = y_hat;
  M.col(2) = z_hat;
  return M;
}

LvlhBasis lvlh_basis(const EciVector& r, const EciVector& v) {
  const double rn = r.norm();
  if (rn == 0.0) throw DegenerateFrame("LVLH basis undefined at the origin");
  const Vec3 h = r.eigen().cross(v.eigen());
  const double hn = h.norm();
  if (!(hn > 1e-12 * rn * v.norm()) || hn == 0.0) {
    throw DegenerateFrame("LVLH basis undefined for parallel position and velocity");
  }
  LvlhBasis b;
  b.x_hat = r.eigen() / rn;
  b.z_hat = h / hn;
  b.y_hat = b.z_hat.cross(b.x_hat);
  return b;
}

Mat3 EarthRotation::eci_to_ecef(const Epoch& epoch) const {
  const double th = angle(epoch);
  const double c = std::cos(th), s = std::sin(th);
  Mat3 M;
  M << c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0;
  return M;
}

double wrap_pi(double angle) {
  double a = std::remainder(angle, kTwoPi);
  if (a <= -kPi) a += kTwoPi;
  return a;
}

GeocentricCoords eci_to_geodetic(const EciVector& r, const Epoch& epoch, const EarthRotation& rotation) {
  const double rn = r.norm();
  const double lat = std::asin(std::clamp(r.z() / rn, -1.0, 1.0));
  const double lon = wrap_pi(std::atan2(r.y(), r.x()) - rotation.angle(epoch));
  return {lat, lon, rn};
}

}  // namespace eei
