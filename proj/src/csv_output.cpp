#include "eei/csv_output.hpp"

#include "eei/errors.hpp"

#include <cmath>

namespace eei {

CsvWriter::CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header)
    : f_(std::fopen(file.string().c_str(), "wb")), path_(file), columns_(header.size()) {
  if (!f_) throw Error("cannot open " + file.string() + " for writing");
  for (const auto& h : header) *this << h;
  col_ = columns_;
  end_row();
  rows_ = 0;
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::sep() {
  if (col_++ > 0) std::fputc(',', f_);
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  std::fprintf(f_, "%.17g", v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(const Vec3& v) {
  for (int i = 0; i < 3; ++i) *this << v[i];
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& v) {
  sep();
  std::fputs(v.c_str(), f_);
  return *this;
}

void CsvWriter::end_row() {
  if (col_ != columns_) {
    throw Error(path_.string() + ": row has " + std::to_string(col_) + " columns, header has " +
                std::to_string(columns_));
  }
  std::fputc('\n', f_);
  if (std::ferror(f_)) throw Error("write failed on " + path_.string());
  col_ = 0;
  ++rows_;
}

Vec3 euler_zyx(const Quaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  const double roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double s = std::clamp(2.0 * (w * y - z * x), -1.0, 1.0);
  const double pitch = std::asin(s);
  const double yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return {roll, pitch, yaw};
}

Vec3 rotation_vector(const Quaternion& q_error) {
  const double s = q_error.vec().norm();
  if (s == 0.0) return Vec3::Zero();
  return error_angle(q_error) * q_error.vec() / s;
}

void write_orbit_csv(const std::filesystem::path& file, const Trajectory& traj) {
  CsvWriter w(file, {"t", "rx", "ry", "rz", "vx", "vy", "vz"});
  for (const auto& s : traj.samples) {
    w << s.t << s.state.body.r.eigen() << s.state.body.v.eigen();
    w.end_row();
  }
}

void write_attitude_csv(const std::filesystem::path& file, const Trajectory& traj, const AttitudeTarget& target) {
  CsvWriter w(file, {"t", "qx", "qy", "qz", "qw", "roll", "pitch", "yaw", "wx", "wy", "wz", "dev_x", "dev_y",
                     "dev_z"});
  for (const auto& s : traj.samples) {
    const StateVector13& b = s.state.body;
    const Quaternion q_lvlh = rotation_to_quat(lvlh_basis(b.r, b.v).matrix());
    const Quaternion rel = hamilton(q_lvlh.conjugate(), b.q).canonical();
    const AttitudeError e = attitude_error(b, target, s.t);
    w << s.t << b.q.x() << b.q.y() << b.q.z() << b.q.w() << euler_zyx(rel) << b.omega.eigen()
      << rotation_vector(e.q_error);
    w.end_row();
  }
}

void write_control_csv(const std::filesystem::path& file, const Trajectory& traj, std::size_t n_wheels) {
  std::vector<std::string> header{"t"};
  if (n_wheels > 0) {
    for (std::size_t i = 0; i < n_wheels; ++i) header.push_back("wheel_torque_" + std::to_string(i + 1));
  } else {
    header.insert(header.end(), {"mx", "my", "mz"});
  }
  header.insert(header.end(), {"tau_x", "tau_y", "tau_z", "power"});
  CsvWriter w(file, header);
  for (const auto& s : traj.samples) {
    w << s.t;
    if (n_wheels > 0) {
      for (std::size_t i = 0; i < n_wheels; ++i) {
        w << (static_cast<std::size_t>(s.command.wheel_torque.size()) == n_wheels ? s.command.wheel_torque[i] : 0.0);
      }
    } else {
      w << s.command.dipole.eigen();
    }
    w << s.command.torque.eigen() << s.command.power;
    w.end_row();
  }
}

void write_breakdown_csv(const std::filesystem::path& file, const Trajectory& traj) {
  std::vector<std::string> header{"t"};
  for (const auto n : kAccelNames) header.emplace_back(n);
  CsvWriter w(file, header);
  for (const auto& s : traj.samples) {
    w << s.t;
    for (const auto& a : s.breakdown.accel) w << a.norm();
    w.end_row();
  }
}

}  // namespace eei
