// CSV writers. Every file has a fixed header, SI units, LF line endings and
// full double precision (%.17g) so that identical runs give identical bytes.
#pragma once

#include "eei/control.hpp"
#include "eei/propagator.hpp"
#include "eei/traj_opt.hpp"

#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace eei {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(const Vec3& v);
  CsvWriter& operator<<(const std::string& v);
  void end_row();
  std::size_t rows() const { return rows_; }

 private:
  void sep();
  std::FILE* f_;
  std::filesystem::path path_;
  std::size_t columns_;
  std::size_t col_{0};
  std::size_t rows_{0};
};

/// Roll, pitch, yaw (rad, z-y-x sequence) of the rotation q.
Vec3 euler_zyx(const Quaternion& q);

/// Rotation vector (rad) of an error quaternion, angle times unit axis.
Vec3 rotation_vector(const Quaternion& q_error);

/// orbit.csv: t, r(3), v(3)
void write_orbit_csv(const std::filesystem::path& file, const Trajectory& traj);

/// attitude.csv: t, q(4), euler(3), omega(3), lvlh_dev(3). Euler angles give
/// the body relative to LVLH; lvlh_dev is the rotation vector of the error
/// against `target`.
void write_attitude_csv(const std::filesystem::path& file, const Trajectory& traj, const AttitudeTarget& target);

/// control.csv: t, command (dipole or one torque per wheel), torque(3), power
void write_control_csv(const std::filesystem::path& file, const Trajectory& traj, std::size_t n_wheels);

/// breakdown.csv: t, one acceleration magnitude per contributor
void write_breakdown_csv(const std::filesystem::path& file, const Trajectory& traj);

}  // namespace eei
