// SPDX-License-Identifier: Apache-2.0
//
// Serialization: a small binary container for dense arrays (optionally
// tagged with a parameter vector and a time-step size) and CSV writers for
// trajectories and tabular reports.
#pragma once

#include "stlspg/core.hpp"
#include "stlspg/time_integration.hpp"

#include <string>
#include <vector>

namespace stlspg {

// Binary layout (little-endian):
//   bytes 0..7   magic "STLSPG01"
//   u64          rows
//   u64          cols
//   u64          parameter count p
//   f64 * p      parameter vector
//   f64          dt (0 when not applicable)
//   f64 * rows*cols  payload, column-major
struct StoredMatrix {
  Matrix data;
  Vector mu;
  double dt = 0.0;
};

void write_matrix(const std::string& path, const Matrix& data,
                  const Vector& mu = Vector(), double dt = 0.0);
StoredMatrix read_matrix(const std::string& path);

void write_trajectory(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory(const std::string& path);

// CSV with a `t` column followed by one column per state component.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Generic CSV: one header row, then the matrix rows.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows);

}  // namespace stlspg
