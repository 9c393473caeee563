// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace stlspg {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Hard contract violations and numerical failures throw this.
class error : public std::runtime_error {
public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw error(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

/// Non-fatal diagnostics (parameter outside training box, dropped basis
/// columns, ...). Printed to stderr so stdout stays machine-readable.
void warn(const std::string& msg);

/// Column-major space-fastest vectorization of a space-time field:
/// spatial index k in [0, Ns), time step n in [1, Nt] -> flat position.
inline Index vec_index(Index k, Index n, Index num_space) {
  return (n - 1) * num_space + k;
}

/// One sampled entry of a space-time field: spatial index k in [0, Ns),
/// time step n in [1, Nt] (n = 0 is the known initial state, never sampled).
struct SpaceTimePoint {
  Index k = 0;
  Index n = 0;

  friend bool operator==(const SpaceTimePoint& a, const SpaceTimePoint& b) {
    return a.k == b.k && a.n == b.n;
  }
  // Canonical ordering is time-major so that product sample sets group by
  // time step.
  friend bool operator<(const SpaceTimePoint& a, const SpaceTimePoint& b) {
    return a.n != b.n ? a.n < b.n : a.k < b.k;
  }
};

}  // namespace stlspg
