// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "stlspg/core.hpp"
#include "stlspg/models.hpp"

namespace stlspg {

/// A linear multistep scheme in residual form
///   r^n = sum_j alpha_j w^{n-j} - dt * sum_j beta_j f(w^{n-j}, t^{n-j})
/// with start-up handled by dropping to the lower-order family member:
/// the effective step count at step n is k_n = min(k, n).
class LinearMultistepScheme {
public:
  /// Coefficients for one effective step count m: alpha, beta of length m+1.
  struct Row {
    Vector alpha;
    Vector beta;
  };

  LinearMultistepScheme(std::string name, std::vector<Row> rows);

  static LinearMultistepScheme backward_euler();
  /// name in {BE, BDF2, BDF3, AB2, AB3, AM1, AM2, AM3}
  static LinearMultistepScheme from_name(const std::string& name);

  const std::string& name() const { return name_; }
  Index max_steps() const { return static_cast<Index>(rows_.size()); }
  Index steps_at(Index n) const;                       // k_n = min(k, n)
  double alpha(Index n, Index j) const;                // j in 0..k_n
  double beta(Index n, Index j) const;
  bool implicit_at(Index n) const { return beta(n, 0) != 0.0; }

private:
  std::string name_;
  std::vector<Row> rows_;  // rows_[m-1] applies when k_n = m
};

struct Trajectory {
  Matrix states;  // N_s x (N_t + 1); column n = w^n, column 0 = initial state
  double dt = 0.0;
  Vector mu;

  Index space_dim() const { return states.rows(); }
  Index num_steps() const { return states.cols() - 1; }
  double time_at(Index n) const { return dt * static_cast<double>(n); }
};

/// Residual r^n of the multistep scheme. window.col(j) = w^{n-j}, j = 0..k_n.
Vector lmm_step_residual(const LinearMultistepScheme& scheme,
                         const SemiDiscreteModel& model, const Matrix& window,
                         double dt, Index n, const Vector& mu);

/// d r^n / d w^{n-j} = alpha_j I - dt beta_j df/dw(w^{n-j}, t^{n-j}).
Matrix lmm_step_jacobian(const LinearMultistepScheme& scheme,
                         const SemiDiscreteModel& model, const Matrix& window,
                         double dt, Index n, const Vector& mu, Index j);

struct NewtonOptions {
  double tol = 1e-10;   // absolute residual-norm tolerance
  Index max_iters = 50;
};

/// March the full-order model: Newton on each implicit step (explicit steps
/// solve the linear alpha_0 update directly). Throws on non-convergence,
/// carrying the step index and final residual norm.
Trajectory solve_fom(const SemiDiscreteModel& model,
                     const LinearMultistepScheme& scheme, const Vector& mu,
                     double dt, Index num_steps,
                     const NewtonOptions& opts = {});

/// Scalar-block (N_t x N_t) lower-triangular multistep operators; the
/// N_s-identity Kronecker factor is implicit and does not change singular
/// values. Known-initial-state terms (those referencing w^0) fall outside.
struct LmmOperators {
  Matrix A;
  Matrix B;
};
LmmOperators assemble_lmm_operators(const LinearMultistepScheme& scheme,
                                    Index num_steps);

}  // namespace stlspg
