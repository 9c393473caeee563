// SPDX-License-Identifier: Apache-2.0
//
// Baseline spatial-projection ROMs: time-sequential least-squares residual
// minimization over a spatial trial subspace, with identity, collocation, or
// gappy (GNAT) residual weighting.
#pragma once

#include "stlspg/core.hpp"
#include "stlspg/models.hpp"
#include "stlspg/time_integration.hpp"

#include <functional>
#include <vector>

namespace stlspg {

// Weighting operator applied to the per-step residual. Identity keeps the
// full residual; collocation keeps sampled rows; gappy applies a
// least-squares reconstruction operator to the sampled rows.
struct SpatialWeighting {
  std::vector<Index> rows;  // sorted sample rows; empty means identity
  Matrix gappy;             // n_r x n_z operator; empty means collocation

  bool is_identity() const { return rows.empty(); }
  bool is_gappy() const { return gappy.size() > 0; }
  Index output_dim(Index full_dim) const;
  // residual_rows: full residual (identity) or entries at `rows` (sampled).
  Vector apply(const Vector& residual_rows) const;
  Matrix apply(const Matrix& jacobian_rows) const;

  static SpatialWeighting identity();
  static SpatialWeighting collocation(std::vector<Index> sample_rows);
};

// A = (Z Phi_r)^+ Z realized as pinv(sampled residual basis) acting on the
// sampled entries. Requires |sample_rows| >= basis columns and full column
// rank of the sampled basis.
SpatialWeighting gnat_weighting(const Matrix& residual_basis,
                                const std::vector<Index>& sample_rows);

struct LspgOptions {
  Index max_iters = 20;
  double grad_tol = 1e-8;
  Index max_backtracks = 10;
  // Called with the full-dimension residual at every accepted Gauss-Newton
  // iterate (identity weighting only); used to harvest residual snapshots.
  std::function<void(Index step, Index iter, const Vector& residual)>
      residual_observer;
};

struct LspgResult {
  Trajectory trajectory;          // reconstructed states, column 0 = w0
  Matrix reduced;                 // n_s x (num_steps+1), column 0 = 0
  std::vector<Index> iterations;  // Gauss-Newton iterations per step
};

// At each step minimizes ||weighting(r^n(w0 + Phi y))||_2 over y by
// Gauss-Newton, warm-started from the previous step's solution.
LspgResult lspg_solve(const SemiDiscreteModel& model,
                      const LinearMultistepScheme& scheme,
                      const Matrix& spatial_basis,
                      const SpatialWeighting& weighting, const Vector& mu,
                      double dt, Index num_steps, const LspgOptions& opts = {});

}  // namespace stlspg
