// SPDX-License-Identifier: Apache-2.0
//
// Snapshot tensors, truncated SVD, spatial/temporal proper orthogonal
// decomposition variants, and the factored space-time basis they assemble
// into.
#pragma once

#include "stlspg/core.hpp"
#include "stlspg/time_integration.hpp"

#include <string>
#include <utility>
#include <vector>

namespace stlspg {

// Three-way array (space x time x instance) stored as one space-x-time slab
// per instance. For state data slab k holds w(t^n; mu_k) - w(t^0; mu_k) in
// column n-1 (n = 1..N_t); the same container carries residual fields.
struct StateTensor {
  std::vector<Matrix> slabs;       // each num_space x num_steps
  std::vector<Vector> parameters;  // per-slab parameter (may be empty)
  std::vector<std::string> labels; // per-slab provenance (may be empty)

  Index num_space() const { return slabs.empty() ? 0 : slabs.front().rows(); }
  Index num_steps() const { return slabs.empty() ? 0 : slabs.front().cols(); }
  Index num_instances() const { return static_cast<Index>(slabs.size()); }

  // mode-1: num_space x (num_steps * K), block k is slab k.
  Matrix unfold_mode1() const;
  // mode-2: num_steps x (num_space * K), column k*num_space + i is row i of
  // slab k transposed.
  Matrix unfold_mode2() const;
};

// Centers each trajectory by its own initial state and drops the t^0 column.
StateTensor build_state_tensor(const std::vector<Trajectory>& trajectories);

struct TruncatedSvd {
  Matrix U;      // leading `rank` left singular vectors
  Vector sigma;  // all singular values, non-increasing
  Matrix V;      // leading `rank` right singular vectors
};

// Dense SVD, keeping `rank` vector pairs but every singular value (the tail
// is what projection-error identities are checked against). Each left
// singular vector is sign-normalized so its largest-magnitude entry is
// positive.
TruncatedSvd truncated_svd(const Matrix& A, Index rank);

// Number of leading modes needed to retain the energy fraction eta.
Index energy_rank(const Vector& sigma, double eta);

// Leading left singular vectors of the mode-1 unfolding.
Matrix spatial_pod(const StateTensor& tensor, Index n_s);

// One shared temporal family from the mode-2 unfolding of the raw tensor.
Matrix temporal_basis_thosvd(const StateTensor& tensor, Index n_t);

// One shared temporal family from the mode-2 unfolding of the spatially
// contracted tensor (slabs premultiplied by spatial^T).
Matrix temporal_basis_sthosvd(const StateTensor& tensor, const Matrix& spatial,
                              Index n_t);

// Per-spatial-mode temporal families: contract the tensor with one spatial
// vector at a time (num_steps x K matrix) and keep its leading left singular
// vectors. Requires n_t_per_mode <= K.
std::vector<Matrix> temporal_basis_tailored(const StateTensor& tensor,
                                            const Matrix& spatial,
                                            Index n_t_per_mode);

// Affine space-time trial basis in factored form: column I(i,j) of the full
// basis is the Kronecker-structured vector with spatial factor phi_i and
// temporal factor psi^{ij}. Time index n runs 0..num_steps(); every basis
// vector vanishes at n = 0. Stored cost is num_spatial_modes*num_space +
// total_dim*num_steps instead of num_space*num_steps*total_dim.
class SpaceTimeBasis {
 public:
  SpaceTimeBasis() = default;
  // temporal[i] is num_steps x n_t^i (row n-1 = value at t^n).
  SpaceTimeBasis(Matrix spatial, std::vector<Matrix> temporal);

  Index num_space() const { return spatial_.rows(); }
  Index num_steps() const {
    return temporal_.empty() ? 0 : temporal_.front().rows();
  }
  Index num_spatial_modes() const { return spatial_.cols(); }
  Index temporal_dim(Index i) const;
  Index total_dim() const { return total_dim_; }
  Index storage_bound() const {
    return num_spatial_modes() * num_space() + total_dim() * num_steps();
  }

  // 0-based flat column index of (spatial mode i, temporal mode j).
  Index flat_index(Index i, Index j) const;
  std::pair<Index, Index> mode_of(Index flat) const;

  const Matrix& spatial() const { return spatial_; }
  const Matrix& temporal(Index i) const;

  // Temporal value psi^{ij}(t^n); n = 0 returns 0 by construction.
  double psi(Index i, Index j, Index n) const;

  // Reduced spatial coefficients c with c_i = sum_j yhat_{I(i,j)} psi^{ij}(t^n).
  Vector temporal_coefficients(Index n, const Vector& yhat) const;

  // Full-space value at t^n: spatial() * temporal_coefficients(n, yhat).
  Vector evaluate_at(Index n, const Vector& yhat) const;

  // Row block of the materialized basis at time t^n: num_space x total_dim.
  Matrix time_slice(Index n) const;

  // Dense (num_space*num_steps) x total_dim matrix; row vec_index(k, n, .).
  Matrix materialize() const;

  // Sampled rows: entry (q, I(i,j)) = spatial(k_q, i) * psi(i, j, n_q).
  Matrix rows_at(const std::vector<SpaceTimePoint>& points) const;

 private:
  Matrix spatial_;
  std::vector<Matrix> temporal_;
  std::vector<Index> offsets_;
  Index total_dim_ = 0;
};

// Validating constructors; the second replicates one shared temporal family
// across all spatial modes.
SpaceTimeBasis assemble_st_basis(Matrix spatial, std::vector<Matrix> temporal);
SpaceTimeBasis assemble_st_basis(Matrix spatial, const Matrix& shared_temporal);

}  // namespace stlspg
