// SPDX-License-Identifier: Apache-2.0
//
// Offline ingredients for hyper-reduced space-time ROMs: residual snapshot
// collection, residual basis construction, greedy sample-set selection, and
// gappy least-squares reconstruction.
#pragma once

#include "stlspg/core.hpp"
#include "stlspg/models.hpp"
#include "stlspg/st_rom.hpp"
#include "stlspg/tensor_decomp.hpp"
#include "stlspg/time_integration.hpp"

#include <cstdint>
#include <vector>

namespace stlspg {

enum class ResidualSnapshotMethod {
  RomTraining,    // residual at every Gauss-Newton iterate of identity-
                  // weighted reduced solves at the given parameters
  FomProjection,  // residual at the projected full-order trajectory
  RandomSamples   // residual at Latin-hypercube (coordinates, parameter)
                  // draws inside the training bounding boxes
};

struct ResidualSnapshotOptions {
  ResidualSnapshotMethod method = ResidualSnapshotMethod::RomTraining;
  std::vector<Vector> parameters;  // evaluation parameters (methods 1 and 2)
  // Projected training coordinates, one column per parameter: initial
  // guesses for method 1, evaluation points for method 2, and the coordinate
  // bounding box for method 3.
  Matrix training_coordinates;
  Index num_samples = 0;      // method 3 draw count
  std::uint64_t seed = 0;     // method 3
  GaussNewtonOptions gauss_newton;  // method 1 solver settings
};

// Residual fields as a space-time tensor, one slab per snapshot; slab labels
// record the provenance (method, parameter, iterate).
StateTensor collect_residual_snapshots(const SemiDiscreteModel& model,
                                       const LinearMultistepScheme& scheme,
                                       const SpaceTimeBasis& trial, double dt,
                                       const ResidualSnapshotOptions& opts);

enum class TemporalVariant { Thosvd, Sthosvd, Tailored };

// Residual space-time basis: spatial factor from mode-1 POD of the residual
// tensor, temporal factors per `variant`, candidates orthogonalized per
// spatial mode by QR (dependent columns dropped with a warning). For the
// tailored variant n_rt counts temporal modes per spatial mode; otherwise it
// is the one shared family size.
SpaceTimeBasis residual_basis(const StateTensor& residuals,
                              TemporalVariant variant, Index n_rs, Index n_rt);

// Per-iteration sample quota: splits `total` over `num_iterations` greedy
// iterations, front-loading the remainder. iteration is 1-based.
Index greedy_quota(Index total, Index num_iterations, Index iteration);

// Greedy selection over space-time pairs: at each iteration scores every
// unselected pair by the magnitude of the gappy reconstruction error of the
// next basis column given the current selection (the first iteration scores
// the first column directly). Ties break to the lowest index.
SampleSet greedy_spacetime_samples(const SpaceTimeBasis& residual_basis,
                                   Index target);

// Greedy selection of time steps: scores each unselected time step by the
// squared norm of the full error field at that step; the given spatial rows
// enter only through the gappy projector built from space_rows x selection.
// Returns ascending time steps (values in 1..num_steps).
std::vector<Index> greedy_temporal_samples(const SpaceTimeBasis& residual_basis,
                                           Index target,
                                           const std::vector<Index>& space_rows);

// Greedy selection of spatial rows: scores each unselected row by the sum of
// squared error entries over all time steps; the given time steps enter only
// through the gappy projector built from selection x time_steps. Returns
// ascending rows.
std::vector<Index> greedy_spatial_samples(const SpaceTimeBasis& residual_basis,
                                          Index target,
                                          const std::vector<Index>& time_steps);

// Spatial-only greedy on a plain matrix basis (per-step ROM weighting).
std::vector<Index> greedy_rows(const Matrix& basis, Index target);

// Least-squares coefficients of sampled values in the sampled basis.
Vector gappy_coefficients(const Matrix& sampled_basis,
                          const Vector& sampled_values);

// Reconstructions basis * coefficients.
Vector gappy_reconstruct(const Matrix& basis, const std::vector<Index>& rows,
                         const Vector& sampled_values);
Vector gappy_reconstruct(const SpaceTimeBasis& basis, const SampleSet& samples,
                         const Vector& sampled_values);

}  // namespace stlspg
