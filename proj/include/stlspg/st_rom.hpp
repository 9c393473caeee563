// SPDX-License-Identifier: Apache-2.0
//
// Space-time least-squares ROM: residual/Jacobian assembly over the trial
// subspace, weighting variants, the global Gauss-Newton solve, solution
// reconstruction, projection of full-order trajectories, and radial-basis
// initial guesses.
#pragma once

#include "stlspg/core.hpp"
#include "stlspg/models.hpp"
#include "stlspg/tensor_decomp.hpp"
#include "stlspg/time_integration.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace stlspg {

// Set of sampled space-time indices, kept sorted time-major and duplicate
// free. Product-form sets (every sampled row at every sampled time) remember
// their factors, which keeps residual evaluation on a single sample mesh.
class SampleSet {
 public:
  SampleSet() = default;

  static SampleSet from_points(std::vector<SpaceTimePoint> points);
  static SampleSet product_of(std::vector<Index> space_rows,
                              std::vector<Index> time_steps);
  static SampleSet all(Index num_space, Index num_steps);

  Index size() const { return static_cast<Index>(points_.size()); }
  bool empty() const { return points_.empty(); }
  bool is_product() const { return product_; }
  const std::vector<SpaceTimePoint>& points() const { return points_; }
  const std::vector<Index>& space_rows() const;  // product form only
  const std::vector<Index>& time_steps() const;  // product form only

  // Distinct sampled time steps, ascending.
  std::vector<Index> times_used() const;
  // Sampled spatial rows at time step n (ascending).
  std::vector<Index> rows_at_time(Index n) const;

 private:
  std::vector<SpaceTimePoint> points_;
  std::vector<Index> space_;
  std::vector<Index> times_;
  bool product_ = false;
};

// Weighting applied to the vectorized space-time residual.
class SpaceTimeWeighting {
 public:
  enum class Kind { Identity, Collocation, Gappy };

  static SpaceTimeWeighting identity();
  static SpaceTimeWeighting collocation(SampleSet samples);
  // Gappy operator (Z Phi_r)^+ realized via thin QR of the sampled residual
  // basis; requires sample count >= residual basis dimension and full rank.
  static SpaceTimeWeighting gappy(const SpaceTimeBasis& residual_basis,
                                  SampleSet samples);

  Kind kind() const { return kind_; }
  bool sampled() const { return kind_ != Kind::Identity; }
  const SampleSet& samples() const;
  Index output_dim(Index full_dim) const;
  const Matrix& gappy_operator() const;  // n_r x n_z

  // Input: full vectorized residual (identity) or its sampled entries in
  // SampleSet order.
  Vector apply(const Vector& residual_rows) const;
  Matrix apply(const Matrix& jacobian_rows) const;

 private:
  Kind kind_ = Kind::Identity;
  SampleSet samples_;
  Matrix gappy_;
};

// One space-time reduced problem instance (references are unowned).
struct StProblem {
  const SemiDiscreteModel* model = nullptr;
  const LinearMultistepScheme* scheme = nullptr;
  const SpaceTimeBasis* basis = nullptr;
  Vector mu;
  double dt = 0.0;

  Index num_steps() const { return basis->num_steps(); }
  void validate() const;
};

// Full vectorized residual, length num_space*num_steps, layout vec_index.
Vector st_residual(const StProblem& p, const Vector& yhat);
// Residual entries at the sampled points (SampleSet order). Reconstructs
// only the window states of sampled time steps and evaluates the velocity
// only on sampled rows, so cost scales with the sample count.
Vector st_residual_sampled(const StProblem& p, const Vector& yhat,
                           const SampleSet& samples);

// Jacobian of the (sampled) residual w.r.t. yhat.
Matrix st_jacobian(const StProblem& p, const Vector& yhat);
Matrix st_jacobian_sampled(const StProblem& p, const Vector& yhat,
                           const SampleSet& samples);

struct GaussNewtonHistory {
  std::vector<double> objective;      // 0.5 ||weighted residual||^2
  std::vector<double> gradient_norm;  // ||J_w^T r_w||
  std::vector<double> step_length;
};

struct GaussNewtonOptions {
  Index max_iters = 50;
  double grad_tol = 1e-8;  // relative to the first iterate's gradient norm
  Index max_backtracks = 10;
  // Solve the least-squares steps via the Gram matrix (Cholesky) instead of
  // a rank-revealing QR; faster for very tall dense Jacobians.
  bool normal_equations = false;
  // Called with the raw (pre-weighting) residual rows at every accepted
  // iterate, including the initial guess; used for snapshot harvesting.
  std::function<void(const Vector& residual_rows)> residual_observer;
};

struct StRomSolution {
  Vector yhat;
  GaussNewtonHistory history;
  Index iterations = 0;
  bool converged = false;
};

StRomSolution st_gauss_newton(const StProblem& p,
                              const SpaceTimeWeighting& weighting,
                              const Vector& yhat0,
                              const GaussNewtonOptions& opts = {});

// States num_space x (num_steps+1); column 0 is w0, column n is
// w0 + basis.evaluate_at(n, yhat).
Matrix reconstruct_solution(const SpaceTimeBasis& basis, const Vector& w0,
                            const Vector& yhat);

// Least-squares coefficients of the centered, vectorized trajectory in the
// trial subspace. The Gram matrix is assembled blockwise from spatial and
// temporal inner products instead of materializing the basis.
Vector project_fom_solution(const SpaceTimeBasis& basis,
                            const Trajectory& trajectory);

// Componentwise radial-basis interpolation with the linear kernel r -> r.
class RbfInterpolant {
 public:
  // points: n_pts x n_mu; values: n_pts x n_out. Duplicate points error.
  RbfInterpolant(Matrix points, Matrix values);
  Vector operator()(const Vector& mu) const;

 private:
  Matrix points_;
  Matrix weights_;
};

// Interpolates trained generalized coordinates (columns of train_coords
// match train_mu order) to the query parameter.
Vector rbf_initial_guess(const std::vector<Vector>& train_mu,
                         const Matrix& train_coords, const Vector& mu);

}  // namespace stlspg
