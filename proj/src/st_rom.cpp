// SPDX-License-Identifier: Apache-2.0
#include "stlspg/st_rom.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>

namespace stlspg {

// ---------------------------------------------------------------------------
// SampleSet
// ---------------------------------------------------------------------------

SampleSet SampleSet::from_points(std::vector<SpaceTimePoint> points) {
  require(!points.empty(), "sample set cannot be empty");
  for (const SpaceTimePoint& pt : points) {
    require(pt.k >= 0, "sample spatial index must be nonnegative");
    require(pt.n >= 1, "sample time step must be at least 1");
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  SampleSet s;
  s.points_ = std::move(points);
  return s;
}

SampleSet SampleSet::product_of(std::vector<Index> space_rows,
                                std::vector<Index> time_steps) {
  require(!space_rows.empty() && !time_steps.empty(),
          "product sample set needs nonempty factors");
  std::sort(space_rows.begin(), space_rows.end());
  space_rows.erase(std::unique(space_rows.begin(), space_rows.end()),
                   space_rows.end());
  std::sort(time_steps.begin(), time_steps.end());
  time_steps.erase(std::unique(time_steps.begin(), time_steps.end()),
                   time_steps.end());
  require(space_rows.front() >= 0, "sample spatial index must be nonnegative");
  require(time_steps.front() >= 1, "sample time step must be at least 1");
  SampleSet s;
  s.product_ = true;
  s.space_ = std::move(space_rows);
  s.times_ = std::move(time_steps);
  s.points_.reserve(s.space_.size() * s.times_.size());
  for (Index n : s.times_)
    for (Index k : s.space_) s.points_.push_back({k, n});
  return s;
}

SampleSet SampleSet::all(Index num_space, Index num_steps) {
  require(num_space >= 1 && num_steps >= 1, "empty space-time grid");
  std::vector<Index> rows(static_cast<std::size_t>(num_space));
  for (Index k = 0; k < num_space; ++k) rows[std::size_t(k)] = k;
  std::vector<Index> times(static_cast<std::size_t>(num_steps));
  for (Index n = 1; n <= num_steps; ++n) times[std::size_t(n - 1)] = n;
  return product_of(std::move(rows), std::move(times));
}

const std::vector<Index>& SampleSet::space_rows() const {
  require(product_, "sample set is not in product form");
  return space_;
}

const std::vector<Index>& SampleSet::time_steps() const {
  require(product_, "sample set is not in product form");
  return times_;
}

std::vector<Index> SampleSet::times_used() const {
  if (product_) return times_;
  std::vector<Index> times;
  for (const SpaceTimePoint& pt : points_)
    if (times.empty() || times.back() != pt.n) times.push_back(pt.n);
  return times;  // points_ are sorted time-major
}

std::vector<Index> SampleSet::rows_at_time(Index n) const {
  if (product_) {
    return std::binary_search(times_.begin(), times_.end(), n)
               ? space_
               : std::vector<Index>{};
  }
  std::vector<Index> rows;
  for (const SpaceTimePoint& pt : points_)
    if (pt.n == n) rows.push_back(pt.k);
  return rows;  // ascending because points_ are sorted
}

// ---------------------------------------------------------------------------
// SpaceTimeWeighting
// ---------------------------------------------------------------------------

SpaceTimeWeighting SpaceTimeWeighting::identity() {
  return SpaceTimeWeighting{};
}

SpaceTimeWeighting SpaceTimeWeighting::collocation(SampleSet samples) {
  require(!samples.empty(), "collocation needs a nonempty sample set");
  SpaceTimeWeighting w;
  w.kind_ = Kind::Collocation;
  w.samples_ = std::move(samples);
  return w;
}

SpaceTimeWeighting SpaceTimeWeighting::gappy(
    const SpaceTimeBasis& residual_basis, SampleSet samples) {
  require(!samples.empty(), "gappy weighting needs a nonempty sample set");
  const Index n_z = samples.size();
  const Index n_r = residual_basis.total_dim();
  require(n_r <= n_z,
          "need at least as many samples as residual basis vectors");
  const Matrix sampled = residual_basis.rows_at(samples.points());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sampled);
  require(cod.rank() == n_r, "sampled residual basis is rank deficient");
  SpaceTimeWeighting w;
  w.kind_ = Kind::Gappy;
  w.samples_ = std::move(samples);
  w.gappy_ = cod.pseudoInverse();
  return w;
}

const SampleSet& SpaceTimeWeighting::samples() const {
  require(kind_ != Kind::Identity, "identity weighting has no sample set");
  return samples_;
}

Index SpaceTimeWeighting::output_dim(Index full_dim) const {
  switch (kind_) {
    case Kind::Identity: return full_dim;
    case Kind::Collocation: return samples_.size();
    case Kind::Gappy: return gappy_.rows();
  }
  return 0;
}

const Matrix& SpaceTimeWeighting::gappy_operator() const {
  require(kind_ == Kind::Gappy, "not a gappy weighting");
  return gappy_;
}

Vector SpaceTimeWeighting::apply(const Vector& residual_rows) const {
  if (kind_ == Kind::Gappy) {
    require(residual_rows.size() == gappy_.cols(),
            "sampled residual length mismatch");
    return gappy_ * residual_rows;
  }
  return residual_rows;
}

Matrix SpaceTimeWeighting::apply(const Matrix& jacobian_rows) const {
  if (kind_ == Kind::Gappy) {
    require(jacobian_rows.rows() == gappy_.cols(),
            "sampled Jacobian row count mismatch");
    return gappy_ * jacobian_rows;
  }
  return jacobian_rows;
}

// ---------------------------------------------------------------------------
// Residual / Jacobian assembly
// ---------------------------------------------------------------------------

void StProblem::validate() const {
  require(model != nullptr && scheme != nullptr && basis != nullptr,
          "space-time problem is missing a component");
  require(basis->num_space() == model->dim(),
          "trial basis does not match the model dimension");
  require(basis->num_steps() >= 1, "trial basis has no time steps");
  require(dt > 0.0, "time step must be positive");
  require(mu.size() == model->parameter_dim(), "parameter size mismatch");
}

namespace {

// All trial states w^n = w0 + Pi(n) yhat, n = 0..N_t, as columns.
Matrix reconstruct_states(const StProblem& p, const Vector& yhat) {
  const Index nt = p.num_steps();
  Matrix states(p.model->dim(), nt + 1);
  const Vector w0 = p.model->initial_state(p.mu);
  states.col(0) = w0;
  for (Index n = 1; n <= nt; ++n)
    states.col(n) = w0 + p.basis->evaluate_at(n, yhat);
  return states;
}

}  // namespace

Vector st_residual(const StProblem& p, const Vector& yhat) {
  p.validate();
  require(yhat.size() == p.basis->total_dim(), "coordinate length mismatch");
  const Index ns = p.model->dim();
  const Index nt = p.num_steps();
  const Matrix states = reconstruct_states(p, yhat);

  // velocity at every time level (level m feeds steps n = m..m+k)
  Matrix velocities(ns, nt + 1);
  for (Index m = 0; m <= nt; ++m)
    velocities.col(m) =
        p.model->velocity(states.col(m), p.dt * double(m), p.mu);

  Vector r(ns * nt);
  for (Index n = 1; n <= nt; ++n) {
    Vector rn = Vector::Zero(ns);
    const Index k_n = p.scheme->steps_at(n);
    for (Index j = 0; j <= k_n; ++j) {
      rn += p.scheme->alpha(n, j) * states.col(n - j);
      const double bj = p.scheme->beta(n, j);
      if (bj != 0.0) rn -= p.dt * bj * velocities.col(n - j);
    }
    r.segment(vec_index(0, n, ns), ns) = rn;
  }
  return r;
}

Vector st_residual_sampled(const StProblem& p, const Vector& yhat,
                           const SampleSet& samples) {
  p.validate();
  require(yhat.size() == p.basis->total_dim(), "coordinate length mismatch");
  require(!samples.empty(), "sample set cannot be empty");
  const Index nt = p.num_steps();
  const Vector w0 = p.model->initial_state(p.mu);

  // Reconstruct only the window states of the sampled time steps.
  std::map<Index, Vector> state_at;
  auto state = [&](Index m) -> const Vector& {
    auto it = state_at.find(m);
    if (it == state_at.end()) {
      Vector w = w0;
      if (m > 0) w += p.basis->evaluate_at(m, yhat);
      it = state_at.emplace(m, std::move(w)).first;
    }
    return it->second;
  };

  Vector out(samples.size());
  Index at = 0;
  Vector f_rows;
  for (Index n : samples.times_used()) {
    require(n >= 1 && n <= nt, "sample time step out of range");
    const std::vector<Index> rows = samples.rows_at_time(n);
    require(rows.back() < p.model->dim(), "sample row out of range");
    const Index m = static_cast<Index>(rows.size());
    const Index k_n = p.scheme->steps_at(n);
    Vector rn = Vector::Zero(m);
    for (Index j = 0; j <= k_n; ++j) {
      const Vector& w = state(n - j);
      const double aj = p.scheme->alpha(n, j);
      for (Index q = 0; q < m; ++q) rn(q) += aj * w(rows[std::size_t(q)]);
      const double bj = p.scheme->beta(n, j);
      if (bj != 0.0) {
        p.model->velocity_components(w, p.dt * double(n - j), p.mu, rows,
                                     f_rows);
        rn -= p.dt * bj * f_rows;
      }
    }
    out.segment(at, m) = rn;
    at += m;
  }
  return out;
}

namespace {

// d r^n / d yhat accumulated over the scheme window; jac(m) must return the
// model Jacobian at time level m (only queried for levels with beta != 0).
template <typename JacFn>
Matrix st_block_jacobian(const StProblem& p, Index n, JacFn&& jac) {
  const Index ns = p.model->dim();
  Matrix block = Matrix::Zero(ns, p.basis->total_dim());
  const Index k_n = p.scheme->steps_at(n);
  for (Index j = 0; j <= k_n; ++j) {
    const Index m = n - j;
    if (m == 0) continue;  // basis vanishes at the initial time
    const Matrix slice = p.basis->time_slice(m);
    block += p.scheme->alpha(n, j) * slice;
    const double bj = p.scheme->beta(n, j);
    if (bj != 0.0) block -= p.dt * bj * (jac(m) * slice);
  }
  return block;
}

}  // namespace

Matrix st_jacobian(const StProblem& p, const Vector& yhat) {
  p.validate();
  require(yhat.size() == p.basis->total_dim(), "coordinate length mismatch");
  const Index ns = p.model->dim();
  const Index nt = p.num_steps();
  const Matrix states = reconstruct_states(p, yhat);

  // ring buffer of model Jacobians for the trailing scheme window
  std::map<Index, Matrix> jac_cache;
  auto jac = [&](Index m) -> const Matrix& {
    auto it = jac_cache.find(m);
    if (it == jac_cache.end()) {
      it = jac_cache
               .emplace(m, p.model->velocity_jacobian(states.col(m),
                                                      p.dt * double(m), p.mu))
               .first;
    }
    return it->second;
  };

  Matrix J(ns * nt, p.basis->total_dim());
  for (Index n = 1; n <= nt; ++n) {
    J.middleRows(vec_index(0, n, ns), ns) = st_block_jacobian(p, n, jac);
    // drop cached Jacobians that have left every future window
    const Index horizon = n + 1 - p.scheme->max_steps();
    while (!jac_cache.empty() && jac_cache.begin()->first < horizon)
      jac_cache.erase(jac_cache.begin());
  }
  return J;
}

Matrix st_jacobian_sampled(const StProblem& p, const Vector& yhat,
                           const SampleSet& samples) {
  p.validate();
  require(yhat.size() == p.basis->total_dim(), "coordinate length mismatch");
  require(!samples.empty(), "sample set cannot be empty");
  const Index nt = p.num_steps();
  const Vector w0 = p.model->initial_state(p.mu);

  std::map<Index, Vector> state_at;
  auto state = [&](Index m) -> const Vector& {
    auto it = state_at.find(m);
    if (it == state_at.end()) {
      Vector w = w0;
      if (m > 0) w += p.basis->evaluate_at(m, yhat);
      it = state_at.emplace(m, std::move(w)).first;
    }
    return it->second;
  };

  Matrix J(samples.size(), p.basis->total_dim());
  Index at = 0;
  Matrix f_jac_rows;
  for (Index n : samples.times_used()) {
    require(n >= 1 && n <= nt, "sample time step out of range");
    const std::vector<Index> rows = samples.rows_at_time(n);
    require(rows.back() < p.model->dim(), "sample row out of range");
    const Index m_rows = static_cast<Index>(rows.size());
    Matrix block = Matrix::Zero(m_rows, p.basis->total_dim());
    const Index k_n = p.scheme->steps_at(n);
    for (Index j = 0; j <= k_n; ++j) {
      const Index m = n - j;
      if (m == 0) continue;
      const double aj = p.scheme->alpha(n, j);
      if (aj != 0.0) {
        std::vector<SpaceTimePoint> pts;
        pts.reserve(std::size_t(m_rows));
        for (Index q = 0; q < m_rows; ++q)
          pts.push_back({rows[std::size_t(q)], m});
        block += aj * p.basis->rows_at(pts);
      }
      const double bj = p.scheme->beta(n, j);
      if (bj != 0.0) {
        p.model->velocity_jacobian_rows(state(m), p.dt * double(m), p.mu,
                                        rows, f_jac_rows);
        block -= p.dt * bj * (f_jac_rows * p.basis->time_slice(m));
      }
    }
    J.middleRows(at, m_rows) = block;
    at += m_rows;
  }
  return J;
}

// ---------------------------------------------------------------------------
// Gauss-Newton
// ---------------------------------------------------------------------------

StRomSolution st_gauss_newton(const StProblem& p,
                              const SpaceTimeWeighting& weighting,
                              const Vector& yhat0,
                              const GaussNewtonOptions& opts) {
  p.validate();
  require(yhat0.size() == p.basis->total_dim(),
          "initial guess length mismatch");
  const bool sampled = weighting.sampled();

  auto raw_residual = [&](const Vector& y) -> Vector {
    return sampled ? st_residual_sampled(p, y, weighting.samples())
                   : st_residual(p, y);
  };
  auto raw_jacobian = [&](const Vector& y) -> Matrix {
    return sampled ? st_jacobian_sampled(p, y, weighting.samples())
                   : st_jacobian(p, y);
  };

  // Gram matrix and gradient accumulated one time-block at a time; never
  // materializes the tall space-time Jacobian (identity weighting only).
  auto streamed_gram = [&](const Vector& y, const Vector& r, Matrix& G,
                           Vector& grad) {
    const Index ns = p.model->dim();
    const Index dim = p.basis->total_dim();
    const Matrix states = reconstruct_states(p, y);
    std::map<Index, Matrix> jac_cache;
    auto jac = [&](Index m) -> const Matrix& {
      auto it = jac_cache.find(m);
      if (it == jac_cache.end()) {
        it = jac_cache
                 .emplace(m, p.model->velocity_jacobian(
                                 states.col(m), p.dt * double(m), p.mu))
                 .first;
      }
      return it->second;
    };
    G = Matrix::Zero(dim, dim);
    grad = Vector::Zero(dim);
    for (Index n = 1; n <= p.num_steps(); ++n) {
      const Matrix B = st_block_jacobian(p, n, jac);
      G.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose());
      grad.noalias() += B.transpose() * r.segment(vec_index(0, n, ns), ns);
      const Index horizon = n + 1 - p.scheme->max_steps();
      while (!jac_cache.empty() && jac_cache.begin()->first < horizon)
        jac_cache.erase(jac_cache.begin());
    }
    G = G.selfadjointView<Eigen::Lower>();
  };

  StRomSolution sol;
  sol.yhat = yhat0;
  Vector raw = raw_residual(sol.yhat);
  Vector rw = weighting.apply(raw);
  double obj = 0.5 * rw.squaredNorm();
  if (opts.residual_observer) opts.residual_observer(raw);

  double g0 = -1.0;
  for (Index it = 0; it < opts.max_iters; ++it) {
    Matrix Jw;
    Matrix G;
    Vector grad;
    const bool streaming = opts.normal_equations && !sampled;
    if (streaming) {
      streamed_gram(sol.yhat, rw, G, grad);
    } else {
      Jw = weighting.apply(raw_jacobian(sol.yhat));
      grad = Jw.transpose() * rw;
      if (opts.normal_equations) G = Jw.transpose() * Jw;
    }
    const double gnorm = grad.norm();
    if (g0 < 0.0) g0 = gnorm;
    sol.history.objective.push_back(obj);
    sol.history.gradient_norm.push_back(gnorm);
    if (gnorm <= opts.grad_tol * std::max(g0, 1e-300)) {
      sol.converged = true;
      break;
    }

    Vector dy;
    if (opts.normal_equations) {
      dy = G.ldlt().solve(-grad);
    } else {
      dy = Jw.colPivHouseholderQr().solve(-rw);
    }

    double step = 1.0;
    bool accepted = false;
    for (Index bt = 0; bt <= opts.max_backtracks; ++bt, step *= 0.5) {
      Vector yt = sol.yhat + step * dy;
      Vector raw_t;
      try {
        raw_t = raw_residual(yt);
      } catch (const error&) {
        continue;  // inadmissible reconstruction; shrink the step
      }
      Vector rw_t = weighting.apply(raw_t);
      const double obj_t = 0.5 * rw_t.squaredNorm();
      if (obj_t < obj) {
        sol.yhat = std::move(yt);
        raw = std::move(raw_t);
        rw = std::move(rw_t);
        obj = obj_t;
        accepted = true;
        break;
      }
    }
    sol.history.step_length.push_back(accepted ? step * 2.0 : 0.0);
    if (!accepted) break;  // stationary up to backtracking resolution
    sol.iterations = it + 1;
    if (opts.residual_observer) opts.residual_observer(raw);
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Reconstruction / projection
// ---------------------------------------------------------------------------

Matrix reconstruct_solution(const SpaceTimeBasis& basis, const Vector& w0,
                            const Vector& yhat) {
  require(w0.size() == basis.num_space(), "initial state length mismatch");
  Matrix states(basis.num_space(), basis.num_steps() + 1);
  states.col(0) = w0;
  for (Index n = 1; n <= basis.num_steps(); ++n)
    states.col(n) = w0 + basis.evaluate_at(n, yhat);
  return states;
}

Vector project_fom_solution(const SpaceTimeBasis& basis,
                            const Trajectory& trajectory) {
  require(trajectory.space_dim() == basis.num_space(),
          "trajectory does not match the basis space dimension");
  require(trajectory.num_steps() == basis.num_steps(),
          "trajectory does not match the basis step count");
  const Index ns = basis.num_space();
  const Index nt = basis.num_steps();
  const Index n_modes = basis.num_spatial_modes();
  const Index dim = basis.total_dim();

  // centered slab D: column n-1 = w^n - w^0
  Matrix D = trajectory.states.rightCols(nt);
  D.colwise() -= trajectory.states.col(0);

  // Gram blocks: G[(i,j),(p,q)] = (phi_i . phi_p) (psi^{ij} . psi^{pq})
  const Matrix S = basis.spatial().transpose() * basis.spatial();
  Matrix G(dim, dim);
  for (Index i = 0; i < n_modes; ++i)
    for (Index pmode = 0; pmode < n_modes; ++pmode) {
      const Matrix T =
          basis.temporal(i).transpose() * basis.temporal(pmode);
      G.block(basis.flat_index(i, 0), basis.flat_index(pmode, 0), T.rows(),
              T.cols()) = S(i, pmode) * T;
    }

  // right-hand side: b_{I(i,j)} = sum_n psi^{ij}(n) (phi_i . d_n)
  const Matrix C = D.transpose() * basis.spatial();  // nt x n_modes
  Vector b(dim);
  for (Index i = 0; i < n_modes; ++i)
    b.segment(basis.flat_index(i, 0), basis.temporal_dim(i)) =
        basis.temporal(i).transpose() * C.col(i);

  Eigen::LDLT<Matrix> ldlt(G);
  require(ldlt.info() == Eigen::Success, "trial basis Gram matrix is singular");
  return ldlt.solve(b);
}

// ---------------------------------------------------------------------------
// Radial-basis interpolation
// ---------------------------------------------------------------------------

RbfInterpolant::RbfInterpolant(Matrix points, Matrix values)
    : points_(std::move(points)) {
  require(points_.rows() >= 1, "need at least one interpolation point");
  require(values.rows() == points_.rows(),
          "interpolation values do not match the points");
  const Index n = points_.rows();
  Matrix A(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      A(i, j) = (points_.row(i) - points_.row(j)).norm();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      require(A(i, j) > 0.0, "duplicate interpolation points");
  Eigen::PartialPivLU<Matrix> lu(A);
  weights_ = lu.solve(values);
  require(((A * weights_ - values).norm() <=
           1e-6 * std::max(1.0, values.norm())),
          "radial-basis system solve failed");
}

Vector RbfInterpolant::operator()(const Vector& mu) const {
  require(mu.size() == points_.cols(), "query parameter size mismatch");
  Vector k(points_.rows());
  for (Index j = 0; j < points_.rows(); ++j)
    k(j) = (mu.transpose() - points_.row(j)).norm();
  return weights_.transpose() * k;
}

Vector rbf_initial_guess(const std::vector<Vector>& train_mu,
                         const Matrix& train_coords, const Vector& mu) {
  require(!train_mu.empty(), "need at least one training point");
  require(train_coords.cols() == static_cast<Index>(train_mu.size()),
          "one coordinate column per training point required");
  const Index n_pts = static_cast<Index>(train_mu.size());
  const Index n_mu = train_mu.front().size();
  Matrix points(n_pts, n_mu);
  for (Index i = 0; i < n_pts; ++i) {
    require(train_mu[std::size_t(i)].size() == n_mu,
            "training parameters disagree on dimension");
    points.row(i) = train_mu[std::size_t(i)].transpose();
  }
  const RbfInterpolant interp(points, train_coords.transpose());
  return interp(mu);
}

}  // namespace stlspg
