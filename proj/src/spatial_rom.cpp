// SPDX-License-Identifier: Apache-2.0
#include "stlspg/spatial_rom.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace stlspg {

Index SpatialWeighting::output_dim(Index full_dim) const {
  if (is_identity()) return full_dim;
  if (is_gappy()) return gappy.rows();
  return static_cast<Index>(rows.size());
}

Vector SpatialWeighting::apply(const Vector& residual_rows) const {
  if (is_gappy()) {
    require(residual_rows.size() == gappy.cols(),
            "sampled residual length mismatch");
    return gappy * residual_rows;
  }
  return residual_rows;
}

Matrix SpatialWeighting::apply(const Matrix& jacobian_rows) const {
  if (is_gappy()) {
    require(jacobian_rows.rows() == gappy.cols(),
            "sampled Jacobian row count mismatch");
    return gappy * jacobian_rows;
  }
  return jacobian_rows;
}

SpatialWeighting SpatialWeighting::identity() { return SpatialWeighting{}; }

SpatialWeighting SpatialWeighting::collocation(std::vector<Index> sample_rows) {
  require(!sample_rows.empty(), "collocation needs at least one sample row");
  for (std::size_t q = 0; q + 1 < sample_rows.size(); ++q)
    require(sample_rows[q] < sample_rows[q + 1],
            "sample rows must be strictly increasing");
  require(sample_rows.front() >= 0, "sample rows must be nonnegative");
  SpatialWeighting w;
  w.rows = std::move(sample_rows);
  return w;
}

SpatialWeighting gnat_weighting(const Matrix& residual_basis,
                                const std::vector<Index>& sample_rows) {
  SpatialWeighting w = SpatialWeighting::collocation(sample_rows);
  require(sample_rows.back() < residual_basis.rows(),
          "sample row outside the residual basis");
  const Index n_z = static_cast<Index>(sample_rows.size());
  const Index n_r = residual_basis.cols();
  require(n_r <= n_z,
          "need at least as many sample rows as residual basis vectors");
  Matrix sampled(n_z, n_r);
  for (Index q = 0; q < n_z; ++q)
    sampled.row(q) = residual_basis.row(sample_rows[std::size_t(q)]);
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sampled);
  require(cod.rank() == n_r, "sampled residual basis is rank deficient");
  w.gappy = cod.pseudoInverse();
  return w;
}

namespace {

// Sorted union of the velocity stencils of the sampled rows: the only state
// entries the sampled residual depends on through f.
std::vector<Index> stencil_closure(const SemiDiscreteModel& model,
                                   const std::vector<Index>& rows) {
  std::set<Index> closure;
  for (Index r : rows)
    for (Index c : model.velocity_stencil(r)) closure.insert(c);
  return {closure.begin(), closure.end()};
}

}  // namespace

LspgResult lspg_solve(const SemiDiscreteModel& model,
                      const LinearMultistepScheme& scheme,
                      const Matrix& spatial_basis,
                      const SpatialWeighting& weighting, const Vector& mu,
                      double dt, Index num_steps, const LspgOptions& opts) {
  require(spatial_basis.rows() == model.dim(),
          "spatial basis does not match the model dimension");
  require(spatial_basis.cols() >= 1, "spatial basis is empty");
  require(dt > 0.0, "time step must be positive");
  require(num_steps >= 1, "need at least one step");
  model.check_parameters(mu);

  const Index ns = model.dim();
  const Index n_red = spatial_basis.cols();
  const bool hyper = !weighting.is_identity();
  if (hyper)
    require(weighting.rows.back() < ns, "sample row outside the state space");
  const std::vector<Index> cols =
      hyper ? stencil_closure(model, weighting.rows) : std::vector<Index>{};

  const Vector w0 = model.initial_state(mu);

  LspgResult result;
  result.trajectory.dt = dt;
  result.trajectory.mu = mu;
  result.trajectory.states.resize(ns, num_steps + 1);
  result.trajectory.states.col(0) = w0;
  result.reduced = Matrix::Zero(n_red, num_steps + 1);
  result.iterations.assign(static_cast<std::size_t>(num_steps), 0);

  // Sampled rows of the trial basis and of the identity shift, reused by all
  // hyper-reduced residual evaluations.
  Matrix basis_rows;
  Vector w0_rows;
  if (hyper) {
    const Index n_z = static_cast<Index>(weighting.rows.size());
    basis_rows.resize(n_z, n_red);
    w0_rows.resize(n_z);
    for (Index q = 0; q < n_z; ++q) {
      basis_rows.row(q) = spatial_basis.row(weighting.rows[std::size_t(q)]);
      w0_rows(q) = w0(weighting.rows[std::size_t(q)]);
    }
  }

  Vector y = Vector::Zero(n_red);  // warm start carries across steps

  for (Index n = 1; n <= num_steps; ++n) {
    const Index k_n = scheme.steps_at(n);
    const double a0 = scheme.alpha(n, 0);
    const double b0 = scheme.beta(n, 0);
    const double t_n = dt * double(n);

    // Known part of the residual: history terms j = 1..k_n.
    Vector known;        // full dimension (identity weighting)
    Vector known_rows;   // sampled entries (hyper-reduced weighting)
    if (!hyper) {
      known = Vector::Zero(ns);
      for (Index j = 1; j <= k_n; ++j) {
        const Vector& wj = result.trajectory.states.col(n - j);
        known += scheme.alpha(n, j) * wj;
        const double bj = scheme.beta(n, j);
        if (bj != 0.0)
          known -= dt * bj * model.velocity(wj, dt * double(n - j), mu);
      }
    } else {
      const Index n_z = static_cast<Index>(weighting.rows.size());
      known_rows = Vector::Zero(n_z);
      Vector f_rows;
      for (Index j = 1; j <= k_n; ++j) {
        const Vector& wj = result.trajectory.states.col(n - j);
        for (Index q = 0; q < n_z; ++q)
          known_rows(q) +=
              scheme.alpha(n, j) * wj(weighting.rows[std::size_t(q)]);
        const double bj = scheme.beta(n, j);
        if (bj != 0.0) {
          model.velocity_components(wj, dt * double(n - j), mu,
                                    weighting.rows, f_rows);
          known_rows -= dt * bj * f_rows;
        }
      }
    }

    // Weighted residual and Gauss-Newton Jacobian at trial coordinates y.
    // The full state only exists on the identity path; the hyper-reduced
    // path reconstructs just the stencil closure's entries... the model
    // still receives the full vector, assembled once per evaluation.
    auto reconstruct = [&](const Vector& yy) -> Vector {
      return w0 + spatial_basis * yy;
    };
    auto weighted_residual = [&](const Vector& yy) -> Vector {
      const Vector w = reconstruct(yy);
      if (!hyper) {
        Vector r = a0 * w + known;
        if (b0 != 0.0) r -= dt * b0 * model.velocity(w, t_n, mu);
        return r;  // identity weighting
      }
      Vector r = a0 * (w0_rows + basis_rows * yy) + known_rows;
      if (b0 != 0.0) {
        Vector f_rows;
        model.velocity_components(w, t_n, mu, weighting.rows, f_rows);
        r -= dt * b0 * f_rows;
      }
      return weighting.apply(r);
    };
    auto weighted_jacobian = [&](const Vector& yy) -> Matrix {
      if (!hyper) {
        Matrix J = a0 * spatial_basis;
        if (b0 != 0.0) {
          const Vector w = reconstruct(yy);
          J -= dt * b0 * (model.velocity_jacobian(w, t_n, mu) * spatial_basis);
        }
        return J;
      }
      Matrix J = a0 * basis_rows;
      if (b0 != 0.0) {
        const Vector w = reconstruct(yy);
        Matrix rows;
        model.velocity_jacobian_rows(w, t_n, mu, weighting.rows, rows);
        // rows is |samples| x N_s but only stencil-closure columns are
        // nonzero; contract over those columns only.
        for (Index c : cols) J -= dt * b0 * (rows.col(c) * spatial_basis.row(c));
      }
      return weighting.apply(J);
    };

    auto observe = [&](Index iter, const Vector& yy) {
      if (!opts.residual_observer || hyper) return;
      const Vector w = reconstruct(yy);
      Vector r = a0 * w + known;
      if (b0 != 0.0) r -= dt * b0 * model.velocity(w, t_n, mu);
      opts.residual_observer(n, iter, r);
    };

    Vector r = weighted_residual(y);
    double obj = 0.5 * r.squaredNorm();
    observe(0, y);
    double g0 = -1.0;
    Index it = 0;
    for (; it < opts.max_iters; ++it) {
      const Matrix J = weighted_jacobian(y);
      const Vector grad = J.transpose() * r;
      const double gnorm = grad.norm();
      if (g0 < 0.0) g0 = gnorm;
      if (gnorm <= opts.grad_tol * std::max(g0, 1e-300)) break;

      const Vector dy = J.colPivHouseholderQr().solve(-r);
      double step = 1.0;
      bool accepted = false;
      for (Index bt = 0; bt <= opts.max_backtracks; ++bt, step *= 0.5) {
        Vector yt = y + step * dy;
        Vector rt;
        try {
          rt = weighted_residual(yt);
        } catch (const error&) {
          continue;  // inadmissible reconstruction; shrink the step
        }
        const double ot = 0.5 * rt.squaredNorm();
        if (ot < obj) {
          y = std::move(yt);
          r = std::move(rt);
          obj = ot;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // stationary for this step's least squares
      observe(it + 1, y);
    }
    result.iterations[static_cast<std::size_t>(n - 1)] = it;

    result.reduced.col(n) = y;
    result.trajectory.states.col(n) = reconstruct(y);
  }
  return result;
}

}  // namespace stlspg
