// SPDX-License-Identifier: Apache-2.0
#include "stlspg/time_integration.hpp"

#include <Eigen/LU>

#include <cctype>
#include <cmath>
#include <deque>
#include <sstream>
#include <utility>

namespace stlspg {

LinearMultistepScheme::LinearMultistepScheme(std::string name,
                                             std::vector<Row> rows)
    : name_(std::move(name)), rows_(std::move(rows)) {
  require(!rows_.empty(), "scheme needs at least one coefficient row");
  for (Index m = 1; m <= static_cast<Index>(rows_.size()); ++m) {
    Row& row = rows_[m - 1];
    require(row.alpha.size() == m + 1 && row.beta.size() == m + 1,
            "coefficient row " + std::to_string(m) + " has wrong length");
    require(row.alpha(0) != 0.0, "alpha_0 must be nonzero");
    // Consistency: the alphas must cancel. Independently rounded rational
    // coefficients (e.g. 11/6, -1/3) need not cancel exactly in floating
    // point, so the trailing alpha is snapped (at most a one-ulp shift) to
    // the negated running sum; the ascending-order sum is then exactly zero.
    double partial = 0.0;
    for (Index j = 0; j < m; ++j) partial += row.alpha(j);
    require(std::abs(partial + row.alpha(m)) < 1e-12,
            "alpha coefficients of row " + std::to_string(m) +
                " do not sum to zero");
    row.alpha(m) = -partial;
  }
}

Index LinearMultistepScheme::steps_at(Index n) const {
  require(n >= 1, "time step index must be >= 1");
  return std::min<Index>(max_steps(), n);
}

double LinearMultistepScheme::alpha(Index n, Index j) const {
  const Index m = steps_at(n);
  require(j >= 0 && j <= m, "alpha index out of range");
  return rows_[m - 1].alpha(j);
}

double LinearMultistepScheme::beta(Index n, Index j) const {
  const Index m = steps_at(n);
  require(j >= 0 && j <= m, "beta index out of range");
  return rows_[m - 1].beta(j);
}

namespace {

LinearMultistepScheme::Row make_row(std::initializer_list<double> a,
                                    std::initializer_list<double> b) {
  LinearMultistepScheme::Row row;
  row.alpha = Eigen::Map<const Vector>(a.begin(), a.size());
  row.beta = Eigen::Map<const Vector>(b.begin(), b.size());
  return row;
}

// Start-up always drops to the lower-order member of the same family.
std::vector<LinearMultistepScheme::Row> bdf_rows(int order) {
  std::vector<LinearMultistepScheme::Row> rows;
  rows.push_back(make_row({1.0, -1.0}, {1.0, 0.0}));
  if (order >= 2)
    rows.push_back(make_row({1.5, -2.0, 0.5}, {1.0, 0.0, 0.0}));
  if (order >= 3)
    rows.push_back(make_row({11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0},
                            {1.0, 0.0, 0.0, 0.0}));
  return rows;
}

std::vector<LinearMultistepScheme::Row> ab_rows(int order) {
  std::vector<LinearMultistepScheme::Row> rows;
  rows.push_back(make_row({1.0, -1.0}, {0.0, 1.0}));
  if (order >= 2)
    rows.push_back(make_row({1.0, -1.0, 0.0}, {0.0, 1.5, -0.5}));
  if (order >= 3)
    rows.push_back(make_row({1.0, -1.0, 0.0, 0.0},
                            {0.0, 23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0}));
  return rows;
}

std::vector<LinearMultistepScheme::Row> am_rows(int steps) {
  std::vector<LinearMultistepScheme::Row> rows;
  rows.push_back(make_row({1.0, -1.0}, {0.5, 0.5}));  // trapezoidal
  if (steps >= 2)
    rows.push_back(make_row({1.0, -1.0, 0.0},
                            {5.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0}));
  if (steps >= 3)
    rows.push_back(make_row(
        {1.0, -1.0, 0.0, 0.0},
        {9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0}));
  return rows;
}

}  // namespace

LinearMultistepScheme LinearMultistepScheme::backward_euler() {
  return LinearMultistepScheme("BE", bdf_rows(1));
}

LinearMultistepScheme LinearMultistepScheme::from_name(const std::string& name) {
  std::string key;
  for (char c : name) {
    if (c == '-' || c == '_') continue;
    key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (key == "BE" || key == "BACKWARDEULER") return backward_euler();
  if (key == "BDF2") return LinearMultistepScheme("BDF2", bdf_rows(2));
  if (key == "BDF3") return LinearMultistepScheme("BDF3", bdf_rows(3));
  if (key == "AB2") return LinearMultistepScheme("AB2", ab_rows(2));
  if (key == "AB3") return LinearMultistepScheme("AB3", ab_rows(3));
  if (key == "AM1") return LinearMultistepScheme("AM1", am_rows(1));
  if (key == "AM2") return LinearMultistepScheme("AM2", am_rows(2));
  if (key == "AM3") return LinearMultistepScheme("AM3", am_rows(3));
  fail("unknown multistep scheme: " + name);
}

Vector lmm_step_residual(const LinearMultistepScheme& scheme,
                         const SemiDiscreteModel& model, const Matrix& window,
                         double dt, Index n, const Vector& mu) {
  const Index m = scheme.steps_at(n);
  require(window.rows() == model.dim(), "window state dimension mismatch");
  require(window.cols() == m + 1, "window must hold k_n + 1 states");
  Vector r = Vector::Zero(model.dim());
  for (Index j = 0; j <= m; ++j) {
    r += scheme.alpha(n, j) * window.col(j);
    const double bj = scheme.beta(n, j);
    if (bj != 0.0)
      r -= dt * bj * model.velocity(window.col(j), dt * double(n - j), mu);
  }
  return r;
}

Matrix lmm_step_jacobian(const LinearMultistepScheme& scheme,
                         const SemiDiscreteModel& model, const Matrix& window,
                         double dt, Index n, const Vector& mu, Index j) {
  const Index m = scheme.steps_at(n);
  require(j >= 0 && j <= m, "window index out of range");
  require(window.rows() == model.dim() && window.cols() == m + 1,
          "window shape mismatch");
  Matrix J = scheme.alpha(n, j) *
             Matrix::Identity(model.dim(), model.dim());
  const double bj = scheme.beta(n, j);
  if (bj != 0.0)
    J -= dt * bj * model.velocity_jacobian(window.col(j), dt * double(n - j), mu);
  return J;
}

Trajectory solve_fom(const SemiDiscreteModel& model,
                     const LinearMultistepScheme& scheme, const Vector& mu,
                     double dt, Index num_steps, const NewtonOptions& opts) {
  require(dt > 0.0 && num_steps >= 1, "need dt > 0 and at least one step");
  model.check_parameters(mu);
  const Index ns = model.dim();

  Trajectory traj;
  traj.dt = dt;
  traj.mu = mu;
  traj.states.resize(ns, num_steps + 1);
  traj.states.col(0) = model.initial_state(mu);

  // History of f(w^{n-j}, t^{n-j}) for schemes whose beta_j != 0 at j >= 1.
  bool needs_f_history = false;
  for (Index n = 1; n <= scheme.max_steps(); ++n)
    for (Index j = 1; j <= scheme.steps_at(n); ++j)
      if (scheme.beta(n, j) != 0.0) needs_f_history = true;
  std::deque<Vector> fhist;  // fhist[j-1] = f(w^{n-j})
  if (needs_f_history)
    fhist.emplace_front(model.velocity(traj.states.col(0), 0.0, mu));

  for (Index n = 1; n <= num_steps; ++n) {
    const Index m = scheme.steps_at(n);
    const double a0 = scheme.alpha(n, 0);
    const double b0 = scheme.beta(n, 0);

    // Known contribution from already-computed window states.
    Vector known = Vector::Zero(ns);
    for (Index j = 1; j <= m; ++j) {
      known += scheme.alpha(n, j) * traj.states.col(n - j);
      const double bj = scheme.beta(n, j);
      if (bj != 0.0) known -= dt * bj * fhist[j - 1];
    }

    Vector w = traj.states.col(n - 1);
    if (b0 == 0.0) {
      w = -known / a0;  // explicit step: residual is linear in w^n
    } else {
      const double t = dt * double(n);
      auto residual = [&](const Vector& v) -> Vector {
        return a0 * v - dt * b0 * model.velocity(v, t, mu) + known;
      };
      Vector r = residual(w);
      double rnorm = r.norm();
      bool converged = rnorm <= opts.tol;
      // Damped Newton with a Levenberg-Marquardt fallback: full Newton steps
      // (lambda = 0) while they decrease the residual norm; on rejection the
      // normal equations are damped Marquardt-style until a productive step
      // appears. Trial states outside the model's admissible set throw and
      // count as rejections.
      double lambda = 0.0;
      for (Index it = 0; it < opts.max_iters && !converged; ++it) {
        Matrix J = -dt * b0 * model.velocity_jacobian(w, t, mu);
        J.diagonal().array() += a0;
        bool accepted = false;
        for (int attempt = 0; attempt < 24 && !accepted; ++attempt) {
          Vector dw;
          if (lambda == 0.0) {
            dw = J.partialPivLu().solve(r);
          } else {
            Matrix N = J.transpose() * J;
            const Vector g = J.transpose() * r;
            N.diagonal() *= 1.0 + lambda;
            dw = N.ldlt().solve(g);
          }
          double step = 1.0;
          for (int bt = 0; bt < 4 && !accepted; ++bt, step *= 0.5) {
            const Vector wt = w - step * dw;
            Vector rt;
            try {
              rt = residual(wt);
            } catch (const error&) {
              continue;
            }
            const double rtnorm = rt.norm();
            if (rtnorm < rnorm || rtnorm <= opts.tol) {
              w = wt;
              r = std::move(rt);
              rnorm = rtnorm;
              accepted = true;
            }
          }
          if (!accepted) lambda = (lambda == 0.0) ? 1e-4 : lambda * 10.0;
        }
        if (!accepted) break;
        lambda *= 0.25;
        if (lambda < 1e-10) lambda = 0.0;
        converged = rnorm <= opts.tol;
      }
      if (!converged) {
        std::ostringstream msg;
        msg << "Newton stalled at step " << n << ": |r| = " << rnorm
            << " after " << opts.max_iters << " iterations";
        fail(msg.str());
      }
    }
    traj.states.col(n) = w;

    if (needs_f_history) {
      fhist.emplace_front(model.velocity(w, dt * double(n), mu));
      while (static_cast<Index>(fhist.size()) > scheme.max_steps())
        fhist.pop_back();
    }
  }
  return traj;
}

LmmOperators assemble_lmm_operators(const LinearMultistepScheme& scheme,
                                    Index num_steps) {
  require(num_steps >= 1, "need at least one step");
  LmmOperators ops;
  ops.A = Matrix::Zero(num_steps, num_steps);
  ops.B = Matrix::Zero(num_steps, num_steps);
  for (Index n = 1; n <= num_steps; ++n) {
    const Index m = scheme.steps_at(n);
    for (Index j = 0; j <= m; ++j) {
      if (n - j < 1) continue;  // w^0 terms live outside the operator
      ops.A(n - 1, n - j - 1) = scheme.alpha(n, j);
      ops.B(n - 1, n - j - 1) = scheme.beta(n, j);
    }
  }
  return ops;
}

}  // namespace stlspg
