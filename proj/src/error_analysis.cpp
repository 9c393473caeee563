// SPDX-License-Identifier: Apache-2.0
#include "stlspg/error_analysis.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace stlspg {

namespace {

// Above this size the dense SVD is replaced by Sturm-sequence bisection on
// the banded normal matrix; extreme singular values of these operators
// cluster tightly, which rules out power iteration.
constexpr Index kDenseLimit = 600;

// Symmetric banded normal matrix M = Op^T Op stored by subdiagonals:
// band[d](i) = M(i + d, i) for d = 0..bw.
struct NormalBand {
  std::vector<Vector> band;
  Index n = 0;
  Index bw = 0;
};

// Row n of the operator holds the coefficient for step j at column n - j;
// terms referencing w^0 fall outside the operator.
NormalBand normal_band(const LinearMultistepScheme& scheme, Index nt,
                       bool use_beta) {
  NormalBand m;
  m.n = nt;
  m.bw = std::min(scheme.max_steps(), nt - 1);
  m.band.assign(std::size_t(m.bw) + 1, Vector::Zero(nt));
  for (Index n = 1; n <= nt; ++n) {
    const Index kn = scheme.steps_at(n);
    for (Index j1 = 0; j1 <= kn; ++j1) {
      if (n - j1 < 1) continue;
      const double c1 = use_beta ? scheme.beta(n, j1) : scheme.alpha(n, j1);
      for (Index j2 = j1; j2 <= kn; ++j2) {
        if (n - j2 < 1) continue;
        const double c2 = use_beta ? scheme.beta(n, j2) : scheme.alpha(n, j2);
        m.band[std::size_t(j2 - j1)](n - j2 - 1) += c1 * c2;
      }
    }
  }
  return m;
}

// Number of eigenvalues of M strictly below s: negative-pivot count of the
// banded LDL^T factorization of M - s I (vanishing pivots are perturbed, as
// in standard spectrum-slicing bisection).
Index count_below(const NormalBand& m, double s) {
  const Index n = m.n;
  const Index b = m.bw;
  std::vector<Vector> w = m.band;
  w[0].array() -= s;
  Index neg = 0;
  constexpr double pivmin = 1e-290;
  for (Index i = 0; i < n; ++i) {
    double p = w[0](i);
    if (std::abs(p) < pivmin) p = (p < 0.0) ? -pivmin : pivmin;
    if (p < 0.0) ++neg;
    const Index jmax = std::min(i + b, n - 1);
    for (Index j = i + 1; j <= jmax; ++j) {
      const double l = w[std::size_t(j - i)](i) / p;
      for (Index r = j; r <= jmax; ++r)
        w[std::size_t(r - j)](j) -= l * w[std::size_t(r - i)](i);
    }
  }
  return neg;
}

// Extreme eigenvalue of the positive-semidefinite band matrix by bisection
// with exact inertia counts; the interval shrinks to relative width 1e-14,
// so clustering cannot stall it.
double bisect_extreme_eigen(const NormalBand& m, bool largest) {
  const Index n = m.n;
  const Index b = m.bw;
  double hi = 0.0;
  for (Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Index d = 1; d <= b; ++d) {
      if (i - d >= 0) off += std::abs(m.band[std::size_t(d)](i - d));
      if (i + d <= n - 1) off += std::abs(m.band[std::size_t(d)](i));
    }
    hi = std::max(hi, m.band[0](i) + off);
  }
  hi = hi * (1.0 + 1e-12) + 1e-300;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Index below = count_below(m, mid);
    if (largest ? (below >= n) : (below >= 1))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

double banded_sigma(const LinearMultistepScheme& scheme, Index nt,
                    bool use_beta, bool largest) {
  const NormalBand m = normal_band(scheme, nt, use_beta);
  return std::sqrt(std::max(0.0, bisect_extreme_eigen(m, largest)));
}

}  // namespace

OperatorBounds lmm_operator_bounds(const LinearMultistepScheme& scheme,
                                   Index num_steps) {
  require(num_steps >= 1, "need at least one time step");
  OperatorBounds b;
  b.num_steps = num_steps;
  if (num_steps <= kDenseLimit) {
    const LmmOperators ops = assemble_lmm_operators(scheme, num_steps);
    const Vector sa = Eigen::BDCSVD<Matrix>(ops.A).singularValues();
    const Vector sb = Eigen::BDCSVD<Matrix>(ops.B).singularValues();
    b.sigma_max_A = sa(0);
    b.sigma_min_A = sa(sa.size() - 1);
    b.sigma_max_B = sb(0);
  } else {
    b.sigma_max_A = banded_sigma(scheme, num_steps, false, true);
    b.sigma_min_A = banded_sigma(scheme, num_steps, false, false);
    b.sigma_max_B = banded_sigma(scheme, num_steps, true, true);
  }
  return b;
}

double assumption_max_dt(const OperatorBounds& b, double lf) {
  require(lf >= 0.0, "Lipschitz constant must be nonnegative");
  if (lf == 0.0) return std::numeric_limits<double>::infinity();
  require(b.sigma_max_B > 0.0, "operator bounds are incomplete");
  return b.sigma_min_A / (lf * b.sigma_max_B);
}

bool timestep_assumption_holds(const OperatorBounds& b, double dt, double lf) {
  if (dt <= 0.0) return false;
  return b.sigma_min_A - dt * lf * b.sigma_max_B > 0.0;
}

double residual_lipschitz(const OperatorBounds& b, double dt, double lf) {
  require(dt > 0.0 && lf >= 0.0, "invalid time step or Lipschitz constant");
  return b.sigma_max_A + dt * lf * b.sigma_max_B;
}

double residual_lipschitz_weighted(double sigma_max_WA, double sigma_max_WB,
                                   double dt, double lf) {
  require(dt > 0.0 && lf >= 0.0, "invalid time step or Lipschitz constant");
  return sigma_max_WA + dt * lf * sigma_max_WB;
}

double residual_inverse_lipschitz(const OperatorBounds& b, double dt,
                                  double lf) {
  require(dt > 0.0 && lf >= 0.0, "invalid time step or Lipschitz constant");
  const double k = b.sigma_min_A - dt * lf * b.sigma_max_B;
  require(k > 0.0,
          "time-step assumption violated: the inverse Lipschitz constant is "
          "not positive");
  return k;
}

StabilityConstants lebesgue_constant(const OperatorBounds& b, double dt,
                                     double lf) {
  const double k = residual_inverse_lipschitz(b, dt, lf);
  StabilityConstants c;
  c.lebesgue =
      (b.sigma_max_A - b.sigma_min_A + 2.0 * dt * lf * b.sigma_max_B) / k;
  c.one_plus_lebesgue = 1.0 + c.lebesgue;
  c.sqrt_steps_bound =
      std::sqrt(double(b.num_steps)) * c.one_plus_lebesgue;
  return c;
}

double aposteriori_bound(double weighted_residual_norm, double p, double k_r) {
  require(weighted_residual_norm >= 0.0, "residual norm must be nonnegative");
  require(p > 0.0, "weighting gain must be positive");
  require(k_r > 0.0, "inverse Lipschitz constant must be positive");
  return weighted_residual_norm / (p * k_r);
}

double lipschitz_estimate(const SemiDiscreteModel& model, const Vector& lo,
                          const Vector& hi, const Vector& mu, double t,
                          Index num_pairs, std::uint64_t seed) {
  require(lo.size() == model.dim() && hi.size() == model.dim(),
          "state box does not match the model dimension");
  require((hi - lo).minCoeff() >= 0.0, "state box is inverted");
  require(num_pairs >= 1, "need at least one sample pair");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&]() {
    Vector w(lo.size());
    for (Index i = 0; i < w.size(); ++i)
      w(i) = lo(i) + unit(gen) * (hi(i) - lo(i));
    return w;
  };
  double best = 0.0;
  for (Index p = 0; p < num_pairs; ++p) {
    const Vector u = draw();
    const Vector v = draw();
    const double dist = (u - v).norm();
    if (dist < 1e-14) continue;
    const double quotient =
        (model.velocity(u, t, mu) - model.velocity(v, t, mu)).norm() / dist;
    best = std::max(best, quotient);
  }
  return best;
}

std::vector<LebesgueSweepPoint> lebesgue_growth_sweep(
    const LinearMultistepScheme& scheme, double dt, double lf,
    const std::vector<double>& horizons) {
  require(dt > 0.0, "time step must be positive");
  require(!horizons.empty(), "need at least one horizon");
  std::vector<LebesgueSweepPoint> out;
  out.reserve(horizons.size());
  for (double T : horizons) {
    require(T > 0.0, "horizons must be positive");
    LebesgueSweepPoint pt;
    pt.horizon = T;
    pt.num_steps = std::max<Index>(1, Index(std::llround(T / dt)));
    const OperatorBounds b = lmm_operator_bounds(scheme, pt.num_steps);
    if (timestep_assumption_holds(b, dt, lf)) {
      const StabilityConstants c = lebesgue_constant(b, dt, lf);
      pt.one_plus_lambda = c.one_plus_lebesgue;
      pt.sqrt_steps_bound = c.sqrt_steps_bound;
      pt.valid = true;
    }
    out.push_back(pt);
  }
  return out;
}

double fitted_loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  require(x.size() == y.size(), "coordinate lists differ in length");
  require(x.size() >= 2, "need at least two points for a slope");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= double(x.size());
  my /= double(y.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    num += dx * (std::log(y[i]) - my);
    den += dx * dx;
  }
  require(den > 0.0, "log-log fit needs at least two distinct abscissae");
  return num / den;
}

void write_growth_csv(const std::string& path,
                      const std::vector<LebesgueSweepPoint>& sweep) {
  std::ofstream out(path);
  require(out.good(), "cannot open growth CSV for writing: " + path);
  out.precision(12);
  out << "horizon,one_plus_lambda,sqrt_steps_bound\n";
  for (const LebesgueSweepPoint& pt : sweep) {
    if (!pt.valid) continue;
    out << pt.horizon << ',' << pt.one_plus_lambda << ','
        << pt.sqrt_steps_bound << '\n';
  }
  require(out.good(), "failed writing growth CSV: " + path);
}

}  // namespace stlspg
