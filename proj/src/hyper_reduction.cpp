// SPDX-License-Identifier: Apache-2.0
#include "stlspg/hyper_reduction.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <utility>

namespace stlspg {

namespace {

std::string format_mu(const Vector& mu) {
  std::ostringstream os;
  for (Index i = 0; i < mu.size(); ++i) {
    if (i) os << ',';
    os << mu(i);
  }
  return os.str();
}

// Full space-time field of basis * coeff, laid out by vec_index.
Vector st_field(const SpaceTimeBasis& basis, const Vector& coeff) {
  const Index ns = basis.num_space();
  Vector out(ns * basis.num_steps());
  for (Index n = 1; n <= basis.num_steps(); ++n)
    out.segment(vec_index(0, n, ns), ns) = basis.evaluate_at(n, coeff);
  return out;
}

// Minimum-norm least-squares solution (covers rank-deficient and
// underdetermined sampled systems in early greedy iterations).
Vector min_norm_solve(const Matrix& A, const Vector& b) {
  if (A.cols() == 0) return Vector(0);
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(A).solve(b);
}

// Error field of gappy reconstruction of basis column `c` from the rows at
// `pts` using columns 0..c-1; the raw column when nothing is selected yet.
Vector gappy_error_field(const SpaceTimeBasis& basis,
                         const std::vector<SpaceTimePoint>& pts, Index c) {
  Vector coeff = Vector::Zero(basis.total_dim());
  coeff(c) = 1.0;
  if (c > 0 && !pts.empty()) {
    const Matrix sampled = basis.rows_at(pts);
    const Vector fit = min_norm_solve(sampled.leftCols(c), sampled.col(c));
    coeff.head(c) -= fit;
  }
  return st_field(basis, coeff);
}

}  // namespace

StateTensor collect_residual_snapshots(const SemiDiscreteModel& model,
                                       const LinearMultistepScheme& scheme,
                                       const SpaceTimeBasis& trial, double dt,
                                       const ResidualSnapshotOptions& opts) {
  require(trial.num_space() == model.dim(),
          "trial basis does not match the model dimension");
  const Index ns = trial.num_space();
  const Index nt = trial.num_steps();
  const Index dim = trial.total_dim();

  StateTensor out;
  auto push = [&](const Vector& r, const Vector& mu, std::string label) {
    out.slabs.emplace_back(Eigen::Map<const Matrix>(r.data(), ns, nt));
    out.parameters.push_back(mu);
    out.labels.push_back(std::move(label));
  };

  switch (opts.method) {
    case ResidualSnapshotMethod::RomTraining: {
      require(!opts.parameters.empty(),
              "training-iterate snapshots need evaluation parameters");
      const Index n_params = static_cast<Index>(opts.parameters.size());
      require(opts.training_coordinates.size() == 0 ||
                  (opts.training_coordinates.rows() == dim &&
                   opts.training_coordinates.cols() == n_params),
              "initial-guess coordinates must give one column per parameter");
      for (Index p = 0; p < n_params; ++p) {
        const Vector& mu = opts.parameters[std::size_t(p)];
        const StProblem prob{&model, &scheme, &trial, mu, dt};
        Vector y0 = opts.training_coordinates.size() > 0
                        ? Vector(opts.training_coordinates.col(p))
                        : Vector(Vector::Zero(dim));
        GaussNewtonOptions gn = opts.gauss_newton;
        Index iterate = 0;
        gn.residual_observer = [&](const Vector& r) {
          std::ostringstream label;
          label << "rom_training mu=" << format_mu(mu)
                << " iterate=" << iterate++;
          push(r, mu, label.str());
        };
        try {
          (void)st_gauss_newton(prob, SpaceTimeWeighting::identity(), y0, gn);
        } catch (const error& e) {
          warn(std::string("residual-snapshot training solve aborted: ") +
               e.what());
        }
      }
      break;
    }
    case ResidualSnapshotMethod::FomProjection: {
      const Index n_params = static_cast<Index>(opts.parameters.size());
      require(n_params >= 1,
              "projection snapshots need evaluation parameters");
      require(opts.training_coordinates.rows() == dim &&
                  opts.training_coordinates.cols() == n_params,
              "projection snapshots need one coordinate column per parameter");
      for (Index p = 0; p < n_params; ++p) {
        const Vector& mu = opts.parameters[std::size_t(p)];
        const StProblem prob{&model, &scheme, &trial, mu, dt};
        const Vector r = st_residual(prob, opts.training_coordinates.col(p));
        push(r, mu, "fom_projection mu=" + format_mu(mu));
      }
      break;
    }
    case ResidualSnapshotMethod::RandomSamples: {
      require(opts.num_samples >= 1, "random snapshots need a draw count");
      require(opts.training_coordinates.rows() == dim &&
                  opts.training_coordinates.cols() >= 1,
              "random snapshots need coordinates spanning a bounding box");
      const Index n_mu = model.parameter_dim();
      const Matrix domain = model.parameter_domain();
      const Vector y_lo = opts.training_coordinates.rowwise().minCoeff();
      const Vector y_hi = opts.training_coordinates.rowwise().maxCoeff();

      // Latin hypercube over (coordinates, parameter): one stratum per draw
      // in every dimension, strata assigned by seeded permutations.
      const Index n_draw = opts.num_samples;
      const Index n_dims = dim + n_mu;
      std::mt19937_64 gen(opts.seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Matrix unit_draws(n_dims, n_draw);
      std::vector<Index> perm(static_cast<std::size_t>(n_draw));
      for (Index d = 0; d < n_dims; ++d) {
        std::iota(perm.begin(), perm.end(), Index{0});
        std::shuffle(perm.begin(), perm.end(), gen);
        for (Index s = 0; s < n_draw; ++s)
          unit_draws(d, s) =
              (double(perm[std::size_t(s)]) + unit(gen)) / double(n_draw);
      }
      for (Index s = 0; s < n_draw; ++s) {
        Vector yhat(dim);
        for (Index d = 0; d < dim; ++d)
          yhat(d) = y_lo(d) + unit_draws(d, s) * (y_hi(d) - y_lo(d));
        Vector mu(n_mu);
        for (Index d = 0; d < n_mu; ++d)
          mu(d) = domain(d, 0) +
                  unit_draws(dim + d, s) * (domain(d, 1) - domain(d, 0));
        const StProblem prob{&model, &scheme, &trial, mu, dt};
        const Vector r = st_residual(prob, yhat);
        std::ostringstream label;
        label << "random seed=" << opts.seed << " draw=" << s;
        push(r, mu, label.str());
      }
      break;
    }
  }
  require(!out.slabs.empty(), "no residual snapshots were collected");
  return out;
}

SpaceTimeBasis residual_basis(const StateTensor& residuals,
                              TemporalVariant variant, Index n_rs,
                              Index n_rt) {
  Matrix spatial = spatial_pod(residuals, n_rs);
  std::vector<Matrix> families;
  switch (variant) {
    case TemporalVariant::Thosvd: {
      const Matrix shared = temporal_basis_thosvd(residuals, n_rt);
      families.assign(static_cast<std::size_t>(n_rs), shared);
      break;
    }
    case TemporalVariant::Sthosvd: {
      const Matrix shared = temporal_basis_sthosvd(residuals, spatial, n_rt);
      families.assign(static_cast<std::size_t>(n_rs), shared);
      break;
    }
    case TemporalVariant::Tailored:
      families = temporal_basis_tailored(residuals, spatial, n_rt);
      break;
  }

  // Orthogonalize each temporal family in place (modified Gram-Schmidt with
  // re-orthogonalization); cross-mode orthogonality already follows from the
  // orthonormal spatial factor. Dependent columns are dropped with a warning.
  for (std::size_t i = 0; i < families.size(); ++i) {
    Matrix& fam = families[i];
    Matrix kept(fam.rows(), fam.cols());
    Index n_kept = 0;
    for (Index c = 0; c < fam.cols(); ++c) {
      Vector v = fam.col(c);
      const double original = v.norm();
      for (int pass = 0; pass < 2; ++pass)
        for (Index k = 0; k < n_kept; ++k)
          v -= kept.col(k).dot(v) * kept.col(k);
      if (v.norm() <= 1e-10 * std::max(1.0, original)) {
        std::ostringstream os;
        os << "dropping dependent temporal residual mode " << c
           << " of spatial mode " << i;
        warn(os.str());
        continue;
      }
      kept.col(n_kept++) = v / v.norm();
    }
    require(n_kept > 0, "temporal residual family collapsed to zero modes");
    fam = kept.leftCols(n_kept);
  }
  return assemble_st_basis(std::move(spatial), std::move(families));
}

Index greedy_quota(Index total, Index num_iterations, Index iteration) {
  require(total >= 0, "sample total must be nonnegative");
  require(num_iterations >= 1, "need at least one greedy iteration");
  require(iteration >= 1 && iteration <= num_iterations,
          "greedy iteration out of range");
  const Index base = total / num_iterations;
  const Index rem = total % num_iterations;
  return base + (iteration <= rem ? 1 : 0);
}

SampleSet greedy_spacetime_samples(const SpaceTimeBasis& residual_basis,
                                   Index target) {
  const Index ns = residual_basis.num_space();
  const Index nt = residual_basis.num_steps();
  const Index n_r = residual_basis.total_dim();
  require(target >= 1 && target <= ns * nt,
          "requested more space-time samples than indices");

  std::vector<SpaceTimePoint> selected;
  selected.reserve(static_cast<std::size_t>(target));
  std::vector<char> taken(static_cast<std::size_t>(ns * nt), 0);
  for (Index i = 1; i <= n_r; ++i) {
    const Index quota = greedy_quota(target, n_r, i);
    if (quota == 0) continue;
    const Vector eps = gappy_error_field(residual_basis, selected, i - 1);
    for (Index j = 0; j < quota; ++j) {
      Index best = -1;
      double best_score = -1.0;
      for (Index idx = 0; idx < ns * nt; ++idx) {
        if (taken[std::size_t(idx)]) continue;
        const double score = std::abs(eps(idx));
        if (score > best_score) {
          best_score = score;
          best = idx;
        }
      }
      taken[std::size_t(best)] = 1;
      selected.push_back({best % ns, best / ns + 1});
    }
  }
  return SampleSet::from_points(std::move(selected));
}

std::vector<Index> greedy_temporal_samples(
    const SpaceTimeBasis& residual_basis, Index target,
    const std::vector<Index>& space_rows) {
  const Index ns = residual_basis.num_space();
  const Index nt = residual_basis.num_steps();
  const Index n_r = residual_basis.total_dim();
  require(target >= 1 && target <= nt,
          "requested more temporal samples than steps");
  require(!space_rows.empty(), "spatial sample set cannot be empty");
  for (Index k : space_rows)
    require(k >= 0 && k < ns, "spatial sample out of range");

  std::vector<Index> picked;  // in pick order
  picked.reserve(static_cast<std::size_t>(target));
  std::vector<char> taken(static_cast<std::size_t>(nt + 1), 0);
  for (Index i = 1; i <= n_r; ++i) {
    const Index quota = greedy_quota(target, n_r, i);
    if (quota == 0) continue;
    std::vector<SpaceTimePoint> pts;
    pts.reserve(picked.size() * space_rows.size());
    for (Index n : picked)
      for (Index k : space_rows) pts.push_back({k, n});
    const Vector eps = gappy_error_field(residual_basis, pts, i - 1);
    for (Index j = 0; j < quota; ++j) {
      Index best = -1;
      double best_score = -1.0;
      for (Index n = 1; n <= nt; ++n) {
        if (taken[std::size_t(n)]) continue;
        const double score =
            eps.segment(vec_index(0, n, ns), ns).squaredNorm();
        if (score > best_score) {
          best_score = score;
          best = n;
        }
      }
      taken[std::size_t(best)] = 1;
      picked.push_back(best);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<Index> greedy_spatial_samples(const SpaceTimeBasis& residual_basis,
                                          Index target,
                                          const std::vector<Index>& time_steps) {
  const Index ns = residual_basis.num_space();
  const Index nt = residual_basis.num_steps();
  const Index n_r = residual_basis.total_dim();
  require(target >= 1 && target <= ns,
          "requested more spatial samples than rows");
  require(!time_steps.empty(), "temporal sample set cannot be empty");
  for (Index n : time_steps)
    require(n >= 1 && n <= nt, "temporal sample out of range");

  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(target));
  std::vector<char> taken(static_cast<std::size_t>(ns), 0);
  for (Index i = 1; i <= n_r; ++i) {
    const Index quota = greedy_quota(target, n_r, i);
    if (quota == 0) continue;
    std::vector<SpaceTimePoint> pts;
    pts.reserve(picked.size() * time_steps.size());
    for (Index n : time_steps)
      for (Index k : picked) pts.push_back({k, n});
    const Vector eps = gappy_error_field(residual_basis, pts, i - 1);
    for (Index j = 0; j < quota; ++j) {
      Index best = -1;
      double best_score = -1.0;
      for (Index k = 0; k < ns; ++k) {
        if (taken[std::size_t(k)]) continue;
        double score = 0.0;
        for (Index n = 1; n <= nt; ++n) {
          const double e = eps(vec_index(k, n, ns));
          score += e * e;
        }
        if (score > best_score) {
          best_score = score;
          best = k;
        }
      }
      taken[std::size_t(best)] = 1;
      picked.push_back(best);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::vector<Index> greedy_rows(const Matrix& basis, Index target) {
  const Index n_rows = basis.rows();
  const Index n_r = basis.cols();
  require(n_r >= 1, "residual basis has no columns");
  require(target >= 1 && target <= n_rows,
          "requested more rows than available");

  std::vector<Index> picked;
  picked.reserve(static_cast<std::size_t>(target));
  std::vector<char> taken(static_cast<std::size_t>(n_rows), 0);
  for (Index i = 1; i <= n_r; ++i) {
    const Index quota = greedy_quota(target, n_r, i);
    if (quota == 0) continue;
    Vector eps;
    if (i == 1 || picked.empty()) {
      eps = basis.col(i - 1);
    } else {
      Matrix sampled(static_cast<Index>(picked.size()), i);
      for (std::size_t q = 0; q < picked.size(); ++q)
        sampled.row(static_cast<Index>(q)) = basis.row(picked[q]).head(i);
      const Vector fit =
          min_norm_solve(sampled.leftCols(i - 1), sampled.col(i - 1));
      eps = basis.col(i - 1) - basis.leftCols(i - 1) * fit;
    }
    for (Index j = 0; j < quota; ++j) {
      Index best = -1;
      double best_score = -1.0;
      for (Index k = 0; k < n_rows; ++k) {
        if (taken[std::size_t(k)]) continue;
        const double score = std::abs(eps(k));
        if (score > best_score) {
          best_score = score;
          best = k;
        }
      }
      taken[std::size_t(best)] = 1;
      picked.push_back(best);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

Vector gappy_coefficients(const Matrix& sampled_basis,
                          const Vector& sampled_values) {
  require(sampled_values.size() == sampled_basis.rows(),
          "sampled value count does not match the sampled basis");
  require(sampled_basis.rows() >= sampled_basis.cols(),
          "need at least as many samples as basis vectors");
  Eigen::ColPivHouseholderQR<Matrix> qr(sampled_basis);
  require(qr.rank() == sampled_basis.cols(),
          "sampled residual basis is rank deficient");
  return qr.solve(sampled_values);
}

Vector gappy_reconstruct(const Matrix& basis, const std::vector<Index>& rows,
                         const Vector& sampled_values) {
  require(!rows.empty(), "sample rows cannot be empty");
  Matrix sampled(static_cast<Index>(rows.size()), basis.cols());
  for (std::size_t q = 0; q < rows.size(); ++q) {
    require(rows[q] >= 0 && rows[q] < basis.rows(), "sample row out of range");
    sampled.row(static_cast<Index>(q)) = basis.row(rows[q]);
  }
  return basis * gappy_coefficients(sampled, sampled_values);
}

Vector gappy_reconstruct(const SpaceTimeBasis& basis, const SampleSet& samples,
                         const Vector& sampled_values) {
  require(!samples.empty(), "sample set cannot be empty");
  const Matrix sampled = basis.rows_at(samples.points());
  return st_field(basis, gappy_coefficients(sampled, sampled_values));
}

}  // namespace stlspg
