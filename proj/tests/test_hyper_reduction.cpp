// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stlspg/hyper_reduction.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace stlspg;

namespace {

Matrix random_matrix(Index rows, Index cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Matrix A(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) A(i, j) = dist(gen);
  return A;
}

Matrix random_orthonormal(Index rows, Index cols, unsigned seed) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rows, rows, seed));
  return Matrix(qr.householderQ()).leftCols(cols);
}

// Parameter-independent linear model f(w) = L w + s.
class LinearModel final : public SemiDiscreteModel {
 public:
  LinearModel(Matrix L, Vector s, Vector w0)
      : L_(std::move(L)), s_(std::move(s)), w0_(std::move(w0)) {}

  Index dim() const override { return L_.rows(); }
  std::string label() const override { return "linear"; }
  Index parameter_dim() const override { return 1; }
  Matrix parameter_domain() const override {
    Matrix box(1, 2);
    box << 0.0, 1.0;
    return box;
  }
  Vector initial_state(const Vector&) const override { return w0_; }
  Vector velocity(const Vector& w, double, const Vector&) const override {
    count_components(static_cast<std::uint64_t>(dim()));
    return L_ * w + s_;
  }
  Matrix velocity_jacobian(const Vector&, double,
                           const Vector&) const override {
    return L_;
  }

 private:
  Matrix L_;
  Vector s_;
  Vector w0_;
};

// Random residual tensor with the requested number of instances.
StateTensor random_residual_tensor(Index ns, Index nt, Index k,
                                   unsigned seed) {
  StateTensor t;
  for (Index i = 0; i < k; ++i)
    t.slabs.push_back(random_matrix(ns, nt, seed + unsigned(i)));
  return t;
}

// Dense replica of the spatiotemporal greedy loop working directly on the
// materialized basis; verifies every pick attains the exhaustive argmax.
std::vector<SpaceTimePoint> dense_spacetime_greedy(const Matrix& Pi, Index ns,
                                                   Index nt, Index target) {
  const Index n_r = Pi.cols();
  std::vector<SpaceTimePoint> sel;
  std::vector<char> taken(static_cast<std::size_t>(ns * nt), 0);
  for (Index i = 1; i <= n_r; ++i) {
    const Index quota = greedy_quota(target, n_r, i);
    if (quota == 0) continue;
    Vector eps;
    if (i == 1 || sel.empty()) {
      eps = Pi.col(0);
    } else {
      Matrix Z(static_cast<Index>(sel.size()), Pi.cols());
      for (std::size_t q = 0; q < sel.size(); ++q)
        Z.row(static_cast<Index>(q)) =
            Pi.row(vec_index(sel[q].k, sel[q].n, ns));
      const Vector fit = Eigen::CompleteOrthogonalDecomposition<Matrix>(
                             Matrix(Z.leftCols(i - 1)))
                             .solve(Vector(Z.col(i - 1)));
      eps = Pi.col(i - 1) - Pi.leftCols(i - 1) * fit;
    }
    for (Index j = 0; j < quota; ++j) {
      Index best = -1;
      double best_score = -1.0;
      for (Index idx = 0; idx < ns * nt; ++idx) {
        if (taken[std::size_t(idx)]) continue;
        if (std::abs(eps(idx)) > best_score) {
          best_score = std::abs(eps(idx));
          best = idx;
        }
      }
      taken[std::size_t(best)] = 1;
      sel.push_back({best % ns, best / ns + 1});
    }
  }
  std::sort(sel.begin(), sel.end());
  return sel;
}

}  // namespace

TEST_CASE("per-iteration quotas split the total exactly") {
  for (Index total : {1, 3, 7, 12, 55, 100})
    for (Index n : {1, 2, 3, 5, 12, 30}) {
      Index sum = 0;
      Index prev = total + 1;
      for (Index i = 1; i <= n; ++i) {
        const Index q = greedy_quota(total, n, i);
        CHECK(q <= prev);
        prev = q;
        sum += q;
      }
      CHECK(sum == total);
    }
  // one sample per iteration when the count equals the basis size
  for (Index i = 1; i <= 7; ++i) CHECK(greedy_quota(7, 7, i) == 1);
  CHECK_THROWS_AS(greedy_quota(5, 0, 1), error);
  CHECK_THROWS_AS(greedy_quota(5, 3, 4), error);
}

TEST_CASE("projection snapshots of a full-rank basis are near zero") {
  const Index cells = 8;
  const Index nt = 5;
  auto model = make_burgers(cells);
  const auto scheme = LinearMultistepScheme::from_name("BE");
  Vector mu(2);
  mu << 1.3, 0.021;
  const double dt = 0.01;
  const Trajectory traj = solve_fom(*model, scheme, mu, dt, nt);

  SpaceTimeBasis trial = assemble_st_basis(
      Matrix(Matrix::Identity(cells, cells)),
      Matrix(Matrix::Identity(nt, nt)));
  Matrix coords(trial.total_dim(), 1);
  coords.col(0) = project_fom_solution(trial, traj);

  ResidualSnapshotOptions opts;
  opts.method = ResidualSnapshotMethod::FomProjection;
  opts.parameters = {mu};
  opts.training_coordinates = coords;
  const StateTensor snaps =
      collect_residual_snapshots(*model, scheme, trial, dt, opts);
  REQUIRE(snaps.num_instances() == 1);
  CHECK(snaps.slabs[0].cwiseAbs().maxCoeff() < 1e-8);
  CHECK(snaps.labels[0].find("fom_projection") == 0);
}

TEST_CASE("training snapshots record one residual per accepted iterate") {
  const Index cells = 10;
  const Index nt = 6;
  auto model = make_burgers(cells);
  const auto scheme = LinearMultistepScheme::from_name("BE");
  const double dt = 0.01;
  std::vector<Vector> params;
  Vector mu(2);
  mu << 1.25, 0.021;
  params.push_back(mu);
  mu << 1.45, 0.024;
  params.push_back(mu);

  // modest reduced basis from the first training run
  const Trajectory traj = solve_fom(*model, scheme, params[0], dt, nt);
  const StateTensor states = build_state_tensor({traj});
  Matrix spatial = spatial_pod(states, 3);
  const Matrix temporal = temporal_basis_sthosvd(states, spatial, 2);
  SpaceTimeBasis trial = assemble_st_basis(std::move(spatial), temporal);

  ResidualSnapshotOptions opts;
  opts.method = ResidualSnapshotMethod::RomTraining;
  opts.parameters = params;
  opts.gauss_newton.max_iters = 10;
  const StateTensor snaps =
      collect_residual_snapshots(*model, scheme, trial, dt, opts);

  // oracle: run the same identity-weighted solves and count iterates
  Index expected = 0;
  for (const Vector& m : params) {
    const StProblem prob{model.get(), &scheme, &trial, m, dt};
    GaussNewtonOptions gn;
    gn.max_iters = 10;
    const StRomSolution sol = st_gauss_newton(
        prob, SpaceTimeWeighting::identity(),
        Vector::Zero(trial.total_dim()), gn);
    expected += sol.iterations + 1;
  }
  CHECK(snaps.num_instances() == expected);
  CHECK(snaps.num_instances() >= 2 * static_cast<Index>(params.size()));
  CHECK(snaps.labels.front().find("rom_training") == 0);
  CHECK(snaps.slabs[0].rows() == cells);
  CHECK(snaps.slabs[0].cols() == nt);
}

TEST_CASE("degenerate random boxes produce identical snapshots") {
  const Index ns = 6;
  const Index nt = 4;
  LinearModel model(0.3 * random_matrix(ns, ns, 7), random_matrix(ns, 1, 8),
                    random_matrix(ns, 1, 9));
  const auto scheme = LinearMultistepScheme::from_name("BE");
  SpaceTimeBasis trial = assemble_st_basis(
      random_orthonormal(ns, 2, 10), Matrix(random_orthonormal(nt, 2, 11)));

  ResidualSnapshotOptions opts;
  opts.method = ResidualSnapshotMethod::RandomSamples;
  opts.num_samples = 5;
  opts.seed = 42;
  Matrix coords(trial.total_dim(), 2);  // width-zero coordinate box
  coords.col(0) = random_matrix(trial.total_dim(), 1, 12);
  coords.col(1) = coords.col(0);
  opts.training_coordinates = coords;
  const StateTensor snaps =
      collect_residual_snapshots(model, scheme, trial, 0.05, opts);
  REQUIRE(snaps.num_instances() == 5);
  for (Index k = 1; k < 5; ++k)
    CHECK((snaps.slabs[std::size_t(k)] - snaps.slabs[0]).norm() == 0.0);

  // determinism: the same seed reproduces the tensor exactly
  const StateTensor again =
      collect_residual_snapshots(model, scheme, trial, 0.05, opts);
  CHECK((again.slabs[0] - snaps.slabs[0]).norm() == 0.0);
}

TEST_CASE("residual bases are orthonormal for every temporal variant") {
  const StateTensor tensor = random_residual_tensor(14, 10, 4, 21);
  for (TemporalVariant v : {TemporalVariant::Thosvd, TemporalVariant::Sthosvd,
                            TemporalVariant::Tailored}) {
    const SpaceTimeBasis basis = residual_basis(tensor, v, 3, 2);
    CHECK(basis.total_dim() == 6);
    const Matrix Pi = basis.materialize();
    CHECK((Pi.transpose() * Pi - Matrix::Identity(6, 6)).norm() < 1e-10);
  }
}

TEST_CASE("a rank-one residual tensor yields its normalized snapshot") {
  const Vector a = random_matrix(9, 1, 31);
  const Vector b = random_matrix(7, 1, 32);
  StateTensor tensor;
  tensor.slabs.push_back(a * b.transpose());
  const SpaceTimeBasis basis =
      residual_basis(tensor, TemporalVariant::Tailored, 1, 1);
  REQUIRE(basis.total_dim() == 1);
  const Matrix Pi = basis.materialize();
  Vector snap(9 * 7);
  for (Index n = 1; n <= 7; ++n)
    snap.segment(vec_index(0, n, 9), 9) = a * b(n - 1);
  const double overlap = std::abs(Pi.col(0).dot(snap)) / snap.norm();
  CHECK(overlap == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("unit-vector residual bases are sampled at their support") {
  const Index ns = 7;
  const Index nt = 5;
  const std::vector<SpaceTimePoint> support = {{2, 1}, {5, 3}, {0, 4}};
  Matrix spatial = Matrix::Zero(ns, 3);
  std::vector<Matrix> temporal;
  for (std::size_t i = 0; i < support.size(); ++i) {
    spatial(support[i].k, static_cast<Index>(i)) = 1.0;
    Matrix fam = Matrix::Zero(nt, 1);
    fam(support[i].n - 1, 0) = 1.0;
    temporal.push_back(fam);
  }
  const SpaceTimeBasis basis =
      assemble_st_basis(std::move(spatial), std::move(temporal));
  const SampleSet picked = greedy_spacetime_samples(basis, 3);
  std::vector<SpaceTimePoint> expected = support;
  std::sort(expected.begin(), expected.end());
  CHECK(picked.points() == expected);
}

TEST_CASE("spatiotemporal greedy matches the dense exhaustive oracle") {
  const Index ns = 12;
  const Index nt = 9;
  std::vector<Matrix> temporal;
  temporal.push_back(random_orthonormal(nt, 2, 41));
  temporal.push_back(random_orthonormal(nt, 2, 42));
  temporal.push_back(random_orthonormal(nt, 2, 43));
  const SpaceTimeBasis basis =
      assemble_st_basis(random_orthonormal(ns, 3, 44), std::move(temporal));
  const Matrix Pi = basis.materialize();

  for (Index target : {3, 6, 10, 17}) {
    const SampleSet picked = greedy_spacetime_samples(basis, target);
    CHECK(picked.points() == dense_spacetime_greedy(Pi, ns, nt, target));
  }
  CHECK_THROWS_AS(greedy_spacetime_samples(basis, ns * nt + 1), error);
}

TEST_CASE("temporal greedy scores full columns through the sampled projector") {
  const Index ns = 10;
  const Index nt = 12;
  const SpaceTimeBasis basis = assemble_st_basis(
      random_orthonormal(ns, 3, 51), Matrix(random_orthonormal(nt, 2, 52)));
  const Matrix Pi = basis.materialize();
  const std::vector<Index> rows = {0, 3, 7, 9};

  const std::vector<Index> picked = greedy_temporal_samples(basis, 5, rows);
  REQUIRE(picked.size() == 5);
  CHECK(std::is_sorted(picked.begin(), picked.end()));

  // dense oracle replaying the same quota/scoring schedule
  const Index n_r = Pi.cols();
  std::vector<Index> sel;
  std::vector<char> taken(static_cast<std::size_t>(nt + 1), 0);
  for (Index i = 1; i <= n_r; ++i) {
    const Index quota = greedy_quota(5, n_r, i);
    if (quota == 0) continue;
    Vector eps;
    if (i == 1 || sel.empty()) {
      eps = Pi.col(0);
    } else {
      Matrix Z(static_cast<Index>(sel.size() * rows.size()), Pi.cols());
      Index q = 0;
      for (Index n : sel)
        for (Index k : rows) Z.row(q++) = Pi.row(vec_index(k, n, ns));
      const Vector fit = Eigen::CompleteOrthogonalDecomposition<Matrix>(
                             Matrix(Z.leftCols(i - 1)))
                             .solve(Vector(Z.col(i - 1)));
      eps = Pi.col(i - 1) - Pi.leftCols(i - 1) * fit;
    }
    for (Index j = 0; j < quota; ++j) {
      Index best = -1;
      double best_score = -1.0;
      for (Index n = 1; n <= nt; ++n) {
        if (taken[std::size_t(n)]) continue;
        const double s = eps.segment(vec_index(0, n, ns), ns).squaredNorm();
        if (s > best_score) {
          best_score = s;
          best = n;
        }
      }
      taken[std::size_t(best)] = 1;
      sel.push_back(best);
    }
  }
  std::sort(sel.begin(), sel.end());
  CHECK(picked == sel);

  // a single basis column concentrated at one step is picked first
  Matrix one_spatial = Matrix::Zero(ns, 1);
  one_spatial(4, 0) = 1.0;
  Matrix one_temporal = Matrix::Zero(nt, 1);
  one_temporal(6, 0) = 1.0;  // step 7
  const SpaceTimeBasis spike =
      assemble_st_basis(std::move(one_spatial), one_temporal);
  CHECK(greedy_temporal_samples(spike, 1, {0, 1, 2}) ==
        std::vector<Index>{7});
}

TEST_CASE("spatial greedy reduces to row greedy for separable bases") {
  const Index ns = 15;
  const Index nt = 8;
  const Matrix spatial = random_orthonormal(ns, 4, 61);
  Matrix psi = random_orthonormal(nt, 1, 62);
  const SpaceTimeBasis basis = assemble_st_basis(Matrix(spatial), psi);

  std::vector<Index> all_times(static_cast<std::size_t>(nt));
  for (Index n = 1; n <= nt; ++n) all_times[std::size_t(n - 1)] = n;

  for (Index target : {2, 4, 9}) {
    const std::vector<Index> st = greedy_spatial_samples(basis, target,
                                                          all_times);
    const std::vector<Index> plain = greedy_rows(spatial, target);
    CHECK(st == plain);
  }

  // dense per-pick argmax verification on the space-time machinery
  const Matrix Pi = basis.materialize();
  const std::vector<Index> picked = greedy_spatial_samples(basis, 3,
                                                            all_times);
  // first pick maximizes the time-summed square of the first column
  Vector score0 = Vector::Zero(ns);
  for (Index k = 0; k < ns; ++k)
    for (Index n = 1; n <= nt; ++n)
      score0(k) += Pi(vec_index(k, n, ns), 0) * Pi(vec_index(k, n, ns), 0);
  Index best0 = -1;
  score0.maxCoeff(&best0);
  CHECK(std::find(picked.begin(), picked.end(), best0) != picked.end());
}

TEST_CASE("gappy reconstruction is exact on the span and least-squares off it") {
  const Index n = 20;
  const Matrix basis = random_orthonormal(n, 5, 71);
  std::mt19937 gen(72);
  std::normal_distribution<double> dist;

  // in-span vectors are reconstructed exactly from any rank-sufficient rows
  Vector coeff(5);
  for (Index i = 0; i < 5; ++i) coeff(i) = dist(gen);
  const Vector truth = basis * coeff;
  const std::vector<Index> rows = {1, 4, 7, 9, 12, 15, 18};
  Vector sampled(static_cast<Index>(rows.size()));
  for (std::size_t q = 0; q < rows.size(); ++q)
    sampled(static_cast<Index>(q)) = truth(rows[q]);
  CHECK((gappy_reconstruct(basis, rows, sampled) - truth).norm() < 1e-10);

  // full sampling returns the orthogonal projection
  Vector noise(n);
  for (Index i = 0; i < n; ++i) noise(i) = dist(gen);
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[std::size_t(i)] = i;
  const Vector proj = basis * (basis.transpose() * noise);
  CHECK((gappy_reconstruct(basis, all, noise) - proj).norm() < 1e-10);

  // partial sampling can only do worse than the orthogonal projection
  Vector part(static_cast<Index>(rows.size()));
  for (std::size_t q = 0; q < rows.size(); ++q)
    part(static_cast<Index>(q)) = noise(rows[q]);
  const Vector rec = gappy_reconstruct(basis, rows, part);
  CHECK((rec - noise).norm() >= (proj - noise).norm() - 1e-12);

  // rank-deficient sampling raises
  Matrix degenerate = basis;
  degenerate.row(2).setZero();
  CHECK_THROWS_AS(
      gappy_reconstruct(degenerate, std::vector<Index>{2, 2, 2, 2, 2},
                        Vector(Vector::Zero(5))),
      error);

  // space-time flavor: exactness on the span through factored evaluation
  const SpaceTimeBasis st_basis = assemble_st_basis(
      random_orthonormal(8, 2, 73), Matrix(random_orthonormal(6, 2, 74)));
  Vector st_coeff(st_basis.total_dim());
  for (Index i = 0; i < st_coeff.size(); ++i) st_coeff(i) = dist(gen);
  const Matrix Pi = st_basis.materialize();
  const Vector st_truth = Pi * st_coeff;
  const SampleSet samples = SampleSet::product_of({0, 2, 5, 7}, {1, 3, 4, 6});
  Vector st_sampled(samples.size());
  for (Index q = 0; q < samples.size(); ++q) {
    const SpaceTimePoint pt = samples.points()[std::size_t(q)];
    st_sampled(q) = st_truth(vec_index(pt.k, pt.n, 8));
  }
  CHECK((gappy_reconstruct(st_basis, samples, st_sampled) - st_truth).norm() <
        1e-10);
}