// SPDX-License-Identifier: Apache-2.0
#include "stlspg/tensor_decomp.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <utility>

namespace stlspg {

Matrix StateTensor::unfold_mode1() const {
  const Index rows = num_space();
  const Index nt = num_steps();
  Matrix out(rows, nt * num_instances());
  for (Index k = 0; k < num_instances(); ++k)
    out.middleCols(k * nt, nt) = slabs[static_cast<std::size_t>(k)];
  return out;
}

Matrix StateTensor::unfold_mode2() const {
  const Index rows = num_space();
  const Index nt = num_steps();
  Matrix out(nt, rows * num_instances());
  for (Index k = 0; k < num_instances(); ++k)
    out.middleCols(k * rows, rows) =
        slabs[static_cast<std::size_t>(k)].transpose();
  return out;
}

StateTensor build_state_tensor(const std::vector<Trajectory>& trajectories) {
  require(!trajectories.empty(), "need at least one trajectory");
  const Index ns = trajectories.front().space_dim();
  const Index nt = trajectories.front().num_steps();
  StateTensor tensor;
  tensor.slabs.reserve(trajectories.size());
  tensor.parameters.reserve(trajectories.size());
  for (const Trajectory& traj : trajectories) {
    require(traj.space_dim() == ns && traj.num_steps() == nt,
            "trajectories disagree on dimensions");
    Matrix slab = traj.states.rightCols(nt);
    slab.colwise() -= traj.states.col(0);
    tensor.slabs.push_back(std::move(slab));
    tensor.parameters.push_back(traj.mu);
  }
  return tensor;
}

TruncatedSvd truncated_svd(const Matrix& A, Index rank) {
  require(rank >= 1 && rank <= std::min(A.rows(), A.cols()),
          "rank must lie in [1, min(rows, cols)]");
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.sigma = svd.singularValues();
  out.U = svd.matrixU().leftCols(rank);
  out.V = svd.matrixV().leftCols(rank);
  // Sign convention: largest-magnitude entry of each left vector positive.
  for (Index j = 0; j < rank; ++j) {
    Index at = 0;
    out.U.col(j).cwiseAbs().maxCoeff(&at);
    if (out.U(at, j) < 0.0) {
      out.U.col(j) = -out.U.col(j);
      out.V.col(j) = -out.V.col(j);
    }
  }
  return out;
}

Index energy_rank(const Vector& sigma, double eta) {
  require(eta > 0.0 && eta <= 1.0, "energy fraction must lie in (0, 1]");
  const double total = sigma.squaredNorm();
  if (total == 0.0) return 1;
  double partial = 0.0;
  for (Index r = 0; r < sigma.size(); ++r) {
    partial += sigma(r) * sigma(r);
    if (partial >= eta * total) return r + 1;
  }
  return sigma.size();
}

namespace {

// POD with an attainable-rank check (tiny trailing singular values mean the
// requested basis size exceeds the data rank).
Matrix pod_basis(const Matrix& snapshots, Index rank,
                 const std::string& what) {
  require(rank >= 1 && rank <= std::min(snapshots.rows(), snapshots.cols()),
          what + ": rank must lie in [1, min(rows, cols)]");
  TruncatedSvd svd = truncated_svd(snapshots, rank);
  const double tol =
      1e-12 * std::max(1.0, svd.sigma.size() ? svd.sigma(0) : 0.0);
  Index attainable = 0;
  while (attainable < svd.sigma.size() && svd.sigma(attainable) > tol)
    ++attainable;
  require(rank <= attainable,
          what + ": requested " + std::to_string(rank) +
              " modes but data rank is " + std::to_string(attainable));
  return svd.U;
}

}  // namespace

Matrix spatial_pod(const StateTensor& tensor, Index n_s) {
  return pod_basis(tensor.unfold_mode1(), n_s, "spatial basis");
}

Matrix temporal_basis_thosvd(const StateTensor& tensor, Index n_t) {
  return pod_basis(tensor.unfold_mode2(), n_t, "temporal basis");
}

Matrix temporal_basis_sthosvd(const StateTensor& tensor, const Matrix& spatial,
                              Index n_t) {
  require(spatial.rows() == tensor.num_space(),
          "spatial basis does not match tensor");
  StateTensor contracted;
  contracted.slabs.reserve(tensor.slabs.size());
  for (const Matrix& slab : tensor.slabs)
    contracted.slabs.push_back(spatial.transpose() * slab);
  return pod_basis(contracted.unfold_mode2(), n_t, "temporal basis");
}

std::vector<Matrix> temporal_basis_tailored(const StateTensor& tensor,
                                            const Matrix& spatial,
                                            Index n_t_per_mode) {
  require(spatial.rows() == tensor.num_space(),
          "spatial basis does not match tensor");
  require(n_t_per_mode >= 1 && n_t_per_mode <= tensor.num_instances(),
          "per-mode temporal count is limited by the number of instances");
  std::vector<Matrix> families;
  families.reserve(static_cast<std::size_t>(spatial.cols()));
  Matrix contraction(tensor.num_steps(), tensor.num_instances());
  for (Index i = 0; i < spatial.cols(); ++i) {
    for (Index k = 0; k < tensor.num_instances(); ++k)
      contraction.col(k) =
          tensor.slabs[static_cast<std::size_t>(k)].transpose() *
          spatial.col(i);
    families.push_back(pod_basis(contraction, n_t_per_mode,
                                 "temporal family " + std::to_string(i)));
  }
  return families;
}

SpaceTimeBasis::SpaceTimeBasis(Matrix spatial, std::vector<Matrix> temporal)
    : spatial_(std::move(spatial)), temporal_(std::move(temporal)) {
  require(static_cast<Index>(temporal_.size()) == spatial_.cols(),
          "need one temporal family per spatial mode");
  require(!temporal_.empty(), "basis cannot be empty");
  offsets_.resize(temporal_.size() + 1);
  offsets_[0] = 0;
  for (std::size_t i = 0; i < temporal_.size(); ++i) {
    require(temporal_[i].rows() == temporal_.front().rows(),
            "temporal families disagree on the number of steps");
    require(temporal_[i].cols() >= 1, "empty temporal family");
    offsets_[i + 1] = offsets_[i] + temporal_[i].cols();
  }
  total_dim_ = offsets_.back();
}

Index SpaceTimeBasis::temporal_dim(Index i) const {
  require(i >= 0 && i < num_spatial_modes(), "spatial mode out of range");
  return temporal_[static_cast<std::size_t>(i)].cols();
}

Index SpaceTimeBasis::flat_index(Index i, Index j) const {
  require(i >= 0 && i < num_spatial_modes() && j >= 0 && j < temporal_dim(i),
          "basis mode index out of range");
  return offsets_[static_cast<std::size_t>(i)] + j;
}

std::pair<Index, Index> SpaceTimeBasis::mode_of(Index flat) const {
  require(flat >= 0 && flat < total_dim_, "flat index out of range");
  const auto it =
      std::upper_bound(offsets_.begin(), offsets_.end(), flat) - 1;
  const Index i = static_cast<Index>(it - offsets_.begin());
  return {i, flat - *it};
}

const Matrix& SpaceTimeBasis::temporal(Index i) const {
  require(i >= 0 && i < num_spatial_modes(), "spatial mode out of range");
  return temporal_[static_cast<std::size_t>(i)];
}

double SpaceTimeBasis::psi(Index i, Index j, Index n) const {
  require(n >= 0 && n <= num_steps(), "time step out of range");
  if (n == 0) return 0.0;
  require(i >= 0 && i < num_spatial_modes() && j >= 0 && j < temporal_dim(i),
          "basis mode index out of range");
  return temporal_[static_cast<std::size_t>(i)](n - 1, j);
}

Vector SpaceTimeBasis::temporal_coefficients(Index n,
                                             const Vector& yhat) const {
  require(yhat.size() == total_dim_, "coordinate length mismatch");
  require(n >= 0 && n <= num_steps(), "time step out of range");
  Vector c = Vector::Zero(num_spatial_modes());
  if (n == 0) return c;
  for (Index i = 0; i < num_spatial_modes(); ++i) {
    const Matrix& fam = temporal_[static_cast<std::size_t>(i)];
    c(i) = fam.row(n - 1).dot(
        yhat.segment(offsets_[static_cast<std::size_t>(i)], fam.cols()));
  }
  return c;
}

Vector SpaceTimeBasis::evaluate_at(Index n, const Vector& yhat) const {
  return spatial_ * temporal_coefficients(n, yhat);
}

Matrix SpaceTimeBasis::time_slice(Index n) const {
  require(n >= 0 && n <= num_steps(), "time step out of range");
  Matrix out(num_space(), total_dim_);
  if (n == 0) {
    out.setZero();
    return out;
  }
  for (Index i = 0; i < num_spatial_modes(); ++i) {
    const Matrix& fam = temporal_[static_cast<std::size_t>(i)];
    out.middleCols(offsets_[static_cast<std::size_t>(i)], fam.cols()) =
        spatial_.col(i) * fam.row(n - 1);
  }
  return out;
}

Matrix SpaceTimeBasis::materialize() const {
  Matrix out(num_space() * num_steps(), total_dim_);
  for (Index n = 1; n <= num_steps(); ++n)
    out.middleRows(vec_index(0, n, num_space()), num_space()) = time_slice(n);
  return out;
}

Matrix SpaceTimeBasis::rows_at(const std::vector<SpaceTimePoint>& points) const {
  Matrix out(static_cast<Index>(points.size()), total_dim_);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const SpaceTimePoint pt = points[q];
    require(pt.k >= 0 && pt.k < num_space() && pt.n >= 1 && pt.n <= num_steps(),
            "sample point out of range");
    for (Index i = 0; i < num_spatial_modes(); ++i) {
      const Matrix& fam = temporal_[static_cast<std::size_t>(i)];
      out.block(static_cast<Index>(q), offsets_[static_cast<std::size_t>(i)],
                1, fam.cols()) = spatial_(pt.k, i) * fam.row(pt.n - 1);
    }
  }
  return out;
}

SpaceTimeBasis assemble_st_basis(Matrix spatial,
                                 std::vector<Matrix> temporal) {
  return SpaceTimeBasis(std::move(spatial), std::move(temporal));
}

SpaceTimeBasis assemble_st_basis(Matrix spatial, const Matrix& shared_temporal) {
  std::vector<Matrix> temporal(static_cast<std::size_t>(spatial.cols()),
                               shared_temporal);
  return SpaceTimeBasis(std::move(spatial), std::move(temporal));
}

}  // namespace stlspg
