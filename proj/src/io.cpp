// SPDX-License-Identifier: Apache-2.0
#include "stlspg/io.hpp"

#include <cstring>
#include <fstream>
#include <iostream>

namespace stlspg {

void warn(const std::string& msg) { std::cerr << "[warn] " << msg << "\n"; }

namespace {

constexpr char kMagic[8] = {'S', 'T', 'L', 'S', 'P', 'G', '0', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

double get_f64(std::istream& is) {
  double v = 0.0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void write_matrix(const std::string& path, const Matrix& data,
                  const Vector& mu, double dt) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "cannot open for writing: " + path);
  os.write(kMagic, sizeof kMagic);
  put_u64(os, static_cast<std::uint64_t>(data.rows()));
  put_u64(os, static_cast<std::uint64_t>(data.cols()));
  put_u64(os, static_cast<std::uint64_t>(mu.size()));
  for (Index i = 0; i < mu.size(); ++i) put_f64(os, mu(i));
  put_f64(os, dt);
  os.write(reinterpret_cast<const char*>(data.data()),
           static_cast<std::streamsize>(sizeof(double)) * data.size());
  require(os.good(), "write failed: " + path);
}

StoredMatrix read_matrix(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "cannot open for reading: " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  require(is.good() && std::memcmp(magic, kMagic, sizeof kMagic) == 0,
          "not a recognized array container: " + path);
  StoredMatrix out;
  const auto rows = static_cast<Index>(get_u64(is));
  const auto cols = static_cast<Index>(get_u64(is));
  const auto pdim = static_cast<Index>(get_u64(is));
  require(rows >= 0 && cols >= 0 && pdim >= 0 && is.good(),
          "corrupt header: " + path);
  out.mu.resize(pdim);
  for (Index i = 0; i < pdim; ++i) out.mu(i) = get_f64(is);
  out.dt = get_f64(is);
  out.data.resize(rows, cols);
  is.read(reinterpret_cast<char*>(out.data.data()),
          static_cast<std::streamsize>(sizeof(double)) * out.data.size());
  require(is.good(), "truncated payload: " + path);
  return out;
}

void write_trajectory(const std::string& path, const Trajectory& traj) {
  write_matrix(path, traj.states, traj.mu, traj.dt);
}

Trajectory read_trajectory(const std::string& path) {
  StoredMatrix stored = read_matrix(path);
  require(stored.dt > 0.0, "stored array has no time-step tag: " + path);
  Trajectory traj;
  traj.states = std::move(stored.data);
  traj.mu = std::move(stored.mu);
  traj.dt = stored.dt;
  return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  os << "t";
  for (Index i = 0; i < traj.space_dim(); ++i) os << ",w" << i;
  os << "\n";
  os.precision(17);
  for (Index n = 0; n < traj.states.cols(); ++n) {
    os << traj.time_at(n);
    for (Index i = 0; i < traj.space_dim(); ++i) os << "," << traj.states(i, n);
    os << "\n";
  }
  require(os.good(), "write failed: " + path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows) {
  require(static_cast<Index>(header.size()) == rows.cols() || rows.size() == 0,
          "header width does not match column count");
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  for (std::size_t j = 0; j < header.size(); ++j)
    os << (j ? "," : "") << header[j];
  os << "\n";
  os.precision(17);
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) os << (j ? "," : "") << rows(i, j);
    os << "\n";
  }
  require(os.good(), "write failed: " + path);
}

}  // namespace stlspg
