// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ddsyn/model.hpp"

namespace ddsyn::testsupport {

inline Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.gauss();
  return m;
}

inline Matrix orthonormal_columns(Rng& rng, Eigen::Index n, Eigen::Index k) {
  Matrix g = random_matrix(rng, n, k);
  Eigen::HouseholderQR<Matrix> qr(g);
  return Matrix(qr.householderQ()) * Matrix::Identity(n, k);
}

/// Three-state bench system: double integrator with feedback plus a decoupled
/// third state that carries the disturbance straight past the output.
inline LtiSystem example_decoupled() {
  Matrix a(3, 3), b(3, 1), e(3, 1), h(1, 3);
  a << 0, 1, 0, -1, -1, 0, 1, 0, 1;
  b << 0, 1, 0;
  e << 0, 0, 1;
  h << 1, 0, 0;
  return LtiSystem(a, b, e, h);
}

/// Same bench with the third column swapped so the disturbance state couples
/// into the output channel unless the feedback restores invariance.
inline LtiSystem example_coupled() {
  Matrix a(3, 3), b(3, 1), e(3, 1), h(1, 3);
  a << 0, 1, 0, -1, -1, 1, 1, 0, -1;
  b << 0, 1, 0;
  e << 0, 0, 1;
  h << 1, 0, 0;
  return LtiSystem(a, b, e, h);
}

struct Planted {
  LtiSystem sys;
  Matrix v_basis;  // n x k orthonormal, the planted invariant subspace
  Matrix f_plant;  // m x n gain witnessing controlled invariance
  Matrix x_plant;  // k x k restriction: (A + B f_plant) V = V x_plant
};

/// Builds a system whose disturbance channel can provably be decoupled: pick
/// an orthonormal V, put im E inside it and ker H around it, then choose A so
/// that (A + B F) V = V X for a planted (F, X).  The whole closed loop is
/// shifted so its spectral abscissa stays mild; otherwise roundoff in e^{At}
/// grows fast enough to reopen the channel numerically.
inline Planted plant_dd_system(Rng& rng, int n, int m, int k, int l, int p, bool hurwitz,
                               bool zero_f) {
  Matrix v = orthonormal_columns(rng, n, k);
  Matrix e = v * random_matrix(rng, k, l);

  Matrix proj_out = Matrix::Identity(n, n) - v * v.transpose();
  Matrix h(p, n);
  for (int i = 0; i < p; ++i) {
    Vector row;
    do {
      row = (random_matrix(rng, 1, n) * proj_out).transpose();
    } while (row.norm() < 0.3);
    h.row(i) = row.transpose() / row.norm();
  }

  Matrix b = random_matrix(rng, n, m);
  Matrix f = zero_f ? Matrix::Zero(m, n) : Matrix(0.3 * random_matrix(rng, m, n));
  Matrix x = random_matrix(rng, k, k);
  Matrix a0 = 0.5 * random_matrix(rng, n, n);
  Matrix a = (v * x - b * f * v) * v.transpose() + a0 * proj_out;

  // Posterior shift: A -> A - cI keeps V invariant and moves X by the same
  // shift, so the decoupling witness survives exactly.
  double sa = linalg::spectral_abscissa(a + b * f);
  double target = hurwitz ? -0.7 : 0.3;
  if (sa > target) {
    a -= (sa - target) * Matrix::Identity(n, n);
    x -= (sa - target) * Matrix::Identity(k, k);
  }
  return Planted{LtiSystem(a, b, e, h), v, f, x};
}

/// Independent channel oracle: orthonormal basis of the reachable subspace
/// <A_F | im E> from the raw Krylov blocks (rank-revealing QR only, none of
/// the library's geometry code), then the largest output leakage |H q|.
inline double reachable_output_leak(const Matrix& acl, const Matrix& e, const Matrix& h) {
  const Eigen::Index n = acl.rows();
  Matrix krylov(n, n * e.cols());
  Matrix block = e;
  for (Eigen::Index j = 0; j < n; ++j) {
    double scale = block.cwiseAbs().maxCoeff();
    if (scale > 0) block /= scale;  // spans only, keep powers from overflowing
    krylov.middleCols(j * e.cols(), e.cols()) = block;
    block = acl * block;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(krylov);
  qr.setThreshold(1e-10);
  Eigen::Index rank = qr.rank();
  if (rank == 0) return 0.0;
  Matrix q = Matrix(qr.householderQ()) * Matrix::Identity(n, rank);
  return (h * q).cwiseAbs().maxCoeff();
}

/// Random stable closed loop (open loop already Hurwitz, F = 0).
inline LtiSystem random_hurwitz_system(Rng& rng, int n, int l, int p) {
  Matrix a = 0.5 * random_matrix(rng, n, n);
  double sa = linalg::spectral_abscissa(a);
  double margin = 0.5 + 2.5 * rng.uniform();
  a -= (sa + margin) * Matrix::Identity(n, n);
  Matrix b = Matrix::Zero(n, 1);
  Matrix e = random_matrix(rng, n, l);
  Matrix h = random_matrix(rng, p, n);
  return LtiSystem(a, b, e, h);
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0;; ++i) {
      auto candidate = base / ("ddsyn_test_" + tag + "_" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        break;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace ddsyn::testsupport
