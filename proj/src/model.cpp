// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/model.hpp"

namespace ddsyn {

LtiSystem::LtiSystem(Matrix a, Matrix b, Matrix e, Matrix h)
    : A(std::move(a)), B(std::move(b)), E(std::move(e)), H(std::move(h)) {
  if (A.rows() != A.cols()) {
    throw Error(Error::Code::DimensionMismatch, "LtiSystem: A must be square");
  }
  const auto n = A.rows();
  if (B.rows() != n || E.rows() != n || H.cols() != n) {
    throw Error(Error::Code::DimensionMismatch, "LtiSystem: B, E need n rows and H needs n cols");
  }
  linalg::require_finite(A, "A");
  linalg::require_finite(B, "B");
  linalg::require_finite(E, "E");
  linalg::require_finite(H, "H");
}

void PowerGridParams::validate() const {
  for (double v : inertia) {
    if (!(v > 0.0)) throw Error(Error::Code::InvalidArgument, "PowerGridParams: inertia must be positive");
  }
  for (double v : damping) {
    if (!(v > 0.0)) throw Error(Error::Code::InvalidArgument, "PowerGridParams: damping must be positive");
  }
  if (!(b12 > 0.0) || !(b23 > 0.0) || !(b34 > 0.0) || !(b41 > 0.0)) {
    throw Error(Error::Code::InvalidArgument, "PowerGridParams: susceptances must be positive");
  }
}

Matrix closed_loop(const LtiSystem& sys, const Matrix& f) {
  if (f.rows() != sys.m() || f.cols() != sys.n()) {
    throw Error(Error::Code::DimensionMismatch, "closed_loop: F must be m x n");
  }
  return sys.A + sys.B * f;
}

Matrix power_grid_laplacian(const PowerGridParams& params) {
  params.validate();
  Matrix l = Matrix::Zero(3, 3);
  // Lines (1,2) and (2,3) couple interior buses; (3,4) and (4,1) run to the
  // grounded infinite bus and contribute only to the diagonal.
  l(0, 0) = params.b12 + params.b41;
  l(1, 1) = params.b12 + params.b23;
  l(2, 2) = params.b23 + params.b34;
  l(0, 1) = l(1, 0) = -params.b12;
  l(1, 2) = l(2, 1) = -params.b23;
  return l;
}

LtiSystem build_power_grid(const PowerGridParams& params) {
  const Matrix l = power_grid_laplacian(params);
  Matrix m_inv = Matrix::Zero(3, 3);
  Matrix d = Matrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i) {
    m_inv(i, i) = 1.0 / params.inertia[static_cast<size_t>(i)];
    d(i, i) = params.damping[static_cast<size_t>(i)];
  }

  Matrix a = Matrix::Zero(6, 6);
  a.block(0, 3, 3, 3) = Matrix::Identity(3, 3);
  a.block(3, 0, 3, 3) = -m_inv * l;
  a.block(3, 3, 3, 3) = -m_inv * d;

  Matrix b = Matrix::Zero(6, 3);
  b.block(3, 0, 3, 3) = m_inv;

  Matrix e = Matrix::Zero(6, 1);
  e(5, 0) = 1.0;

  Matrix h = Matrix::Zero(2, 6);
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;

  return LtiSystem(a, b, e, h);
}

PowerGridParams randomize_grid(const PowerGridParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  PowerGridParams out = params;
  auto draw = [&rng](double mean) {
    double v = rng.gauss(mean, 1.0);
    while (v <= 0.1) v = rng.gauss(mean, 1.0);
    return v;
  };
  for (auto& v : out.inertia) v = draw(v);
  for (auto& v : out.damping) v = draw(v);
  return out;
}

}  // namespace ddsyn
