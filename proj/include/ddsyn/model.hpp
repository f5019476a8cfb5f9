// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ddsyn/linalg.hpp"

#include <array>
#include <cstdint>
#include <optional>

namespace ddsyn {

/// Continuous-time plant  xdot = A x + B u + E d,  z = H x.
struct LtiSystem {
  Matrix A;  // n x n
  Matrix B;  // n x m
  Matrix E;  // n x l
  Matrix H;  // p x n

  LtiSystem(Matrix a, Matrix b, Matrix e, Matrix h);

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(H.rows()); }
  int l() const { return static_cast<int>(E.cols()); }
};

/// State-feedback gain u = F x, optionally carrying the certificates
/// (X, P, alpha) that a synthesis run produced alongside it.
struct Controller {
  Matrix F;  // m x n
  std::optional<Matrix> X;
  std::optional<Matrix> P;
  std::optional<double> alpha;

  explicit Controller(Matrix f) : F(std::move(f)) { linalg::require_finite(F, "F"); }
};

/// Parameters of the four-bus network (bus 4 is the grounded infinite bus).
struct PowerGridParams {
  std::array<double, 3> inertia{10.0, 10.0, 10.0};
  std::array<double, 3> damping{10.0, 10.0, 10.0};
  double b12 = 0.386;
  double b23 = 0.294;
  double b34 = 0.596;
  double b41 = 0.474;

  static PowerGridParams nominal() { return {}; }
  void validate() const;
};

/// A + B F.
Matrix closed_loop(const LtiSystem& sys, const Matrix& f);
inline Matrix closed_loop(const LtiSystem& sys, const Controller& ctrl) {
  return closed_loop(sys, ctrl.F);
}

/// Six-state swing-dynamics model: states (theta_1..3, thetadot_1..3),
/// disturbance on the third generator's acceleration, outputs the phase
/// angles of buses 1 and 2.
LtiSystem build_power_grid(const PowerGridParams& params);

/// Grounded line-susceptance Laplacian of the four-bus network.
Matrix power_grid_laplacian(const PowerGridParams& params);

/// Perturbs inertia and damping with unit-variance Gaussian noise.  Draws at
/// or below 0.1 are resampled to keep the parameters physical.
PowerGridParams randomize_grid(const PowerGridParams& params, std::uint64_t seed);

}  // namespace ddsyn
