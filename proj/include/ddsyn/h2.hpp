// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "ddsyn/conic.hpp"
#include "ddsyn/model.hpp"

namespace ddsyn::h2 {

struct H2Report {
  double h2_sq = 0.0;
  Matrix gramian;  // empty when the closed loop is not Hurwitz
  bool hurwitz = false;
};

// Squared H2 norm of the w -> z channel of A+BF. Hurwitz loops use the
// observability Gramian; otherwise a truncated time-domain integral is
// reported as a diagnostic (finite for DD loops even without stability).
H2Report h2_norm_sq(const LtiSystem& sys, const Matrix& f, const Tolerance& tol = {},
                    double diag_horizon = 50.0, double diag_dt = 1e-3);

// Trapezoid integral of ||H exp(A_F t) E||_F^2 on [0, T].
double time_domain_h2_sq(const LtiSystem& sys, const Matrix& f, double horizon, double dt);

std::vector<Matrix> impulse_response(const LtiSystem& sys, const Matrix& f,
                                     const std::vector<double>& tgrid);

struct H2SdpOptions {
  double eps = 1e-4;
  double delta = 1e-6;
  conic::SolverOptions solver;
};

conic::ConicProgram build_h2_sdp(const LtiSystem& sys, double eps = 1e-4, double delta = 1e-6);

struct H2SdpResult {
  conic::ConicSolution solution;
  std::optional<Controller> controller;  // present when solution is Optimal
  bool ill_conditioned_p = false;
  double objective = 0.0;  // Tr(W) at the optimum: the squared-H2 upper bound
};

H2SdpResult solve_h2_sdp(const LtiSystem& sys, const H2SdpOptions& options = {});

// F = N P^{-1}; flags (without failing) a condition number above 1e12.
Controller extract_h2_controller(const conic::ConicSolution& sol,
                                 bool* ill_conditioned = nullptr, double delta = 1e-6);

}  // namespace ddsyn::h2
