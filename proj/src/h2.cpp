// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/h2.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace ddsyn::h2 {

double time_domain_h2_sq(const LtiSystem& sys, const Matrix& f, double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0)) {
    throw Error(Error::Code::InvalidArgument, "time_domain_h2_sq: horizon and dt must be positive");
  }
  Matrix af = closed_loop(sys, f);
  Matrix phi = linalg::expm(af * dt);
  const auto steps = static_cast<long>(std::llround(horizon / dt));
  Matrix y = sys.E;  // exp(A_F t) E
  double prev = (sys.H * y).squaredNorm();
  double integral = 0.0;
  for (long k = 1; k <= steps; ++k) {
    y = phi * y;
    double cur = (sys.H * y).squaredNorm();
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
  }
  return integral;
}

H2Report h2_norm_sq(const LtiSystem& sys, const Matrix& f, const Tolerance& tol,
                    double diag_horizon, double diag_dt) {
  tol.validate();
  Matrix af = closed_loop(sys, f);
  H2Report report;
  report.hurwitz = linalg::spectral_abscissa(af) < -1e-10;
  if (report.hurwitz) {
    report.gramian = linalg::lyapunov_solve(af, sys.H.transpose() * sys.H, tol);
    report.h2_sq = (sys.E.transpose() * report.gramian * sys.E).trace();
  } else {
    report.h2_sq = time_domain_h2_sq(sys, f, diag_horizon, diag_dt);
  }
  return report;
}

std::vector<Matrix> impulse_response(const LtiSystem& sys, const Matrix& f,
                                     const std::vector<double>& tgrid) {
  for (size_t i = 0; i < tgrid.size(); ++i) {
    if (tgrid[i] < 0.0 || (i > 0 && tgrid[i] <= tgrid[i - 1])) {
      throw Error(Error::Code::InvalidArgument, "impulse_response: tgrid must be nonnegative and increasing");
    }
  }
  Matrix af = closed_loop(sys, f);
  std::vector<Matrix> out;
  out.reserve(tgrid.size());
  for (double t : tgrid) {
    out.push_back(sys.H * linalg::expm(af * t) * sys.E);
  }
  return out;
}

conic::ConicProgram build_h2_sdp(const LtiSystem& sys, double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0)) {
    throw Error(Error::Code::InvalidArgument, "build_h2_sdp: eps and delta must be positive");
  }
  const auto n = sys.n();
  const auto m = sys.m();
  const auto p = sys.p();
  const auto l = sys.l();

  conic::VariableLayout layout;
  layout.add_symmetric("G", n);
  layout.add_matrix("N", m, n);
  layout.add_symmetric("P", n);
  layout.add_symmetric("W", l);
  conic::ConicProgram prog(std::move(layout));

  prog.set_objective([&](const Vector& y) { return prog.layout.get_matrix(y, "W").trace(); });

  prog.add_psd_block("lyap", n + p + n, [&, n, p](const Vector& y) {
    Matrix g = prog.layout.get_matrix(y, "G");
    Matrix pm = prog.layout.get_matrix(y, "P");
    Matrix blk = Matrix::Zero(n + p + n, n + p + n);
    blk.block(0, 0, n, n) = g;
    blk.block(0, n, n, p) = pm * sys.H.transpose();
    blk.block(n, 0, p, n) = sys.H * pm;
    blk.block(0, n + p, n, n) = pm;
    blk.block(n + p, 0, n, n) = pm;
    blk.block(n, n, p, p) = Matrix::Identity(p, p);
    blk.block(n + p, n + p, n, n) = (1.0 / eps) * Matrix::Identity(n, n);
    return blk;
  });

  prog.add_psd_block("energy", l + n, [&, n, l](const Vector& y) {
    Matrix w = prog.layout.get_matrix(y, "W");
    Matrix pm = prog.layout.get_matrix(y, "P");
    Matrix blk = Matrix::Zero(l + n, l + n);
    blk.block(0, 0, l, l) = w;
    blk.block(0, l, l, n) = sys.E.transpose();
    blk.block(l, 0, n, l) = sys.E;
    blk.block(l, l, n, n) = pm;
    return blk;
  });

  prog.add_psd_block("p_margin", n, [&, n, delta](const Vector& y) {
    Matrix pm = prog.layout.get_matrix(y, "P");
    return Matrix(pm - delta * Matrix::Identity(n, n));
  });

  // G = -(BN + AP)^T - (BN + AP), imposed on the lower triangle.
  prog.add_equalities(
      [&](const Vector& y) {
        Matrix g = prog.layout.get_matrix(y, "G");
        Matrix nm = prog.layout.get_matrix(y, "N");
        Matrix pm = prog.layout.get_matrix(y, "P");
        Matrix s = sys.B * nm + sys.A * pm;
        return conic::sym_to_vech(g + s.transpose() + s);
      },
      Vector::Zero(conic::vech_size(n)));

  return prog;
}

Controller extract_h2_controller(const conic::ConicSolution& sol, bool* ill_conditioned,
                                 double delta) {
  if (sol.status != conic::SolveStatus::Optimal) {
    throw Error(Error::Code::InvalidArgument, "extract_h2_controller: solution is not optimal");
  }
  auto n_it = sol.values.find("N");
  auto p_it = sol.values.find("P");
  if (n_it == sol.values.end() || p_it == sol.values.end()) {
    throw Error(Error::Code::InvalidArgument, "extract_h2_controller: missing N or P slice");
  }
  const Matrix& nm = n_it->second;
  const Matrix& pm = p_it->second;

  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(pm));
  double lmin = es.eigenvalues().minCoeff();
  double lmax = es.eigenvalues().maxCoeff();
  if (lmin < 0.5 * delta) {
    throw Error(Error::Code::InvalidArgument, "extract_h2_controller: P is not invertible enough");
  }
  if (ill_conditioned) *ill_conditioned = (lmax / lmin) > 1e12;

  Matrix f = pm.transpose().ldlt().solve(nm.transpose()).transpose();
  return Controller(f);
}

H2SdpResult solve_h2_sdp(const LtiSystem& sys, const H2SdpOptions& options) {
  conic::ConicProgram prog = build_h2_sdp(sys, options.eps, options.delta);
  H2SdpResult result;
  result.solution = conic::solve_conic(prog, options.solver);
  result.objective = result.solution.objective;
  if (result.solution.status == conic::SolveStatus::Optimal) {
    result.controller =
        extract_h2_controller(result.solution, &result.ill_conditioned_p, options.delta);
  }
  return result;
}

}  // namespace ddsyn::h2
