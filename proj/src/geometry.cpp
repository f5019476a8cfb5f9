// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/geometry.hpp"

namespace ddsyn::geometry {

namespace {

// Intersection of two subspaces given by orthonormal bases: x lies in both
// spans iff both complement projectors annihilate it.
Matrix intersect(const Matrix& u, const Matrix& w, const Tolerance& tol) {
  const auto n = u.rows();
  Matrix stacked(2 * n, n);
  stacked.topRows(n) = Matrix::Identity(n, n) - u * u.transpose();
  stacked.bottomRows(n) = Matrix::Identity(n, n) - w * w.transpose();
  return linalg::kernel_basis(stacked, tol);
}

// Preimage A^{-1}(im S) as the kernel of (I - S S^T) A.
Matrix preimage(const Matrix& a, const Matrix& s, const Tolerance& tol) {
  const auto n = a.rows();
  Matrix proj_complement = Matrix::Identity(n, n) - s * s.transpose();
  return linalg::kernel_basis(proj_complement * a, tol);
}

}  // namespace

Subspace::Subspace(Matrix b, const Tolerance& tol) : basis(std::move(b)), dim(basis.cols()) {
  tol.validate();
  linalg::require_finite(basis, "subspace basis");
  if (dim > basis.rows()) {
    throw Error(Error::Code::InvalidArgument, "Subspace: more columns than ambient dimension");
  }
  if (dim > 0) {
    Matrix gram = basis.transpose() * basis;
    double err = (gram - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
    if (err > tol.residual_tol) {
      throw Error(Error::Code::InvalidArgument, "Subspace: basis columns are not orthonormal");
    }
  }
}

Subspace span_of(const Matrix& columns, const Tolerance& tol) {
  Matrix basis = linalg::image_basis(columns, tol);
  return Subspace(std::move(basis), tol);
}

Subspace largest_ci_subspace(const LtiSystem& sys, const Tolerance& tol) {
  tol.validate();
  const auto n = sys.n();
  Matrix ker_h = linalg::kernel_basis(sys.H, tol);
  Matrix w = ker_h;
  for (Eigen::Index iter = 0; iter <= n; ++iter) {
    if (w.cols() == 0) break;
    Matrix wb(n, w.cols() + sys.m());
    wb.leftCols(w.cols()) = w;
    wb.rightCols(sys.m()) = sys.B;
    Matrix s = linalg::image_basis(wb, tol);
    Matrix pre = preimage(sys.A, s, tol);
    Matrix next = intersect(ker_h, pre, tol);
    if (next.cols() == w.cols()) break;
    w = next;
  }
  return Subspace(std::move(w), tol);
}

bool dd_feasible(const LtiSystem& sys, const Subspace& v, const Tolerance& tol) {
  tol.validate();
  if (v.ambient_dim() != sys.n()) {
    throw Error(Error::Code::DimensionMismatch, "dd_feasible: V lives in the wrong space");
  }
  if (v.dim == 0) {
    return sys.E.cwiseAbs().maxCoeff() <= tol.residual_tol;
  }
  Matrix proj_err = sys.E - v.basis * (v.basis.transpose() * sys.E);
  if (proj_err.cwiseAbs().maxCoeff() > tol.residual_tol) return false;
  Matrix hv = sys.H * v.basis;
  return hv.cwiseAbs().maxCoeff() <= tol.residual_tol;
}

Vector DdParameterization::assemble(const Vector& theta) const {
  if (theta.size() != nullspace.cols()) {
    throw Error(Error::Code::DimensionMismatch, "DdParameterization: theta has wrong length");
  }
  return particular + nullspace * theta;
}

DdParameterization assemble_dd_system(const LtiSystem& sys, const Subspace& v,
                                      const Tolerance& tol) {
  tol.validate();
  if (v.dim == 0) {
    throw Error(Error::Code::InvalidArgument, "assemble_dd_system: V must be nonzero");
  }
  if (v.ambient_dim() != sys.n()) {
    throw Error(Error::Code::DimensionMismatch, "assemble_dd_system: V lives in the wrong space");
  }
  const auto n = sys.n();
  const auto m = sys.m();
  const auto k = v.dim;

  Matrix c(n * k, k * k + m * n);
  c.leftCols(k * k) = linalg::kron(Matrix::Identity(k, k), v.basis);
  c.rightCols(m * n) = linalg::kron(v.basis.transpose(), Matrix(-sys.B));
  Vector b = linalg::vec(sys.A * v.basis);

  Matrix augmented(c.rows(), c.cols() + 1);
  augmented.leftCols(c.cols()) = c;
  augmented.col(c.cols()) = b;
  auto reduced = linalg::rre(augmented, tol);
  for (int piv : reduced.pivot_columns) {
    if (piv == static_cast<int>(c.cols())) {
      throw Error(Error::Code::Infeasible, "assemble_dd_system: DD equation has no solution");
    }
  }

  DdParameterization param;
  param.k = k;
  param.m = m;
  param.n = n;
  param.constraint_matrix = reduced.r.leftCols(c.cols());
  param.rhs = reduced.r.col(c.cols());
  param.particular = linalg::lstsq(param.constraint_matrix, param.rhs, tol);
  param.nullspace = linalg::kernel_basis(param.constraint_matrix, tol);
  return param;
}

DdSolution unpack_dd_solution(const LtiSystem& sys, const Subspace& v, const Vector& y) {
  const auto k = v.dim;
  const auto m = sys.m();
  const auto n = sys.n();
  if (y.size() != k * k + m * n) {
    throw Error(Error::Code::DimensionMismatch, "unpack_dd_solution: bad vector length");
  }
  DdSolution sol;
  sol.X = linalg::unvec(y.head(k * k), k, k);
  sol.F = linalg::unvec(y.tail(m * n), m, n);
  sol.residual = (v.basis * sol.X - sys.B * sol.F * v.basis - sys.A * v.basis).norm();
  return sol;
}

Matrix dd_minimizing_x(const LtiSystem& sys, const Subspace& v, const Matrix& f) {
  if (v.dim == 0) return Matrix::Zero(0, 0);
  Matrix af_v = closed_loop(sys, f) * v.basis;
  return v.basis.transpose() * af_v;
}

double dd_residual(const LtiSystem& sys, const Subspace& v, const Matrix& f) {
  if (v.dim == 0) return 0.0;
  Matrix af_v = closed_loop(sys, f) * v.basis;
  Matrix resid = af_v - v.basis * (v.basis.transpose() * af_v);
  return linalg::spectral_norm(resid);
}

RcqReport check_rcq(const LtiSystem& sys, const Subspace& v, const Tolerance& tol) {
  tol.validate();
  RcqReport report;
  report.v_full_column_rank =
      v.dim == 0 || linalg::numerical_rank(v.basis, tol) == v.dim;
  Matrix vb(sys.n(), v.dim + sys.m());
  if (v.dim > 0) vb.leftCols(v.dim) = v.basis;
  vb.rightCols(sys.m()) = sys.B;
  report.v_plus_b_spans = linalg::numerical_rank(vb, tol) == sys.n();
  report.use_rre_fallback = !(report.v_full_column_rank && report.v_plus_b_spans);
  return report;
}

}  // namespace ddsyn::geometry
