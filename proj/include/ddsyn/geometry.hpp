// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ddsyn/model.hpp"

namespace ddsyn::geometry {

// Subspace of R^n stored as an orthonormal basis (n x dim, possibly dim = 0).
struct Subspace {
  Matrix basis;
  Eigen::Index dim = 0;

  Subspace() : basis(Matrix::Zero(0, 0)) {}
  Subspace(Matrix b, const Tolerance& tol);

  Eigen::Index ambient_dim() const { return basis.rows(); }
};

// Orthonormalize the span of arbitrary columns into a Subspace.
Subspace span_of(const Matrix& columns, const Tolerance& tol = {});

struct DdSolution {
  Matrix F;
  Matrix X;
  double residual = 0.0;
};

// Affine solution set of the DD equation VX - BFV = AV in y = [vec X; vec F].
struct DdParameterization {
  Vector particular;
  Matrix nullspace;
  Matrix constraint_matrix;
  Vector rhs;

  Eigen::Index k = 0;  // dim V
  Eigen::Index m = 0;  // input count
  Eigen::Index n = 0;  // state count

  Eigen::Index num_free() const { return nullspace.cols(); }
  Vector assemble(const Vector& theta) const;
};

struct RcqReport {
  bool v_full_column_rank = false;
  bool v_plus_b_spans = false;
  bool use_rre_fallback = true;
};

Subspace largest_ci_subspace(const LtiSystem& sys, const Tolerance& tol = {});

bool dd_feasible(const LtiSystem& sys, const Subspace& v, const Tolerance& tol = {});

DdParameterization assemble_dd_system(const LtiSystem& sys, const Subspace& v,
                                      const Tolerance& tol = {});

// Split a stacked solution vector back into (X, F) and record the DD residual.
DdSolution unpack_dd_solution(const LtiSystem& sys, const Subspace& v, const Vector& y);

// f_dd: minimum over X of the spectral norm of VX - (A+BF)V.
double dd_residual(const LtiSystem& sys, const Subspace& v, const Matrix& f);

// Least-squares minimizer X of ||VX - (A+BF)V||.
Matrix dd_minimizing_x(const LtiSystem& sys, const Subspace& v, const Matrix& f);

RcqReport check_rcq(const LtiSystem& sys, const Subspace& v, const Tolerance& tol = {});

}  // namespace ddsyn::geometry
