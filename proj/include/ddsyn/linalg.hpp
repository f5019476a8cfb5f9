// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddsyn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Numerical cutoffs shared across the library.  rank_tol is a singular-value
/// cutoff relative to the largest singular value, residual_tol bounds
/// acceptable equation residuals, psd_tol is the eigenvalue slack for
/// semidefiniteness checks.
struct Tolerance {
  double rank_tol = 1e-9;
  double residual_tol = 1e-8;
  double psd_tol = 1e-8;

  void validate() const;
};

class Error : public std::runtime_error {
 public:
  enum class Code {
    DimensionMismatch,
    SingularLyapunov,
    Infeasible,
    NoStabilizingDd,
    InvalidArgument,
    Io,
    NumericalFailure,
  };

  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

namespace linalg {

bool is_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* name);

/// Orthonormal basis of ker(M).  Returns an n x 0 matrix when M has full
/// column rank.
Matrix kernel_basis(const Matrix& m, const Tolerance& tol = {});

/// Orthonormal basis of the column space of M.
Matrix image_basis(const Matrix& m, const Tolerance& tol = {});

int numerical_rank(const Matrix& m, const Tolerance& tol = {});

struct RreResult {
  Matrix r;                       // reduced row echelon form, zero rows dropped
  std::vector<int> pivot_columns;
};

/// Reduced row echelon form with partial pivoting.  Rows with norm below the
/// scaled cutoff are dropped, so the result always has full row rank.
RreResult rre(const Matrix& m, const Tolerance& tol = {});

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking operator (columns left to right).
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, int rows, int cols);

/// Solves Acl' W + W Acl = -Q for symmetric W via a real-Schur reduction
/// (Bartels-Stewart).  Throws Error::SingularLyapunov when the Sylvester
/// operator is singular (Acl and -Acl share an eigenvalue).
Matrix lyapunov_solve(const Matrix& acl, const Matrix& q, const Tolerance& tol = {});

Matrix expm(const Matrix& m);

/// Largest real part over the eigenvalues of a square matrix.
double spectral_abscissa(const Matrix& m);

double min_eig_sym(const Matrix& m);
double max_eig_sym(const Matrix& m);
double spectral_norm(const Matrix& m);
Matrix symmetrize(const Matrix& m);

/// Minimum-norm least-squares solution of A x = b.
Vector lstsq(const Matrix& a, const Vector& b, const Tolerance& tol = {});

}  // namespace linalg

/// Deterministic random stream.  std::normal_distribution output is
/// implementation-defined, so Gaussian sampling is done explicitly via
/// Box-Muller to keep seeded runs reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform draw in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double gauss();
  double gauss(double mean, double stddev) { return mean + stddev * gauss(); }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Counter-based seed derivation, so that per-(trial, level) streams are
/// independent of evaluation order.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace ddsyn
