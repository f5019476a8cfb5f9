// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <vector>

namespace ddsyn {

void Tolerance::validate() const {
  if (!(rank_tol > 0.0) || !(residual_tol > 0.0) || !(psd_tol > 0.0)) {
    throw Error(Error::Code::InvalidArgument, "Tolerance fields must be strictly positive");
  }
}

namespace linalg {

bool is_finite(const Matrix& m) { return m.allFinite(); }

void require_finite(const Matrix& m, const char* name) {
  if (!m.allFinite()) {
    throw Error(Error::Code::InvalidArgument, std::string(name) + " contains NaN/Inf entries");
  }
}

Matrix kernel_basis(const Matrix& m, const Tolerance& tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? tol.rank_tol * sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return svd.matrixV().rightCols(m.cols() - rank);
}

Matrix image_basis(const Matrix& m, const Tolerance& tol) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? tol.rank_tol * sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

int numerical_rank(const Matrix& m, const Tolerance& tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? tol.rank_tol * sv(0) : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

RreResult rre(const Matrix& m, const Tolerance& tol) {
  Matrix r = m;
  const double scale = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
  RreResult out;
  if (scale == 0.0) {
    out.r = Matrix(0, m.cols());
    return out;
  }
  const double cutoff = tol.rank_tol * scale;

  int row = 0;
  for (int col = 0; col < r.cols() && row < r.rows(); ++col) {
    int pivot = -1;
    double best = cutoff;
    for (int i = row; i < r.rows(); ++i) {
      if (std::abs(r(i, col)) > best) {
        best = std::abs(r(i, col));
        pivot = i;
      }
    }
    if (pivot < 0) continue;
    r.row(row).swap(r.row(pivot));
    r.row(row) /= r(row, col);
    r(row, col) = 1.0;
    for (int i = 0; i < r.rows(); ++i) {
      if (i == row) continue;
      r.row(i) -= r(i, col) * r.row(row);
      r(i, col) = 0.0;
    }
    out.pivot_columns.push_back(col);
    ++row;
  }
  out.r = r.topRows(row);
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, int rows, int cols) {
  if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw Error(Error::Code::DimensionMismatch, "unvec: size mismatch");
  }
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix lyapunov_solve(const Matrix& acl, const Matrix& q, const Tolerance& tol) {
  if (acl.rows() != acl.cols() || q.rows() != q.cols() || acl.rows() != q.rows()) {
    throw Error(Error::Code::DimensionMismatch, "lyapunov_solve: Acl and Q must be square of equal size");
  }
  const int n = static_cast<int>(acl.rows());
  if (n == 0) return Matrix::Zero(0, 0);

  // Bartels-Stewart: reduce A to real Schur form and back-substitute over the
  // quasi-triangular blocks. Unlike a dense Kronecker solve, singularity shows
  // up only in the <= 4x4 block systems, where it genuinely means two
  // eigenvalues of A sum to zero.
  Eigen::RealSchur<Matrix> schur(acl);
  if (schur.info() != Eigen::Success) {
    throw Error(Error::Code::SingularLyapunov, "lyapunov_solve: Schur decomposition failed");
  }
  const Matrix& t = schur.matrixT();
  const Matrix& u = schur.matrixU();
  Matrix c = -(u.transpose() * symmetrize(q) * u);

  // Diagonal block boundaries of T (1x1 or 2x2).
  std::vector<int> starts;
  for (int i = 0; i < n;) {
    starts.push_back(i);
    i += (i + 1 < n && std::abs(t(i + 1, i)) > 0.0) ? 2 : 1;
  }
  const int nb = static_cast<int>(starts.size());
  auto bsize = [&](int b) { return (b + 1 < nb ? starts[b + 1] : n) - starts[b]; };

  // Solve T' X + X T = C blockwise: row blocks top-down, column blocks
  // left-to-right, so every off-diagonal term on the right is already known
  // ((T'X)_IJ reaches rows above I, (XT)_IJ reaches columns left of J).
  Matrix x = Matrix::Zero(n, n);
  for (int bi = 0; bi < nb; ++bi) {
    const int i0 = starts[bi], ni = bsize(bi);
    for (int bj = 0; bj < nb; ++bj) {
      const int j0 = starts[bj], nj = bsize(bj);
      Matrix rhs = c.block(i0, j0, ni, nj);
      if (i0 > 0) rhs -= t.block(0, i0, i0, ni).transpose() * x.block(0, j0, i0, nj);
      if (j0 > 0) rhs -= x.block(i0, 0, ni, j0) * t.block(0, j0, j0, nj);
      // (T_ii)' X_ij + X_ij T_jj = rhs, vectorized into a <= 4x4 system.
      Matrix tii = t.block(i0, i0, ni, ni);
      Matrix tjj = t.block(j0, j0, nj, nj);
      Matrix small = kron(Matrix::Identity(nj, nj), tii.transpose()) +
                     kron(tjj.transpose(), Matrix::Identity(ni, ni));
      Eigen::FullPivLU<Matrix> lu(small);
      lu.setThreshold(tol.rank_tol);
      if (lu.rank() < small.rows()) {
        throw Error(Error::Code::SingularLyapunov,
                    "lyapunov_solve: eigenvalues of Acl and -Acl overlap");
      }
      Vector sol = lu.solve(vec(rhs));
      x.block(i0, j0, ni, nj) = unvec(sol, ni, nj);
    }
  }
  return symmetrize(u * x * u.transpose());
}

Matrix expm(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(Error::Code::DimensionMismatch, "expm: matrix must be square");
  }
  return m.exp();
}

double spectral_abscissa(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(Error::Code::DimensionMismatch, "spectral_abscissa: matrix must be square");
  }
  Eigen::EigenSolver<Matrix> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

double min_eig_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eig_sym(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Vector lstsq(const Matrix& a, const Vector& b, const Tolerance& tol) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(tol.rank_tol);
  return svd.solve(b);
}

}  // namespace linalg

double Rng::gauss() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 1e-300) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (a + 0x9E3779B97F4A7C15ULL));
  h = splitmix64(h ^ (b + 0xD1B54A32D192ED03ULL));
  return h;
}

}  // namespace ddsyn
