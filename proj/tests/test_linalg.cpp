// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <set>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "ddsyn/linalg.hpp"

using namespace ddsyn;
using testsupport::random_matrix;

TEST_SUITE("linalg") {
  TEST_CASE("kernel_basis on full-rank and rank-deficient maps") {
    Matrix k1 = linalg::kernel_basis(Matrix::Identity(3, 3));
    CHECK(k1.rows() == 3);
    CHECK(k1.cols() == 0);

    Matrix m2(1, 3);
    m2 << 1, 0, 0;
    Matrix k2 = linalg::kernel_basis(m2);
    REQUIRE(k2.cols() == 2);
    CHECK((m2 * k2).cwiseAbs().maxCoeff() <= 1e-14);
    // The span is {e2, e3}: the projector onto it is diag(0, 1, 1).
    Matrix proj = k2 * k2.transpose();
    Matrix expect = Matrix::Zero(3, 3);
    expect(1, 1) = expect(2, 2) = 1.0;
    CHECK((proj - expect).cwiseAbs().maxCoeff() <= 1e-12);

    Matrix m3 = Matrix::Zero(2, 6);
    m3.leftCols(2) = Matrix::Identity(2, 2);
    Matrix k3 = linalg::kernel_basis(m3);
    CHECK(k3.rows() == 6);
    CHECK(k3.cols() == 4);
  }

  TEST_CASE("image_basis on degenerate and collinear inputs") {
    CHECK(linalg::image_basis(Matrix::Zero(3, 3)).cols() == 0);

    Matrix e3 = Matrix::Zero(3, 1);
    e3(2, 0) = 1.0;
    Matrix b1 = linalg::image_basis(e3);
    REQUIRE(b1.cols() == 1);
    CHECK(std::abs(std::abs(b1(2, 0)) - 1.0) <= 1e-14);

    Matrix collinear(3, 2);
    collinear << 1, 2, 0, 0, 0, 0;
    Matrix b2 = linalg::image_basis(collinear);
    REQUIRE(b2.cols() == 1);
    CHECK(std::abs(std::abs(b2(0, 0)) - 1.0) <= 1e-14);
  }

  TEST_CASE("rank-nullity and orthonormality across random matrices") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
      int rows = 2 + static_cast<int>(rng.uniform() * 5);
      int cols = 2 + static_cast<int>(rng.uniform() * 5);
      Matrix m = random_matrix(rng, rows, cols);
      if (trial % 3 == 0 && cols >= 2) m.col(cols - 1) = m.col(0);  // force deficiency
      Matrix ker = linalg::kernel_basis(m);
      Matrix img = linalg::image_basis(m);
      CHECK(linalg::numerical_rank(m) + ker.cols() == cols);
      CHECK(img.cols() == linalg::numerical_rank(m));
      if (ker.cols() > 0) {
        CHECK((m * ker).cwiseAbs().maxCoeff() <= 1e-12);
        Matrix gram = ker.transpose() * ker;
        CHECK((gram - Matrix::Identity(ker.cols(), ker.cols())).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }

  TEST_CASE("rre canonical examples") {
    auto r1 = linalg::rre(Matrix::Identity(2, 2));
    CHECK((r1.r - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r1.pivot_columns == std::vector<int>{0, 1});

    Matrix dep(2, 2);
    dep << 1, 2, 2, 4;
    auto r2 = linalg::rre(dep);
    REQUIRE(r2.r.rows() == 1);
    CHECK(r2.r(0, 0) == doctest::Approx(1.0));
    CHECK(r2.r(0, 1) == doctest::Approx(2.0));
    CHECK(r2.pivot_columns == std::vector<int>{0});
  }

  TEST_CASE("rre preserves the solution set") {
    Rng rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      Matrix a = random_matrix(rng, 4, 6);
      a.row(3) = a.row(0) + a.row(1);  // redundant row
      Vector x_true = random_matrix(rng, 6, 1);
      Vector b = a * x_true;
      Matrix aug(4, 7);
      aug << a, b;
      auto red = linalg::rre(aug);
      Matrix r = red.r.leftCols(6);
      Vector rb = red.r.col(6);
      CHECK((r * x_true - rb).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(red.r.rows() == 3);
      CHECK(linalg::numerical_rank(red.r) == red.r.rows());
    }
  }

  TEST_CASE("kron and vec basics") {
    Rng rng(3);
    Matrix m = random_matrix(rng, 2, 3);
    CHECK((linalg::kron(Matrix::Identity(1, 1), m) - m).cwiseAbs().maxCoeff() == 0.0);

    Matrix m2(2, 2);
    m2 << 1, 3, 2, 4;
    Vector v = linalg::vec(m2);
    CHECK(v(0) == 1.0);
    CHECK(v(1) == 2.0);
    CHECK(v(2) == 3.0);
    CHECK(v(3) == 4.0);
    CHECK((linalg::unvec(v, 2, 2) - m2).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("vec of the decoupling equation matches its Kronecker form") {
    Rng rng(13);
    const int n = 4, m = 2, k = 3;
    Matrix v = testsupport::orthonormal_columns(rng, n, k);
    Matrix b = random_matrix(rng, n, m);
    Matrix x = random_matrix(rng, k, k);
    Matrix f = random_matrix(rng, m, n);
    Vector lhs = linalg::vec(v * x - b * f * v);
    Vector rhs = linalg::kron(Matrix::Identity(k, k), v) * linalg::vec(x) -
                 linalg::kron(Matrix(v.transpose()), b) * linalg::vec(f);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("lyapunov_solve pinned values") {
    Matrix a1(1, 1), q1(1, 1);
    a1 << -1;
    q1 << 1;
    Matrix w1 = linalg::lyapunov_solve(a1, q1);
    CHECK(w1(0, 0) == doctest::Approx(0.5).epsilon(1e-12));

    CHECK(linalg::lyapunov_solve(a1, Matrix::Zero(1, 1))(0, 0) == 0.0);

    Matrix a2 = Matrix::Zero(2, 2);
    a2(0, 0) = -1;
    a2(1, 1) = -2;
    Matrix w2 = linalg::lyapunov_solve(a2, Matrix::Identity(2, 2));
    CHECK(w2(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(w2(1, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(w2(0, 1)) <= 1e-14);
  }

  TEST_CASE("lyapunov_solve frozen cross-check") {
    // Reference solution frozen from an independent dense solver.
    Matrix a(3, 3), q(3, 3), expect(3, 3);
    a << -1, 2, 0.5, 0, -2, 1, 0.25, 0, -3;
    q << 2, 0.5, 0, 0.5, 1, -0.25, 0, -0.25, 3;
    expect << 1.10453869047619, 0.94047619047619035, 0.41815476190476236,  //
        0.94047619047619058, 1.1904761904761909, 0.4494047619047622,       //
        0.41815476190476236, 0.44940476190476225, 0.71949404761904745;
    Matrix w = linalg::lyapunov_solve(a, q);
    CHECK((w - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("lyapunov_solve residual and symmetry on random Hurwitz matrices") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
      int n = 2 + static_cast<int>(rng.uniform() * 7);
      LtiSystem sys = testsupport::random_hurwitz_system(rng, n, 1, 1);
      Matrix qhalf = random_matrix(rng, n, n);
      Matrix q = qhalf * qhalf.transpose();
      Matrix w = linalg::lyapunov_solve(sys.A, q);
      double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
      CHECK((sys.A.transpose() * w + w * sys.A + q).cwiseAbs().maxCoeff() / scale <= 1e-8);
      CHECK((w - w.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, w.norm()));
    }
  }

  TEST_CASE("lyapunov_solve rejects eigenvalue overlap") {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1;
    a(1, 1) = -1;  // 1 + (-1) = 0: singular Sylvester operator
    CHECK_THROWS_AS(linalg::lyapunov_solve(a, Matrix::Identity(2, 2)), Error);
    try {
      linalg::lyapunov_solve(a, Matrix::Identity(2, 2));
    } catch (const Error& err) {
      CHECK(err.code() == Error::Code::SingularLyapunov);
    }
  }

  TEST_CASE("expm pinned values") {
    CHECK((linalg::expm(Matrix::Zero(3, 3)) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <=
          1e-15);

    Matrix one(1, 1);
    one << 1;
    CHECK(linalg::expm(one)(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));

    Matrix nil(2, 2);
    nil << 0, 1, 0, 0;
    Matrix en = linalg::expm(nil);
    CHECK(en(0, 0) == doctest::Approx(1.0));
    CHECK(en(0, 1) == doctest::Approx(1.0));
    CHECK(en(1, 0) == doctest::Approx(0.0));
    CHECK(en(1, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("expm frozen cross-check") {
    Matrix m(3, 3), expect(3, 3);
    m << 0.5, -1.0, 0.25, 1.0, 0.0, -0.5, 0.0, 2.0, -1.5;
    expect << 1.1038114454458976, -0.82810239028290411, 0.28973099870813596,  //
        0.99351319255772408, 0.27623324461739573, -0.083229590591812175,      //
        0.66164320909927976, 0.66373996691688875, 0.10924987397936914;
    CHECK((linalg::expm(m) - expect).cwiseAbs().maxCoeff() <= 1e-13);
  }

  TEST_CASE("expm semigroup property") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
      Matrix m = random_matrix(rng, 4, 4);
      Matrix whole = linalg::expm(m);
      Matrix halves = linalg::expm(Matrix(0.5 * m)) * linalg::expm(Matrix(0.5 * m));
      CHECK((whole - halves).cwiseAbs().maxCoeff() <=
            1e-8 * std::max(1.0, whole.cwiseAbs().maxCoeff()));
    }
  }

  TEST_CASE("spectral_abscissa") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = -1;
    d(1, 1) = -2;
    CHECK(linalg::spectral_abscissa(d) == doctest::Approx(-1.0));

    Matrix rot(2, 2);
    rot << 0, 1, -1, 0;
    CHECK(linalg::spectral_abscissa(rot) == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("symmetric eigen helpers and spectral norm") {
    Matrix s(2, 2);
    s << 2, 1, 1, 2;
    CHECK(linalg::min_eig_sym(s) == doctest::Approx(1.0));
    CHECK(linalg::max_eig_sym(s) == doctest::Approx(3.0));
    Matrix col(2, 1);
    col << 3, 4;
    CHECK(linalg::spectral_norm(col) == doctest::Approx(5.0));
  }

  TEST_CASE("lstsq returns the minimum-norm solution") {
    Matrix a(1, 2);
    a << 1, 0;
    Vector b(1);
    b << 2;
    Vector x = linalg::lstsq(a, b);
    CHECK(x(0) == doctest::Approx(2.0));
    CHECK(x(1) == doctest::Approx(0.0));

    Rng rng(29);
    Matrix a2 = random_matrix(rng, 6, 3);
    Vector x_true = random_matrix(rng, 3, 1);
    Vector b2 = a2 * x_true;
    CHECK((linalg::lstsq(a2, b2) - x_true).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("rng determinism and gaussian moments") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.gauss() == b.gauss());

    Rng rng(5);
    double sum = 0.0, sumsq = 0.0;
    const int draws = 4000;
    for (int i = 0; i < draws; ++i) {
      double g = rng.gauss();
      sum += g;
      sumsq += g * g;
    }
    double mean = sum / draws;
    double var = sumsq / draws - mean * mean;
    CHECK(std::abs(mean) <= 0.06);
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("mix_seed separates streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t a = 0; a < 8; ++a)
      for (std::uint64_t b = 0; b < 8; ++b) seen.insert(mix_seed(9, a, b));
    CHECK(seen.size() == 64);
    CHECK(mix_seed(9, 1, 2) != mix_seed(9, 2, 1));
    CHECK(mix_seed(9, 3, 4) == mix_seed(9, 3, 4));
  }

  TEST_CASE("tolerance validation") {
    Tolerance bad;
    bad.rank_tol = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }
}
