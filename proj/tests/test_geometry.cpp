// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "support/fixtures.hpp"

#include "ddsyn/geometry.hpp"
#include "ddsyn/linalg.hpp"

using namespace ddsyn;
using geometry::Subspace;
using testsupport::random_matrix;

namespace {

// |V X - B F V - A V| for a stacked candidate y = [vec X; vec F].
double dd_equation_residual(const LtiSystem& sys, const Subspace& v, const Matrix& x,
                            const Matrix& f) {
  return (v.basis * x - sys.B * f * v.basis - sys.A * v.basis).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("subspace constructor enforces orthonormality") {
    Matrix skew(3, 2);
    skew << 1, 1, 0, 1, 0, 0;
    CHECK_THROWS_AS(Subspace(skew, Tolerance{}), Error);
    Subspace ok = geometry::span_of(skew);
    CHECK(ok.dim == 2);
  }

  TEST_CASE("largest_ci_subspace pins the decoupled bench to span{e3}") {
    LtiSystem sys = testsupport::example_decoupled();
    Subspace v = geometry::largest_ci_subspace(sys);
    REQUIRE(v.dim == 1);
    CHECK(std::abs(std::abs(v.basis(2, 0)) - 1.0) <= 1e-12);
    CHECK(std::abs(v.basis(0, 0)) <= 1e-12);
    CHECK(std::abs(v.basis(1, 0)) <= 1e-12);
  }

  TEST_CASE("largest_ci_subspace returns the whole space when H = 0") {
    LtiSystem sys = testsupport::example_decoupled();
    LtiSystem relaxed(sys.A, sys.B, sys.E, Matrix::Zero(1, 3));
    Subspace v = geometry::largest_ci_subspace(relaxed);
    CHECK(v.dim == 3);
  }

  TEST_CASE("largest_ci_subspace on the coupled bench") {
    LtiSystem sys = testsupport::example_coupled();
    Subspace v = geometry::largest_ci_subspace(sys);
    REQUIRE(v.dim == 1);
    CHECK(std::abs(std::abs(v.basis(2, 0)) - 1.0) <= 1e-12);

    // F = [0 0 -1] makes span{e3} invariant: (A + BF) e3 = -e3.
    Matrix f(1, 3);
    f << 0, 0, -1;
    Vector img = closed_loop(sys, f) * v.basis.col(0);
    CHECK((img + v.basis.col(0)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("largest_ci_subspace output satisfies its defining inclusions") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      int n = 3 + static_cast<int>(rng.uniform() * 4);
      int m = 1 + static_cast<int>(rng.uniform() * 2);
      int p = 1 + static_cast<int>(rng.uniform() * 2);
      LtiSystem sys(random_matrix(rng, n, n), random_matrix(rng, n, m),
                    random_matrix(rng, n, 1), random_matrix(rng, p, n));
      Subspace v = geometry::largest_ci_subspace(sys);
      if (v.dim == 0) continue;
      CHECK((sys.H * v.basis).cwiseAbs().maxCoeff() <= 1e-9);
      // A V must lie in im [V B]: appending A V cannot raise the rank.
      Matrix vb(n, v.dim + m);
      vb << v.basis, sys.B;
      Matrix vba(n, v.dim + m + v.dim);
      vba << vb, sys.A * v.basis;
      CHECK(linalg::numerical_rank(vba) == linalg::numerical_rank(vb));
    }
  }

  TEST_CASE("dd_feasible inclusion tests") {
    LtiSystem sys = testsupport::example_decoupled();
    Subspace v = geometry::largest_ci_subspace(sys);
    CHECK(geometry::dd_feasible(sys, v));

    Matrix e1 = Matrix::Zero(3, 1);
    e1(0, 0) = 1.0;
    LtiSystem shifted(sys.A, sys.B, e1, sys.H);
    CHECK_FALSE(geometry::dd_feasible(shifted, v));

    // ker H always satisfies the output-side inclusion.
    Subspace ker_h = geometry::span_of(linalg::kernel_basis(sys.H));
    CHECK((sys.H * ker_h.basis).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(geometry::dd_feasible(sys, ker_h));
  }

  TEST_CASE("assemble_dd_system contains the pinned gains") {
    LtiSystem sys1 = testsupport::example_decoupled();
    Subspace v1 = geometry::largest_ci_subspace(sys1);
    geometry::DdParameterization p1 = geometry::assemble_dd_system(sys1, v1);

    // y = [vec X; vec F]: A e3 = e3 makes X = [1] regardless of basis sign.
    Vector y1(4);
    y1 << 1.0, 0.0, 0.0, 0.0;
    CHECK((p1.constraint_matrix * y1 - p1.rhs).cwiseAbs().maxCoeff() <= 1e-10);

    // The particular solution solves the reduced system and the raw equation.
    CHECK((p1.constraint_matrix * p1.particular - p1.rhs).cwiseAbs().maxCoeff() <= 1e-10);
    geometry::DdSolution sol1 = geometry::unpack_dd_solution(sys1, v1, p1.particular);
    CHECK(dd_equation_residual(sys1, v1, sol1.X, sol1.F) <= 1e-10);

    LtiSystem sys2 = testsupport::example_coupled();
    Subspace v2 = geometry::largest_ci_subspace(sys2);
    geometry::DdParameterization p2 = geometry::assemble_dd_system(sys2, v2);
    Vector y2(4);
    y2 << -1.0, 0.0, 0.0, -1.0;  // X = [-1], F = [0 0 -1]
    CHECK((p2.constraint_matrix * y2 - p2.rhs).cwiseAbs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("assemble_dd_system nullspace spans solutions only") {
    Rng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
      testsupport::Planted plant = testsupport::plant_dd_system(rng, 5, 2, 2, 1, 1, false, false);
      Subspace v(plant.v_basis, Tolerance{});
      geometry::DdParameterization param = geometry::assemble_dd_system(plant.sys, v);
      CHECK((param.constraint_matrix * param.nullspace).cwiseAbs().maxCoeff() <= 1e-8);
      Vector theta = random_matrix(rng, param.num_free(), 1);
      Vector y = param.assemble(theta);
      geometry::DdSolution sol = geometry::unpack_dd_solution(plant.sys, v, y);
      CHECK(dd_equation_residual(plant.sys, v, sol.X, sol.F) <= 1e-8);
      CHECK(sol.residual <= 1e-8);
    }
  }

  TEST_CASE("assemble_dd_system reports infeasibility for a non-invariant subspace") {
    LtiSystem sys = testsupport::example_decoupled();
    Matrix e1 = Matrix::Zero(3, 1);
    e1(0, 0) = 1.0;
    Subspace v_bad(e1, Tolerance{});
    // A e1 = (0,-1,1): the third component cannot be produced by e1 or B = e2.
    CHECK_THROWS_AS(geometry::assemble_dd_system(sys, v_bad), Error);
    try {
      geometry::assemble_dd_system(sys, v_bad);
    } catch (const Error& err) {
      CHECK(err.code() == Error::Code::Infeasible);
    }
  }

  TEST_CASE("unpack_dd_solution records the residual it reports") {
    Rng rng(41);
    LtiSystem sys = testsupport::example_coupled();
    Subspace v = geometry::largest_ci_subspace(sys);
    Vector y = random_matrix(rng, 4, 1);
    geometry::DdSolution sol = geometry::unpack_dd_solution(sys, v, y);
    double direct = (v.basis * sol.X - sys.B * sol.F * v.basis - sys.A * v.basis).norm();
    CHECK(std::abs(sol.residual - direct) <= 1e-12 * std::max(1.0, direct));
  }

  TEST_CASE("dd_residual metric") {
    LtiSystem sys = testsupport::example_coupled();
    Subspace v = geometry::largest_ci_subspace(sys);
    Matrix f_dd(1, 3);
    f_dd << 0, 0, -1;
    CHECK(geometry::dd_residual(sys, v, f_dd) <= 1e-10);

    Matrix f_bad(1, 3);
    f_bad << 0.3, -0.7, 0.5;
    CHECK(geometry::dd_residual(sys, v, f_bad) > 1e-3);

    Subspace empty;
    CHECK(geometry::dd_residual(sys, empty, f_bad) == 0.0);
  }

  TEST_CASE("dd_minimizing_x beats perturbed candidates") {
    Rng rng(43);
    testsupport::Planted plant = testsupport::plant_dd_system(rng, 6, 2, 3, 2, 2, false, false);
    Subspace v(plant.v_basis, Tolerance{});
    Matrix f = random_matrix(rng, 2, 6);
    Matrix x_star = geometry::dd_minimizing_x(plant.sys, v, f);
    Matrix acl = closed_loop(plant.sys, f);
    double best = (v.basis * x_star - acl * v.basis).norm();
    for (int trial = 0; trial < 5; ++trial) {
      Matrix x_alt = x_star + 0.1 * random_matrix(rng, 3, 3);
      CHECK((v.basis * x_alt - acl * v.basis).norm() >= best - 1e-12);
    }
  }

  TEST_CASE("sampled decoupling controllers close the channel") {
    // Executable zero-gain property: any gain from the parameterization keeps
    // the disturbance invisible at the output, stability not required.
    Rng rng(47);
    for (int trial = 0; trial < 10; ++trial) {
      testsupport::Planted plant =
          testsupport::plant_dd_system(rng, 4 + trial % 3, 2, 2, 1, 1, false, trial % 2 == 0);
      Subspace v(plant.v_basis, Tolerance{});
      REQUIRE(geometry::dd_feasible(plant.sys, v));
      geometry::DdParameterization param = geometry::assemble_dd_system(plant.sys, v);
      for (int sample = 0; sample < 3; ++sample) {
        Vector theta = random_matrix(rng, param.num_free(), 1);
        geometry::DdSolution sol =
            geometry::unpack_dd_solution(plant.sys, v, param.assemble(theta));
        CHECK(sol.residual <= 1e-8);
        Matrix acl = closed_loop(plant.sys, sol.F);
        for (double t : {0.0, 0.5, 2.0, 5.0, 10.0}) {
          CHECK((plant.sys.H * linalg::expm(Matrix(acl * t)) * plant.sys.E)
                    .cwiseAbs()
                    .maxCoeff() <= 1e-7);
        }
        CHECK(testsupport::reachable_output_leak(acl, plant.sys.E, plant.sys.H) <= 1e-8);
      }
    }
  }

  TEST_CASE("check_rcq flags") {
    LtiSystem sys = testsupport::example_decoupled();
    Subspace v = geometry::largest_ci_subspace(sys);
    geometry::RcqReport rep = geometry::check_rcq(sys, v);
    CHECK(rep.v_full_column_rank);
    CHECK_FALSE(rep.v_plus_b_spans);  // rank [e3 e2] = 2 < 3
    CHECK(rep.use_rre_fallback);

    LtiSystem wide(sys.A, Matrix::Identity(3, 3), sys.E, sys.H);
    geometry::RcqReport rep2 = geometry::check_rcq(wide, v);
    CHECK(rep2.v_plus_b_spans);
  }
}
