// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ddsyn/conic.hpp"
#include "ddsyn/geometry.hpp"
#include "ddsyn/model.hpp"

namespace ddsyn::ddpf {

// Pi term of the Lyapunov-type matrix inequality A_F'P + PA_F + Pi <= 0.
struct PiVariant {
  enum class Tag { Stability, Convergence, NoStability };
  Tag tag = Tag::Stability;
  double eps = 1e-13;  // only meaningful for Stability

  static PiVariant stability(double eps = 1e-13);
  static PiVariant convergence();
  static PiVariant no_stability();
  bool has_lmi() const { return tag != Tag::NoStability; }
  bool has_alpha() const { return tag == Tag::Convergence; }
};

struct Objective {
  enum class Tag { H2Trace, NegAlpha, GainNorm, Custom };
  Tag tag = Tag::H2Trace;

  // Custom: linear functional c_alpha*alpha + <C_F,F> + <C_P,P> + <C_X,X>.
  double c_alpha = 0.0;
  Matrix c_f, c_p, c_x;

  static Objective h2_trace();
  static Objective neg_alpha();
  static Objective gain_norm();
  static Objective custom(double c_alpha, Matrix c_f, Matrix c_p, Matrix c_x);
  const char* name() const;
};

struct Iterate {
  double alpha = 0.0;
  Matrix F;
  Matrix P;
  Matrix X;
  double objective_value = 0.0;
  double dd_residual = 0.0;
  double lyap_margin = 0.0;
};

struct SolveConfig {
  double gamma = 1e-2;
  double stop_eps = 1e-10;
  int max_iters = 200;
  // Floor on P and the Pi regularizer eps sit far below the H2-SDP Gramian
  // scale so the certificate objective Tr(E'PE) can descend past it; the
  // subproblem duality gap must be tighter than both.
  double delta = 1e-13;
  double alpha_cap = 1e3;
  conic::SolverOptions solver{.feas_tol = 1e-11};

  // Initialization search (derivative-free spectral-abscissa minimization).
  // The search is cheap next to one subproblem solve, and the convergence-rate
  // objective needs the deepest basin it can find, so the budget is generous.
  int init_starts = 40;
  double init_step = 1.0;
  double init_shrink = 0.5;
  double init_step_floor = 1e-6;
  int init_budget = 20000;

  void validate() const;
};

struct MetricsRow {
  double f_alpha = 0.0;
  double f_gain = 0.0;
  double f_h2 = 0.0;
  double f_dd = 0.0;
  bool hurwitz = false;
};

struct SynthesisResult {
  Controller controller{Matrix::Zero(1, 1)};
  MetricsRow metrics;
  int iterations = 0;
  bool converged = false;
  bool subproblem_failure = false;
  std::string message;
};

// Base objective value of an iterate (no proximal term).
double objective_of(const LtiSystem& sys, const Objective& obj, const Iterate& it);

// Pi evaluated at an iterate, and the Lyapunov margin max eig(A_F'P+PA_F+Pi).
Matrix pi_matrix(const LtiSystem& sys, const PiVariant& pi, const Matrix& p, double alpha);
double lyap_margin_of(const LtiSystem& sys, const PiVariant& pi, const Iterate& it);

Iterate initialize_ddpf(const LtiSystem& sys, const geometry::Subspace& v,
                        const geometry::DdParameterization& param, const PiVariant& pi,
                        std::uint64_t seed, const SolveConfig& cfg = {});

conic::ConicProgram linearized_subproblem(const LtiSystem& sys, const geometry::Subspace& v,
                                          const geometry::DdParameterization& param,
                                          const Objective& obj, const PiVariant& pi,
                                          const Iterate& anchor, const SolveConfig& cfg);

std::pair<SynthesisResult, std::vector<Iterate>> solve_ddpf(const LtiSystem& sys,
                                                            const geometry::Subspace& v,
                                                            const Objective& obj,
                                                            const PiVariant& pi,
                                                            const SolveConfig& cfg,
                                                            const Iterate& init);

MetricsRow evaluate_controller(const LtiSystem& sys, const geometry::Subspace& v,
                               const Controller& ctrl, const Tolerance& tol = {});

void write_trace_csv(const std::string& path, const std::vector<Iterate>& trace,
                     double gamma = 1e-2);

}  // namespace ddsyn::ddpf
