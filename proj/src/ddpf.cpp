// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/ddpf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ddsyn/h2.hpp"

namespace ddsyn::ddpf {

PiVariant PiVariant::stability(double eps) {
  if (!(eps > 0.0)) throw Error(Error::Code::InvalidArgument, "PiVariant: eps must be positive");
  PiVariant pi;
  pi.tag = Tag::Stability;
  pi.eps = eps;
  return pi;
}

PiVariant PiVariant::convergence() {
  PiVariant pi;
  pi.tag = Tag::Convergence;
  return pi;
}

PiVariant PiVariant::no_stability() {
  PiVariant pi;
  pi.tag = Tag::NoStability;
  return pi;
}

Objective Objective::h2_trace() { return Objective{}; }

Objective Objective::neg_alpha() {
  Objective o;
  o.tag = Tag::NegAlpha;
  return o;
}

Objective Objective::gain_norm() {
  Objective o;
  o.tag = Tag::GainNorm;
  return o;
}

Objective Objective::custom(double c_alpha, Matrix c_f, Matrix c_p, Matrix c_x) {
  Objective o;
  o.tag = Tag::Custom;
  o.c_alpha = c_alpha;
  o.c_f = std::move(c_f);
  o.c_p = std::move(c_p);
  o.c_x = std::move(c_x);
  return o;
}

const char* Objective::name() const {
  switch (tag) {
    case Tag::H2Trace:
      return "h2-trace";
    case Tag::NegAlpha:
      return "neg-alpha";
    case Tag::GainNorm:
      return "gain-norm";
    case Tag::Custom:
      return "custom";
  }
  return "unknown";
}

void SolveConfig::validate() const {
  if (!(gamma > 0.0) || !(stop_eps > 0.0) || !(delta > 0.0) || !(alpha_cap > 0.0) ||
      max_iters < 1) {
    throw Error(Error::Code::InvalidArgument, "SolveConfig: gamma, stop_eps, delta, alpha_cap positive and max_iters >= 1");
  }
  if (init_starts < 1 || !(init_step > 0.0) || !(init_shrink > 0.0) || !(init_shrink < 1.0) ||
      !(init_step_floor > 0.0) || init_budget < 1) {
    throw Error(Error::Code::InvalidArgument, "SolveConfig: invalid initialization search parameters");
  }
}

double objective_of(const LtiSystem& sys, const Objective& obj, const Iterate& it) {
  switch (obj.tag) {
    case Objective::Tag::H2Trace:
      return (sys.E.transpose() * it.P * sys.E).trace();
    case Objective::Tag::NegAlpha:
      return -it.alpha;
    case Objective::Tag::GainNorm:
      return linalg::spectral_norm(it.F);
    case Objective::Tag::Custom: {
      double j = obj.c_alpha * it.alpha;
      if (obj.c_f.size() > 0) j += obj.c_f.cwiseProduct(it.F).sum();
      if (obj.c_p.size() > 0) j += obj.c_p.cwiseProduct(it.P).sum();
      if (obj.c_x.size() > 0) j += obj.c_x.cwiseProduct(it.X).sum();
      return j;
    }
  }
  return 0.0;
}

Matrix pi_matrix(const LtiSystem& sys, const PiVariant& pi, const Matrix& p, double alpha) {
  const auto n = sys.n();
  switch (pi.tag) {
    case PiVariant::Tag::Stability:
      return sys.H.transpose() * sys.H + pi.eps * Matrix::Identity(n, n);
    case PiVariant::Tag::Convergence:
      return 2.0 * alpha * p;
    case PiVariant::Tag::NoStability:
      return Matrix::Zero(n, n);
  }
  return Matrix::Zero(n, n);
}

double lyap_margin_of(const LtiSystem& sys, const PiVariant& pi, const Iterate& it) {
  Matrix af = closed_loop(sys, it.F);
  Matrix lhs = af.transpose() * it.P + it.P * af + pi_matrix(sys, pi, it.P, it.alpha);
  return linalg::max_eig_sym(linalg::symmetrize(lhs));
}

namespace {

double dd_equation_residual(const LtiSystem& sys, const geometry::Subspace& v, const Matrix& x,
                            const Matrix& f) {
  return (v.basis * x - sys.B * f * v.basis - sys.A * v.basis).norm();
}

// Derivative-free minimization of the closed-loop spectral abscissa over the
// free coordinates of the DD parameterization.
struct AbscissaSearch {
  const LtiSystem& sys;
  const geometry::DdParameterization& param;
  long evals = 0;

  double eval(const Vector& theta) const {
    Vector y = param.assemble(theta);
    Matrix f = linalg::unvec(y.tail(param.m * param.n), param.m, param.n);
    return linalg::spectral_abscissa(sys.A + sys.B * f);
  }
};

Vector pattern_search(AbscissaSearch& search, Vector theta, double step, double shrink,
                      double floor_step, int budget, double* best_out) {
  double best = search.eval(theta);
  int evals = 1;
  const auto d = theta.size();
  while (step >= floor_step && evals < budget) {
    bool improved = false;
    for (Eigen::Index i = 0; i < d && evals < budget; ++i) {
      for (double sign : {1.0, -1.0}) {
        Vector cand = theta;
        cand(i) += sign * step;
        double val = search.eval(cand);
        ++evals;
        if (val < best - 1e-12) {
          theta = std::move(cand);
          best = val;
          improved = true;
          break;
        }
        if (evals >= budget) break;
      }
    }
    if (!improved) step *= shrink;
  }
  *best_out = best;
  return theta;
}

Matrix stability_certificate(const Matrix& af, const Matrix& q_base, double delta,
                             const Tolerance& tol) {
  double eta = 1e-3;
  const auto n = af.rows();
  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix q = q_base + eta * Matrix::Identity(n, n);
    Matrix p = linalg::lyapunov_solve(af, q, tol);
    if (linalg::min_eig_sym(p) >= 2.0 * delta) return p;
    eta *= 10.0;
  }
  throw Error(Error::Code::NoStabilizingDd, "could not build a well-scaled Lyapunov certificate");
}

}  // namespace

Iterate initialize_ddpf(const LtiSystem& sys, const geometry::Subspace& v,
                        const geometry::DdParameterization& param, const PiVariant& pi,
                        std::uint64_t seed, const SolveConfig& cfg) {
  cfg.validate();
  Tolerance tol;
  if (!geometry::dd_feasible(sys, v, tol)) {
    throw Error(Error::Code::InvalidArgument, "initialize_ddpf: (sys, V) is not DD-feasible");
  }
  if (param.k != v.dim || param.m != sys.m() || param.n != sys.n()) {
    throw Error(Error::Code::DimensionMismatch, "initialize_ddpf: parameterization mismatch");
  }

  AbscissaSearch search{sys, param};
  const auto nfree = param.num_free();
  Vector best_theta = Vector::Zero(nfree);
  double best_sa = search.eval(best_theta);

  for (int start = 0; start < cfg.init_starts; ++start) {
    Vector theta0 = Vector::Zero(nfree);
    if (start > 0 && nfree > 0) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(start)));
      double scale = std::pow(10.0, static_cast<double>(start % 4) - 1.0);
      for (Eigen::Index i = 0; i < nfree; ++i) theta0(i) = rng.gauss(0.0, scale);
    }
    double sa = 0.0;
    Vector theta = pattern_search(search, std::move(theta0), cfg.init_step, cfg.init_shrink,
                                  cfg.init_step_floor, cfg.init_budget, &sa);
    if (sa < best_sa) {
      best_sa = sa;
      best_theta = std::move(theta);
    }
    // A convergence-rate objective benefits from the deepest abscissa we can
    // find, so keep scanning starts; the other objectives only need stability.
    if (best_sa <= -5e-2 && !pi.has_alpha()) break;
    if (nfree == 0) break;
  }

  const bool hurwitz = best_sa < -1e-6;
  if (!hurwitz && pi.tag != PiVariant::Tag::NoStability) {
    throw Error(Error::Code::NoStabilizingDd,
                "initialize_ddpf: no Hurwitz point found in the DD controller set (best abscissa " +
                    std::to_string(best_sa) + ")");
  }

  geometry::DdSolution sol = geometry::unpack_dd_solution(sys, v, param.assemble(best_theta));
  Matrix af = closed_loop(sys, sol.F);

  Iterate it;
  it.F = sol.F;
  it.X = sol.X;
  it.alpha = 0.0;
  switch (pi.tag) {
    case PiVariant::Tag::Stability:
      it.P = stability_certificate(af, sys.H.transpose() * sys.H + pi.eps * Matrix::Identity(sys.n(), sys.n()),
                                   cfg.delta, tol);
      break;
    case PiVariant::Tag::Convergence: {
      // Claim as much of the certified decay as the subproblem can digest.
      // The certificate norm explodes as alpha approaches the deepest
      // achievable abscissa, and after normalization the LMI margin shrinks
      // like 1 / |P0|; below margin_floor the interior is too thin for the
      // barrier subproblem to enter in double precision, so skip such rungs.
      constexpr double margin_floor = 3e-9;
      const Matrix eye = Matrix::Identity(sys.n(), sys.n());
      bool seeded = false;
      for (double whisker : {1e-3, 3e-3, 1e-2, 3e-2, 1e-1}) {
        double a = (1.0 - whisker) * -best_sa;
        try {
          Matrix p0 = linalg::lyapunov_solve(af + a * eye, eye, tol);
          double lmin = linalg::min_eig_sym(p0);
          if (lmin <= 0.0) continue;
          double s = std::max(1.0 / linalg::spectral_norm(p0), 2.0 * cfg.delta / lmin);
          if (s < margin_floor) continue;
          it.alpha = a;
          it.P = s * p0;
          if (lyap_margin_of(sys, pi, it) < -0.5 * margin_floor) {
            seeded = true;
            break;
          }
        } catch (const Error&) {
        }
      }
      if (!seeded) {
        throw Error(Error::Code::NoStabilizingDd,
                    "initialize_ddpf: no well-scaled convergence certificate at the search point");
      }
      break;
    }
    case PiVariant::Tag::NoStability:
      it.P = Matrix::Identity(sys.n(), sys.n());
      break;
  }
  it.dd_residual = sol.residual;
  it.lyap_margin = lyap_margin_of(sys, pi, it);
  it.objective_value = 0.0;
  return it;
}

conic::ConicProgram linearized_subproblem(const LtiSystem& sys, const geometry::Subspace& v,
                                          const geometry::DdParameterization& param,
                                          const Objective& obj, const PiVariant& pi,
                                          const Iterate& anchor, const SolveConfig& cfg) {
  cfg.validate();
  const auto n = sys.n();
  const auto m = sys.m();
  const auto k = v.dim;
  if (anchor.F.rows() != m || anchor.F.cols() != n || anchor.P.rows() != n ||
      anchor.P.cols() != n || anchor.X.rows() != k || anchor.X.cols() != k) {
    throw Error(Error::Code::DimensionMismatch, "linearized_subproblem: anchor shape mismatch");
  }
  if ((obj.tag == Objective::Tag::NegAlpha ||
       (obj.tag == Objective::Tag::Custom && obj.c_alpha != 0.0)) &&
      !pi.has_alpha()) {
    throw Error(Error::Code::InvalidArgument,
                "linearized_subproblem: an alpha objective requires the Convergence variant");
  }

  conic::VariableLayout layout;
  layout.add_matrix("X", k, k);
  layout.add_matrix("F", m, n);
  layout.add_symmetric("P", n);
  if (pi.has_alpha()) layout.add_scalar("alpha");
  if (obj.tag == Objective::Tag::GainNorm) layout.add_scalar("s");
  layout.add_scalar("t_prox");
  conic::ConicProgram prog(std::move(layout));
  const conic::VariableLayout& lay = prog.layout;

  prog.add_equalities(
      [&](const Vector& y) {
        Vector stacked(k * k + m * n);
        stacked.head(k * k) = linalg::vec(lay.get_matrix(y, "X"));
        stacked.tail(m * n) = linalg::vec(lay.get_matrix(y, "F"));
        return Vector(param.constraint_matrix * stacked);
      },
      param.rhs);

  const Matrix eye_n = Matrix::Identity(n, n);
  if (pi.has_lmi()) {
    Matrix zk = closed_loop(sys, anchor.F);
    if (pi.has_alpha()) zk += anchor.alpha * eye_n;
    Matrix pk = linalg::symmetrize(anchor.P);
    Matrix g2k = zk.transpose() * zk + pk * pk;
    Matrix theta = pi.tag == PiVariant::Tag::Stability
                       ? Matrix(sys.H.transpose() * sys.H + pi.eps * eye_n)
                       : Matrix(Matrix::Zero(n, n));
    prog.add_psd_block("dc_lmi", 2 * n, [&, zk, pk, g2k, theta](const Vector& y) {
      Matrix f = lay.get_matrix(y, "F");
      Matrix p = lay.get_matrix(y, "P");
      Matrix z = sys.A + sys.B * f;
      if (pi.has_alpha()) z += lay.get_scalar(y, "alpha") * eye_n;
      Matrix dz = z - zk;
      Matrix dp = p - pk;
      Matrix tl = g2k + dz.transpose() * zk + zk.transpose() * dz + dp * pk + pk * dp - theta;
      Matrix blk(2 * n, 2 * n);
      blk.topLeftCorner(n, n) = tl;
      blk.topRightCorner(n, n) = (z + p).transpose();
      blk.bottomLeftCorner(n, n) = z + p;
      blk.bottomRightCorner(n, n) = eye_n;
      return blk;
    });
  }

  prog.add_psd_block("p_margin", n, [&](const Vector& y) {
    return Matrix(lay.get_matrix(y, "P") - cfg.delta * eye_n);
  });

  if (pi.has_alpha()) {
    prog.add_psd_block("alpha_cap", 1, [&](const Vector& y) {
      return Matrix(Matrix::Constant(1, 1, cfg.alpha_cap - lay.get_scalar(y, "alpha")));
    });
  }

  if (obj.tag == Objective::Tag::GainNorm) {
    prog.add_psd_block("gain", m + n, [&, m, n](const Vector& y) {
      Matrix f = lay.get_matrix(y, "F");
      double s = lay.get_scalar(y, "s");
      Matrix blk = Matrix::Zero(m + n, m + n);
      blk.topLeftCorner(m, m) = s * Matrix::Identity(m, m);
      blk.topRightCorner(m, n) = f;
      blk.bottomLeftCorner(n, m) = f.transpose();
      blk.bottomRightCorner(n, n) = s * eye_n;
      return blk;
    });
  }

  // Proximal epigraph: t_prox >= |F-Fk|_F^2 + |P-Pk|_F^2 (+ (alpha-alphak)^2).
  const Eigen::Index d = m * n + conic::vech_size(n) + (pi.has_alpha() ? 1 : 0);
  const double sqrt2 = std::sqrt(2.0);
  prog.add_psd_block("prox", d + 1, [&, d, sqrt2](const Vector& y) {
    Vector w(d);
    Matrix f = lay.get_matrix(y, "F");
    Matrix p = lay.get_matrix(y, "P");
    Eigen::Index at = 0;
    Vector df = linalg::vec(f - anchor.F);
    w.head(m * n) = df;
    at += m * n;
    for (Eigen::Index c = 0; c < n; ++c) {
      for (Eigen::Index r = c; r < n; ++r) {
        double weight = (r == c) ? 1.0 : sqrt2;
        w(at++) = weight * (p(r, c) - anchor.P(r, c));
      }
    }
    if (pi.has_alpha()) w(at++) = lay.get_scalar(y, "alpha") - anchor.alpha;
    Matrix blk = Matrix::Zero(d + 1, d + 1);
    blk.topLeftCorner(d, d) = Matrix::Identity(d, d);
    blk.block(0, d, d, 1) = w;
    blk.block(d, 0, 1, d) = w.transpose();
    blk(d, d) = lay.get_scalar(y, "t_prox");
    return blk;
  });

  prog.set_objective([&](const Vector& y) {
    double j = 0.0;
    switch (obj.tag) {
      case Objective::Tag::H2Trace:
        j = (sys.E.transpose() * lay.get_matrix(y, "P") * sys.E).trace();
        break;
      case Objective::Tag::NegAlpha:
        j = -lay.get_scalar(y, "alpha");
        break;
      case Objective::Tag::GainNorm:
        j = lay.get_scalar(y, "s");
        break;
      case Objective::Tag::Custom: {
        if (pi.has_alpha()) j += obj.c_alpha * lay.get_scalar(y, "alpha");
        if (obj.c_f.size() > 0) j += obj.c_f.cwiseProduct(lay.get_matrix(y, "F")).sum();
        if (obj.c_p.size() > 0) j += obj.c_p.cwiseProduct(lay.get_matrix(y, "P")).sum();
        if (obj.c_x.size() > 0) j += obj.c_x.cwiseProduct(lay.get_matrix(y, "X")).sum();
        break;
      }
    }
    return j + 0.5 * cfg.gamma * lay.get_scalar(y, "t_prox");
  });

  return prog;
}

namespace {

Vector pack_iterate(const conic::ConicProgram& prog, const Objective& obj, const PiVariant& pi,
                    const Iterate& it) {
  Vector y = Vector::Zero(prog.layout.total());
  prog.layout.set_matrix(y, "X", it.X);
  prog.layout.set_matrix(y, "F", it.F);
  prog.layout.set_matrix(y, "P", linalg::symmetrize(it.P));
  if (pi.has_alpha()) prog.layout.set_scalar(y, "alpha", it.alpha);
  if (obj.tag == Objective::Tag::GainNorm) {
    prog.layout.set_scalar(y, "s", linalg::spectral_norm(it.F) + 1.0);
  }
  prog.layout.set_scalar(y, "t_prox", 1.0);
  return y;
}

void check_init_feasible(const LtiSystem& sys, const PiVariant& pi, const SolveConfig& cfg,
                         const Iterate& init) {
  Tolerance tol;
  if (init.dd_residual > 1e-6) {
    throw Error(Error::Code::InvalidArgument, "solve_ddpf: init violates the DD equation");
  }
  if (linalg::min_eig_sym(linalg::symmetrize(init.P)) < 0.5 * cfg.delta) {
    throw Error(Error::Code::InvalidArgument, "solve_ddpf: init P is not positive definite enough");
  }
  if (pi.has_lmi() && lyap_margin_of(sys, pi, init) > tol.psd_tol) {
    throw Error(Error::Code::InvalidArgument, "solve_ddpf: init violates the Lyapunov inequality");
  }
}

}  // namespace

std::pair<SynthesisResult, std::vector<Iterate>> solve_ddpf(const LtiSystem& sys,
                                                            const geometry::Subspace& v,
                                                            const Objective& obj,
                                                            const PiVariant& pi,
                                                            const SolveConfig& cfg,
                                                            const Iterate& init) {
  cfg.validate();
  Tolerance tol;
  geometry::DdParameterization param = geometry::assemble_dd_system(sys, v, tol);
  check_init_feasible(sys, pi, cfg, init);

  SolveConfig eff = cfg;
  if (pi.has_alpha()) {
    // The supremum of certifiable decay is the abscissa of A + BF itself,
    // approached only as |P| blows up; chasing the last fraction of it keeps
    // the prox step bounded away from zero forever. Cap alpha where the
    // Lyapunov certificate still has a resolvable interior.
    double depth = -linalg::spectral_abscissa(closed_loop(sys, init.F));
    if (depth > 0.0) eff.alpha_cap = std::min(cfg.alpha_cap, std::max(0.99 * depth, init.alpha));
  }

  Iterate cur = init;
  cur.objective_value = objective_of(sys, obj, cur);
  std::vector<Iterate> trace{cur};

  SynthesisResult res;
  bool converged = false;

  for (int iter = 1; iter <= cfg.max_iters; ++iter) {
    conic::ConicProgram prog = linearized_subproblem(sys, v, param, obj, pi, cur, eff);
    conic::SolverOptions opts = cfg.solver;
    opts.warm_start = pack_iterate(prog, obj, pi, cur);
    conic::ConicSolution sol = conic::solve_conic(prog, opts);
    if (sol.status != conic::SolveStatus::Optimal) {
      res.subproblem_failure = true;
      res.message = std::string("subproblem ") + conic::to_string(sol.status) +
                    (sol.message.empty() ? "" : ": " + sol.message);
      break;
    }

    Matrix x = sol.values.at("X");
    Matrix f = sol.values.at("F");
    Matrix p = linalg::symmetrize(sol.values.at("P"));
    double alpha = pi.has_alpha() ? sol.values.at("alpha")(0, 0) : cur.alpha;

    // Repair: minimum-norm projection of (X, F) back onto the DD affine set.
    const auto k = v.dim;
    const auto mn = sys.m() * sys.n();
    Vector yxf(k * k + mn);
    yxf.head(k * k) = linalg::vec(x);
    yxf.tail(mn) = linalg::vec(f);
    Vector resid = param.constraint_matrix * yxf - param.rhs;
    if (resid.cwiseAbs().maxCoeff() > 0.0) {
      yxf -= linalg::lstsq(param.constraint_matrix, resid, tol);
    }
    x = linalg::unvec(yxf.head(k * k), k, k);
    f = linalg::unvec(yxf.tail(mn), sys.m(), sys.n());

    Iterate next;
    next.alpha = alpha;
    next.F = f;
    next.P = p;
    next.X = x;
    next.dd_residual = dd_equation_residual(sys, v, x, f);
    next.lyap_margin = lyap_margin_of(sys, pi, next);
    next.objective_value = objective_of(sys, obj, next);

    double step = (next.F - cur.F).squaredNorm() + (next.P - cur.P).squaredNorm();
    if (pi.has_alpha()) step += (next.alpha - cur.alpha) * (next.alpha - cur.alpha);

    trace.push_back(next);
    cur = next;
    if (step <= cfg.stop_eps) {
      converged = true;
      break;
    }
  }

  Controller ctrl(cur.F);
  ctrl.X = cur.X;
  ctrl.P = cur.P;
  if (pi.has_alpha()) ctrl.alpha = cur.alpha;
  res.controller = std::move(ctrl);
  res.metrics = evaluate_controller(sys, v, res.controller, tol);
  res.iterations = static_cast<int>(trace.size()) - 1;
  res.converged = converged;
  if (res.message.empty()) {
    res.message = converged ? "stopping rule satisfied" : "iteration limit reached";
  }
  return {std::move(res), std::move(trace)};
}

MetricsRow evaluate_controller(const LtiSystem& sys, const geometry::Subspace& v,
                               const Controller& ctrl, const Tolerance& tol) {
  if (ctrl.F.rows() != sys.m() || ctrl.F.cols() != sys.n()) {
    throw Error(Error::Code::DimensionMismatch, "evaluate_controller: F has wrong shape");
  }
  MetricsRow row;
  Matrix af = closed_loop(sys, ctrl.F);
  double sa = linalg::spectral_abscissa(af);
  row.hurwitz = sa < -1e-10;
  // Controllers without a certified alpha use the maximum eigenvalue of A_F.
  double alpha_used = ctrl.alpha ? *ctrl.alpha : sa;
  row.f_alpha = -alpha_used;
  row.f_gain = linalg::spectral_norm(ctrl.F);
  if (ctrl.P) {
    row.f_h2 = (sys.E.transpose() * (*ctrl.P) * sys.E).trace();
  } else {
    row.f_h2 = h2::h2_norm_sq(sys, ctrl.F, tol).h2_sq;
  }
  if (v.dim == 0) {
    row.f_dd = 0.0;
  } else {
    Matrix x = ctrl.X ? *ctrl.X : geometry::dd_minimizing_x(sys, v, ctrl.F);
    row.f_dd = linalg::spectral_norm(v.basis * x - af * v.basis);
  }
  return row;
}

void write_trace_csv(const std::string& path, const std::vector<Iterate>& trace, double gamma) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Code::Io, "cannot open for writing: " + path);
  out << "iter,objective,penalty,dd_residual,lyap_margin,alpha\n";
  char buf[512];
  for (size_t i = 0; i < trace.size(); ++i) {
    double penalty = 0.0;
    if (i > 0) {
      const Iterate& prev = trace[i - 1];
      const Iterate& cur = trace[i];
      double step = (cur.F - prev.F).squaredNorm() + (cur.P - prev.P).squaredNorm() +
                    (cur.alpha - prev.alpha) * (cur.alpha - prev.alpha);
      penalty = 0.5 * gamma * step;
    }
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", i,
                  trace[i].objective_value, penalty, trace[i].dd_residual, trace[i].lyap_margin,
                  trace[i].alpha);
    out << buf;
  }
  if (!out) throw Error(Error::Code::Io, "write failed: " + path);
}

}  // namespace ddsyn::ddpf
