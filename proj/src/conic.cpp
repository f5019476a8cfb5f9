// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/conic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <sstream>

namespace ddsyn::conic {

Eigen::Index vech_size(Eigen::Index n) { return n * (n + 1) / 2; }

Vector sym_to_vech(const Matrix& s) {
  if (s.rows() != s.cols()) throw Error(Error::Code::DimensionMismatch, "sym_to_vech: not square");
  const auto n = s.rows();
  Vector v(vech_size(n));
  Eigen::Index at = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c; r < n; ++r) v(at++) = 0.5 * (s(r, c) + s(c, r));
  }
  return v;
}

Matrix vech_to_sym(const Vector& v, Eigen::Index n) {
  if (v.size() != vech_size(n)) throw Error(Error::Code::DimensionMismatch, "vech_to_sym: bad length");
  Matrix s(n, n);
  Eigen::Index at = 0;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c; r < n; ++r) {
      s(r, c) = v(at);
      s(c, r) = v(at);
      ++at;
    }
  }
  return s;
}

Eigen::Index VariableLayout::add_slice(VarSlice slice) {
  if (index_.count(slice.name)) {
    throw Error(Error::Code::InvalidArgument, "VariableLayout: duplicate slice " + slice.name);
  }
  slice.offset = total_;
  total_ += slice.size;
  index_[slice.name] = slices_.size();
  slices_.push_back(std::move(slice));
  return slices_.back().offset;
}

Eigen::Index VariableLayout::add_scalar(const std::string& name) {
  return add_slice({name, VarKind::Scalar, 1, 1, 0, 1});
}

Eigen::Index VariableLayout::add_matrix(const std::string& name, Eigen::Index rows,
                                        Eigen::Index cols) {
  if (rows < 1 || cols < 1) throw Error(Error::Code::InvalidArgument, "add_matrix: empty slice");
  return add_slice({name, VarKind::Mat, rows, cols, 0, rows * cols});
}

Eigen::Index VariableLayout::add_symmetric(const std::string& name, Eigen::Index n) {
  if (n < 1) throw Error(Error::Code::InvalidArgument, "add_symmetric: empty slice");
  return add_slice({name, VarKind::Sym, n, n, 0, vech_size(n)});
}

bool VariableLayout::contains(const std::string& name) const { return index_.count(name) > 0; }

const VarSlice& VariableLayout::slice(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(Error::Code::InvalidArgument, "VariableLayout: unknown slice " + name);
  }
  return slices_[it->second];
}

double VariableLayout::get_scalar(const Vector& y, const std::string& name) const {
  const VarSlice& s = slice(name);
  if (s.kind != VarKind::Scalar) throw Error(Error::Code::InvalidArgument, name + " is not scalar");
  return y(s.offset);
}

void VariableLayout::set_scalar(Vector& y, const std::string& name, double value) const {
  const VarSlice& s = slice(name);
  if (s.kind != VarKind::Scalar) throw Error(Error::Code::InvalidArgument, name + " is not scalar");
  y(s.offset) = value;
}

Matrix VariableLayout::get_matrix(const Vector& y, const std::string& name) const {
  const VarSlice& s = slice(name);
  switch (s.kind) {
    case VarKind::Scalar:
      return Matrix::Constant(1, 1, y(s.offset));
    case VarKind::Mat:
      return linalg::unvec(y.segment(s.offset, s.size), s.rows, s.cols);
    case VarKind::Sym:
      return vech_to_sym(y.segment(s.offset, s.size), s.rows);
  }
  throw Error(Error::Code::InvalidArgument, "get_matrix: bad kind");
}

void VariableLayout::set_matrix(Vector& y, const std::string& name, const Matrix& value) const {
  const VarSlice& s = slice(name);
  switch (s.kind) {
    case VarKind::Scalar:
      if (value.size() != 1) throw Error(Error::Code::DimensionMismatch, name + ": expected 1x1");
      y(s.offset) = value(0, 0);
      return;
    case VarKind::Mat:
      if (value.rows() != s.rows || value.cols() != s.cols) {
        throw Error(Error::Code::DimensionMismatch, name + ": shape mismatch");
      }
      y.segment(s.offset, s.size) = linalg::vec(value);
      return;
    case VarKind::Sym:
      if (value.rows() != s.rows || value.cols() != s.cols) {
        throw Error(Error::Code::DimensionMismatch, name + ": shape mismatch");
      }
      y.segment(s.offset, s.size) = sym_to_vech(value);
      return;
  }
}

Matrix PsdBlock::eval(const Vector& y) const {
  Matrix m = c0;
  for (const auto& [i, a] : coeffs) m += y(i) * a;
  return m;
}

ConicProgram::ConicProgram(VariableLayout l) : layout(std::move(l)) {
  objective = Vector::Zero(layout.total());
  eq_lhs = Matrix::Zero(0, layout.total());
  eq_rhs = Vector::Zero(0);
}

namespace {

Matrix check_symmetric(Matrix m, const std::string& where) {
  double scale = 1.0 + m.cwiseAbs().maxCoeff();
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale) {
    throw Error(Error::Code::InvalidArgument, where + ": block map is not symmetric-valued");
  }
  return linalg::symmetrize(m);
}

Vector probe_point(Eigen::Index total) {
  Vector y(total);
  for (Eigen::Index i = 0; i < total; ++i) y(i) = std::sin(static_cast<double>(i) + 1.0);
  return y;
}

}  // namespace

void ConicProgram::add_psd_block(const std::string& name, Eigen::Index dim,
                                 const std::function<Matrix(const Vector&)>& f) {
  if (dim < 1) throw Error(Error::Code::InvalidArgument, "add_psd_block: dim must be positive");
  const auto total = layout.total();
  Vector zero = Vector::Zero(total);
  PsdBlock block;
  block.name = name;
  block.dim = dim;
  Matrix c0 = f(zero);
  if (c0.rows() != dim || c0.cols() != dim) {
    throw Error(Error::Code::DimensionMismatch, "add_psd_block: " + name + " has wrong shape");
  }
  block.c0 = check_symmetric(std::move(c0), name);
  for (Eigen::Index i = 0; i < total; ++i) {
    Vector e = Vector::Zero(total);
    e(i) = 1.0;
    Matrix ai = check_symmetric(f(e) - block.c0, name);
    if (ai.cwiseAbs().maxCoeff() > 0.0) block.coeffs.emplace_back(i, std::move(ai));
  }
  // Affine-ness guard: the probe must reproduce the map at a generic point.
  Vector y_test = probe_point(total);
  Matrix lhs = block.eval(y_test);
  Matrix rhs = linalg::symmetrize(f(y_test));
  double scale = 1.0 + lhs.cwiseAbs().maxCoeff() + rhs.cwiseAbs().maxCoeff();
  if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-6 * scale) {
    throw Error(Error::Code::InvalidArgument, "add_psd_block: " + name + " is not affine");
  }
  psd_blocks.push_back(std::move(block));
}

void ConicProgram::add_equalities(const std::function<Vector(const Vector&)>& f,
                                  const Vector& rhs) {
  const auto total = layout.total();
  Vector zero = Vector::Zero(total);
  Vector f0 = f(zero);
  if (f0.size() != rhs.size()) {
    throw Error(Error::Code::DimensionMismatch, "add_equalities: rhs size mismatch");
  }
  const auto rows = f0.size();
  Matrix a(rows, total);
  for (Eigen::Index i = 0; i < total; ++i) {
    Vector e = Vector::Zero(total);
    e(i) = 1.0;
    a.col(i) = f(e) - f0;
  }
  Vector y_test = probe_point(total);
  Vector lin = a * y_test + f0;
  Vector act = f(y_test);
  if ((lin - act).cwiseAbs().maxCoeff() > 1e-6 * (1.0 + act.cwiseAbs().maxCoeff())) {
    throw Error(Error::Code::InvalidArgument, "add_equalities: map is not affine");
  }
  Matrix new_lhs(eq_lhs.rows() + rows, total);
  new_lhs.topRows(eq_lhs.rows()) = eq_lhs;
  new_lhs.bottomRows(rows) = a;
  Vector new_rhs(eq_rhs.size() + rows);
  new_rhs.head(eq_rhs.size()) = eq_rhs;
  new_rhs.tail(rows) = rhs - f0;
  eq_lhs = std::move(new_lhs);
  eq_rhs = std::move(new_rhs);
}

void ConicProgram::set_objective(const std::function<double(const Vector&)>& f) {
  const auto total = layout.total();
  Vector zero = Vector::Zero(total);
  objective_constant = f(zero);
  objective = Vector::Zero(total);
  for (Eigen::Index i = 0; i < total; ++i) {
    Vector e = Vector::Zero(total);
    e(i) = 1.0;
    objective(i) = f(e) - objective_constant;
  }
  Vector y_test = probe_point(total);
  double lin = objective.dot(y_test) + objective_constant;
  double act = f(y_test);
  if (std::abs(lin - act) > 1e-6 * (1.0 + std::abs(act))) {
    throw Error(Error::Code::InvalidArgument, "set_objective: functional is not linear");
  }
}

double ConicProgram::objective_value(const Vector& y) const {
  return objective.dot(y) + objective_constant;
}

double ConicProgram::max_psd_violation(const Vector& y) const {
  double worst = 0.0;
  for (const auto& block : psd_blocks) {
    double lmin = linalg::min_eig_sym(block.eval(y));
    worst = std::max(worst, std::max(0.0, -lmin));
  }
  return worst;
}

double ConicProgram::max_eq_residual(const Vector& y) const {
  if (eq_lhs.rows() == 0) return 0.0;
  return (eq_lhs * y - eq_rhs).cwiseAbs().maxCoeff();
}

namespace {

void append_triplets(std::ostringstream& out, const std::string& tag, const Matrix& m,
                     const char* prefix = "") {
  char buf[64];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (m(r, c) == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << tag << ' ' << prefix << r << ' ' << c << ' ' << buf << '\n';
    }
  }
}

}  // namespace

std::string ConicProgram::dump() const {
  std::ostringstream out;
  char buf[64];
  out << "conic-program vars " << layout.total() << '\n';
  for (const auto& s : layout.slices()) {
    const char* kind = s.kind == VarKind::Scalar ? "scalar" : (s.kind == VarKind::Mat ? "mat" : "sym");
    out << "slice " << s.name << ' ' << kind << ' ' << s.rows << ' ' << s.cols << ' ' << s.offset
        << ' ' << s.size << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%.17g", objective_constant);
  out << "objective-constant " << buf << '\n';
  for (Eigen::Index i = 0; i < objective.size(); ++i) {
    if (objective(i) == 0.0) continue;
    std::snprintf(buf, sizeof(buf), "%.17g", objective(i));
    out << "objective " << i << ' ' << buf << '\n';
  }
  out << "equalities " << eq_lhs.rows() << '\n';
  append_triplets(out, "eq", eq_lhs);
  for (Eigen::Index r = 0; r < eq_rhs.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", eq_rhs(r));
    out << "eq-rhs " << r << ' ' << buf << '\n';
  }
  for (const auto& block : psd_blocks) {
    out << "psd-block " << block.name << " dim " << block.dim << '\n';
    append_triplets(out, "const", block.c0);
    for (const auto& [i, a] : block.coeffs) {
      char head[64];
      std::snprintf(head, sizeof(head), "coeff %lld ", static_cast<long long>(i));
      append_triplets(out, head, a);
    }
  }
  return out.str();
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::NumericalFailure:
      return "numerical-failure";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Log-barrier path-following backend.
// ---------------------------------------------------------------------------

namespace {

struct RBlock {
  Eigen::Index dim = 0;
  Matrix c0;
  std::vector<int> idx;       // reduced-variable indices with nonzero coefficient
  std::vector<Matrix> coeff;  // parallel to idx
  // Arrowhead fast path: blocks of the form [I, w(u); w(u)', tau(u)] have
  // log det = log(tau - |w|^2), so the barrier derivatives collapse to a few
  // inner products instead of per-coefficient triangular solves.
  bool arrow = false;
  Vector w0;      // dim-1
  double tau0 = 0.0;
  Matrix warr;    // (dim-1) x idx.size(): column a = top-right strip of coeff[a]
  Vector tauarr;  // idx.size()
  Matrix gram;    // warr' warr, fixed per solve
};

void detect_arrowhead(RBlock& blk) {
  const auto d = blk.dim - 1;
  if (d < 1) return;
  Matrix lead = blk.c0.topLeftCorner(d, d) - Matrix::Identity(d, d);
  if (lead.cwiseAbs().maxCoeff() != 0.0) return;
  for (const auto& cj : blk.coeff) {
    if (cj.topLeftCorner(d, d).cwiseAbs().maxCoeff() != 0.0) return;
  }
  blk.arrow = true;
  blk.w0 = blk.c0.block(0, d, d, 1);
  blk.tau0 = blk.c0(d, d);
  const auto na = static_cast<Eigen::Index>(blk.coeff.size());
  blk.warr.resize(d, na);
  blk.tauarr.resize(na);
  for (Eigen::Index a = 0; a < na; ++a) {
    blk.warr.col(a) = blk.coeff[a].block(0, d, d, 1);
    blk.tauarr(a) = blk.coeff[a](d, d);
  }
  blk.gram = blk.warr.transpose() * blk.warr;
}

// Per-block evaluation state: generic blocks carry the assembled matrix and
// its Cholesky factor, arrowhead blocks just the strip w and slack s.
struct BlockState {
  std::vector<Matrix> m;
  std::vector<Eigen::LLT<Matrix>> llt;
  std::vector<Vector> w;
  std::vector<double> s;
};

bool eval_blocks(const std::vector<RBlock>& blocks, const Vector& u, BlockState& st) {
  st.m.resize(blocks.size());
  st.llt.resize(blocks.size());
  st.w.resize(blocks.size());
  st.s.resize(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b) {
    const RBlock& blk = blocks[b];
    if (blk.arrow) {
      Vector w = blk.w0;
      double tau = blk.tau0;
      for (size_t a = 0; a < blk.idx.size(); ++a) {
        const double ua = u(blk.idx[a]);
        w += ua * blk.warr.col(static_cast<Eigen::Index>(a));
        tau += ua * blk.tauarr(static_cast<Eigen::Index>(a));
      }
      const double s = tau - w.squaredNorm();
      if (!std::isfinite(s) || s <= 0.0) return false;
      st.w[b] = std::move(w);
      st.s[b] = s;
      continue;
    }
    st.m[b] = blk.c0;
    for (size_t a = 0; a < blk.idx.size(); ++a) {
      st.m[b] += u(blk.idx[a]) * blk.coeff[a];
    }
    if (!st.m[b].allFinite()) return false;
    st.llt[b].compute(st.m[b]);
    if (st.llt[b].info() != Eigen::Success) return false;
  }
  return true;
}

double log_det_sum(const std::vector<RBlock>& blocks, const BlockState& st) {
  double s = 0.0;
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].arrow) {
      s += std::log(st.s[b]);
    } else {
      s += 2.0 * st.llt[b].matrixLLT().diagonal().array().log().sum();
    }
  }
  return s;
}

struct CenterResult {
  bool converged = false;
  int steps = 0;
};

// Minimizes t*c.u - sum_b log det M_b(u) over strictly feasible u.
CenterResult newton_center(const std::vector<RBlock>& blocks, const Vector& c, double t,
                           Vector& u, int max_newton, double dec_tol) {
  const auto r = u.size();
  CenterResult result;
  BlockState st, st_try;
  std::vector<Matrix> tj;
  for (int step = 0; step < max_newton; ++step) {
    if (!eval_blocks(blocks, u, st)) return result;
    double phi0 = t * c.dot(u) - log_det_sum(blocks, st);
    Vector g = t * c;
    Matrix h = Matrix::Zero(r, r);
    for (size_t b = 0; b < blocks.size(); ++b) {
      const auto& blk = blocks[b];
      const size_t na = blk.idx.size();
      if (blk.arrow) {
        // grad log det = ds/s, hess log det = -2 gram/s - ds ds'/s^2.
        const double s = st.s[b];
        Vector ds = blk.tauarr - 2.0 * (blk.warr.transpose() * st.w[b]);
        for (size_t a = 0; a < na; ++a) g(blk.idx[a]) -= ds(static_cast<Eigen::Index>(a)) / s;
        for (size_t a = 0; a < na; ++a) {
          for (size_t bb = a; bb < na; ++bb) {
            const auto ia = static_cast<Eigen::Index>(a);
            const auto ib = static_cast<Eigen::Index>(bb);
            double v = 2.0 * blk.gram(ia, ib) / s + ds(ia) * ds(ib) / (s * s);
            h(blk.idx[a], blk.idx[bb]) += v;
            if (blk.idx[a] != blk.idx[bb]) h(blk.idx[bb], blk.idx[a]) += v;
          }
        }
        continue;
      }
      tj.resize(na);
      for (size_t a = 0; a < na; ++a) {
        tj[a] = st.llt[b].solve(blk.coeff[a]);
        g(blk.idx[a]) -= tj[a].trace();
      }
      for (size_t a = 0; a < na; ++a) {
        for (size_t bb = a; bb < na; ++bb) {
          double v = tj[a].cwiseProduct(tj[bb].transpose()).sum();
          h(blk.idx[a], blk.idx[bb]) += v;
          if (blk.idx[a] != blk.idx[bb]) h(blk.idx[bb], blk.idx[a]) += v;
        }
      }
    }
    h = linalg::symmetrize(h);

    Vector d;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
      Matrix h_reg = h;
      if (ridge > 0.0) h_reg.diagonal().array() += ridge;
      Eigen::LDLT<Matrix> ldlt(h_reg);
      if (ldlt.info() == Eigen::Success) {
        d = ldlt.solve(-g);
        if (d.allFinite() && g.dot(d) < 0.0) break;
      }
      d.resize(0);
      ridge = (ridge == 0.0) ? 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()) : ridge * 100.0;
    }
    if (d.size() == 0) return result;

    double dec2 = -g.dot(d);
    ++result.steps;
    if (dec2 * 0.5 <= dec_tol) {
      result.converged = true;
      return result;
    }

    double alpha = 1.0;
    bool accepted = false;
    double slope = g.dot(d);
    for (int ls = 0; ls < 60; ++ls) {
      Vector u_try = u + alpha * d;
      if (eval_blocks(blocks, u_try, st_try)) {
        double phi_try = t * c.dot(u_try) - log_det_sum(blocks, st_try);
        if (phi_try <= phi0 + 1e-4 * alpha * slope) {
          u = std::move(u_try);
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Progress stalled at line-search resolution: treat as centered.
      result.converged = dec2 * 0.5 <= 1e-4;
      return result;
    }
    if (u.norm() > 1e14) return result;
  }
  return result;
}

double min_eig_of(const Matrix& m) { return linalg::min_eig_sym(m); }

class BarrierBackend final : public Backend {
 public:
  ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) override {
    try {
      return solve_impl(prog, opts);
    } catch (const std::exception& e) {
      ConicSolution sol;
      sol.status = SolveStatus::NumericalFailure;
      sol.message = std::string("barrier backend error: ") + e.what();
      return sol;
    }
  }

 private:
  static double option(const SolverOptions& opts, const std::string& key, double fallback) {
    auto it = opts.extra.find(key);
    return it == opts.extra.end() ? fallback : it->second;
  }

  static ConicSolution package(const ConicProgram& prog, const Vector& y, SolveStatus status,
                               double gap, int iterations, std::string message) {
    ConicSolution sol;
    sol.status = status;
    sol.y = y;
    for (const auto& s : prog.layout.slices()) {
      sol.values[s.name] = prog.layout.get_matrix(y, s.name);
    }
    sol.objective = prog.objective_value(y);
    sol.max_psd_violation = prog.max_psd_violation(y);
    sol.max_eq_residual = prog.max_eq_residual(y);
    sol.duality_gap = gap;
    sol.iterations = iterations;
    sol.message = std::move(message);
    return sol;
  }

  ConicSolution solve_impl(const ConicProgram& prog, const SolverOptions& opts) {
    const auto total = prog.layout.total();
    const double mu = option(opts, "mu", 20.0);
    const int max_newton = static_cast<int>(option(opts, "max_newton", 80.0));
    // Stages only need approximate centering; the returned point gets one
    // tight centering pass afterwards so the duals are usable.
    const double dec_tol = option(opts, "newton_dec_tol", 2.5e-2);
    const double final_dec_tol = option(opts, "final_dec_tol", 1e-10);
    Tolerance tol;

    if (total == 0) {
      ConicSolution sol;
      sol.status = SolveStatus::Optimal;
      sol.y = Vector::Zero(0);
      sol.objective = prog.objective_constant;
      sol.message = "empty program";
      return sol;
    }

    // Eliminate equality constraints: y = y0 + N u.
    Vector y0 = Vector::Zero(total);
    Matrix nsp = Matrix::Identity(total, total);
    if (prog.eq_lhs.rows() > 0) {
      y0 = linalg::lstsq(prog.eq_lhs, prog.eq_rhs, tol);
      double resid = (prog.eq_lhs * y0 - prog.eq_rhs).cwiseAbs().maxCoeff();
      if (resid > 1e-8 * (1.0 + prog.eq_rhs.cwiseAbs().maxCoeff())) {
        ConicSolution sol;
        sol.status = SolveStatus::Infeasible;
        sol.message = "equality constraints are inconsistent";
        return sol;
      }
      nsp = linalg::kernel_basis(prog.eq_lhs, tol);
    }
    const auto r = nsp.cols();

    Vector c_red = nsp.transpose() * prog.objective;

    std::vector<RBlock> blocks(prog.psd_blocks.size());
    Eigen::Index dim_sum = 0;
    for (size_t b = 0; b < prog.psd_blocks.size(); ++b) {
      const auto& src = prog.psd_blocks[b];
      RBlock& dst = blocks[b];
      dst.dim = src.dim;
      dim_sum += src.dim;
      dst.c0 = src.eval(y0);
      for (Eigen::Index j = 0; j < r; ++j) {
        Matrix cj = Matrix::Zero(src.dim, src.dim);
        for (const auto& [i, a] : src.coeffs) {
          if (nsp(i, j) != 0.0) cj += nsp(i, j) * a;
        }
        if (cj.cwiseAbs().maxCoeff() > 0.0) {
          dst.idx.push_back(static_cast<int>(j));
          dst.coeff.push_back(std::move(cj));
        }
      }
      detect_arrowhead(dst);
    }

    if (blocks.empty()) {
      if (r == 0 || c_red.cwiseAbs().maxCoeff() <= 1e-12) {
        return package(prog, y0, SolveStatus::Optimal, 0.0, 0, "linear system solved exactly");
      }
      ConicSolution sol;
      sol.status = SolveStatus::NumericalFailure;
      sol.message = "objective unbounded along unconstrained directions";
      return sol;
    }

    if (r == 0) {
      double worst = 0.0;
      for (const auto& blk : blocks) worst = std::min(worst, min_eig_of(blk.c0));
      if (-worst <= tol.psd_tol) {
        return package(prog, y0, SolveStatus::Optimal, 0.0, 0, "fully pinned by equalities");
      }
      ConicSolution sol;
      sol.status = SolveStatus::Infeasible;
      sol.message = "equalities pin the variables to an infeasible point";
      return sol;
    }

    int newton_total = 0;

    // Phase I: find strictly feasible u (all blocks positive definite).
    Vector u = Vector::Zero(r);
    bool feasible = false;
    bool warm = false;
    if (opts.warm_start.size() == total) {
      double ws_eq = prog.eq_lhs.rows() == 0
                         ? 0.0
                         : (prog.eq_lhs * opts.warm_start - prog.eq_rhs).cwiseAbs().maxCoeff();
      if (ws_eq <= 1e-6 * (1.0 + prog.eq_rhs.cwiseAbs().maxCoeff())) {
        Vector u_ws = nsp.transpose() * (opts.warm_start - y0);
        BlockState st;
        if (eval_blocks(blocks, u_ws, st)) {
          u = u_ws;
          feasible = true;
          warm = true;
        }
      }
    }
    if (!feasible) {
      BlockState st;
      if (eval_blocks(blocks, u, st)) {
        double worst = 1.0;
        for (size_t b = 0; b < blocks.size(); ++b) {
          worst = std::min(worst, blocks[b].arrow ? st.s[b] : min_eig_of(st.m[b]));
        }
        if (worst > 0.0) feasible = true;
      }
    }
    if (!feasible) {
      std::vector<RBlock> aug = blocks;
      for (auto& blk : aug) {
        blk.idx.push_back(static_cast<int>(r));
        blk.coeff.push_back(Matrix::Identity(blk.dim, blk.dim));
        blk.arrow = false;  // the identity shift breaks the arrowhead form
      }
      double s0 = 0.0;
      for (const auto& blk : blocks) s0 = std::max(s0, -min_eig_of(blk.c0));
      s0 += 1.0;
      Vector ua = Vector::Zero(r + 1);
      ua(r) = s0;
      Vector ca = Vector::Zero(r + 1);
      ca(r) = 1.0;

      double t = 1.0;
      for (int stage = 0; stage < 80 && !feasible; ++stage) {
        auto cr = newton_center(aug, ca, t, ua, max_newton, dec_tol);
        newton_total += cr.steps;
        double s_cur = ua(r);
        if (s_cur < 0.0) {
          Vector u_cand = ua.head(r);
          BlockState st;
          if (eval_blocks(blocks, u_cand, st)) {
            u = u_cand;
            feasible = true;
            break;
          }
        }
        double gap = static_cast<double>(dim_sum) / t;
        if (gap < 1e-9) {
          ConicSolution sol;
          sol.iterations = newton_total;
          if (s_cur - gap > 1e-9) {
            sol.status = SolveStatus::Infeasible;
            sol.message = "phase I: no positive-semidefinite point exists (margin " +
                          std::to_string(s_cur) + ")";
          } else {
            sol.status = SolveStatus::NumericalFailure;
            sol.message = "phase I: feasible set has empty or tiny interior";
          }
          return sol;
        }
        if (!cr.converged && cr.steps == 0) break;
        t *= mu;
      }
      if (!feasible) {
        ConicSolution sol;
        sol.status = SolveStatus::NumericalFailure;
        sol.iterations = newton_total;
        sol.message = "phase I stalled before finding a strictly feasible point";
        return sol;
      }
    }

    // Phase II: path-following on the true objective.
    if (c_red.cwiseAbs().maxCoeff() <= 1e-14) {
      Vector y = y0 + nsp * u;
      return package(prog, y, SolveStatus::Optimal, 0.0, newton_total,
                     "feasibility problem: interior point returned");
    }

    // A warm start from a previous closely related solve sits near the high-t
    // central path already, so skip the early stages.
    const double start_gap = option(opts, "start_gap", warm ? 1e-3 : 0.0);
    double t = 1.0;
    if (start_gap > 0.0) t = std::max(1.0, static_cast<double>(dim_sum) / start_gap);
    double gap = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int stage = 0; stage < opts.max_iterations; ++stage) {
      auto cr = newton_center(blocks, c_red, t, u, max_newton, dec_tol);
      newton_total += cr.steps;
      gap = static_cast<double>(dim_sum) / t;
      if (gap <= opts.feas_tol) {
        converged = true;
        break;
      }
      if (!cr.converged && cr.steps == 0) break;
      if (t > 1e19) break;
      t *= mu;
    }
    if (converged) {
      auto cr = newton_center(blocks, c_red, t, u, max_newton, final_dec_tol);
      newton_total += cr.steps;
    }

    Vector y = y0 + nsp * u;
    ConicSolution sol =
        converged ? package(prog, y, SolveStatus::Optimal, gap, newton_total, "converged")
                  : package(prog, y, SolveStatus::NumericalFailure, gap, newton_total,
                            "barrier loop exhausted before reaching the gap target");
    attach_duals(prog, blocks, u, t, sol);
    return sol;
  }

  // Duals of the log barrier: Z_b = M_b^{-1}/t. The stationarity residual is
  // c - sum_b adj(Z_b) - Aeq^T nu minimized over the equality multipliers nu.
  static void attach_duals(const ConicProgram& prog, const std::vector<RBlock>& blocks,
                           const Vector& u, double t, ConicSolution& sol) {
    if (!(t > 0.0) || blocks.empty()) return;
    sol.psd_duals.resize(blocks.size());
    Vector r = prog.objective;
    for (size_t b = 0; b < blocks.size(); ++b) {
      Matrix mb = blocks[b].c0;
      for (size_t a = 0; a < blocks[b].idx.size(); ++a) {
        mb += u(blocks[b].idx[a]) * blocks[b].coeff[a];
      }
      Eigen::LLT<Matrix> llt(mb);
      if (llt.info() != Eigen::Success) return;
      Matrix z = llt.solve(Matrix::Identity(blocks[b].dim, blocks[b].dim)) / t;
      z = linalg::symmetrize(z);
      for (const auto& [i, a] : prog.psd_blocks[b].coeffs) {
        r(i) -= a.cwiseProduct(z).sum();
      }
      sol.psd_duals[b] = std::move(z);
    }
    if (prog.eq_lhs.rows() > 0) {
      Tolerance tol;
      Vector nu = linalg::lstsq(Matrix(prog.eq_lhs.transpose()), r, tol);
      r -= prog.eq_lhs.transpose() * nu;
    }
    sol.kkt_residual = r.cwiseAbs().maxCoeff();
  }
};

std::map<std::string, BackendFactory>& registry() {
  static std::map<std::string, BackendFactory> reg;
  return reg;
}

std::once_flag builtin_flag;

void ensure_builtin() {
  std::call_once(builtin_flag, [] {
    registry()["barrier"] = [] { return std::make_unique<BarrierBackend>(); };
  });
}

}  // namespace

void register_backend(const std::string& id, BackendFactory factory) {
  ensure_builtin();
  registry()[id] = std::move(factory);
}

std::vector<std::string> backend_ids() {
  ensure_builtin();
  std::vector<std::string> ids;
  for (const auto& [id, _] : registry()) ids.push_back(id);
  return ids;
}

ConicSolution solve_conic(const ConicProgram& prog, const SolverOptions& opts) {
  ensure_builtin();
  auto it = registry().find(opts.solver_id);
  if (it == registry().end()) {
    ConicSolution sol;
    sol.status = SolveStatus::NumericalFailure;
    sol.message = "unknown solver backend: " + opts.solver_id;
    return sol;
  }
  auto backend = it->second();
  return backend->solve(prog, opts);
}

}  // namespace ddsyn::conic
