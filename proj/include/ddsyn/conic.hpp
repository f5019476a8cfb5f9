// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ddsyn/linalg.hpp"

namespace ddsyn::conic {

enum class VarKind { Scalar, Mat, Sym };

struct VarSlice {
  std::string name;
  VarKind kind = VarKind::Scalar;
  Eigen::Index rows = 1;
  Eigen::Index cols = 1;
  Eigen::Index offset = 0;
  Eigen::Index size = 1;
};

// vech storage for symmetric matrices: lower triangle, column by column.
Eigen::Index vech_size(Eigen::Index n);
Vector sym_to_vech(const Matrix& s);
Matrix vech_to_sym(const Vector& v, Eigen::Index n);

class VariableLayout {
 public:
  Eigen::Index add_scalar(const std::string& name);
  Eigen::Index add_matrix(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Eigen::Index add_symmetric(const std::string& name, Eigen::Index n);

  bool contains(const std::string& name) const;
  const VarSlice& slice(const std::string& name) const;
  const std::vector<VarSlice>& slices() const { return slices_; }
  Eigen::Index total() const { return total_; }

  double get_scalar(const Vector& y, const std::string& name) const;
  void set_scalar(Vector& y, const std::string& name, double value) const;
  Matrix get_matrix(const Vector& y, const std::string& name) const;
  void set_matrix(Vector& y, const std::string& name, const Matrix& value) const;

 private:
  Eigen::Index add_slice(VarSlice slice);
  std::vector<VarSlice> slices_;
  std::map<std::string, size_t> index_;
  Eigen::Index total_ = 0;
};

// Affine symmetric-matrix-valued constraint M(y) = c0 + sum_i y_i coeff[i] >= 0,
// stored sparsely over the variables that actually appear.
struct PsdBlock {
  std::string name;
  Eigen::Index dim = 0;
  Matrix c0;
  std::vector<std::pair<Eigen::Index, Matrix>> coeffs;

  Matrix eval(const Vector& y) const;
};

struct ConicProgram {
  VariableLayout layout;
  Vector objective;  // linear functional over the flat decision vector
  double objective_constant = 0.0;
  Matrix eq_lhs;  // 0 x total when absent
  Vector eq_rhs;
  std::vector<PsdBlock> psd_blocks;

  explicit ConicProgram(VariableLayout l);

  // Extracts affine structure by probing f at 0 and at each coordinate axis.
  void add_psd_block(const std::string& name, Eigen::Index dim,
                     const std::function<Matrix(const Vector&)>& f);
  void add_equalities(const std::function<Vector(const Vector&)>& f, const Vector& rhs);
  void set_objective(const std::function<double(const Vector&)>& f);

  double objective_value(const Vector& y) const;
  double max_psd_violation(const Vector& y) const;
  double max_eq_residual(const Vector& y) const;
  std::string dump() const;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(SolveStatus status);

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector y;
  std::map<std::string, Matrix> values;
  double objective = 0.0;
  double max_psd_violation = 0.0;
  double max_eq_residual = 0.0;
  double duality_gap = 0.0;
  std::vector<Matrix> psd_duals;  // one per psd block at an Optimal point
  double kkt_residual = 0.0;      // stationarity residual using the duals
  int iterations = 0;
  std::string message;
};

struct SolverOptions {
  std::string solver_id = "barrier";
  int max_iterations = 400;
  double feas_tol = 1e-9;  // duality-gap target
  bool verbose = false;
  Vector warm_start;  // optional strictly feasible full-space point
  std::map<std::string, double> extra;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual ConicSolution solve(const ConicProgram& prog, const SolverOptions& opts) = 0;
};

using BackendFactory = std::function<std::unique_ptr<Backend>()>;
void register_backend(const std::string& id, BackendFactory factory);
std::vector<std::string> backend_ids();

// Dispatches on opts.solver_id; per-call backend instance, never throws on
// solver breakdown (reports NumericalFailure instead).
ConicSolution solve_conic(const ConicProgram& prog, const SolverOptions& opts = {});

}  // namespace ddsyn::conic
