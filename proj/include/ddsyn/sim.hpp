// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ddsyn/model.hpp"

namespace ddsyn::sim {

struct DisturbanceSpec {
  enum class Kind { GaussianWhite, Zero, Custom };
  Kind kind = Kind::Zero;
  double sigma_sq = 0.0;
  std::uint64_t seed = 0;
  Matrix samples;  // Custom: l x steps, one held value per interval

  static DisturbanceSpec zero();
  static DisturbanceSpec gaussian_white(double sigma_sq, std::uint64_t seed);
  static DisturbanceSpec custom(Matrix samples);
};

struct SimulationTrace {
  std::vector<double> tgrid;
  Matrix x;     // n x (steps+1)
  Matrix z;     // p x (steps+1)
  Matrix x_dd;  // disturbance-free twin from the same initial state
  Matrix z_dd;
  Matrix e;      // z_dd - z
  Vector e_cum;  // running trapezoid integral of |e(t)|_2
  Matrix d;      // l x steps, the realized disturbance
};

// Exact ZOH integration of xdot = (A+BF)x + Ed with per-step-constant d.
SimulationTrace simulate(const LtiSystem& sys, const Matrix& f, const Vector& x0,
                         const DisturbanceSpec& dist, double horizon, double dt);

struct SweepEntry {
  std::string controller_id;
  int l = 0;
  int trial = 0;
  double e_cum_t = 0.0;
};

// Common random numbers: the disturbance realization for a given (trial, l)
// is shared across all controllers, so reordering controllers cannot change
// any e_cum value.
std::vector<SweepEntry> noise_sweep(const LtiSystem& sys,
                                    const std::vector<std::pair<std::string, Matrix>>& controllers,
                                    const Vector& x0, int l_min, int l_max, double horizon,
                                    double dt, int trials, std::uint64_t seed);

struct EnergyBoundReport {
  double empirical_energy = 0.0;
  double bound = 0.0;
  bool within = false;
  double h2_sq = 0.0;
  double d_l1 = 0.0;  // integral of |d(t)|_2
};

// Output-energy bound for Hurwitz loops: int |z|^2 <= h2_sq * (int |d| dt)^2
// (Young's convolution inequality applied to z = g * d).
EnergyBoundReport energy_bound_check(const LtiSystem& sys, const Matrix& f,
                                     const Matrix& d_samples, double dt);

void write_trace_csv(const std::string& path, const SimulationTrace& trace);
void write_sweep_csv(const std::string& path, const std::vector<SweepEntry>& entries);

}  // namespace ddsyn::sim
