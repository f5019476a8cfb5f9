// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/sim.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ddsyn/h2.hpp"

namespace ddsyn::sim {

DisturbanceSpec DisturbanceSpec::zero() { return DisturbanceSpec{}; }

DisturbanceSpec DisturbanceSpec::gaussian_white(double sigma_sq, std::uint64_t seed) {
  if (!(sigma_sq >= 0.0)) {
    throw Error(Error::Code::InvalidArgument, "DisturbanceSpec: sigma_sq must be nonnegative");
  }
  DisturbanceSpec spec;
  spec.kind = Kind::GaussianWhite;
  spec.sigma_sq = sigma_sq;
  spec.seed = seed;
  return spec;
}

DisturbanceSpec DisturbanceSpec::custom(Matrix samples) {
  DisturbanceSpec spec;
  spec.kind = Kind::Custom;
  spec.samples = std::move(samples);
  linalg::require_finite(spec.samples, "disturbance samples");
  return spec;
}

namespace {

Matrix draw_disturbance(const DisturbanceSpec& dist, Eigen::Index l, Eigen::Index steps) {
  switch (dist.kind) {
    case DisturbanceSpec::Kind::Zero:
      return Matrix::Zero(l, steps);
    case DisturbanceSpec::Kind::GaussianWhite: {
      Matrix d(l, steps);
      Rng rng(dist.seed);
      const double sigma = std::sqrt(dist.sigma_sq);
      for (Eigen::Index k = 0; k < steps; ++k) {
        for (Eigen::Index i = 0; i < l; ++i) d(i, k) = rng.gauss(0.0, sigma);
      }
      return d;
    }
    case DisturbanceSpec::Kind::Custom:
      if (dist.samples.rows() != l || dist.samples.cols() != steps) {
        throw Error(Error::Code::DimensionMismatch,
                    "simulate: custom disturbance must be l x steps");
      }
      return dist.samples;
  }
  return Matrix::Zero(l, steps);
}

}  // namespace

SimulationTrace simulate(const LtiSystem& sys, const Matrix& f, const Vector& x0,
                         const DisturbanceSpec& dist, double horizon, double dt) {
  if (!(horizon > 0.0) || !(dt > 0.0) || dt > horizon) {
    throw Error(Error::Code::InvalidArgument, "simulate: need 0 < dt <= horizon");
  }
  if (x0.size() != sys.n()) {
    throw Error(Error::Code::DimensionMismatch, "simulate: x0 has wrong length");
  }
  const auto n = sys.n();
  const auto l = sys.l();
  const auto p = sys.p();
  const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));

  Matrix af = closed_loop(sys, f);
  Matrix aug = Matrix::Zero(n + l, n + l);
  aug.topLeftCorner(n, n) = af;
  aug.topRightCorner(n, l) = sys.E;
  Matrix phi = linalg::expm(aug * dt);
  Matrix ad = phi.topLeftCorner(n, n);
  Matrix bd = phi.topRightCorner(n, l);

  SimulationTrace trace;
  trace.d = draw_disturbance(dist, l, steps);
  trace.tgrid.resize(static_cast<size_t>(steps) + 1);
  trace.x = Matrix::Zero(n, steps + 1);
  trace.x_dd = Matrix::Zero(n, steps + 1);
  trace.x.col(0) = x0;
  trace.x_dd.col(0) = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    trace.tgrid[static_cast<size_t>(k)] = static_cast<double>(k) * dt;
    trace.x.col(k + 1) = ad * trace.x.col(k) + bd * trace.d.col(k);
    trace.x_dd.col(k + 1) = ad * trace.x_dd.col(k);
  }
  trace.tgrid[static_cast<size_t>(steps)] = static_cast<double>(steps) * dt;

  trace.z = sys.H * trace.x;
  trace.z_dd = sys.H * trace.x_dd;
  trace.e = trace.z_dd - trace.z;

  trace.e_cum = Vector::Zero(steps + 1);
  double prev = trace.e.col(0).norm();
  for (Eigen::Index k = 1; k <= steps; ++k) {
    double cur = trace.e.col(k).norm();
    trace.e_cum(k) = trace.e_cum(k - 1) + 0.5 * dt * (prev + cur);
    prev = cur;
  }
  (void)p;
  return trace;
}

std::vector<SweepEntry> noise_sweep(const LtiSystem& sys,
                                    const std::vector<std::pair<std::string, Matrix>>& controllers,
                                    const Vector& x0, int l_min, int l_max, double horizon,
                                    double dt, int trials, std::uint64_t seed) {
  if (l_min > l_max || trials < 1) {
    throw Error(Error::Code::InvalidArgument, "noise_sweep: bad l range or trial count");
  }
  const auto steps = static_cast<Eigen::Index>(std::llround(horizon / dt));
  std::vector<SweepEntry> entries;
  entries.reserve(controllers.size() * static_cast<size_t>(l_max - l_min + 1) *
                  static_cast<size_t>(trials));
  for (int trial = 0; trial < trials; ++trial) {
    for (int l = l_min; l <= l_max; ++l) {
      // One realization per (trial, l), shared across all controllers.
      DisturbanceSpec unit = DisturbanceSpec::gaussian_white(
          1.0, mix_seed(seed, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(l)));
      Matrix base = draw_disturbance(unit, sys.l(), steps);
      Matrix scaled = std::sqrt(std::pow(2.0, l)) * base;
      for (const auto& [id, f] : controllers) {
        SimulationTrace trace =
            simulate(sys, f, x0, DisturbanceSpec::custom(scaled), horizon, dt);
        entries.push_back({id, l, trial, trace.e_cum(steps)});
      }
    }
  }
  return entries;
}

EnergyBoundReport energy_bound_check(const LtiSystem& sys, const Matrix& f,
                                     const Matrix& d_samples, double dt) {
  if (!(dt > 0.0) || d_samples.rows() != sys.l() || d_samples.cols() < 1) {
    throw Error(Error::Code::InvalidArgument, "energy_bound_check: bad disturbance realization");
  }
  Matrix af = closed_loop(sys, f);
  if (linalg::spectral_abscissa(af) >= -1e-10) {
    throw Error(Error::Code::InvalidArgument, "energy_bound_check: closed loop must be Hurwitz");
  }

  EnergyBoundReport report;
  h2::H2Report h2rep = h2::h2_norm_sq(sys, f);
  report.h2_sq = h2rep.h2_sq;
  for (Eigen::Index k = 0; k < d_samples.cols(); ++k) {
    report.d_l1 += d_samples.col(k).norm() * dt;
  }
  report.bound = report.h2_sq * report.d_l1 * report.d_l1;

  // Integrate past the disturbance support until the output has decayed.
  const double tail = 10.0 / std::max(1e-3, -linalg::spectral_abscissa(af));
  const auto steps = d_samples.cols();
  const auto tail_steps = static_cast<Eigen::Index>(std::llround(tail / dt));
  Matrix padded = Matrix::Zero(sys.l(), steps + tail_steps);
  padded.leftCols(steps) = d_samples;
  SimulationTrace trace =
      simulate(sys, f, Vector::Zero(sys.n()), DisturbanceSpec::custom(padded),
               static_cast<double>(steps + tail_steps) * dt, dt);
  double prev = trace.z.col(0).squaredNorm();
  for (Eigen::Index k = 1; k < trace.z.cols(); ++k) {
    double cur = trace.z.col(k).squaredNorm();
    report.empirical_energy += 0.5 * dt * (prev + cur);
    prev = cur;
  }
  report.within = report.empirical_energy <= report.bound * 1.05;
  return report;
}

void write_trace_csv(const std::string& path, const SimulationTrace& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Code::Io, "cannot open for writing: " + path);
  const auto n = trace.x.rows();
  const auto p = trace.z.rows();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) out << ",z_" << i;
  for (Eigen::Index i = 1; i <= p; ++i) out << ",zdd_" << i;
  out << ",e_norm,e_cum\n";
  char buf[64];
  for (size_t k = 0; k < trace.tgrid.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    std::snprintf(buf, sizeof(buf), "%.17g", trace.tgrid[k]);
    out << buf;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", trace.x(i, col));
      out << buf;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", trace.z(i, col));
      out << buf;
    }
    for (Eigen::Index i = 0; i < p; ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", trace.z_dd(i, col));
      out << buf;
    }
    std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", trace.e.col(col).norm(),
                  trace.e_cum(col));
    out << buf;
  }
  if (!out) throw Error(Error::Code::Io, "write failed: " + path);
}

void write_sweep_csv(const std::string& path, const std::vector<SweepEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Error::Code::Io, "cannot open for writing: " + path);
  out << "controller_id,l,trial,e_cum_T\n";
  char buf[64];
  for (const auto& entry : entries) {
    out << entry.controller_id << ',' << entry.l << ',' << entry.trial;
    std::snprintf(buf, sizeof(buf), ",%.17g\n", entry.e_cum_t);
    out << buf;
  }
  if (!out) throw Error(Error::Code::Io, "write failed: " + path);
}

}  // namespace ddsyn::sim
