// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ddsyn/ddpf.hpp"
#include "ddsyn/h2.hpp"
#include "ddsyn/model.hpp"

namespace ddsyn::cli {

// Exit codes: 0 success, 1 usage error, 2 infeasible, 3 numerical failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumerical = 3;

struct RunConfig {
  ddpf::SolveConfig solve;
  double pi_eps = 1e-13;
  double sdp_eps = 1e-4;
  double sdp_delta = 1e-6;
  // The H2 SDP cannot be centered to the ddpf subproblem gap (its optimal P
  // is near singular), so it keeps its own duality-gap target.
  double sdp_feas_tol = 1e-9;
  std::uint64_t seed = 0;
};

RunConfig load_config(const std::string& path);

struct SynthOutcome {
  std::string mode;
  Controller controller{Matrix::Zero(1, 1)};
  ddpf::MetricsRow metrics;
  int iterations = 0;
  bool converged = true;
  bool subproblem_failure = false;
  std::string message;
  std::vector<ddpf::Iterate> trace;  // ddpf modes only
};

// Shared synthesis pipeline behind `synth`, `mc`, and the acceptance studies.
// mode is one of: h2-sdp, dd-h2, dd-alpha, dd-gain, dd-only.
SynthOutcome synthesize(const LtiSystem& sys, const std::string& mode, const RunConfig& cfg,
                        std::uint64_t init_seed);

struct McRow {
  int trial = 0;
  std::string mode;
  ddpf::MetricsRow metrics;
};

// Trials run concurrently; rows are keyed by (trial, mode) so output order is
// schedule-invariant.
std::vector<McRow> run_mc(const PowerGridParams& base, int trials, std::uint64_t seed,
                          const std::vector<std::string>& modes, const RunConfig& cfg);

int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace ddsyn::cli
