// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "ddsyn/cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "CLI11.hpp"

#include "ddsyn/geometry.hpp"
#include "ddsyn/io.hpp"
#include "ddsyn/sim.hpp"

namespace fs = std::filesystem;

namespace ddsyn::cli {
namespace {

const std::set<std::string> kModes = {"h2-sdp", "dd-h2", "dd-alpha", "dd-gain", "dd-only"};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

int exit_code_for(const Error& err) {
  switch (err.code()) {
    case Error::Code::Infeasible:
    case Error::Code::NoStabilizingDd:
      return kExitInfeasible;
    case Error::Code::SingularLyapunov:
    case Error::Code::NumericalFailure:
      return kExitNumerical;
    default:
      return kExitUsage;
  }
}

io::RunManifest make_manifest(const std::string& command, std::uint64_t seed) {
  io::RunManifest man;
  man.command = command;
  man.seed = seed;
  man.tool_version = DDSYN_VERSION;
  man.created_at = io::utc_timestamp_now();
  return man;
}

std::string manifest_name(const std::string& out_path) {
  return fs::path(io::manifest_path_for(out_path)).filename().string();
}

// CSV outputs carry a comment line naming the manifest that produced them.
void prepend_manifest_line(const std::string& path) {
  io::write_text_file(path, "# manifest: " + manifest_name(path) + "\n" + io::read_text_file(path));
}

io::json metrics_json(const ddpf::MetricsRow& m) {
  return io::json{{"f_alpha", m.f_alpha},
                  {"f_gain", m.f_gain},
                  {"f_h2", m.f_h2},
                  {"f_dd", m.f_dd},
                  {"hurwitz", m.hurwitz}};
}

void append_metrics(std::ostringstream& oss, const ddpf::MetricsRow& m) {
  oss << fmt(m.f_alpha) << ',' << fmt(m.f_gain) << ',' << fmt(m.f_h2) << ',' << fmt(m.f_dd) << ','
      << (m.hurwitz ? 1 : 0);
}

RunConfig config_from_json(const io::json& j) {
  if (!j.is_object()) throw Error(Error::Code::Io, "config root must be a JSON object");
  static const std::set<std::string> known = {
      "gamma",      "stop_eps",   "max_iters",       "delta",       "alpha_cap",
      "pi_eps",     "sdp_eps",    "sdp_delta",       "sdp_feas_tol", "feas_tol",
      "solver_max_iterations", "init_starts", "init_step", "init_shrink",
      "init_step_floor", "init_budget", "seed"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key()))
      throw Error(Error::Code::Io, "unknown config key: " + item.key());
  }
  RunConfig cfg;
  try {
    cfg.solve.gamma = j.value("gamma", cfg.solve.gamma);
    cfg.solve.stop_eps = j.value("stop_eps", cfg.solve.stop_eps);
    cfg.solve.max_iters = j.value("max_iters", cfg.solve.max_iters);
    cfg.solve.delta = j.value("delta", cfg.solve.delta);
    cfg.solve.alpha_cap = j.value("alpha_cap", cfg.solve.alpha_cap);
    cfg.solve.solver.feas_tol = j.value("feas_tol", cfg.solve.solver.feas_tol);
    cfg.solve.solver.max_iterations = j.value("solver_max_iterations", cfg.solve.solver.max_iterations);
    cfg.solve.init_starts = j.value("init_starts", cfg.solve.init_starts);
    cfg.solve.init_step = j.value("init_step", cfg.solve.init_step);
    cfg.solve.init_shrink = j.value("init_shrink", cfg.solve.init_shrink);
    cfg.solve.init_step_floor = j.value("init_step_floor", cfg.solve.init_step_floor);
    cfg.solve.init_budget = j.value("init_budget", cfg.solve.init_budget);
    cfg.pi_eps = j.value("pi_eps", cfg.pi_eps);
    cfg.sdp_eps = j.value("sdp_eps", cfg.sdp_eps);
    cfg.sdp_delta = j.value("sdp_delta", cfg.sdp_delta);
    cfg.sdp_feas_tol = j.value("sdp_feas_tol", cfg.sdp_feas_tol);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const io::json::exception& e) {
    throw Error(Error::Code::Io, std::string("bad config value: ") + e.what());
  }
  cfg.solve.validate();
  if (cfg.pi_eps <= 0 || cfg.sdp_eps <= 0 || cfg.sdp_delta <= 0 || cfg.sdp_feas_tol <= 0)
    throw Error(Error::Code::InvalidArgument,
                "pi_eps, sdp_eps, sdp_delta, sdp_feas_tol must be positive");
  return cfg;
}

std::pair<int, int> parse_l_range(const std::string& spec) {
  try {
    const auto pos = spec.find(':');
    if (pos == std::string::npos) {
      const int l = std::stoi(spec);
      return {l, l};
    }
    const int lo = std::stoi(spec.substr(0, pos));
    const int hi = std::stoi(spec.substr(pos + 1));
    if (lo > hi) throw std::invalid_argument("empty range");
    return {lo, hi};
  } catch (const std::exception&) {
    throw Error(Error::Code::InvalidArgument, "bad --l range (want LO:HI): " + spec);
  }
}

Vector parse_x0(const std::string& spec, Eigen::Index n) {
  if (spec.empty()) return Vector::Zero(n);
  std::vector<double> vals;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw Error(Error::Code::InvalidArgument, "bad --x0 entry: " + tok);
    }
  }
  if (static_cast<Eigen::Index>(vals.size()) != n)
    throw Error(Error::Code::InvalidArgument, "--x0 needs exactly " + std::to_string(n) + " entries");
  return Eigen::Map<Vector>(vals.data(), n);
}

std::vector<std::string> split_modes(const std::vector<std::string>& raw) {
  std::vector<std::string> modes;
  for (const auto& entry : raw) {
    std::stringstream ss(entry);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) modes.push_back(tok);
  }
  for (const auto& m : modes)
    if (!kModes.count(m)) throw Error(Error::Code::InvalidArgument, "unknown mode: " + m);
  return modes;
}

// Static line plot of the sweep: x = log2 variance exponent, y = log10 of the
// trial-averaged cumulative error. Batch artifact, no interactivity.
void write_sweep_svg(const std::string& path, const std::vector<sim::SweepEntry>& entries) {
  std::map<std::string, std::map<int, std::pair<double, int>>> acc;
  std::vector<std::string> order;
  for (const auto& e : entries) {
    if (!acc.count(e.controller_id)) order.push_back(e.controller_id);
    auto& cell = acc[e.controller_id][e.l];
    cell.first += e.e_cum_t;
    cell.second += 1;
  }
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& id : order) {
    for (const auto& [l, cell] : acc[id]) {
      const double y = std::log10(std::max(cell.first / cell.second, 1e-300));
      series[id].push_back({static_cast<double>(l), y});
      xmin = std::min(xmin, static_cast<double>(l));
      xmax = std::max(xmax, static_cast<double>(l));
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double w = 640, h = 440, ml = 80, mr = 20, mt = 20, mb = 50;
  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
  for (int l = static_cast<int>(std::ceil(xmin)); l <= static_cast<int>(std::floor(xmax)); ++l) {
    svg << "<text x=\"" << px(l) << "\" y=\"" << h - mb + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">" << l << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(ymin)); e <= static_cast<int>(std::floor(ymax)); ++e) {
    svg << "<text x=\"" << ml - 6 << "\" y=\"" << py(e) + 4
        << "\" font-size=\"11\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  svg << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">noise variance exponent l</text>\n";
  int color = 0;
  double legend_y = mt + 14;
  for (const auto& id : order) {
    const char* stroke = palette[color % 6];
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : series[id]) svg << px(x) << ',' << py(y) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << ml + 10 << "\" y=\"" << legend_y << "\" font-size=\"12\" fill=\""
        << stroke << "\">" << id << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "</svg>\n";
  io::write_text_file(path, svg.str());
}

int cmd_powergrid(bool nominal, std::uint64_t seed, bool seeded, const std::string& out) {
  PowerGridParams params;
  if (seeded && !nominal) params = randomize_grid(params, seed);
  const LtiSystem sys = build_power_grid(params);
  io::save_system(out, sys);

  io::RunManifest man = make_manifest("powergrid", seeded ? seed : 0);
  man.parameters["nominal"] = nominal || !seeded;
  if (seeded) man.parameters["seed"] = seed;
  man.parameters["out"] = out;
  man.outputs[out] = io::file_digest(out);
  io::write_manifest(man, out);
  return kExitOk;
}

int cmd_synth(const std::string& system_path, const std::string& mode, const std::string& config_path,
              std::uint64_t seed, bool seed_given, const std::string& out,
              const std::string& trace_path) {
  RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (seed_given) cfg.seed = seed;
  const LtiSystem sys = io::load_system(system_path);
  const SynthOutcome so = synthesize(sys, mode, cfg, cfg.seed);

  io::json j = io::controller_to_json(so.controller, sys.n());
  j["mode"] = so.mode;
  j["metrics"] = metrics_json(so.metrics);
  j["iterations"] = so.iterations;
  j["converged"] = so.converged;
  j["subproblem_failure"] = so.subproblem_failure;
  if (!so.message.empty()) j["message"] = so.message;
  j["manifest"] = manifest_name(out);
  io::write_text_file(out, j.dump(2) + "\n");
  if (!trace_path.empty()) {
    ddpf::write_trace_csv(trace_path, so.trace, cfg.solve.gamma);
    prepend_manifest_line(trace_path);
  }

  io::RunManifest man = make_manifest("synth", cfg.seed);
  man.parameters["system"] = system_path;
  man.parameters["mode"] = mode;
  if (!config_path.empty()) man.parameters["config"] = config_path;
  man.parameters["seed"] = cfg.seed;
  man.parameters["out"] = out;
  man.inputs[system_path] = io::file_digest(system_path);
  if (!config_path.empty()) man.inputs[config_path] = io::file_digest(config_path);
  man.outputs[out] = io::file_digest(out);
  if (!trace_path.empty()) {
    man.parameters["trace"] = trace_path;
    man.outputs[trace_path] = io::file_digest(trace_path);
    io::write_manifest(man, trace_path);
  }
  io::write_manifest(man, out);
  return so.subproblem_failure ? kExitNumerical : kExitOk;
}

int cmd_eval(const std::string& system_path, const std::vector<std::string>& controller_paths,
             const std::string& out) {
  const LtiSystem sys = io::load_system(system_path);
  const auto v = geometry::largest_ci_subspace(sys);
  std::ostringstream oss;
  oss << "controller,f_alpha,f_gain,f_h2,f_dd,hurwitz\n";
  for (const auto& path : controller_paths) {
    const Controller ctrl = io::load_controller(path);
    const auto m = ddpf::evaluate_controller(sys, v, ctrl);
    oss << csv_field(path) << ',';
    append_metrics(oss, m);
    oss << '\n';
  }
  io::write_text_file(out, oss.str());
  prepend_manifest_line(out);

  io::RunManifest man = make_manifest("eval", 0);
  man.parameters["system"] = system_path;
  man.parameters["controllers"] = controller_paths;
  man.parameters["out"] = out;
  man.inputs[system_path] = io::file_digest(system_path);
  for (const auto& path : controller_paths) man.inputs[path] = io::file_digest(path);
  man.outputs[out] = io::file_digest(out);
  io::write_manifest(man, out);
  return kExitOk;
}

int cmd_mc(int trials, std::uint64_t seed, const std::vector<std::string>& modes_raw,
           const std::string& out_dir, const std::string& config_path) {
  const RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
  const std::vector<std::string> modes = split_modes(modes_raw);
  if (modes.empty()) throw Error(Error::Code::InvalidArgument, "no modes selected");
  fs::create_directories(out_dir);
  const auto rows = run_mc(PowerGridParams{}, trials, seed, modes, cfg);

  const std::string trials_path = (fs::path(out_dir) / "trials.csv").string();
  const std::string agg_path = (fs::path(out_dir) / "aggregate.csv").string();

  std::ostringstream per;
  per << "trial,mode,f_alpha,f_gain,f_h2,f_dd,hurwitz\n";
  for (const auto& r : rows) {
    per << r.trial << ',' << r.mode << ',';
    append_metrics(per, r.metrics);
    per << '\n';
  }
  io::write_text_file(trials_path, per.str());
  prepend_manifest_line(trials_path);

  std::ostringstream agg;
  agg << "mode,trials,f_alpha_mean,f_alpha_std,f_gain_mean,f_gain_std,"
         "f_h2_mean,f_h2_std,f_dd_mean,f_dd_std\n";
  for (const auto& mode : modes) {
    std::vector<std::array<double, 4>> vals;
    for (const auto& r : rows)
      if (r.mode == mode)
        vals.push_back({r.metrics.f_alpha, r.metrics.f_gain, r.metrics.f_h2, r.metrics.f_dd});
    const auto n = static_cast<double>(vals.size());
    agg << mode << ',' << vals.size();
    for (int k = 0; k < 4; ++k) {
      double mean = 0.0;
      for (const auto& v : vals) mean += v[k];
      mean /= n;
      double var = 0.0;
      for (const auto& v : vals) var += (v[k] - mean) * (v[k] - mean);
      const double std_dev = vals.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
      agg << ',' << fmt(mean) << ',' << fmt(std_dev);
    }
    agg << '\n';
  }
  io::write_text_file(agg_path, agg.str());
  prepend_manifest_line(agg_path);

  io::RunManifest man = make_manifest("mc", seed);
  man.parameters["trials"] = trials;
  man.parameters["seed"] = seed;
  man.parameters["modes"] = modes;
  man.parameters["out"] = out_dir;
  if (!config_path.empty()) {
    man.parameters["config"] = config_path;
    man.inputs[config_path] = io::file_digest(config_path);
  }
  man.outputs[trials_path] = io::file_digest(trials_path);
  man.outputs[agg_path] = io::file_digest(agg_path);
  io::write_manifest(man, trials_path);
  io::write_manifest(man, agg_path);
  return kExitOk;
}

int cmd_sweep(const std::string& system_path, const std::vector<std::string>& controller_paths,
              const std::string& l_spec, double horizon, double dt, int trials, std::uint64_t seed,
              const std::string& out, const std::string& svg_path) {
  const auto [l_min, l_max] = parse_l_range(l_spec);
  const LtiSystem sys = io::load_system(system_path);
  std::vector<std::pair<std::string, Matrix>> controllers;
  std::set<std::string> used;
  for (const auto& path : controller_paths) {
    std::string id = fs::path(path).stem().string();
    while (used.count(id)) id += "+";
    used.insert(id);
    controllers.push_back({id, io::load_controller(path).F});
  }
  const auto entries = sim::noise_sweep(sys, controllers, Vector::Zero(sys.n()), l_min, l_max,
                                        horizon, dt, trials, seed);
  sim::write_sweep_csv(out, entries);
  prepend_manifest_line(out);
  if (!svg_path.empty()) write_sweep_svg(svg_path, entries);

  io::RunManifest man = make_manifest("sweep", seed);
  man.parameters["system"] = system_path;
  man.parameters["controllers"] = controller_paths;
  man.parameters["l"] = l_spec;
  man.parameters["T"] = horizon;
  man.parameters["dt"] = dt;
  man.parameters["trials"] = trials;
  man.parameters["seed"] = seed;
  man.parameters["out"] = out;
  man.inputs[system_path] = io::file_digest(system_path);
  for (const auto& path : controller_paths) man.inputs[path] = io::file_digest(path);
  man.outputs[out] = io::file_digest(out);
  if (!svg_path.empty()) {
    man.parameters["svg"] = svg_path;
    man.outputs[svg_path] = io::file_digest(svg_path);
    io::write_manifest(man, svg_path);
  }
  io::write_manifest(man, out);
  return kExitOk;
}

int cmd_simulate(const std::string& system_path, const std::string& controller_path, double horizon,
                 double dt, double sigma_sq, std::uint64_t seed, const std::string& x0_spec,
                 const std::string& out) {
  const LtiSystem sys = io::load_system(system_path);
  const Controller ctrl = io::load_controller(controller_path);
  const Vector x0 = parse_x0(x0_spec, sys.n());
  const auto dist = sigma_sq > 0 ? sim::DisturbanceSpec::gaussian_white(sigma_sq, seed)
                                 : sim::DisturbanceSpec::zero();
  const auto trace = sim::simulate(sys, ctrl.F, x0, dist, horizon, dt);
  sim::write_trace_csv(out, trace);
  prepend_manifest_line(out);

  io::RunManifest man = make_manifest("simulate", seed);
  man.parameters["system"] = system_path;
  man.parameters["controller"] = controller_path;
  man.parameters["T"] = horizon;
  man.parameters["dt"] = dt;
  man.parameters["sigma_sq"] = sigma_sq;
  man.parameters["seed"] = seed;
  if (!x0_spec.empty()) man.parameters["x0"] = x0_spec;
  man.parameters["out"] = out;
  man.inputs[system_path] = io::file_digest(system_path);
  man.inputs[controller_path] = io::file_digest(controller_path);
  man.outputs[out] = io::file_digest(out);
  io::write_manifest(man, out);
  return kExitOk;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  io::json j;
  try {
    j = io::json::parse(io::read_text_file(path));
  } catch (const io::json::exception& e) {
    throw Error(Error::Code::Io, std::string("config parse failure: ") + e.what());
  }
  return config_from_json(j);
}

SynthOutcome synthesize(const LtiSystem& sys, const std::string& mode, const RunConfig& cfg,
                        std::uint64_t init_seed) {
  if (!kModes.count(mode)) throw Error(Error::Code::InvalidArgument, "unknown mode: " + mode);
  const Tolerance tol;
  SynthOutcome out;
  out.mode = mode;
  const auto v = geometry::largest_ci_subspace(sys, tol);

  if (mode == "h2-sdp") {
    h2::H2SdpOptions opts;
    opts.eps = cfg.sdp_eps;
    opts.delta = cfg.sdp_delta;
    opts.solver = cfg.solve.solver;
    opts.solver.feas_tol = cfg.sdp_feas_tol;
    const auto res = h2::solve_h2_sdp(sys, opts);
    if (res.solution.status == conic::SolveStatus::Infeasible)
      throw Error(Error::Code::Infeasible, "H2 SDP infeasible: " + res.solution.message);
    if (res.solution.status != conic::SolveStatus::Optimal || !res.controller)
      throw Error(Error::Code::NumericalFailure, "H2 SDP failed: " + res.solution.message);
    out.controller = *res.controller;
    out.iterations = res.solution.iterations;
    if (res.ill_conditioned_p) out.message = "IllConditionedP";
    out.metrics = ddpf::evaluate_controller(sys, v, out.controller, tol);
    return out;
  }

  if (v.dim == 0)
    throw Error(Error::Code::Infeasible,
                "largest controlled-invariant subspace inside ker H is trivial");
  if (!geometry::dd_feasible(sys, v, tol))
    throw Error(Error::Code::Infeasible, "im E is not contained in V*: decoupling infeasible");
  const auto param = geometry::assemble_dd_system(sys, v, tol);

  if (mode == "dd-only") {
    const auto sol = geometry::unpack_dd_solution(sys, v, param.particular);
    out.controller = Controller{sol.F};
    out.controller.X = sol.X;
    out.metrics = ddpf::evaluate_controller(sys, v, out.controller, tol);
    return out;
  }

  const ddpf::Objective obj = mode == "dd-h2"      ? ddpf::Objective::h2_trace()
                              : mode == "dd-alpha" ? ddpf::Objective::neg_alpha()
                                                   : ddpf::Objective::gain_norm();
  const ddpf::PiVariant pi = mode == "dd-alpha" ? ddpf::PiVariant::convergence()
                                                : ddpf::PiVariant::stability(cfg.pi_eps);
  const auto init = ddpf::initialize_ddpf(sys, v, param, pi, init_seed, cfg.solve);
  auto [res, trace] = ddpf::solve_ddpf(sys, v, obj, pi, cfg.solve, init);
  out.controller = std::move(res.controller);
  out.metrics = res.metrics;
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.subproblem_failure = res.subproblem_failure;
  out.message = res.message;
  out.trace = std::move(trace);
  return out;
}

std::vector<McRow> run_mc(const PowerGridParams& base, int trials, std::uint64_t seed,
                          const std::vector<std::string>& modes, const RunConfig& cfg) {
  if (trials <= 0) throw Error(Error::Code::InvalidArgument, "trials must be positive");
  // Fixed per-mode salts keep the (trial, mode) seeding independent of the
  // order modes are listed in.
  static const std::map<std::string, std::uint64_t> salts = {
      {"h2-sdp", 1}, {"dd-h2", 2}, {"dd-alpha", 3}, {"dd-gain", 4}, {"dd-only", 5}};
  for (const auto& mode : modes)
    if (!salts.count(mode)) throw Error(Error::Code::InvalidArgument, "unknown mode: " + mode);

  std::vector<std::vector<McRow>> per_trial(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    for (;;) {
      const int trial = next.fetch_add(1);
      if (trial >= trials) return;
      try {
        const auto tseed = mix_seed(seed, static_cast<std::uint64_t>(trial) + 1);
        const LtiSystem sys = build_power_grid(randomize_grid(base, tseed));
        for (const auto& mode : modes) {
          const auto so = synthesize(sys, mode, cfg,
                                     mix_seed(seed, static_cast<std::uint64_t>(trial) + 1,
                                              salts.at(mode)));
          per_trial[static_cast<std::size_t>(trial)].push_back(McRow{trial, mode, so.metrics});
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const unsigned hw = std::thread::hardware_concurrency();
  const int nthreads = std::max(1, std::min(trials, static_cast<int>(hw > 0 ? hw : 2)));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<McRow> flat;
  for (auto& rows : per_trial)
    for (auto& row : rows) flat.push_back(std::move(row));
  return flat;
}

int run(int argc, char** argv) {
  CLI::App app{"Disturbance-decoupling controller synthesis and evaluation"};
  app.set_version_flag("--version", std::string(DDSYN_VERSION));
  app.require_subcommand(1);
  int rc = kExitOk;

  auto* pg = app.add_subcommand("powergrid", "Write the four-bus power grid model as a system file");
  struct {
    bool nominal = false;
    std::uint64_t seed = 0;
    std::string out;
  } pg_opt;
  auto* pg_nominal = pg->add_flag("--nominal", pg_opt.nominal, "Use nominal inertia/damping");
  auto* pg_seed = pg->add_option("--seed", pg_opt.seed, "Randomize inertia/damping with this seed");
  pg->add_option("--out", pg_opt.out, "Output system JSON")->required();
  pg_nominal->excludes(pg_seed);
  pg->callback([&]() {
    rc = cmd_powergrid(pg_opt.nominal, pg_opt.seed, pg_seed->count() > 0, pg_opt.out);
  });

  auto* synth = app.add_subcommand("synth", "Synthesize a controller for a system file");
  struct {
    std::string system, mode, config, out, trace;
    std::uint64_t seed = 0;
  } sy_opt;
  synth->add_option("--system", sy_opt.system, "System JSON")->required();
  synth->add_option("--mode", sy_opt.mode, "h2-sdp | dd-h2 | dd-alpha | dd-gain | dd-only")
      ->required()
      ->check(CLI::IsMember({"h2-sdp", "dd-h2", "dd-alpha", "dd-gain", "dd-only"}));
  synth->add_option("--config", sy_opt.config, "Solver config JSON");
  auto* sy_seed = synth->add_option("--seed", sy_opt.seed, "Initialization seed (overrides config)");
  synth->add_option("--out", sy_opt.out, "Output controller JSON")->required();
  synth->add_option("--trace", sy_opt.trace, "Optional per-iteration trace CSV");
  synth->callback([&]() {
    rc = cmd_synth(sy_opt.system, sy_opt.mode, sy_opt.config, sy_opt.seed, sy_seed->count() > 0,
                   sy_opt.out, sy_opt.trace);
  });

  auto* eval = app.add_subcommand("eval", "Tabulate controller metrics against a system");
  struct {
    std::string system, out;
    std::vector<std::string> controllers;
  } ev_opt;
  eval->add_option("--system", ev_opt.system, "System JSON")->required();
  eval->add_option("--controller", ev_opt.controllers, "Controller JSON (repeatable)")
      ->required()
      ->take_all();
  eval->add_option("--out", ev_opt.out, "Output CSV")->required();
  eval->callback([&]() { rc = cmd_eval(ev_opt.system, ev_opt.controllers, ev_opt.out); });

  auto* mc = app.add_subcommand("mc", "Monte Carlo synthesis study on randomized power grids");
  struct {
    int trials = 20;
    std::uint64_t seed = 0;
    std::vector<std::string> modes = {"h2-sdp", "dd-h2", "dd-alpha", "dd-gain"};
    std::string out, config;
  } mc_opt;
  mc->add_option("--trials", mc_opt.trials, "Number of randomized trials");
  mc->add_option("--seed", mc_opt.seed, "Base seed");
  mc->add_option("--modes", mc_opt.modes, "Synthesis modes (repeatable or comma separated)")
      ->take_all();
  mc->add_option("--out", mc_opt.out, "Output directory")->required();
  mc->add_option("--config", mc_opt.config, "Solver config JSON");
  mc->callback([&]() {
    rc = cmd_mc(mc_opt.trials, mc_opt.seed, mc_opt.modes, mc_opt.out, mc_opt.config);
  });

  auto* sweep = app.add_subcommand("sweep", "Cumulative output error vs disturbance variance");
  struct {
    std::string system, l = "7:20", out, svg;
    std::vector<std::string> controllers;
    double horizon = 10.0, dt = 1e-2;
    int trials = 1;
    std::uint64_t seed = 0;
  } sw_opt;
  sweep->add_option("--system", sw_opt.system, "System JSON")->required();
  sweep->add_option("--controllers", sw_opt.controllers, "Controller JSON files")
      ->required()
      ->take_all();
  sweep->add_option("--l", sw_opt.l, "Variance exponent range LO:HI (sigma^2 = 2^l)");
  sweep->add_option("--T", sw_opt.horizon, "Horizon");
  sweep->add_option("--dt", sw_opt.dt, "Step size");
  sweep->add_option("--trials", sw_opt.trials, "Realizations per variance level");
  sweep->add_option("--seed", sw_opt.seed, "Base seed");
  sweep->add_option("--out", sw_opt.out, "Output CSV")->required();
  sweep->add_option("--svg", sw_opt.svg, "Optional SVG line plot");
  sweep->callback([&]() {
    rc = cmd_sweep(sw_opt.system, sw_opt.controllers, sw_opt.l, sw_opt.horizon, sw_opt.dt,
                   sw_opt.trials, sw_opt.seed, sw_opt.out, sw_opt.svg);
  });

  auto* simc = app.add_subcommand("simulate", "Integrate one closed loop and write the trace");
  struct {
    std::string system, controller, x0, out;
    double horizon = 60.0, dt = 1e-2, sigma_sq = 1.0;
    std::uint64_t seed = 0;
  } si_opt;
  simc->add_option("--system", si_opt.system, "System JSON")->required();
  simc->add_option("--controller", si_opt.controller, "Controller JSON")->required();
  simc->add_option("--T", si_opt.horizon, "Horizon");
  simc->add_option("--dt", si_opt.dt, "Step size");
  simc->add_option("--sigma-sq", si_opt.sigma_sq, "White noise variance (0 disables)");
  simc->add_option("--seed", si_opt.seed, "Noise seed");
  simc->add_option("--x0", si_opt.x0, "Initial state, comma separated (default zero)");
  simc->add_option("--out", si_opt.out, "Output CSV")->required();
  simc->callback([&]() {
    rc = cmd_simulate(si_opt.system, si_opt.controller, si_opt.horizon, si_opt.dt, si_opt.sigma_sq,
                      si_opt.seed, si_opt.x0, si_opt.out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int parse_rc = app.exit(e);
    return parse_rc == 0 ? kExitOk : kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return rc;
}

int run(const std::vector<std::string>& args) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.push_back("ddsyn");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<char*> argv;
  argv.reserve(full.size());
  for (auto& s : full) argv.push_back(s.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace ddsyn::cli
