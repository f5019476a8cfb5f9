// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <set>
#include <string>

#include "ddsyn/cli.hpp"
#include "ddsyn/geometry.hpp"
#include "ddsyn/h2.hpp"
#include "ddsyn/io.hpp"
#include "ddsyn/sim.hpp"

namespace py = pybind11;
using namespace ddsyn;

namespace {

// Optional kwargs overlay on the RunConfig defaults, so the python surface
// and the CLI config file agree on unset values.
cli::RunConfig config_from_kwargs(const py::kwargs& kw) {
  cli::RunConfig cfg;
  static const std::set<std::string> known = {"gamma",     "stop_eps",  "max_iters",
                                              "delta",     "alpha_cap", "pi_eps",
                                              "sdp_eps",   "sdp_delta", "sdp_feas_tol",
                                              "feas_tol",  "init_starts", "init_budget"};
  for (const auto& item : kw) {
    const auto key = item.first.cast<std::string>();
    if (known.find(key) == known.end()) {
      throw Error(Error::Code::InvalidArgument, "synthesize: unknown option '" + key + "'");
    }
  }
  auto opt_d = [&](const char* k, double& slot) {
    if (kw.contains(k)) slot = kw[k].cast<double>();
  };
  auto opt_i = [&](const char* k, int& slot) {
    if (kw.contains(k)) slot = kw[k].cast<int>();
  };
  opt_d("gamma", cfg.solve.gamma);
  opt_d("stop_eps", cfg.solve.stop_eps);
  opt_i("max_iters", cfg.solve.max_iters);
  opt_d("delta", cfg.solve.delta);
  opt_d("alpha_cap", cfg.solve.alpha_cap);
  opt_d("feas_tol", cfg.solve.solver.feas_tol);
  opt_i("init_starts", cfg.solve.init_starts);
  opt_i("init_budget", cfg.solve.init_budget);
  opt_d("pi_eps", cfg.pi_eps);
  opt_d("sdp_eps", cfg.sdp_eps);
  opt_d("sdp_delta", cfg.sdp_delta);
  opt_d("sdp_feas_tol", cfg.sdp_feas_tol);
  cfg.solve.validate();
  return cfg;
}

py::dict metrics_dict(const ddpf::MetricsRow& m) {
  py::dict d;
  d["f_alpha"] = m.f_alpha;
  d["f_gain"] = m.f_gain;
  d["f_h2"] = m.f_h2;
  d["f_dd"] = m.f_dd;
  d["hurwitz"] = m.hurwitz;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Disturbance-decoupling controller synthesis";
  mod.attr("__version__") = DDSYN_VERSION;

  py::register_exception<Error>(mod, "DdsynError");

  py::class_<LtiSystem>(mod, "LtiSystem")
      .def(py::init<Matrix, Matrix, Matrix, Matrix>(), py::arg("a"), py::arg("b"), py::arg("e"),
           py::arg("h"))
      .def_readonly("a", &LtiSystem::A)
      .def_readonly("b", &LtiSystem::B)
      .def_readonly("e", &LtiSystem::E)
      .def_readonly("h", &LtiSystem::H)
      .def_property_readonly("n", [](const LtiSystem& s) { return s.n(); })
      .def_property_readonly("m", [](const LtiSystem& s) { return s.m(); })
      .def_property_readonly("p", [](const LtiSystem& s) { return s.p(); })
      .def_property_readonly("l", [](const LtiSystem& s) { return s.l(); });

  py::class_<Controller>(mod, "Controller")
      .def(py::init([](Matrix f) { return Controller{std::move(f)}; }), py::arg("f"))
      .def_readonly("f", &Controller::F)
      .def_readonly("x", &Controller::X)
      .def_readonly("p", &Controller::P)
      .def_readonly("alpha", &Controller::alpha);

  py::class_<PowerGridParams>(mod, "PowerGridParams")
      .def(py::init<>())
      .def_readwrite("inertia", &PowerGridParams::inertia)
      .def_readwrite("damping", &PowerGridParams::damping);

  mod.def("build_power_grid", &build_power_grid, py::arg("params") = PowerGridParams{});
  mod.def("randomize_grid", &randomize_grid, py::arg("params"), py::arg("seed"));

  mod.def(
      "largest_ci_subspace",
      [](const LtiSystem& sys) { return geometry::largest_ci_subspace(sys).basis; },
      py::arg("system"),
      "Orthonormal basis of the largest controlled-invariant subspace in ker H");
  mod.def(
      "dd_feasible",
      [](const LtiSystem& sys) {
        return geometry::dd_feasible(sys, geometry::largest_ci_subspace(sys));
      },
      py::arg("system"));
  mod.def(
      "h2_norm_sq",
      [](const LtiSystem& sys, const Matrix& f) {
        const auto rep = h2::h2_norm_sq(sys, f);
        py::dict d;
        d["h2_sq"] = rep.h2_sq;
        d["hurwitz"] = rep.hurwitz;
        return d;
      },
      py::arg("system"), py::arg("f"));

  mod.def(
      "synthesize",
      [](const LtiSystem& sys, const std::string& mode, std::uint64_t seed, const py::kwargs& kw) {
        const auto cfg = config_from_kwargs(kw);
        const auto so = cli::synthesize(sys, mode, cfg, seed);
        py::dict d;
        d["mode"] = so.mode;
        d["controller"] = so.controller;
        d["metrics"] = metrics_dict(so.metrics);
        d["iterations"] = so.iterations;
        d["converged"] = so.converged;
        d["subproblem_failure"] = so.subproblem_failure;
        d["message"] = so.message;
        return d;
      },
      py::arg("system"), py::arg("mode"), py::arg("seed") = 0,
      "Run one synthesis mode: h2-sdp, dd-h2, dd-alpha, dd-gain, or dd-only. Keyword "
      "options (gamma, stop_eps, max_iters, delta, alpha_cap, feas_tol, init_starts, "
      "init_budget, pi_eps, sdp_eps, sdp_delta, sdp_feas_tol) overlay the defaults.");

  mod.def(
      "evaluate_controller",
      [](const LtiSystem& sys, const Controller& ctrl) {
        const auto v = geometry::largest_ci_subspace(sys);
        return metrics_dict(ddpf::evaluate_controller(sys, v, ctrl));
      },
      py::arg("system"), py::arg("controller"));

  mod.def(
      "simulate",
      [](const LtiSystem& sys, const Matrix& f, const Vector& x0, double horizon, double dt,
         double sigma_sq, std::uint64_t seed) {
        const auto dist = sigma_sq > 0 ? sim::DisturbanceSpec::gaussian_white(sigma_sq, seed)
                                       : sim::DisturbanceSpec::zero();
        const auto trace = sim::simulate(sys, f, x0, dist, horizon, dt);
        py::dict d;
        d["t"] = trace.tgrid;
        d["x"] = trace.x;
        d["z"] = trace.z;
        d["e"] = trace.e;
        d["e_cum"] = trace.e_cum;
        return d;
      },
      py::arg("system"), py::arg("f"), py::arg("x0"), py::arg("horizon") = 10.0,
      py::arg("dt") = 1e-2, py::arg("sigma_sq") = 0.0, py::arg("seed") = 0);

  mod.def("save_system", &io::save_system, py::arg("path"), py::arg("system"));
  mod.def("load_system", &io::load_system, py::arg("path"));
  mod.def(
      "save_controller",
      [](const std::string& path, const Controller& ctrl) {
        io::save_controller(path, ctrl, ctrl.F.cols());
      },
      py::arg("path"), py::arg("controller"));
  mod.def("load_controller", &io::load_controller, py::arg("path"));

  mod.def(
      "run_cli", [](const std::vector<std::string>& args) { return cli::run(args); },
      py::arg("args"), "Invoke the command line front end in-process");
}
