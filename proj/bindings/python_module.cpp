// Python bindings for the core operations: model evaluation, the
// effective-mode transformation, discretization, closed/open propagation and
// the perturbative channel estimates.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gplvc/config.hpp"
#include "gplvc/effective_modes.hpp"
#include "gplvc/open_dynamics.hpp"
#include "gplvc/runner.hpp"
#include "gplvc/tdpt.hpp"

namespace py = pybind11;
using namespace gplvc;

namespace {

py::dict series_dict(const TimeSeries& s) {
  py::dict d;
  d["t"] = s.times;
  d["P_D"] = s.P_D;
  d["pop_adi_1"] = s.pop_adi_1;
  d["pop_adi_2"] = s.pop_adi_2;
  d["trace"] = s.trace;
  d["energy"] = s.energy;
  return d;
}

py::dict grid_dict(const DensityGrid& g) {
  py::dict d;
  d["time"] = g.time;
  d["values"] = g.values;
  d["bounds"] = py::make_tuple(g.grid.xmin, g.grid.xmax, g.grid.ymin, g.grid.ymax);
  return d;
}

DiscretizedHamiltonian build_for(const SubsystemParameters& p, Representation rep,
                                 const GridSpec& grid) {
  if (rep == Representation::AdiabaticNoGp) return build_adiabatic_no_gp(p, grid);
  return build_diabatic(p, grid);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Vibronic-coupling quantum dynamics near conical intersections";
  m.attr("__version__") = GPLVC_VERSION;

  py::enum_<Representation>(m, "Representation")
      .value("WITH_GP", Representation::DiabaticWithGp)
      .value("NO_GP", Representation::AdiabaticNoGp);
  py::enum_<CouplingAxis>(m, "CouplingAxis")
      .value("X", CouplingAxis::X)
      .value("Y", CouplingAxis::Y);

  py::class_<SubsystemParameters>(m, "SubsystemParameters")
      .def(py::init<>())
      .def_readwrite("omega_x", &SubsystemParameters::Omega_X)
      .def_readwrite("omega_y", &SubsystemParameters::Omega_Y)
      .def_readwrite("x0", &SubsystemParameters::X0)
      .def_readwrite("y0", &SubsystemParameters::Y0)
      .def_readwrite("delta", &SubsystemParameters::Delta)
      .def_readwrite("c_x", &SubsystemParameters::C_X)
      .def_readwrite("c_y", &SubsystemParameters::C_Y)
      .def_readwrite("delta12", &SubsystemParameters::Delta12)
      .def("symmetric_setup", &SubsystemParameters::symmetric_setup, py::arg("tol") = 0.0);

  py::class_<BathParameters>(m, "BathParameters")
      .def(py::init<>())
      .def_readwrite("Omega", &BathParameters::Omega)
      .def_readwrite("lambda_X", &BathParameters::lambda_X)
      .def_readwrite("lambda_Y", &BathParameters::lambda_Y)
      .def_readwrite("temperature", &BathParameters::temperature)
      .def("n_modes", &BathParameters::n_modes);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("nx", &GridSpec::nx)
      .def_readwrite("ny", &GridSpec::ny)
      .def_readwrite("xmin", &GridSpec::xmin)
      .def_readwrite("xmax", &GridSpec::xmax)
      .def_readwrite("ymin", &GridSpec::ymin)
      .def_readwrite("ymax", &GridSpec::ymax);

  m.def(
      "evaluate_potentials",
      [](const SubsystemParameters& p, double x, double y) {
        const auto s = evaluate_potentials(p, Vec2(x, y));
        py::dict d;
        d["V_D"] = s.V_D;
        d["V_A"] = s.V_A;
        d["V_c"] = s.V_c;
        d["W1"] = s.W1;
        d["W2"] = s.W2;
        d["theta"] = s.theta;
        d["F"] = py::make_tuple(s.F.x(), s.F.y());
        d["at_ci"] = s.at_ci;
        return d;
      },
      py::arg("params"), py::arg("x"), py::arg("y"),
      "Diabatic and adiabatic potential data at one point.");

  m.def(
      "derive_geometry",
      [](const SubsystemParameters& p) {
        const auto g = derive_geometry(p);
        py::dict d;
        d["G"] = py::make_tuple(g.G.x(), g.G.y());
        d["tuning_direction"] = py::make_tuple(g.tuning_direction.x(), g.tuning_direction.y());
        d["degeneracy_line"] = py::make_tuple(g.degeneracy_line.a, g.degeneracy_line.b,
                                              g.degeneracy_line.c0);
        d["zero_coupling_line"] = py::make_tuple(g.zero_coupling_line.a, g.zero_coupling_line.b,
                                                 g.zero_coupling_line.c0);
        if (g.ci_point)
          d["ci_point"] = py::make_tuple(g.ci_point->x(), g.ci_point->y());
        else
          d["ci_point"] = py::none();
        return d;
      },
      py::arg("params"));

  m.def(
      "transform_lvc",
      [](const Vec& omega, const Vec& kappa, const Vec& kappa_tilde, const Vec& c,
         double delta) {
        LvcParameters lvc;
        lvc.n_modes = static_cast<int>(omega.size());
        lvc.omega = omega;
        lvc.kappa = kappa;
        lvc.kappa_tilde = kappa_tilde;
        lvc.c = c;
        lvc.delta = delta;
        const auto r = lvc_to_system_bath(lvc);
        return py::make_tuple(r.model.subsystem, r.model.bath, r.transform.O1,
                              r.energy_offset);
      },
      py::arg("omega"), py::arg("kappa"), py::arg("kappa_tilde"), py::arg("c"),
      py::arg("delta") = 0.0,
      "Effective-mode transformation of a raw LVC model: returns (subsystem, bath, O1, "
      "dropped energy offset).");

  m.def("discretize_ohmic",
        [](double xi, double Omega_c, int n_modes, double Omega_max, CouplingAxis axis,
           double temperature) {
          OhmicSpec spec;
          spec.xi = xi;
          spec.Omega_c = Omega_c;
          spec.n_modes = n_modes;
          spec.Omega_max = Omega_max;
          spec.couple_to = axis;
          spec.temperature = temperature;
          return discretize_ohmic(spec);
        },
        py::arg("xi"), py::arg("Omega_c") = 3.5, py::arg("n_modes") = 100,
        py::arg("Omega_max") = 0.0, py::arg("couple_to") = CouplingAxis::Y,
        py::arg("temperature") = 0.0);

  m.def("bath_correlation", &bath_correlation, py::arg("Omega_j"), py::arg("temperature"),
        py::arg("t"));
  m.def("dressed_integral", &dressed_integral, py::arg("omega"), py::arg("Omega_j"),
        py::arg("temperature"), py::arg("t"));
  m.def("fc_overlap", &fc_overlap, py::arg("n"), py::arg("m"), py::arg("displacement"),
        py::arg("Omega"));

  m.def(
      "tdpt_channels",
      [](const SubsystemParameters& p, const Vec& times) {
        py::dict d;
        d["channel_1a"] = channel_1a(p).evaluate(times);
        d["channel_1b"] = channel_1b(p).evaluate(times);
        d["channel_1c"] = channel_1c(p).evaluate(times);
        return d;
      },
      py::arg("params"), py::arg("times"));

  m.def(
      "run_closed",
      [](const SubsystemParameters& p, Representation rep, const GridSpec& grid,
         double t_final, double dt_output, const std::vector<double>& snapshots) {
        auto H = build_for(p, rep, grid);
        const auto s0 = prepare_initial_state(H);
        PropagationPlan plan;
        plan.t_final = t_final;
        plan.dt_output = dt_output;
        plan.snapshot_times = snapshots;
        const auto res = propagate_closed(H, s0, plan);
        py::dict d;
        d["series"] = series_dict(res.series);
        py::list snaps;
        for (const auto& g : res.snapshots) snaps.append(grid_dict(g));
        d["snapshots"] = snaps;
        return d;
      },
      py::arg("params"), py::arg("representation"), py::arg("grid") = GridSpec{},
      py::arg("t_final") = 100.0, py::arg("dt_output") = 0.5,
      py::arg("snapshots") = std::vector<double>{},
      "Unitary propagation of the prepared donor-ground state.");

  m.def(
      "run_tcl2",
      [](const SubsystemParameters& p, const BathParameters& bath, Representation rep,
         const GridSpec& grid, double t_final, double dt_output,
         const std::vector<double>& snapshots) {
        auto H = build_for(p, rep, grid);
        const auto s0 = prepare_initial_state(H);
        PropagationPlan plan;
        plan.t_final = t_final;
        plan.dt_output = dt_output;
        plan.snapshot_times = snapshots;
        const auto res = propagate_tcl2({p, bath}, H, s0, plan);
        py::dict d;
        d["series"] = series_dict(res.series);
        py::list snaps;
        for (const auto& g : res.snapshots) snaps.append(grid_dict(g));
        d["snapshots"] = snaps;
        d["n_states"] = res.n_states;
        d["captured_mass"] = res.captured_mass;
        d["min_rho_eigenvalue"] = res.min_rho_eigenvalue;
        return d;
      },
      py::arg("params"), py::arg("bath"), py::arg("representation"),
      py::arg("grid") = GridSpec{}, py::arg("t_final") = 100.0, py::arg("dt_output") = 0.5,
      py::arg("snapshots") = std::vector<double>{},
      "Second-order time-convolutionless master-equation propagation.");

  m.def(
      "run_config",
      [](const std::string& text) {
        const RunConfig cfg = parse_config(text);
        run(cfg);
        return cfg.output_directory;
      },
      py::arg("config_text"), "Parse a config and execute it like the CLI run subcommand.");
}
