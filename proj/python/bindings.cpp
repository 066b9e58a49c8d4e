// Python bindings: configs, runs, studies and a few building blocks for inspection.
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fsi/error.hpp"
#include "fsi/harness.hpp"

namespace py = pybind11;
using namespace fsi;

namespace {

py::array_t<double> to_array(const Vec& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> to_array(const DenseMatrix& m) {
  py::array_t<double> a({m.rows(), m.cols()});
  auto w = a.mutable_unchecked<2>();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) w(i, j) = m(i, j);
  return a;
}

py::dict mesh_dict(const Mesh2D& m) {
  py::array_t<double> nodes({int(m.nodes.size()), 2});
  auto n = nodes.mutable_unchecked<2>();
  for (size_t k = 0; k < m.nodes.size(); ++k) {
    n(k, 0) = m.nodes[k].x;
    n(k, 1) = m.nodes[k].y;
  }
  py::array_t<int> elems({int(m.elems.size()), 4});
  auto e = elems.mutable_unchecked<2>();
  for (size_t k = 0; k < m.elems.size(); ++k)
    for (int c = 0; c < 4; ++c) e(k, c) = m.elems[k][c];
  py::dict sets;
  for (const auto& [name, edges] : m.edge_sets) sets[py::str(name)] = m.edge_set_nodes(name);
  py::dict d;
  d["nodes"] = nodes;
  d["elems"] = elems;
  d["edge_set_nodes"] = sets;
  return d;
}

py::dict state_dict(const CoupledState& s) {
  py::dict d;
  d["t"] = s.t;
  d["solid_d"] = to_array(s.solid.d);
  d["solid_v"] = to_array(s.solid.v);
  d["fluid_up"] = to_array(s.fluid.up);
  d["grid_d"] = to_array(s.fluid.dg);
  d["lam"] = to_array(s.lambda);
  return d;
}

py::dict step_dict(const StepRecord& r) {
  py::dict d;
  d["step"] = r.step;
  d["time"] = r.time;
  d["newton_iters"] = r.diag.newton_iters;
  d["linear_iters"] = r.diag.linear_iters;
  d["constraint_norm"] = r.diag.constraint_norm;
  d["interface_energy"] = r.diag.interface_energy;
  d["residual_norms"] = r.diag.residual_norms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Monolithic mortar fluid-structure interaction solver";

  auto base = py::register_exception<Error>(m, "FsiError", PyExc_RuntimeError);
  py::register_exception<InvalidConfig>(m, "InvalidConfig", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<CouplingError>(m, "CouplingError", base.ptr());
  py::register_exception<AssemblyError>(m, "AssemblyError", base.ptr());

  py::enum_<PredictorKind>(m, "Predictor")
      .value("CONST_DIS", PredictorKind::ConstDis)
      .value("CONST_VEL", PredictorKind::ConstVel)
      .value("CONST_ACC", PredictorKind::ConstAcc);
  py::enum_<MasterChoice>(m, "Master").value("FLUID", MasterChoice::Fluid).value("STRUCTURE", MasterChoice::Structure);

  py::class_<CaseConfig>(m, "CaseConfig")
      .def_static("column", &default_column_config)
      .def_static("cavity", &default_cavity_config)
      .def_static("parse", &parse_case_config, py::arg("yaml_text"))
      .def_static("load", &load_case_config, py::arg("path"))
      .def_readwrite("dt", &CaseConfig::dt)
      .def_readwrite("t_end", &CaseConfig::t_end)
      .def_readwrite("master", &CaseConfig::master)
      .def_readwrite("predictor", &CaseConfig::predictor)
      .def_readwrite("diagnostics_csv", &CaseConfig::diagnostics_csv)
      .def_property_readonly("n_steps", &CaseConfig::n_steps)
      .def_property_readonly("scheme_tag", &CaseConfig::scheme_tag)
      .def("validate", &CaseConfig::validate);

  m.def(
      "run",
      [](const CaseConfig& cfg, const std::function<void(py::dict)>& on_step) {
        StepCallback cb;
        if (on_step) cb = [&](const StepRecord& r, const CoupledState&) { on_step(step_dict(r)); };
        RunResult r = run_case(cfg, cb);
        py::dict d;
        py::list steps;
        for (const auto& s : r.steps) steps.append(step_dict(s));
        d["steps"] = steps;
        d["final_state"] = state_dict(r.final_state);
        d["err_u_l2"] = r.err_u_l2;
        d["err_p_l2"] = r.err_p_l2;
        d["rel_err_u_l2"] = r.rel_err_u_l2;
        d["rel_err_p_l2"] = r.rel_err_p_l2;
        d["kinetic_energy_scale"] = r.kinetic_energy_scale;
        d["cumulative_linear_iters"] = r.cumulative_linear_iters();
        return d;
      },
      py::arg("config"), py::arg("on_step") = nullptr, "Run a case; on_step receives one dict per step.");

  m.def(
      "convergence_study",
      [](const CaseConfig& cfg, const std::vector<double>& dts) {
        ConvergenceStudy s = temporal_convergence_study(cfg, dts);
        py::list rows;
        for (const auto& l : s.levels) {
          py::dict d;
          d["dt"] = l.dt;
          d["err_u"] = l.err_u;
          d["err_p"] = l.err_p;
          d["order_u"] = l.order_u;
          d["order_p"] = l.order_p;
          rows.append(d);
        }
        return py::make_tuple(s.tag, rows);
      },
      py::arg("config"), py::arg("dts"));

  m.def(
      "predictor_study",
      [](const CaseConfig& cfg, const std::vector<PredictorKind>& kinds) {
        PredictorStudy s = predictor_study(cfg, kinds);
        py::dict out;
        for (const auto& r : s.runs) out[py::str(to_string(r.kind))] = r.cumulative_linear;
        out["max_state_diff"] = s.max_state_diff;
        return out;
      },
      py::arg("config"),
      py::arg("kinds") = std::vector<PredictorKind>{PredictorKind::ConstDis, PredictorKind::ConstVel,
                                                    PredictorKind::ConstAcc});

  m.def(
      "pseudo1d_analytic",
      [](int degree, double rho_f, double p_inf, double x, double t) {
        if (degree != 2 && degree != 5) throw InvalidConfig("driver degree must be 2 or 5");
        auto a = pseudo1d_analytic(degree == 2 ? Driver::Quadratic : Driver::Quintic, rho_f, p_inf, x, t);
        return py::make_tuple(a.u, a.a, a.p);
      },
      py::arg("degree"), py::arg("rho_f"), py::arg("p_inf"), py::arg("x"), py::arg("t"),
      "(u, a, p) of the column driven with d(t) = -t^degree.");

  m.def("observed_order", &observed_order, py::arg("err_coarse"), py::arg("err_fine"));

  m.def(
      "column_meshes",
      [](double lf, double ls, double w, int nxf, int nxs, int ny, int ny_solid) {
        auto [f, s] = generate_column_meshes(lf, ls, w, nxf, nxs, ny, ny_solid);
        return py::make_tuple(mesh_dict(f), mesh_dict(s));
      },
      py::arg("fluid_length"), py::arg("solid_length"), py::arg("width"), py::arg("nx_fluid"), py::arg("nx_solid"),
      py::arg("ny"), py::arg("ny_solid") = -1, "(fluid, solid) mesh dicts.");

  m.def(
      "column_mortar",
      [](int ny_fluid, int ny_solid, bool solid_slave) {
        auto [f, s] = generate_column_meshes(1.0, 1.0, 0.25, 2, 2, ny_fluid, ny_solid);
        DofMap fd = build_dofmap(f, 3, "interface", 2), sd = build_dofmap(s, 2, "interface");
        MortarOperators mo = solid_slave
                                 ? assemble_mortar(s, "interface", sd, f, "interface", fd, FieldId::Solid, FieldId::Fluid)
                                 : assemble_mortar(f, "interface", fd, s, "interface", sd, FieldId::Fluid, FieldId::Solid);
        py::dict d;
        d["D"] = to_array(mo.d.to_dense());
        d["M"] = to_array(mo.m.to_dense());
        d["P"] = to_array(mo.p.to_dense());
        return d;
      },
      py::arg("ny_fluid"), py::arg("ny_solid"), py::arg("solid_slave") = true,
      "Dense mortar operators on a width-0.25 column interface.");
}
