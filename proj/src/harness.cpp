#include "fsi/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "fsi/error.hpp"

namespace fsi {

int CaseConfig::n_steps() const { return int(std::llround(t_end / dt)); }

void CaseConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidConfig("dt must be positive");
  if (!(t_end > 0.0) || n_steps() < 1) throw InvalidConfig("t_end must cover at least one step");
  if (std::abs(n_steps() * dt - t_end) > 1e-9 * t_end) throw InvalidConfig("t_end must be a multiple of dt");
  solid.validate();
  fluid.validate();
  fluid_scheme.validate();
  newton.validate();
  if (!(solid_rho_inf >= 0.0 && solid_rho_inf <= 1.0)) throw InvalidConfig("solid rho_inf must be in [0,1]");
  if (kind == CaseKind::Column) {
    if (column.drive == ColumnDrive::Rigid && master != MasterChoice::Structure)
      throw InvalidConfig("rigid column drive prescribes the solid interface, so the structure must be master");
  } else if (master != MasterChoice::Structure) {
    throw InvalidConfig("the cavity clamps solid interface end nodes, so the structure must be master");
  }
}

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::ConstDis: return "const_dis";
    case PredictorKind::ConstVel: return "const_vel";
    case PredictorKind::ConstAcc: return "const_acc";
  }
  return "?";
}

PredictorKind parse_predictor(const std::string& s) {
  if (s == "const_dis") return PredictorKind::ConstDis;
  if (s == "const_vel") return PredictorKind::ConstVel;
  if (s == "const_acc") return PredictorKind::ConstAcc;
  throw InvalidConfig("unknown predictor '" + s + "' (const_dis, const_vel, const_acc)");
}

std::string CaseConfig::scheme_tag() const {
  std::ostringstream os;
  os << "gen_alpha(" << solid_rho_inf << ")/";
  if (fluid_scheme.kind == FluidTimeScheme::Kind::GenAlpha)
    os << "gen_alpha(" << fluid_scheme.rho_inf << ")";
  else
    os << "theta(" << fluid_scheme.theta << ")";
  os << "/" << (rule.kind == ConversionRule::Kind::Trapezoidal ? "trapezoidal" : "backward_euler");
  return os.str();
}

CaseConfig default_column_config() {
  CaseConfig c;
  c.kind = CaseKind::Column;
  c.solid = {100.0, 0.0, 1.0};
  c.fluid = {0.01, 1.0};
  c.fluid_scheme = FluidTimeScheme::gen_alpha(1.0);
  c.master = MasterChoice::Structure;
  return c;
}

CaseConfig default_cavity_config() {
  CaseConfig c;
  c.kind = CaseKind::Cavity;
  c.dt = 0.01;
  c.t_end = 0.5;
  c.solid = {250.0, 0.0, 500.0};
  c.fluid = {0.01, 1.0};
  c.fluid_scheme = FluidTimeScheme::gen_alpha(1.0);
  c.master = MasterChoice::Structure;
  return c;
}

namespace {

void check_keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!n.IsMap()) throw InvalidConfig("'" + where + "' must be a mapping");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : n) {
    auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw InvalidConfig("unknown key '" + key + "' in " + where);
  }
}

template <class T>
void read(const YAML::Node& n, const char* key, T& out, const std::string& where) {
  if (!n[key]) return;
  try {
    out = n[key].as<T>();
  } catch (const YAML::Exception&) {
    throw InvalidConfig("bad value for '" + std::string(key) + "' in " + where);
  }
}

std::string read_str(const YAML::Node& n, const char* key, const std::string& fallback) {
  return n[key] ? n[key].as<std::string>() : fallback;
}

}  // namespace

CaseConfig parse_case_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1);
  }
  if (!root || !root.IsMap()) throw InvalidConfig("config must be a mapping");
  check_keys(root, "config",
             {"case", "dt", "t_end", "master", "predictor", "conversion", "solid", "fluid", "column", "cavity",
              "newton", "linear", "output"});
  const std::string kind = read_str(root, "case", "column");
  CaseConfig c;
  if (kind == "column")
    c = default_column_config();
  else if (kind == "cavity")
    c = default_cavity_config();
  else
    throw InvalidConfig("unknown case '" + kind + "' (column, cavity)");

  read(root, "dt", c.dt, "config");
  read(root, "t_end", c.t_end, "config");
  if (root["master"]) {
    auto m = root["master"].as<std::string>();
    if (m == "fluid")
      c.master = MasterChoice::Fluid;
    else if (m == "structure")
      c.master = MasterChoice::Structure;
    else
      throw InvalidConfig("master must be 'fluid' or 'structure'");
  }
  if (root["predictor"]) c.predictor = parse_predictor(root["predictor"].as<std::string>());
  if (root["conversion"]) {
    auto r = root["conversion"].as<std::string>();
    if (r == "trapezoidal")
      c.rule.kind = ConversionRule::Kind::Trapezoidal;
    else if (r == "backward_euler")
      c.rule.kind = ConversionRule::Kind::BackwardEuler;
    else
      throw InvalidConfig("conversion must be 'trapezoidal' or 'backward_euler'");
  }
  if (auto s = root["solid"]) {
    check_keys(s, "solid", {"young", "poisson", "density", "rho_inf"});
    read(s, "young", c.solid.young_E, "solid");
    read(s, "poisson", c.solid.poisson_nu, "solid");
    read(s, "density", c.solid.density, "solid");
    read(s, "rho_inf", c.solid_rho_inf, "solid");
  }
  if (auto f = root["fluid"]) {
    check_keys(f, "fluid",
               {"viscosity", "density", "scheme", "rho_inf", "theta", "supg", "pspg", "grad_div",
                "drop_shape_derivatives"});
    read(f, "viscosity", c.fluid.viscosity, "fluid");
    read(f, "density", c.fluid.density, "fluid");
    auto scheme = read_str(f, "scheme", "gen_alpha");
    if (scheme == "gen_alpha") {
      double r = 1.0;
      read(f, "rho_inf", r, "fluid");
      c.fluid_scheme = FluidTimeScheme::gen_alpha(r);
    } else if (scheme == "theta") {
      double th = 0.5;
      read(f, "theta", th, "fluid");
      c.fluid_scheme = FluidTimeScheme::one_step_theta(th);
    } else {
      throw InvalidConfig("fluid scheme must be 'gen_alpha' or 'theta'");
    }
    read(f, "supg", c.stab.supg, "fluid");
    read(f, "pspg", c.stab.pspg, "fluid");
    read(f, "grad_div", c.stab.grad_div, "fluid");
    read(f, "drop_shape_derivatives", c.stab.drop_shape_derivatives, "fluid");
  }
  if (auto k = root["column"]) {
    check_keys(k, "column",
               {"fluid_length", "solid_length", "width", "nx_fluid", "nx_solid", "ny", "ny_solid", "drive",
                "driver", "p_inf"});
    auto& col = c.column;
    read(k, "fluid_length", col.fluid_length, "column");
    read(k, "solid_length", col.solid_length, "column");
    read(k, "width", col.width, "column");
    read(k, "nx_fluid", col.nx_fluid, "column");
    read(k, "nx_solid", col.nx_solid, "column");
    read(k, "ny", col.ny, "column");
    read(k, "ny_solid", col.ny_solid, "column");
    read(k, "p_inf", col.p_inf, "column");
    auto drive = read_str(k, "drive", "rigid");
    if (drive == "rigid")
      col.drive = ColumnDrive::Rigid;
    else if (drive == "dry_end")
      col.drive = ColumnDrive::DryEnd;
    else
      throw InvalidConfig("column drive must be 'rigid' or 'dry_end'");
    auto drv = read_str(k, "driver", "t2");
    if (drv == "t2")
      col.driver = Driver::Quadratic;
    else if (drv == "t5")
      col.driver = Driver::Quintic;
    else
      throw InvalidConfig("column driver must be 't2' or 't5'");
  }
  if (auto k = root["cavity"]) {
    check_keys(k, "cavity", {"n_cav", "n_top", "n_solid_x", "n_solid_y", "top_height", "solid_thickness", "lid_period"});
    auto& cav = c.cavity;
    read(k, "n_cav", cav.n_cav, "cavity");
    read(k, "n_top", cav.n_top, "cavity");
    read(k, "n_solid_x", cav.n_solid_x, "cavity");
    read(k, "n_solid_y", cav.n_solid_y, "cavity");
    read(k, "top_height", cav.top_height, "cavity");
    read(k, "solid_thickness", cav.solid_thickness, "cavity");
    read(k, "lid_period", cav.lid_period, "cavity");
  }
  if (auto n = root["newton"]) {
    check_keys(n, "newton", {"tol_field", "tol_interface", "max_iterations", "oracle_check"});
    double tf = c.newton.tol_solid;
    read(n, "tol_field", tf, "newton");
    c.newton.tol_solid = c.newton.tol_velocity = c.newton.tol_pressure = c.newton.tol_ale = tf;
    read(n, "tol_interface", c.newton.tol_interface, "newton");
    read(n, "max_iterations", c.newton.max_iterations, "newton");
    read(n, "oracle_check", c.newton.oracle_check, "newton");
  }
  if (auto l = root["linear"]) {
    check_keys(l, "linear", {"method", "restart", "rel_tol", "max_iterations", "precond", "dense_cap"});
    auto& lin = c.newton.linear;
    auto method = read_str(l, "method", "gmres");
    if (method == "gmres")
      lin.method = LinearSolverConfig::Method::Gmres;
    else if (method == "dense_lu")
      lin.method = LinearSolverConfig::Method::DenseLU;
    else
      throw InvalidConfig("linear method must be 'gmres' or 'dense_lu'");
    auto pc = read_str(l, "precond", "ilu0");
    if (pc == "ilu0")
      lin.precond = LinearSolverConfig::Precond::ILU0;
    else if (pc == "none")
      lin.precond = LinearSolverConfig::Precond::None;
    else
      throw InvalidConfig("precond must be 'ilu0' or 'none'");
    read(l, "restart", lin.restart, "linear");
    read(l, "rel_tol", lin.rel_tol, "linear");
    read(l, "max_iterations", lin.max_iterations, "linear");
    read(l, "dense_cap", lin.dense_cap, "linear");
  }
  if (auto o = root["output"]) {
    check_keys(o, "output", {"diagnostics", "dump_mortar"});
    read(o, "diagnostics", c.diagnostics_csv, "output");
    read(o, "dump_mortar", c.dump_mortar, "output");
  }
  c.validate();
  return c;
}

CaseConfig load_case_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case_config(ss.str());
}

double driver_displacement(Driver driver, double t) {
  return driver == Driver::Quadratic ? -t * t : -std::pow(t, 5);
}

AnalyticColumn pseudo1d_analytic(Driver driver, double rho_f, double p_inf, double x, double t) {
  AnalyticColumn s;
  if (driver == Driver::Quadratic) {
    s.u = -2.0 * t;
    s.a = -2.0;
  } else {
    s.u = -5.0 * std::pow(t, 4);
    s.a = -20.0 * std::pow(t, 3);
  }
  s.p = -rho_f * s.a * x + p_inf;
  return s;
}

double l2_error(const Mesh2D& mesh, const Vec& dg, const Vec& values, int stride, const std::vector<int>& comps,
                const FieldEvaluator& exact) {
  const int nn = int(mesh.nodes.size());
  if (int(dg.size()) != 2 * nn || int(values.size()) != stride * nn)
    throw ShapeError("field snapshot does not match the mesh");
  double sum = 0.0;
  for (const auto& el : mesh.elems) {
    for (const auto& gp : gauss_2x2()) {
      Q1Eval s = q1_eval(gp.xi, gp.eta);
      double x = 0, y = 0, j00 = 0, j01 = 0, j10 = 0, j11 = 0;
      for (int k = 0; k < 4; ++k) {
        double xk = mesh.nodes[el[k]].x + dg[2 * el[k]], yk = mesh.nodes[el[k]].y + dg[2 * el[k] + 1];
        x += s.n[k] * xk;
        y += s.n[k] * yk;
        j00 += s.dxi[k] * xk;
        j01 += s.deta[k] * xk;
        j10 += s.dxi[k] * yk;
        j11 += s.deta[k] * yk;
      }
      const double det = j00 * j11 - j01 * j10;
      auto ex = exact(x, y);
      if (ex.size() != comps.size()) throw ShapeError("evaluator returned the wrong number of components");
      for (size_t c = 0; c < comps.size(); ++c) {
        double v = 0.0;
        for (int k = 0; k < 4; ++k) v += s.n[k] * values[stride * el[k] + comps[c]];
        sum += gp.w * det * (v - ex[c]) * (v - ex[c]);
      }
    }
  }
  return std::sqrt(sum);
}

namespace {

// Dirichlet data as dof -> value(t); later entries override earlier ones.
class DirichletTable {
 public:
  void set(int dof, std::function<double(double)> f) { table_[dof] = std::move(f); }
  void set(int dof, double v) {
    table_[dof] = [v](double) { return v; };
  }
  bool empty() const { return table_.empty(); }
  std::function<DirichletValues(double)> build() const {
    return [table = table_](double t) {
      DirichletValues dv;
      for (const auto& [dof, f] : table) {
        dv.dofs.push_back(dof);
        dv.values.push_back(f(t));
      }
      return dv;
    };
  }

 private:
  std::map<int, std::function<double(double)>> table_;
};

std::vector<int> nodes_of(const Mesh2D& mesh, const std::string& set) { return mesh.edge_set_nodes(set); }

void fill_common(CoupledProblem& pb, const CaseConfig& cfg) {
  pb.solid_mat = cfg.solid;
  pb.fluid_mat = cfg.fluid;
  pb.solid_params = GenAlphaSolidParams::from_rho_inf(cfg.solid_rho_inf);
  pb.fluid_scheme = cfg.fluid_scheme;
  pb.stab = cfg.stab;
  pb.rule = cfg.rule;
  pb.master = cfg.master;
  pb.predictor = cfg.predictor;
  pb.dt = cfg.dt;
}

PreparedCase prepare_column(const CaseConfig& cfg) {
  const auto& col = cfg.column;
  PreparedCase pc;
  CoupledProblem& pb = pc.problem;
  fill_common(pb, cfg);
  std::tie(pb.fluid_mesh, pb.solid_mesh) = generate_column_meshes(
      col.fluid_length, col.solid_length, col.width, col.nx_fluid, col.nx_solid, col.ny, col.ny_solid);
  pb.build_coupling();
  pb.loads["inlet"] = col.p_inf;
  const bool fluid_slave = cfg.master == MasterChoice::Structure;
  const Driver drv = col.driver;

  DirichletTable sd;
  if (col.drive == ColumnDrive::Rigid) {
    for (int n = 0; n < int(pb.solid_mesh.nodes.size()); ++n) {
      sd.set(2 * n, [drv](double t) { return driver_displacement(drv, t); });
      sd.set(2 * n + 1, 0.0);
    }
  } else {
    for (const char* set : {"bottom", "top", "dry_end"})
      for (int n : nodes_of(pb.solid_mesh, set))
        if (!(cfg.master == MasterChoice::Fluid && pb.solid_dofs.on_interface[2 * n])) sd.set(2 * n + 1, 0.0);
    for (int n : nodes_of(pb.solid_mesh, "dry_end"))
      sd.set(2 * n, [drv](double t) { return driver_displacement(drv, t); });
  }
  pb.solid_dirichlet = sd.build();

  DirichletTable fd;
  for (const char* set : {"bottom", "top"})
    for (int n : nodes_of(pb.fluid_mesh, set))
      if (!(fluid_slave && pb.fluid_dofs.on_interface[3 * n])) fd.set(3 * n + 1, 0.0);
  if (!fd.empty()) pb.fluid_dirichlet = fd.build();

  std::set<int> fixed;
  for (int n : nodes_of(pb.fluid_mesh, "inlet")) {
    fixed.insert(2 * n);
    fixed.insert(2 * n + 1);
  }
  for (const char* set : {"bottom", "top"})
    for (int n : nodes_of(pb.fluid_mesh, set)) fixed.insert(2 * n + 1);
  for (int k : fixed)
    if (!pb.ale_dofs.on_interface[k]) pb.ale_fixed.push_back(k);
  pb.validate();

  // Start on the analytic solution.
  CoupledState& st = pc.initial;
  const auto a0 = pseudo1d_analytic(drv, cfg.fluid.density, col.p_inf, 0.0, 0.0);
  const int ns = pb.solid_dofs.n_dofs();
  st.solid = SolidState::zeros(ns);
  for (int n = 0; n < ns / 2; ++n) {
    st.solid.v[2 * n] = a0.u;
    st.solid.a[2 * n] = a0.a;
  }
  const int nf = int(pb.fluid_mesh.nodes.size());
  st.fluid = FluidState::zeros(nf);
  for (int n = 0; n < nf; ++n) {
    const auto s = pseudo1d_analytic(drv, cfg.fluid.density, col.p_inf, pb.fluid_mesh.nodes[n].x, 0.0);
    st.fluid.up[3 * n] = s.u;
    st.fluid.up[3 * n + 2] = s.p;
    st.fluid.acc[3 * n] = s.a;
    st.fluid.ug[2 * n] = 0.0;
  }
  const auto ai = pseudo1d_analytic(drv, cfg.fluid.density, col.p_inf, col.fluid_length, 0.0);
  st.lambda.assign(pb.mortar.n_slave(), 0.0);
  const DofMap& slave = fluid_slave ? pb.fluid_dofs : pb.solid_dofs;
  for (int k : pb.mortar.slave_nodes) st.lambda[slave.slot[slave.dof(k, 0)]] = ai.p;
  return pc;
}

PreparedCase prepare_cavity(const CaseConfig& cfg) {
  const auto& cav = cfg.cavity;
  PreparedCase pc;
  CoupledProblem& pb = pc.problem;
  fill_common(pb, cfg);
  std::tie(pb.fluid_mesh, pb.solid_mesh) = generate_cavity_meshes(
      cav.n_cav, cav.n_top, cav.n_solid_x, cav.n_solid_y, CavityGeometry{cav.top_height, cav.solid_thickness});
  pb.build_coupling();

  DirichletTable sd;
  for (const char* set : {"clamp_left", "clamp_right"})
    for (int n : nodes_of(pb.solid_mesh, set)) {
      sd.set(2 * n, 0.0);
      sd.set(2 * n + 1, 0.0);
    }
  pb.solid_dirichlet = sd.build();

  const double period = cav.lid_period;
  auto lid = [period](double t) { return 1.0 - std::cos(2.0 * std::numbers::pi * t / period); };
  const double y0 = 1.0 - cav.top_height, hgt = cav.top_height;
  DirichletTable fd;
  auto on_gamma = [&](int n) { return pb.fluid_dofs.on_interface[3 * n]; };
  for (const char* set : {"wall_left", "wall_right"})
    for (int n : nodes_of(pb.fluid_mesh, set))
      if (!on_gamma(n)) {
        fd.set(3 * n, 0.0);
        fd.set(3 * n + 1, 0.0);
      }
  for (int n : nodes_of(pb.fluid_mesh, "inflow")) {
    const double w = (pb.fluid_mesh.nodes[n].y - y0) / hgt;
    fd.set(3 * n, [lid, w](double t) { return lid(t) * w; });
    fd.set(3 * n + 1, 0.0);
  }
  for (int n : nodes_of(pb.fluid_mesh, "lid")) {
    fd.set(3 * n, lid);
    fd.set(3 * n + 1, 0.0);
  }
  pb.fluid_dirichlet = fd.build();

  std::set<int> fixed;
  for (const char* set : {"wall_left", "wall_right", "inflow", "outflow", "lid"})
    for (int n : nodes_of(pb.fluid_mesh, set)) {
      fixed.insert(2 * n);
      fixed.insert(2 * n + 1);
    }
  for (int k : fixed)
    if (!pb.ale_dofs.on_interface[k]) pb.ale_fixed.push_back(k);
  pb.validate();

  CoupledState& st = pc.initial;
  st.solid = SolidState::zeros(pb.solid_dofs.n_dofs());
  st.fluid = FluidState::zeros(int(pb.fluid_mesh.nodes.size()));
  st.lambda.assign(pb.mortar.n_slave(), 0.0);
  return pc;
}

double solid_kinetic_energy(const CsrMatrix& mass, const Vec& v) {
  return 0.5 * dot(v, mass.multiply(v));
}

}  // namespace

PreparedCase prepare_case(const CaseConfig& cfg) {
  cfg.validate();
  return cfg.kind == CaseKind::Column ? prepare_column(cfg) : prepare_cavity(cfg);
}

int RunResult::cumulative_linear_iters() const {
  int s = 0;
  for (const auto& r : steps) s += r.diag.linear_iters;
  return s;
}

double RunResult::max_abs_interface_energy() const {
  double m = 0.0;
  for (const auto& r : steps) m = std::max(m, std::abs(r.diag.interface_energy));
  return m;
}

void write_diagnostics_csv(const std::vector<StepRecord>& steps, std::ostream& out) {
  out << "step,time,newton_iters,linear_iters,constraint_norm,interface_energy\n";
  out.precision(12);
  for (const auto& r : steps)
    out << r.step << "," << r.time << "," << r.diag.newton_iters << "," << r.diag.linear_iters << ","
        << r.diag.constraint_norm << "," << r.diag.interface_energy << "\n";
}

namespace {

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot write '" + path + "'");
  body(out);
}

}  // namespace

RunResult run_case(const CaseConfig& cfg, const StepCallback& on_step) {
  PreparedCase pc = prepare_case(cfg);
  const CoupledProblem& pb = pc.problem;
  if (cfg.dump_mortar) {
    std::string path = cfg.diagnostics_csv.empty()
                           ? std::string("mortar.txt")
                           : (std::filesystem::path(cfg.diagnostics_csv).replace_extension(".mortar.txt")).string();
    write_file(path, [&](std::ostream& o) { write_mortar_coo(pb.mortar, o); });
  }
  const CsrMatrix solid_mass = solid_mass_matrix(pb.solid_mesh, pb.solid_mat);
  RunResult res;
  CoupledState st = pc.initial;
  auto kinetic = [&](const CoupledState& s) {
    return fluid_kinetic_energy(pb.fluid_mesh, pb.fluid_mat, s.fluid.up, s.fluid.dg) +
           solid_kinetic_energy(solid_mass, s.solid.v);
  };
  res.kinetic_energy_scale = kinetic(st);
  const int n = cfg.n_steps();
  try {
    for (int k = 1; k <= n; ++k) {
      StepResult sr;
      try {
        sr = newton_solve_step(pb, st, cfg.newton);
      } catch (const SolverError& e) {
        std::ostringstream os;
        os << "step " << k << " (t=" << st.t + cfg.dt << "): " << e.what();
        throw SolverError(os.str());
      }
      st = std::move(sr.state);
      StepRecord rec{k, st.t, std::move(sr.diag)};
      res.kinetic_energy_scale = std::max(res.kinetic_energy_scale, kinetic(st));
      if (on_step) on_step(rec, st);
      res.steps.push_back(std::move(rec));
    }
  } catch (...) {
    if (!cfg.diagnostics_csv.empty())
      write_file(cfg.diagnostics_csv, [&](std::ostream& o) { write_diagnostics_csv(res.steps, o); });
    throw;
  }
  if (!cfg.diagnostics_csv.empty())
    write_file(cfg.diagnostics_csv, [&](std::ostream& o) { write_diagnostics_csv(res.steps, o); });

  if (cfg.kind == CaseKind::Column) {
    const auto& col = cfg.column;
    const double t = st.t, rho = cfg.fluid.density;
    auto exact_u = [&](double x, double) {
      auto s = pseudo1d_analytic(col.driver, rho, col.p_inf, x, t);
      return std::vector<double>{s.u, 0.0};
    };
    auto exact_p = [&](double x, double) {
      return std::vector<double>{pseudo1d_analytic(col.driver, rho, col.p_inf, x, t).p};
    };
    const Vec zero_up(st.fluid.up.size(), 0.0);
    res.err_u_l2 = l2_error(pb.fluid_mesh, st.fluid.dg, st.fluid.up, 3, {0, 1}, exact_u);
    res.err_p_l2 = l2_error(pb.fluid_mesh, st.fluid.dg, st.fluid.up, 3, {2}, exact_p);
    const double nu = l2_error(pb.fluid_mesh, st.fluid.dg, zero_up, 3, {0, 1}, exact_u);
    const double np = l2_error(pb.fluid_mesh, st.fluid.dg, zero_up, 3, {2}, exact_p);
    res.rel_err_u_l2 = nu > 0.0 ? res.err_u_l2 / nu : res.err_u_l2;
    res.rel_err_p_l2 = np > 0.0 ? res.err_p_l2 / np : res.err_p_l2;
  }
  res.final_state = std::move(st);
  return res;
}

double observed_order(double err_coarse, double err_fine) {
  if (!(err_coarse > 0.0 && err_fine > 0.0)) throw DomainError("observed order needs positive errors");
  return std::log2(err_coarse / err_fine);
}

void write_study_csv(const ConvergenceStudy& study, std::ostream& out) {
  out << "# " << study.tag << "\n";
  out << "dt,err_u_L2,err_p_L2,order_u,order_p\n";
  out.precision(12);
  for (const auto& l : study.levels) {
    out << l.dt << "," << l.err_u << "," << l.err_p << ",";
    if (std::isnan(l.order_u))
      out << ",";
    else
      out << l.order_u << "," << l.order_p;
    out << "\n";
  }
}

ConvergenceStudy temporal_convergence_study(const CaseConfig& base, const std::vector<double>& dts,
                                            const std::string& csv_path) {
  if (base.kind != CaseKind::Column) throw InvalidConfig("convergence studies run on the column case");
  if (dts.size() < 3) throw InvalidConfig("a convergence study needs at least 3 time-step levels");
  for (size_t i = 1; i < dts.size(); ++i)
    if (std::abs(dts[i] - 0.5 * dts[i - 1]) > 1e-12 * dts[i - 1])
      throw InvalidConfig("time-step levels must halve");
  ConvergenceStudy study;
  study.tag = base.scheme_tag();
  auto flush = [&]() {
    if (!csv_path.empty()) write_file(csv_path, [&](std::ostream& o) { write_study_csv(study, o); });
  };
  try {
    for (double dt : dts) {
      CaseConfig c = base;
      c.dt = dt;
      c.column.driver = Driver::Quintic;
      c.diagnostics_csv.clear();
      c.dump_mortar = false;
      RunResult r = run_case(c);
      StudyLevel lv{dt, r.err_u_l2, r.err_p_l2, std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::quiet_NaN()};
      if (!study.levels.empty()) {
        const auto& prev = study.levels.back();
        lv.order_u = observed_order(prev.err_u, lv.err_u);
        lv.order_p = observed_order(prev.err_p, lv.err_p);
      }
      study.levels.push_back(lv);
    }
  } catch (...) {
    flush();
    throw;
  }
  flush();
  return study;
}

PredictorStudy predictor_study(const CaseConfig& base, const std::vector<PredictorKind>& kinds) {
  if (kinds.empty()) throw InvalidConfig("predictor study needs at least one predictor");
  PredictorStudy study;
  for (PredictorKind k : kinds) {
    CaseConfig c = base;
    c.predictor = k;
    c.diagnostics_csv.clear();
    c.dump_mortar = false;
    RunResult r = run_case(c);
    PredictorRun run;
    run.kind = k;
    for (const auto& s : r.steps) run.linear_per_step.push_back(s.diag.linear_iters);
    run.cumulative_linear = r.cumulative_linear_iters();
    run.final_state = std::move(r.final_state);
    study.runs.push_back(std::move(run));
  }
  const auto& ref = study.runs.front();
  for (auto& run : study.runs) {
    run.reduction_pct = ref.cumulative_linear > 0
                            ? 100.0 * (ref.cumulative_linear - run.cumulative_linear) / ref.cumulative_linear
                            : 0.0;
    auto diff = [](const Vec& a, const Vec& b) {
      double m = 0.0;
      for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
      return m;
    };
    study.max_state_diff = std::max({study.max_state_diff, diff(run.final_state.solid.d, ref.final_state.solid.d),
                                     diff(run.final_state.fluid.up, ref.final_state.fluid.up)});
  }
  return study;
}

void write_predictor_csv(const PredictorStudy& study, std::ostream& out) {
  out << "predictor,step,linear_iters\n";
  for (const auto& run : study.runs)
    for (size_t i = 0; i < run.linear_per_step.size(); ++i)
      out << to_string(run.kind) << "," << i + 1 << "," << run.linear_per_step[i] << "\n";
  out << "# summary: predictor,cumulative_linear,reduction_pct\n";
  for (const auto& run : study.runs)
    out << "# " << to_string(run.kind) << "," << run.cumulative_linear << "," << run.reduction_pct << "\n";
}

}  // namespace fsi
