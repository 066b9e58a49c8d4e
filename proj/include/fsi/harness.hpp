#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsi/monolithic.hpp"

namespace fsi {

enum class CaseKind { Column, Cavity };

// Prescribed column displacement d(t) = -t^2 or -t^5.
enum class Driver { Quadratic, Quintic };

// Rigid: every solid dof follows d(t). DryEnd: elastic solid pulled at its far end.
enum class ColumnDrive { Rigid, DryEnd };

struct ColumnSetup {
  double fluid_length = 1.0;
  double solid_length = 1.0;
  double width = 0.25;
  int nx_fluid = 4;
  int nx_solid = 4;
  int ny = 1;
  int ny_solid = -1;  // -1: same as ny
  ColumnDrive drive = ColumnDrive::Rigid;
  Driver driver = Driver::Quadratic;
  double p_inf = 0.0;
};

struct CavitySetup {
  int n_cav = 16;
  int n_top = 2;
  int n_solid_x = 18;
  int n_solid_y = 1;
  double top_height = 0.125;
  double solid_thickness = 0.05;
  double lid_period = 5.0;  // lid speed 1 - cos(2 pi t / period)
};

struct CaseConfig {
  CaseKind kind = CaseKind::Column;
  double dt = 0.02;
  double t_end = 0.5;
  MasterChoice master = MasterChoice::Structure;
  PredictorKind predictor = PredictorKind::ConstDis;
  ConversionRule rule;
  SolidMaterial solid;
  double solid_rho_inf = 1.0;
  FluidMaterial fluid;
  FluidTimeScheme fluid_scheme;
  FluidStabilization stab;
  ColumnSetup column;
  CavitySetup cavity;
  NewtonConfig newton;
  std::string diagnostics_csv;  // empty: no file
  bool dump_mortar = false;     // writes <diagnostics stem>.mortar.txt or mortar.txt

  int n_steps() const;
  void validate() const;
  // "gen_alpha(1)/theta(0.5)/trapezoidal"
  std::string scheme_tag() const;
};

// Desk-scale defaults for each case kind.
CaseConfig default_column_config();
CaseConfig default_cavity_config();

CaseConfig parse_case_config(const std::string& yaml_text);
CaseConfig load_case_config(const std::string& path);

struct PreparedCase {
  CoupledProblem problem;
  CoupledState initial;
};
PreparedCase prepare_case(const CaseConfig& cfg);

struct AnalyticColumn {
  double u;  // axial velocity
  double a;  // axial acceleration
  double p;
};
double driver_displacement(Driver driver, double t);
AnalyticColumn pseudo1d_analytic(Driver driver, double rho_f, double p_inf, double x, double t);

// Values of the compared components at a spatial point.
using FieldEvaluator = std::function<std::vector<double>(double x, double y)>;

// L2 norm over the deformed mesh X + dg of (values - exact) for the selected nodal components.
double l2_error(const Mesh2D& mesh, const Vec& dg, const Vec& values, int stride, const std::vector<int>& comps,
                const FieldEvaluator& exact);

struct StepRecord {
  int step = 0;
  double time = 0.0;
  StepDiagnostics diag;
};

struct RunResult {
  std::vector<StepRecord> steps;
  CoupledState final_state;
  double err_u_l2 = -1.0;  // column cases only; relative errors below
  double err_p_l2 = -1.0;
  double rel_err_u_l2 = -1.0;
  double rel_err_p_l2 = -1.0;
  double kinetic_energy_scale = 0.0;  // max over steps of fluid + solid kinetic energy
  int cumulative_linear_iters() const;
  double max_abs_interface_energy() const;
};

using StepCallback = std::function<void(const StepRecord&, const CoupledState&)>;

RunResult run_case(const CaseConfig& cfg, const StepCallback& on_step = {});

void write_diagnostics_csv(const std::vector<StepRecord>& steps, std::ostream& out);

double observed_order(double err_coarse, double err_fine);

struct StudyLevel {
  double dt = 0.0;
  double err_u = 0.0;
  double err_p = 0.0;
  double order_u = 0.0;  // NaN on the first level
  double order_p = 0.0;
};

struct ConvergenceStudy {
  std::string tag;
  std::vector<StudyLevel> levels;
};

// Each level is a full column run with the quintic driver; levels must halve.
// Rows finished before a failure are written to csv_path before rethrowing.
ConvergenceStudy temporal_convergence_study(const CaseConfig& base, const std::vector<double>& dts,
                                            const std::string& csv_path = "");
void write_study_csv(const ConvergenceStudy& study, std::ostream& out);

struct PredictorRun {
  PredictorKind kind = PredictorKind::ConstDis;
  std::vector<int> linear_per_step;
  int cumulative_linear = 0;
  double reduction_pct = 0.0;  // relative to the first run
  CoupledState final_state;
};

struct PredictorStudy {
  std::vector<PredictorRun> runs;
  double max_state_diff = 0.0;  // max-norm difference of final (d, u, p) against the first run
};
PredictorStudy predictor_study(const CaseConfig& base, const std::vector<PredictorKind>& kinds);
void write_predictor_csv(const PredictorStudy& study, std::ostream& out);

std::string to_string(PredictorKind kind);
PredictorKind parse_predictor(const std::string& s);

}  // namespace fsi
