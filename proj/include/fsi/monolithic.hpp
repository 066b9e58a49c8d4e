#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fsi/fe.hpp"
#include "fsi/fluid.hpp"
#include "fsi/interface.hpp"
#include "fsi/mortar.hpp"
#include "fsi/solid.hpp"

namespace fsi {

// Everything that stays fixed over a run. Both meshes carry an edge set named "interface".
struct CoupledProblem {
  Mesh2D solid_mesh;
  Mesh2D fluid_mesh;
  DofMap solid_dofs;  // 2 per node
  DofMap fluid_dofs;  // (u_x, u_y, p) per node; velocities on the interface
  DofMap ale_dofs;    // 2 per node
  SolidMaterial solid_mat;
  FluidMaterial fluid_mat;
  GenAlphaSolidParams solid_params;
  FluidTimeScheme fluid_scheme;
  FluidStabilization stab;
  ConversionRule rule;
  MasterChoice master = MasterChoice::Structure;
  PredictorKind predictor = PredictorKind::ConstDis;
  PressureLoads loads;
  // Prescribed values at a given time; empty functions mean no constraints.
  std::function<DirichletValues(double)> solid_dirichlet;
  std::function<DirichletValues(double)> fluid_dirichlet;
  std::vector<int> ale_fixed;  // homogeneous
  MortarOperators mortar;
  double dt = 0.01;

  TractionInterpolation interp() const { return TractionInterpolation::from_schemes(solid_params, fluid_scheme); }
  // Dof maps and mortar operators from the meshes and the master choice.
  void build_coupling();
  // Rejects slave-side interface Dirichlet data and constrained ALE interface dofs.
  void validate() const;
};

struct CoupledState {
  SolidState solid;
  FluidState fluid;
  Vec lambda;  // slave interface dofs
  double t = 0.0;
};

struct Iterate {
  Vec d;
  Vec up;
  Vec dg;
};

// Field blocks split into interior (I) and interface (G) parts plus coupling data for one
// Newton iteration. Interface vectors use the interface ordering of their own field.
struct BlockSystem {
  MasterChoice master = MasterChoice::Structure;
  double a = 0.0, b = 0.0, tau = 0.0, dt = 0.0;
  bool first_iter = false;

  Blocks s;   // solid tangent
  Blocks f;   // fluid tangent w.r.t. (u, p)
  Blocks fg;  // fluid tangent w.r.t. grid displacement
  CsrMatrix a_ii, a_ig;
  Vec rs_i, rs_g, rf_i, rf_g, rg_i;
  std::vector<char> pressure_rows;  // per fluid interior dof

  CsrMatrix d, m, p;  // mortar operators of the active master choice
  Vec lambda_old;
  Vec u_old_g;    // fluid interface velocity at t^n
  Vec dd_pred_g;  // solid interface predictor increment

  // Interface dofs of the master field with Dirichlet data: (interface slot, current - prescribed).
  std::vector<std::pair<int, double>> master_dirichlet;

  int n_si() const { return int(rs_i.size()); }
  int n_sg() const { return int(rs_g.size()); }
  int n_fi() const { return int(rf_i.size()); }
  int n_fg() const { return int(rf_g.size()); }
  int n_gi() const { return int(rg_i.size()); }
  int n_gg() const { return a_ig.cols(); }
  int n_lambda() const { return d.rows(); }
  const CsrMatrix& c_solid() const { return master == MasterChoice::Fluid ? d : m; }
  const CsrMatrix& c_fluid() const { return master == MasterChoice::Fluid ? m : d; }
};

BlockSystem build_saddle_system(const CoupledProblem& problem, const CoupledState& state, const Iterate& it,
                                bool first_iter);

// Uncondensed system in the unknowns [dS_I, dS_G, u_I, u_G, dG_I, dG_G, lambda^{n+1}].
struct SaddleSystem {
  CsrMatrix j;
  Vec r;
  std::vector<int> offsets;  // 8 entries
};
SaddleSystem saddle_matrix(const BlockSystem& sys);

// Row groups used by the convergence test.
enum class RowGroup : char { Solid, Velocity, Pressure, Ale, Interface };

struct CondensedSystem {
  CsrMatrix j;
  Vec r;
  std::vector<int> offsets;  // field blocks for the block preconditioner
  std::vector<RowGroup> groups;
};

// Fluid master: unknowns [dS_I, u_I, u_G, dG_I].
CondensedSystem condense_fluid_handled(const BlockSystem& sys);
// Structure master: unknowns [dS_I, dS_G, u_I, dG_I].
CondensedSystem condense_structure_handled(const BlockSystem& sys);
CondensedSystem condense(const BlockSystem& sys);

// Increments of all field dofs, split by partition.
struct FieldIncrement {
  Vec ds_i, ds_g, du_i, du_g, ddg_i, ddg_g;
};
FieldIncrement expand_condensed(const BlockSystem& sys, const Vec& dx);
FieldIncrement split_saddle(const BlockSystem& sys, const Vec& x);

// Closed-form multiplier from the slave interface momentum rows of the solved system.
Vec recover_lambda(const BlockSystem& sys, const FieldIncrement& inc);

Iterate apply_increment(const CoupledProblem& problem, const Iterate& it, const FieldIncrement& inc);

struct NewtonConfig {
  double tol_solid = 1e-8;
  double tol_velocity = 1e-8;
  double tol_pressure = 1e-8;
  double tol_ale = 1e-8;
  double tol_interface = 1e-9;
  int max_iterations = 20;
  LinearSolverConfig linear;
  bool oracle_check = false;

  void validate() const;
};

struct StepDiagnostics {
  int newton_iters = 0;
  int linear_iters = 0;
  double constraint_norm = 0.0;
  double interface_energy = 0.0;
  std::vector<double> residual_norms;  // 2-norm of the condensed residual per iteration
  double oracle_max_rel_diff = -1.0;   // negative when not checked; skips roundoff-level iterations
};

struct StepResult {
  CoupledState state;
  StepDiagnostics diag;
};

// Predictor with Dirichlet jumps folded into the solid increment.
CoupledState predict_step(const CoupledProblem& problem, const CoupledState& state);
Iterate initial_iterate(const CoupledProblem& problem, const CoupledState& predicted);

StepResult newton_solve_step(const CoupledProblem& problem, const CoupledState& state, const NewtonConfig& cfg);

// Dense comparison of the condensed increment against the uncondensed system.
struct OracleComparison {
  double increment_rel_diff = 0.0;
  double lambda_rel_diff = 0.0;
};
OracleComparison compare_with_saddle(const BlockSystem& sys);

// Condensed residual after moving the iterate by a condensed-space increment (no first-iteration terms).
Vec condensed_residual_at(const CoupledProblem& problem, const CoupledState& state, const Iterate& base,
                          const Vec& dx);

// Mortar constraint C_S d_S,G - C_F d_G,G on the interface.
Vec constraint_violation(const CoupledProblem& problem, const Vec& d, const Vec& dg);

}  // namespace fsi
