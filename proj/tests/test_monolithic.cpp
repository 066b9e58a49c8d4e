#include <doctest.h>

#include <cmath>
#include <random>

#include "fsi/error.hpp"
#include "fsi/harness.hpp"
#include "fsi/monolithic.hpp"
#include "test_util.hpp"

using namespace fsi;

namespace {

CaseConfig small_column(MasterChoice master, ColumnDrive drive = ColumnDrive::DryEnd) {
  CaseConfig c = default_column_config();
  c.master = master;
  c.column.drive = drive;
  c.column.nx_fluid = 2;
  c.column.nx_solid = 2;
  c.column.ny = 2;
  c.dt = 0.05;
  c.t_end = 0.2;
  c.newton.linear.method = LinearSolverConfig::Method::DenseLU;
  return c;
}

// Advances a prepared case by n steps.
CoupledState advance(const CoupledProblem& p, CoupledState s, int n, const NewtonConfig& cfg) {
  for (int k = 0; k < n; ++k) s = newton_solve_step(p, s, cfg).state;
  return s;
}

Iterate perturbed(const Iterate& it, std::mt19937& rng, double scale) {
  Iterate out = it;
  for (Vec* v : {&out.d, &out.up, &out.dg}) {
    Vec r = testutil::random_vec(rng, int(v->size()), -scale, scale);
    axpy(1.0, r, *v);
  }
  return out;
}

double state_diff(const CoupledState& a, const CoupledState& b) {
  return std::max({testutil::max_abs_diff(a.solid.d, b.solid.d), testutil::max_abs_diff(a.fluid.up, b.fluid.up),
                   testutil::max_abs_diff(a.fluid.dg, b.fluid.dg)});
}

}  // namespace

TEST_CASE("rest state converges in one iteration with zero increment") {
  CaseConfig c = small_column(MasterChoice::Structure);
  PreparedCase pc = prepare_case(c);
  pc.problem.loads.clear();
  auto base = pc.problem.solid_dirichlet;
  pc.problem.solid_dirichlet = [base](double t) {
    DirichletValues v = base(t);
    std::fill(v.values.begin(), v.values.end(), 0.0);
    return v;
  };
  CoupledState zero = pc.initial;
  zero.solid = SolidState::zeros(pc.problem.solid_dofs.n_dofs());
  zero.fluid = FluidState::zeros(pc.problem.fluid_dofs.n_nodes);
  std::fill(zero.lambda.begin(), zero.lambda.end(), 0.0);
  StepResult r = newton_solve_step(pc.problem, zero, c.newton);
  CHECK(r.diag.newton_iters == 1);
  CHECK(norm_inf(r.state.solid.d) == 0.0);
  CHECK(norm_inf(r.state.fluid.up) == 0.0);
  CHECK(norm_inf(r.state.lambda) == 0.0);
  CHECK(r.diag.interface_energy == 0.0);
}

TEST_CASE("condensed increments match the uncondensed saddle system") {
  std::mt19937 rng(31);
  for (auto master : {MasterChoice::Structure, MasterChoice::Fluid})
    for (auto rule : {ConversionRule::Kind::Trapezoidal, ConversionRule::Kind::BackwardEuler})
      for (auto pred : {PredictorKind::ConstDis, PredictorKind::ConstAcc})
        for (bool equal_ab : {true, false}) {
          CaseConfig c = small_column(master);
          c.column.ny_solid = 3;  // non-matching interface
          c.rule.kind = rule;
          c.predictor = pred;
          c.fluid_scheme = equal_ab ? FluidTimeScheme::gen_alpha(1.0) : FluidTimeScheme::gen_alpha(0.5);
          PreparedCase pc = prepare_case(c);
          CoupledState s = advance(pc.problem, pc.initial, 2, c.newton);
          s.lambda = testutil::random_vec(rng, int(s.lambda.size()));
          CoupledState predicted = predict_step(pc.problem, s);
          Iterate it = perturbed(initial_iterate(pc.problem, predicted), rng, 1e-3);
          for (bool first : {true, false}) {
            BlockSystem sys = build_saddle_system(pc.problem, predicted, it, first);
            CHECK((sys.a == sys.b) == equal_ab);
            OracleComparison oc = compare_with_saddle(sys);
            CAPTURE(int(master));
            CAPTURE(int(rule));
            CAPTURE(first);
            CHECK(oc.increment_rel_diff <= 1e-8);
            CHECK(oc.lambda_rel_diff <= 1e-8);
          }
        }
}

TEST_CASE("condensed jacobian matches central differences of the condensed residual") {
  std::mt19937 rng(77);
  for (auto master : {MasterChoice::Structure, MasterChoice::Fluid}) {
    CaseConfig c = small_column(master);
    c.column.ny_solid = 3;
    c.fluid_scheme = FluidTimeScheme::gen_alpha(0.5);
    PreparedCase pc = prepare_case(c);
    CoupledState s = advance(pc.problem, pc.initial, 1, c.newton);
    CoupledState predicted = predict_step(pc.problem, s);
    Iterate base = perturbed(initial_iterate(pc.problem, predicted), rng, 1e-2);
    CondensedSystem cond = condense(build_saddle_system(pc.problem, predicted, base, false));
    const int n = int(cond.r.size());
    CHECK(testutil::max_abs_diff(condensed_residual_at(pc.problem, predicted, base, Vec(n, 0.0)), cond.r) < 1e-12);
    auto res = [&](const Vec& dx) { return condensed_residual_at(pc.problem, predicted, base, dx); };
    for (int dir = 0; dir < 10; ++dir)
      CHECK(testutil::best_fd_error(res, cond.j, Vec(n, 0.0), testutil::random_vec(rng, n)) <= 1e-5);
  }
}

TEST_CASE("quadratic drive: multiplier carries the interface pressure") {
  CaseConfig c = small_column(MasterChoice::Structure, ColumnDrive::Rigid);
  c.column.ny_solid = 3;
  PreparedCase pc = prepare_case(c);
  CoupledState s = pc.initial;
  for (int k = 0; k < 4; ++k) {
    StepResult r = newton_solve_step(pc.problem, s, c.newton);
    s = r.state;
    // Pressure at the current interface position.
    const double x_gamma = c.column.fluid_length + driver_displacement(Driver::Quadratic, s.t);
    AnalyticColumn ex = pseudo1d_analytic(Driver::Quadratic, c.fluid.density, c.column.p_inf, x_gamma, s.t);
    const auto& sl = pc.problem.mortar.slave_nodes;
    for (size_t j = 0; j < sl.size(); ++j) {
      CHECK(s.lambda[2 * j] == doctest::Approx(ex.p).epsilon(1e-9));
      // End nodes sit on the slip walls and carry the wall reaction in y.
      if (j > 0 && j + 1 < sl.size()) CHECK(std::abs(s.lambda[2 * j + 1]) < 1e-9);
    }
    CHECK(r.diag.constraint_norm < 1e-12);
  }
}

TEST_CASE("master choice does not change the converged fields") {
  // Different axial resolutions with coincident interface nodes.
  CaseConfig cs = small_column(MasterChoice::Structure);
  cs.column.nx_fluid = 4;
  cs.column.nx_solid = 6;
  cs.column.ny = 1;
  cs.t_end = 0.5;
  cs.dt = 0.05;
  CaseConfig cf = cs;
  cf.master = MasterChoice::Fluid;
  RunResult a = run_case(cs), b = run_case(cf);
  CHECK(state_diff(a.final_state, b.final_state) <= 1e-7);
  // Axial multiplier components; lateral ones hold the wall reaction of whichever side is slave.
  REQUIRE(a.final_state.lambda.size() == b.final_state.lambda.size());
  for (size_t i = 0; i < a.final_state.lambda.size(); i += 2)
    CHECK(a.final_state.lambda[i] == doctest::Approx(b.final_state.lambda[i]).epsilon(1e-7));
}

TEST_CASE("predictors change iteration counts, not the answer") {
  CaseConfig c = small_column(MasterChoice::Structure);
  c.column.ny_solid = 3;
  c.t_end = 0.3;
  PredictorStudy st = predictor_study(c, {PredictorKind::ConstDis, PredictorKind::ConstVel, PredictorKind::ConstAcc});
  CHECK(st.max_state_diff <= 1e-8);
  // From rest the three predictors coincide on step 1.
  CHECK(st.runs[0].linear_per_step[0] == st.runs[1].linear_per_step[0]);
  CHECK(st.runs[0].linear_per_step[0] == st.runs[2].linear_per_step[0]);
}

TEST_CASE("constraint holds after every converged step") {
  CaseConfig c = small_column(MasterChoice::Fluid);
  c.column.ny_solid = 3;
  c.column.ny = 2;
  c.newton.linear.method = LinearSolverConfig::Method::Gmres;
  c.newton.linear.rel_tol = 1e-10;
  RunResult r = run_case(c);
  for (const auto& s : r.steps) CHECK(s.diag.constraint_norm < 1e-10);
}

TEST_CASE("slave-side interface Dirichlet data is rejected") {
  CaseConfig c = small_column(MasterChoice::Structure, ColumnDrive::Rigid);
  PreparedCase pc = prepare_case(c);
  pc.problem.master = MasterChoice::Fluid;
  pc.problem.build_coupling();
  CHECK_THROWS_AS(pc.problem.validate(), InvalidConfig);

  c.master = MasterChoice::Fluid;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  CHECK_THROWS_AS(run_case(c), InvalidConfig);
}

TEST_CASE("newton reports non-convergence with context") {
  CaseConfig c = small_column(MasterChoice::Structure);
  c.newton.max_iterations = 1;
  PreparedCase pc = prepare_case(c);
  CHECK_THROWS_AS(newton_solve_step(pc.problem, pc.initial, c.newton), SolverError);
  NewtonConfig bad;
  bad.tol_solid = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("newton converges superlinearly on the cavity") {
  CaseConfig c = default_cavity_config();
  c.cavity.n_cav = 6;
  c.cavity.n_top = 1;
  c.cavity.n_solid_x = 7;
  c.dt = 0.05;
  c.t_end = 0.5;
  c.newton.linear.rel_tol = 1e-12;
  c.newton.tol_solid = c.newton.tol_velocity = c.newton.tol_pressure = c.newton.tol_ale = 1e-12;
  c.newton.tol_interface = 1e-12;
  RunResult r = run_case(c);
  int checked = 0;
  for (size_t k = 4; k < r.steps.size(); ++k) {
    const auto& rn = r.steps[k].diag.residual_norms;
    for (size_t i = 0; i + 1 < rn.size(); ++i) {
      // Pairs above the roundoff floor only.
      if (rn[i + 1] < 1e-9 * rn[0]) continue;
      CAPTURE(k);
      CAPTURE(i);
      CHECK(rn[i + 1] <= 10.0 * std::pow(rn[i], 1.5));
      ++checked;
    }
  }
  CHECK(checked > 0);
}
