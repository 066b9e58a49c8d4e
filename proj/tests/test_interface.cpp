#include <doctest.h>

#include <random>

#include "fsi/error.hpp"
#include "fsi/interface.hpp"
#include "fsi/mesh.hpp"
#include "test_util.hpp"

using namespace fsi;

namespace {

// Conforming unit-width interface; the solid is the slave side.
MortarOperators conforming_mortar(int ny, double width = 1.0, int ny_solid = -1) {
  auto [f, s] = generate_column_meshes(1, 1, width, 2, 2, ny, ny_solid);
  return assemble_mortar(s, "interface", build_dofmap(s, 2, "interface"), f, "interface",
                         build_dofmap(f, 3, "interface", 2));
}

}  // namespace

TEST_CASE("velocity-to-displacement conversion") {
  ConversionRule trap;
  ConversionRule be{ConversionRule::Kind::BackwardEuler};
  CHECK(trap.tau(0.1) == doctest::Approx(0.05));
  CHECK(be.tau(0.1) == doctest::Approx(0.1));

  Vec w = {1.0, -2.0, 0.5};
  Vec out = convert_velocity_increment(trap, w, {9, 9, 9}, false, 0.2);
  for (int i = 0; i < 3; ++i) CHECK(out[i] == doctest::Approx(0.1 * w[i]));

  // u constant: d^{n+1} - d^n = dt/2 (u^{n+1} + u^n) = dt u^n.
  CHECK(convert_velocity_increment(trap, {0.0}, {1.0}, true, 0.1)[0] == doctest::Approx(0.1));
  // u^{n+1} = 0 under backward Euler: dt u^{n+1} = 0.
  CHECK(convert_velocity_increment(be, {-1.0}, {1.0}, true, 0.1)[0] == doctest::Approx(0.0));
  CHECK_THROWS_AS(convert_velocity_increment(be, {1.0}, {1.0, 2.0}, true, 0.1), ShapeError);
}

TEST_CASE("first-iteration constraint right-hand side") {
  MortarOperators m = conforming_mortar(2);
  const int ns = m.n_slave(), nm = m.n_master();
  std::mt19937 rng(3);
  Vec dd = testutil::random_vec(rng, ns), u = testutil::random_vec(rng, nm);
  for (auto master : {MasterChoice::Fluid, MasterChoice::Structure}) {
    CHECK(norm_inf(kinematic_constraint_rhs(m, master, dd, u, false, 0.01)) == 0.0);
    CHECK(norm_inf(kinematic_constraint_rhs(m, master, Vec(ns, 0.0), Vec(nm, 0.0), true, 0.01)) == 0.0);
  }
  // ConstVel with unit velocity: dd_p = dt * 1, fluid at rest.
  Vec ddp(ns, 0.01);
  Vec r = kinematic_constraint_rhs(m, MasterChoice::Fluid, ddp, Vec(nm, 0.0), true, 0.01);
  for (int i = 0; i < ns; ++i) CHECK(r[i] == doctest::Approx(-0.01 * m.d.at(i, i)));
  CHECK(m.d.at(0, 0) == doctest::Approx(0.25));
  CHECK(m.d.at(2, 2) == doctest::Approx(0.5));

  // Structure master: C_S = M, C_F = D.
  Vec rs = kinematic_constraint_rhs(m, MasterChoice::Structure, Vec(nm, 0.01), Vec(ns, 0.0), true, 0.01);
  Vec expect = m.m.multiply(Vec(nm, -0.01));
  CHECK(testutil::max_abs_diff(rs, expect) < 1e-15);
}

TEST_CASE("interface tractions") {
  MortarOperators m = conforming_mortar(2, 1.0, 3);
  const int ns = m.n_slave();
  Vec zero(ns, 0.0);
  for (auto master : {MasterChoice::Fluid, MasterChoice::Structure}) {
    auto z = traction_residuals({0.3, 0.6}, m, master, zero, zero);
    CHECK(norm_inf(z.fluid) == 0.0);
    CHECK(norm_inf(z.solid) == 0.0);
  }

  Vec ek(ns, 0.0);
  ek[1] = 1.0;
  auto t = traction_residuals({0.0, 0.4}, m, MasterChoice::Fluid, zero, ek);
  Vec col = m.d.multiply_transpose(ek);
  for (int i = 0; i < ns; ++i) CHECK(t.solid[i] == doctest::Approx(-col[i]));

  std::mt19937 rng(5);
  Vec ls = testutil::random_vec(rng, ns);
  auto h = traction_residuals({0.5, 0.5}, m, MasterChoice::Fluid, ls, ls);
  Vec ds = m.d.multiply_transpose(ls), ms = m.m.multiply_transpose(ls);
  for (auto& v : ds) v = -v;
  CHECK(testutil::max_abs_diff(h.solid, ds) < 1e-14);
  CHECK(testutil::max_abs_diff(h.fluid, ms) < 1e-14);

  // Structure master swaps the roles of D and M.
  auto hs = traction_residuals({0.5, 0.5}, m, MasterChoice::Structure, ls, ls);
  Vec dsf = m.d.multiply_transpose(ls), msf = m.m.multiply_transpose(ls);
  for (auto& v : msf) v = -v;
  CHECK(testutil::max_abs_diff(hs.solid, msf) < 1e-14);
  CHECK(testutil::max_abs_diff(hs.fluid, dsf) < 1e-14);

  CHECK_THROWS_AS(traction_residuals({1.0, 0.0}, m, MasterChoice::Fluid, zero, zero), InvalidConfig);
}

TEST_CASE("traction interpolation from the field schemes") {
  auto t = TractionInterpolation::from_schemes(GenAlphaSolidParams::from_rho_inf(1.0), FluidTimeScheme::gen_alpha(1.0));
  CHECK(t.a == doctest::Approx(0.5));
  CHECK(t.b == doctest::Approx(0.5));
  auto u = TractionInterpolation::from_schemes(GenAlphaSolidParams::from_rho_inf(1.0),
                                               FluidTimeScheme::one_step_theta(1.0));
  CHECK(u.b == 0.0);
}

TEST_CASE("interface energy per step") {
  std::mt19937 rng(12);
  Vec l0 = testutil::random_vec(rng, 6), l1 = testutil::random_vec(rng, 6), s = testutil::random_vec(rng, 6);
  CHECK(interface_energy_step({0.4, 0.4}, l0, l1, s) == 0.0);
  CHECK(interface_energy_step({0.2, 0.7}, l0, l0, s) == doctest::Approx(0.0).epsilon(1e-15));
  Vec q = l1;
  axpy(-1.0, l0, q);
  CHECK(interface_energy_step({0.6, 0.5}, l0, l1, s) == doctest::Approx(-0.1 * dot(q, s)).epsilon(1e-12));
  CHECK_THROWS_AS(interface_energy_step({0.6, 0.5}, l0, Vec(5), s), ShapeError);

  MortarOperators m = conforming_mortar(1);
  Vec dd = {0.1, 0.0, 0.2, 0.0};
  CHECK(testutil::max_abs_diff(solid_interface_work_pairing(m, MasterChoice::Fluid, dd), m.d.multiply(dd)) == 0.0);
  CHECK(testutil::max_abs_diff(solid_interface_work_pairing(m, MasterChoice::Structure, dd), m.m.multiply(dd)) == 0.0);
}

TEST_CASE("energy vanishes for equal interpolation weights under random data") {
  std::mt19937 rng(44);
  std::uniform_real_distribution<double> u(0.0, 0.99);
  for (int k = 0; k < 100; ++k) {
    double a = u(rng);
    int n = 1 + k % 9;
    CHECK(interface_energy_step({a, a}, testutil::random_vec(rng, n), testutil::random_vec(rng, n),
                                testutil::random_vec(rng, n)) == 0.0);
  }
}
