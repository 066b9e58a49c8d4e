#include "fsi/interface.hpp"

#include "fsi/error.hpp"

namespace fsi {

TractionInterpolation TractionInterpolation::from_schemes(const GenAlphaSolidParams& solid,
                                                          const FluidTimeScheme& fluid) {
  TractionInterpolation t{solid.alpha_f, fluid_time_weights(fluid).b};
  t.validate();
  return t;
}

void TractionInterpolation::validate() const {
  if (!(a >= 0.0 && a < 1.0)) throw InvalidConfig("interpolation factor a must be in [0,1)");
  if (!(b >= 0.0 && b < 1.0)) throw InvalidConfig("interpolation factor b must be in [0,1)");
}

const CsrMatrix& coupling_solid(const MortarOperators& mortar, MasterChoice master) {
  return master == MasterChoice::Fluid ? mortar.d : mortar.m;
}

const CsrMatrix& coupling_fluid(const MortarOperators& mortar, MasterChoice master) {
  return master == MasterChoice::Fluid ? mortar.m : mortar.d;
}

Vec convert_velocity_increment(const ConversionRule& rule, const Vec& du, const Vec& u_old, bool first_iter,
                               double dt) {
  if (du.size() != u_old.size()) throw ShapeError("velocity increment and old velocity differ in size");
  const double tau = rule.tau(dt);
  Vec out(du.size());
  for (size_t i = 0; i < du.size(); ++i) out[i] = tau * du[i] + (first_iter ? dt * u_old[i] : 0.0);
  return out;
}

Vec kinematic_constraint_rhs(const MortarOperators& mortar, MasterChoice master, const Vec& dd_pred_solid,
                             const Vec& u_old_fluid, bool first_iter, double dt) {
  const CsrMatrix& cs = coupling_solid(mortar, master);
  const CsrMatrix& cf = coupling_fluid(mortar, master);
  if (int(dd_pred_solid.size()) != cs.cols() || int(u_old_fluid.size()) != cf.cols())
    throw ShapeError("constraint inputs do not match the coupling matrices");
  Vec r(cs.rows(), 0.0);
  if (!first_iter) return r;
  cf.multiply_add(u_old_fluid, r, dt);
  cs.multiply_add(dd_pred_solid, r, -1.0);
  return r;
}

TractionResiduals traction_residuals(const TractionInterpolation& interp, const MortarOperators& mortar,
                                     MasterChoice master, const Vec& lambda_old, const Vec& lambda_new) {
  interp.validate();
  const CsrMatrix& cs = coupling_solid(mortar, master);
  const CsrMatrix& cf = coupling_fluid(mortar, master);
  if (int(lambda_old.size()) != cs.rows() || int(lambda_new.size()) != cs.rows())
    throw ShapeError("multiplier vectors must live on the slave interface dofs");
  Vec lf(lambda_old.size()), ls(lambda_old.size());
  for (size_t i = 0; i < lf.size(); ++i) {
    lf[i] = interp.b * lambda_old[i] + (1.0 - interp.b) * lambda_new[i];
    ls[i] = -(interp.a * lambda_old[i] + (1.0 - interp.a) * lambda_new[i]);
  }
  return {cf.multiply_transpose(lf), cs.multiply_transpose(ls)};
}

Vec solid_interface_work_pairing(const MortarOperators& mortar, MasterChoice master, const Vec& dd_solid) {
  const CsrMatrix& cs = coupling_solid(mortar, master);
  if (int(dd_solid.size()) != cs.cols()) throw ShapeError("solid interface increment has the wrong size");
  return cs.multiply(dd_solid);
}

double interface_energy_step(const TractionInterpolation& interp, const Vec& lambda_old, const Vec& lambda_new,
                             const Vec& pairing) {
  if (lambda_old.size() != lambda_new.size() || lambda_old.size() != pairing.size())
    throw ShapeError("energy inputs differ in size");
  const double c = interp.a - interp.b;
  double e = 0.0;
  for (size_t i = 0; i < pairing.size(); ++i) e += c * (lambda_old[i] - lambda_new[i]) * pairing[i];
  return e;
}

}  // namespace fsi
