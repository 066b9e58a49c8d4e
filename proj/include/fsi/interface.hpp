#pragma once

#include <utility>

#include "fsi/fluid.hpp"
#include "fsi/mortar.hpp"
#include "fsi/solid.hpp"

namespace fsi {

enum class MasterChoice { Fluid, Structure };

struct ConversionRule {
  enum class Kind { Trapezoidal, BackwardEuler };
  Kind kind = Kind::Trapezoidal;

  double tau(double dt) const { return kind == Kind::Trapezoidal ? 0.5 * dt : dt; }
};

// Weights of the previous multiplier in the solid (a) and fluid (b) interface tractions.
struct TractionInterpolation {
  double a = 0.0;
  double b = 0.0;

  static TractionInterpolation from_schemes(const GenAlphaSolidParams& solid, const FluidTimeScheme& fluid);
  void validate() const;
};

// Solid-side and fluid-side coupling matrices for the given master choice.
const CsrMatrix& coupling_solid(const MortarOperators& mortar, MasterChoice master);
const CsrMatrix& coupling_fluid(const MortarOperators& mortar, MasterChoice master);

// Grid displacement increment on the interface from a fluid velocity increment.
Vec convert_velocity_increment(const ConversionRule& rule, const Vec& du, const Vec& u_old, bool first_iter,
                               double dt);

// First-iteration right-hand side of the combined kinematic constraint row,
// dt C_F u^n - C_S dd_p; zero when first_iter is false.
Vec kinematic_constraint_rhs(const MortarOperators& mortar, MasterChoice master, const Vec& dd_pred_solid,
                             const Vec& u_old_fluid, bool first_iter, double dt);

struct TractionResiduals {
  Vec fluid;  // fluid interface dofs
  Vec solid;  // solid interface dofs
};
TractionResiduals traction_residuals(const TractionInterpolation& interp, const MortarOperators& mortar,
                                     MasterChoice master, const Vec& lambda_old, const Vec& lambda_new);

// C_S times the solid interface displacement increment: the slave-side work pairing.
Vec solid_interface_work_pairing(const MortarOperators& mortar, MasterChoice master, const Vec& dd_solid);

// ((a-b) lambda^n + (b-a) lambda^{n+1}) . pairing
double interface_energy_step(const TractionInterpolation& interp, const Vec& lambda_old, const Vec& lambda_new,
                             const Vec& pairing);

}  // namespace fsi
