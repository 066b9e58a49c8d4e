#pragma once

#include <map>
#include <string>

#include "fsi/fe.hpp"
#include "fsi/mesh.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

struct FluidMaterial {
  double viscosity = 0.01;  // dynamic
  double density = 1.0;

  void validate() const;
};

struct FluidTimeScheme {
  enum class Kind { OneStepTheta, GenAlpha };
  Kind kind = Kind::GenAlpha;
  double theta = 0.5;
  double rho_inf = 1.0;

  static FluidTimeScheme one_step_theta(double theta);
  static FluidTimeScheme gen_alpha(double rho_inf);
  void validate() const;
};

// Intermediate-time data: the momentum balance is evaluated with
//   a^m = (1-alpha_m) a^n + alpha_m a^{n+1},  (u,p,x)^m = (1-alpha_f)(.)^n + alpha_f (.)^{n+1},
//   a^{n+1} = (u^{n+1}-u^n)/(gamma dt) - (1-gamma)/gamma a^n.
// b is the weight of the previous multiplier in the fluid interface traction.
struct FluidWeights {
  double alpha_m = 1.0;
  double alpha_f = 1.0;
  double gamma = 1.0;
  double b = 0.0;
};

FluidWeights fluid_time_weights(const FluidTimeScheme& scheme);

struct FluidStabilization {
  bool supg = true;
  bool pspg = true;
  double grad_div = 0.0;  // scales rho*h^2/tau_M; zero disables
  bool drop_shape_derivatives = false;
};

// Nodal layout: up has (u_x, u_y, p) per node; acc has the same layout (pressure slot unused);
// grid displacement and grid velocity have 2 entries per node.
struct FluidState {
  Vec up;
  Vec acc;
  Vec dg;
  Vec ug;
  double t = 0.0;

  static FluidState zeros(int n_nodes);
};

// Prescribed normal traction -p n on the named edge sets.
using PressureLoads = std::map<std::string, double>;

struct FluidAssembly {
  Vec r;          // fluid rows (3 per node)
  CsrMatrix f;    // d r / d (u,p)^{n+1}
  CsrMatrix fg;   // d r / d d^{G,n+1}
};

FluidAssembly assemble_fluid(const FluidState& state, const Vec& up_new, const Vec& dg_new,
                             const FluidTimeScheme& scheme, double dt, const FluidMaterial& mat,
                             const Mesh2D& mesh, const DofMap& dofs, const PressureLoads& loads = {},
                             const FluidStabilization& stab = {});

FluidState update_fluid_history(const FluidState& state, const Vec& up_new, const Vec& dg_new,
                                const FluidTimeScheme& scheme, double dt);

// Laplacian mesh-motion operator on the reference mesh, one block per component.
struct AleAssembly {
  Vec r;        // A d^G, all rows
  CsrMatrix a;  // full operator
};
AleAssembly assemble_ale(const Mesh2D& mesh, const DofMap& dofs, const Vec& dg);

// Harmonic extension with the given dofs fixed; returns the full grid displacement.
Vec harmonic_extension(const Mesh2D& mesh, const std::vector<int>& fixed_dofs, const Vec& fixed_values);

// Fluid kinetic energy 0.5 * rho * |u|^2 integrated over the configuration X + dg.
double fluid_kinetic_energy(const Mesh2D& mesh, const FluidMaterial& mat, const Vec& up, const Vec& dg);

}  // namespace fsi
