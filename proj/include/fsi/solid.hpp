#pragma once

#include <array>

#include "fsi/fe.hpp"
#include "fsi/mesh.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

struct SolidMaterial {
  double young_E = 1.0;
  double poisson_nu = 0.0;
  double density = 1.0;

  void validate() const;
  double lame_lambda() const;  // plane strain
  double lame_mu() const;
};

struct GenAlphaSolidParams {
  double rho_inf = 1.0;
  double alpha_m = 0.5;
  double alpha_f = 0.5;
  double beta = 0.25;
  double gamma = 0.5;

  static GenAlphaSolidParams from_rho_inf(double rho_inf);
};

enum class PredictorKind { ConstDis, ConstVel, ConstAcc };

struct SolidState {
  Vec d;
  Vec v;
  Vec a;
  double t = 0.0;
  Vec dd_pred;  // predictor increment for the running step

  static SolidState zeros(int n_dofs);
};

// Row-major 2x2 tensor.
using Mat2 = std::array<double, 4>;

// Second Piola-Kirchhoff stress of a plane-strain St. Venant-Kirchhoff solid.
Mat2 svk_stress(const Mat2& c, const SolidMaterial& mat);

struct FieldAssembly {
  Vec r;
  CsrMatrix k;
};

// Internal force vector at displacement d (no inertia).
Vec solid_internal_force(const Mesh2D& mesh, const SolidMaterial& mat, const Vec& d);
CsrMatrix solid_mass_matrix(const Mesh2D& mesh, const SolidMaterial& mat);

// Generalized-alpha residual and tangent with respect to d^{n+1}; no interface tractions.
FieldAssembly assemble_solid(const SolidState& state, const Vec& d_new, const GenAlphaSolidParams& params,
                             double dt, const SolidMaterial& mat, const Mesh2D& mesh, const DofMap& dofs);

SolidState predict_solid(const SolidState& state, PredictorKind kind, double dt);

SolidState update_solid_history(const SolidState& state, const Vec& d_new, const GenAlphaSolidParams& params,
                                double dt);

}  // namespace fsi
