#include "fsi/solid.hpp"

#include <cmath>
#include <string>

#include "fsi/dual.hpp"
#include "fsi/error.hpp"

namespace fsi {

void SolidMaterial::validate() const {
  if (!(young_E > 0.0)) throw InvalidConfig("solid Young's modulus must be positive");
  if (!(poisson_nu > -1.0 && poisson_nu < 0.5)) throw InvalidConfig("solid Poisson ratio must be in (-1, 0.5)");
  if (!(density > 0.0)) throw InvalidConfig("solid density must be positive");
}

double SolidMaterial::lame_lambda() const {
  return young_E * poisson_nu / ((1.0 + poisson_nu) * (1.0 - 2.0 * poisson_nu));
}

double SolidMaterial::lame_mu() const { return young_E / (2.0 * (1.0 + poisson_nu)); }

GenAlphaSolidParams GenAlphaSolidParams::from_rho_inf(double rho_inf) {
  if (!(rho_inf >= 0.0 && rho_inf <= 1.0)) throw InvalidConfig("solid rho_inf must be in [0,1]");
  GenAlphaSolidParams p;
  p.rho_inf = rho_inf;
  p.alpha_m = (2.0 * rho_inf - 1.0) / (rho_inf + 1.0);
  p.alpha_f = rho_inf / (rho_inf + 1.0);
  p.beta = 0.25 * (1.0 - p.alpha_m + p.alpha_f) * (1.0 - p.alpha_m + p.alpha_f);
  p.gamma = 0.5 - p.alpha_m + p.alpha_f;
  return p;
}

SolidState SolidState::zeros(int n_dofs) {
  SolidState s;
  s.d.assign(n_dofs, 0.0);
  s.v.assign(n_dofs, 0.0);
  s.a.assign(n_dofs, 0.0);
  s.dd_pred.assign(n_dofs, 0.0);
  return s;
}

namespace {

template <class T>
std::array<T, 4> svk_pk2(const std::array<T, 4>& c, double lam, double mu) {
  std::array<T, 4> e{0.5 * (c[0] - 1.0), 0.5 * c[1], 0.5 * c[2], 0.5 * (c[3] - 1.0)};
  T tr = e[0] + e[3];
  return {lam * tr + 2.0 * mu * e[0], 2.0 * mu * e[1], 2.0 * mu * e[2], lam * tr + 2.0 * mu * e[3]};
}

struct RefGeometry {
  std::array<std::array<double, 4>, 4> dndx;  // [gp][node]
  std::array<std::array<double, 4>, 4> dndy;
  std::array<std::array<double, 4>, 4> n;
  std::array<double, 4> wdet;
};

RefGeometry ref_geometry(const Mesh2D& mesh, int e) {
  RefGeometry g{};
  const auto& el = mesh.elems[e];
  const auto& gp = gauss_2x2();
  for (int q = 0; q < 4; ++q) {
    Q1Eval s = q1_eval(gp[q].xi, gp[q].eta);
    double j00 = 0, j01 = 0, j10 = 0, j11 = 0;
    for (int k = 0; k < 4; ++k) {
      const Point& p = mesh.nodes[el[k]];
      j00 += s.dxi[k] * p.x;
      j01 += s.deta[k] * p.x;
      j10 += s.dxi[k] * p.y;
      j11 += s.deta[k] * p.y;
    }
    double det = j00 * j11 - j01 * j10;
    if (!(det > 0.0)) throw AssemblyError("solid element " + std::to_string(e) + " has non-positive Jacobian");
    for (int k = 0; k < 4; ++k) {
      g.dndx[q][k] = (j11 * s.dxi[k] - j10 * s.deta[k]) / det;
      g.dndy[q][k] = (-j01 * s.dxi[k] + j00 * s.deta[k]) / det;
      g.n[q][k] = s.n[k];
    }
    g.wdet[q] = gp[q].w * det;
  }
  return g;
}

template <class T>
std::array<T, 8> element_internal_force(const RefGeometry& g, const std::array<T, 8>& de, double lam, double mu) {
  std::array<T, 8> f{};
  for (int q = 0; q < 4; ++q) {
    // F = I + grad d
    std::array<T, 4> F{T(1.0), T(0.0), T(0.0), T(1.0)};
    for (int k = 0; k < 4; ++k) {
      F[0] += de[2 * k] * g.dndx[q][k];
      F[1] += de[2 * k] * g.dndy[q][k];
      F[2] += de[2 * k + 1] * g.dndx[q][k];
      F[3] += de[2 * k + 1] * g.dndy[q][k];
    }
    std::array<T, 4> c{F[0] * F[0] + F[2] * F[2], F[0] * F[1] + F[2] * F[3], F[0] * F[1] + F[2] * F[3],
                       F[1] * F[1] + F[3] * F[3]};
    auto S = svk_pk2(c, lam, mu);
    std::array<T, 4> P{F[0] * S[0] + F[1] * S[2], F[0] * S[1] + F[1] * S[3], F[2] * S[0] + F[3] * S[2],
                       F[2] * S[1] + F[3] * S[3]};
    for (int k = 0; k < 4; ++k) {
      f[2 * k] += (P[0] * g.dndx[q][k] + P[1] * g.dndy[q][k]) * g.wdet[q];
      f[2 * k + 1] += (P[2] * g.dndx[q][k] + P[3] * g.dndy[q][k]) * g.wdet[q];
    }
  }
  return f;
}

std::array<int, 8> elem_dofs(const Mesh2D& mesh, int e) {
  std::array<int, 8> out{};
  for (int k = 0; k < 4; ++k) {
    out[2 * k] = 2 * mesh.elems[e][k];
    out[2 * k + 1] = 2 * mesh.elems[e][k] + 1;
  }
  return out;
}

}  // namespace

Mat2 svk_stress(const Mat2& c, const SolidMaterial& mat) {
  mat.validate();
  if (std::abs(c[1] - c[2]) > 1e-12 * (std::abs(c[1]) + 1.0)) throw DomainError("C is not symmetric");
  if (!(c[0] > 0.0 && c[0] * c[3] - c[1] * c[2] > 0.0)) throw DomainError("C is not positive definite");
  return svk_pk2(c, mat.lame_lambda(), mat.lame_mu());
}

Vec solid_internal_force(const Mesh2D& mesh, const SolidMaterial& mat, const Vec& d) {
  Vec f(2 * mesh.nodes.size(), 0.0);
  const double lam = mat.lame_lambda(), mu = mat.lame_mu();
  for (int e = 0; e < int(mesh.elems.size()); ++e) {
    auto g = ref_geometry(mesh, e);
    auto dofs = elem_dofs(mesh, e);
    std::array<double, 8> de{};
    for (int i = 0; i < 8; ++i) de[i] = d[dofs[i]];
    auto fe = element_internal_force(g, de, lam, mu);
    for (int i = 0; i < 8; ++i) f[dofs[i]] += fe[i];
  }
  return f;
}

CsrMatrix solid_mass_matrix(const Mesh2D& mesh, const SolidMaterial& mat) {
  std::vector<Triplet> t;
  const int n = 2 * int(mesh.nodes.size());
  for (int e = 0; e < int(mesh.elems.size()); ++e) {
    auto g = ref_geometry(mesh, e);
    auto dofs = elem_dofs(mesh, e);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        double m = 0.0;
        for (int q = 0; q < 4; ++q) m += mat.density * g.n[q][a] * g.n[q][b] * g.wdet[q];
        t.push_back({dofs[2 * a], dofs[2 * b], m});
        t.push_back({dofs[2 * a + 1], dofs[2 * b + 1], m});
      }
  }
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

FieldAssembly assemble_solid(const SolidState& state, const Vec& d_new, const GenAlphaSolidParams& p, double dt,
                             const SolidMaterial& mat, const Mesh2D& mesh, const DofMap& dofs) {
  if (!(dt > 0.0)) throw InvalidConfig("time step must be positive");
  const int n = dofs.n_dofs();
  if (int(d_new.size()) != n || int(state.d.size()) != n) throw ShapeError("solid vectors do not match dof map");
  if (p.beta <= 0.0) throw InvalidConfig("generalized-alpha beta must be positive");
  const double lam = mat.lame_lambda(), mu = mat.lame_mu();
  const double bdt2 = p.beta * dt * dt;

  // a^{n+1}(d) and the inertia term (1-alpha_m) a^{n+1} + alpha_m a^n
  Vec acc_m(n);
  for (int i = 0; i < n; ++i) {
    double a_new = (d_new[i] - state.d[i] - dt * state.v[i] - dt * dt * (0.5 - p.beta) * state.a[i]) / bdt2;
    acc_m[i] = (1.0 - p.alpha_m) * a_new + p.alpha_m * state.a[i];
  }
  CsrMatrix mass = solid_mass_matrix(mesh, mat);
  FieldAssembly out;
  out.r = mass.multiply(acc_m);
  Vec f_old = solid_internal_force(mesh, mat, state.d);
  axpy(p.alpha_f, f_old, out.r);

  std::vector<Triplet> t;
  using D8 = Dual<8>;
  for (int e = 0; e < int(mesh.elems.size()); ++e) {
    RefGeometry g = ref_geometry(mesh, e);
    auto ed = elem_dofs(mesh, e);
    std::array<D8, 8> de;
    for (int i = 0; i < 8; ++i) de[i] = D8::seed(d_new[ed[i]], i);
    auto fe = element_internal_force(g, de, lam, mu);
    for (int i = 0; i < 8; ++i) {
      out.r[ed[i]] += (1.0 - p.alpha_f) * fe[i].v;
      for (int j = 0; j < 8; ++j) t.push_back({ed[i], ed[j], (1.0 - p.alpha_f) * fe[i].d[j]});
    }
  }
  mass.append_to(t, 0, 0, (1.0 - p.alpha_m) / bdt2);
  out.k = CsrMatrix::from_triplets(n, n, std::move(t));
  return out;
}

SolidState predict_solid(const SolidState& state, PredictorKind kind, double dt) {
  if (!(dt > 0.0)) throw InvalidConfig("time step must be positive");
  SolidState s = state;
  const size_t n = state.d.size();
  s.dd_pred.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    switch (kind) {
      case PredictorKind::ConstDis:
        break;
      case PredictorKind::ConstVel:
        s.dd_pred[i] = dt * state.v[i];
        break;
      case PredictorKind::ConstAcc:
        s.dd_pred[i] = dt * state.v[i] + 0.5 * dt * dt * state.a[i];
        break;
    }
  }
  return s;
}

SolidState update_solid_history(const SolidState& state, const Vec& d_new, const GenAlphaSolidParams& p,
                                double dt) {
  if (p.beta == 0.0) throw InvalidConfig("generalized-alpha beta must be nonzero");
  if (!(dt > 0.0)) throw InvalidConfig("time step must be positive");
  SolidState s;
  const size_t n = d_new.size();
  s.d = d_new;
  s.v.resize(n);
  s.a.resize(n);
  s.dd_pred.assign(n, 0.0);
  s.t = state.t + dt;
  for (size_t i = 0; i < n; ++i) {
    s.a[i] = (d_new[i] - state.d[i] - dt * state.v[i] - dt * dt * (0.5 - p.beta) * state.a[i]) / (p.beta * dt * dt);
    s.v[i] = state.v[i] + dt * ((1.0 - p.gamma) * state.a[i] + p.gamma * s.a[i]);
  }
  return s;
}

}  // namespace fsi
