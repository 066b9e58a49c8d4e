#include "fsi/fluid.hpp"

#include <cmath>
#include <string>

#include "fsi/dual.hpp"
#include "fsi/error.hpp"

namespace fsi {

void FluidMaterial::validate() const {
  if (!(viscosity > 0.0)) throw InvalidConfig("fluid viscosity must be positive");
  if (!(density > 0.0)) throw InvalidConfig("fluid density must be positive");
}

FluidTimeScheme FluidTimeScheme::one_step_theta(double theta) {
  FluidTimeScheme s;
  s.kind = Kind::OneStepTheta;
  s.theta = theta;
  s.validate();
  return s;
}

FluidTimeScheme FluidTimeScheme::gen_alpha(double rho_inf) {
  FluidTimeScheme s;
  s.kind = Kind::GenAlpha;
  s.rho_inf = rho_inf;
  s.validate();
  return s;
}

void FluidTimeScheme::validate() const {
  if (kind == Kind::OneStepTheta && !(theta > 0.0 && theta <= 1.0))
    throw InvalidConfig("one-step-theta requires theta in (0,1]");
  if (kind == Kind::GenAlpha && !(rho_inf >= 0.0 && rho_inf <= 1.0))
    throw InvalidConfig("fluid rho_inf must be in [0,1]");
}

FluidWeights fluid_time_weights(const FluidTimeScheme& scheme) {
  scheme.validate();
  FluidWeights w;
  if (scheme.kind == FluidTimeScheme::Kind::OneStepTheta) {
    w.alpha_m = 1.0;
    w.alpha_f = scheme.theta;
    w.gamma = 1.0;
  } else {
    const double r = scheme.rho_inf;
    w.alpha_m = 0.5 * (3.0 - r) / (1.0 + r);
    w.alpha_f = 1.0 / (1.0 + r);
    w.gamma = 0.5 + w.alpha_m - w.alpha_f;
  }
  w.b = 1.0 - w.alpha_f;
  return w;
}

FluidState FluidState::zeros(int n_nodes) {
  FluidState s;
  s.up.assign(3 * n_nodes, 0.0);
  s.acc.assign(3 * n_nodes, 0.0);
  s.dg.assign(2 * n_nodes, 0.0);
  s.ug.assign(2 * n_nodes, 0.0);
  return s;
}

namespace {

struct ElemInput {
  int id = 0;
  std::array<Point, 4> x0;
  std::array<double, 12> up_n;
  std::array<double, 12> acc_n;
  std::array<double, 8> dg_n;
  std::vector<std::pair<int, double>> pressure_edges;  // (local edge, p)
};

struct ElemParams {
  FluidWeights w;
  double dt;
  double rho;
  double mu;
  FluidStabilization stab;
};

template <class T>
struct GeomAtGp {
  T det;
  std::array<T, 4> dx;
  std::array<T, 4> dy;
};

template <class T>
GeomAtGp<T> map_gp(const Q1Eval& s, const std::array<T, 4>& xs, const std::array<T, 4>& ys, int elem) {
  T j00 = 0.0, j01 = 0.0, j10 = 0.0, j11 = 0.0;
  for (int k = 0; k < 4; ++k) {
    j00 += s.dxi[k] * xs[k];
    j01 += s.deta[k] * xs[k];
    j10 += s.dxi[k] * ys[k];
    j11 += s.deta[k] * ys[k];
  }
  GeomAtGp<T> g;
  g.det = j00 * j11 - j01 * j10;
  if (!(value_of(g.det) > 0.0)) throw AssemblyError("fluid element " + std::to_string(elem) + " is inverted");
  T inv = 1.0 / g.det;
  for (int k = 0; k < 4; ++k) {
    g.dx[k] = (j11 * s.dxi[k] - j10 * s.deta[k]) * inv;
    g.dy[k] = (j00 * s.deta[k] - j01 * s.dxi[k]) * inv;
  }
  return g;
}

template <class T>
std::array<T, 12> fluid_element(const ElemInput& in, const ElemParams& prm, const std::array<T, 12>& up1,
                                const std::array<T, 8>& dg1) {
  using std::sqrt;
  const double af = prm.w.alpha_f, am = prm.w.alpha_m, ga = prm.w.gamma, dt = prm.dt;
  const double rho = prm.rho, mu = prm.mu, nu = mu / rho;
  std::array<T, 4> xm, ym, x1, y1;
  std::array<T, 4> ugx, ugy;
  std::array<T, 4> umx, umy, pm, amx, amy;
  for (int k = 0; k < 4; ++k) {
    x1[k] = in.x0[k].x + dg1[2 * k];
    y1[k] = in.x0[k].y + dg1[2 * k + 1];
    xm[k] = in.x0[k].x + (1.0 - af) * in.dg_n[2 * k] + af * dg1[2 * k];
    ym[k] = in.x0[k].y + (1.0 - af) * in.dg_n[2 * k + 1] + af * dg1[2 * k + 1];
    ugx[k] = (dg1[2 * k] - in.dg_n[2 * k]) / dt;
    ugy[k] = (dg1[2 * k + 1] - in.dg_n[2 * k + 1]) / dt;
    umx[k] = (1.0 - af) * in.up_n[3 * k] + af * up1[3 * k];
    umy[k] = (1.0 - af) * in.up_n[3 * k + 1] + af * up1[3 * k + 1];
    pm[k] = (1.0 - af) * in.up_n[3 * k + 2] + af * up1[3 * k + 2];
    T a1x = (up1[3 * k] - in.up_n[3 * k]) / (ga * dt) - (1.0 - ga) / ga * in.acc_n[3 * k];
    T a1y = (up1[3 * k + 1] - in.up_n[3 * k + 1]) / (ga * dt) - (1.0 - ga) / ga * in.acc_n[3 * k + 1];
    amx[k] = (1.0 - am) * in.acc_n[3 * k] + am * a1x;
    amy[k] = (1.0 - am) * in.acc_n[3 * k + 1] + am * a1y;
  }

  const auto& gps = gauss_2x2();
  std::array<Q1Eval, 4> sh;
  for (int q = 0; q < 4; ++q) sh[q] = q1_eval(gps[q].xi, gps[q].eta);

  std::array<GeomAtGp<T>, 4> gm;
  T area = 0.0;
  for (int q = 0; q < 4; ++q) {
    gm[q] = map_gp(sh[q], xm, ym, in.id);
    area += gps[q].w * gm[q].det;
  }
  const T h2 = area;
  const double tau_dt = (2.0 / dt) * (2.0 / dt);
  const T visc = 4.0 * nu / h2;

  std::array<T, 12> res{};
  for (int q = 0; q < 4; ++q) {
    const auto& s = sh[q];
    const auto& g = gm[q];
    T ux = 0.0, uy = 0.0, cx = 0.0, cy = 0.0, ax = 0.0, ay = 0.0, p = 0.0;
    T uxx = 0.0, uxy = 0.0, uyx = 0.0, uyy = 0.0, px = 0.0, py = 0.0;
    for (int k = 0; k < 4; ++k) {
      ux += s.n[k] * umx[k];
      uy += s.n[k] * umy[k];
      cx += s.n[k] * ugx[k];
      cy += s.n[k] * ugy[k];
      ax += s.n[k] * amx[k];
      ay += s.n[k] * amy[k];
      p += s.n[k] * pm[k];
      uxx += g.dx[k] * umx[k];
      uxy += g.dy[k] * umx[k];
      uyx += g.dx[k] * umy[k];
      uyy += g.dy[k] * umy[k];
      px += g.dx[k] * pm[k];
      py += g.dy[k] * pm[k];
    }
    cx = ux - cx;
    cy = uy - cy;
    T convx = cx * uxx + cy * uxy;
    T convy = cx * uyx + cy * uyy;
    T rx = rho * (ax + convx) + px;
    T ry = rho * (ay + convy) + py;
    T tau = 1.0 / sqrt(tau_dt + 4.0 * (cx * cx + cy * cy) / h2 + visc * visc);
    T div = uxx + uyy;
    T wd = gps[q].w * g.det;
    for (int k = 0; k < 4; ++k) {
      T mx = s.n[k] * rho * (ax + convx) + mu * (uxx * g.dx[k] + uxy * g.dy[k]) - p * g.dx[k];
      T my = s.n[k] * rho * (ay + convy) + mu * (uyx * g.dx[k] + uyy * g.dy[k]) - p * g.dy[k];
      if (prm.stab.supg) {
        T cgrad = cx * g.dx[k] + cy * g.dy[k];
        mx += tau * cgrad * rx;
        my += tau * cgrad * ry;
      }
      if (prm.stab.grad_div > 0.0) {
        T tc = prm.stab.grad_div * rho * h2 / tau;
        mx += tc * div * g.dx[k];
        my += tc * div * g.dy[k];
      }
      res[3 * k] += wd * mx;
      res[3 * k + 1] += wd * my;
      if (prm.stab.pspg) res[3 * k + 2] += wd * (tau / rho) * (g.dx[k] * rx + g.dy[k] * ry);
    }
  }

  // continuity at t^{n+1} on the new configuration
  for (int q = 0; q < 4; ++q) {
    const auto& s = sh[q];
    auto g = map_gp(s, x1, y1, in.id);
    T div = 0.0;
    for (int k = 0; k < 4; ++k) div += g.dx[k] * up1[3 * k] + g.dy[k] * up1[3 * k + 1];
    T wd = gps[q].w * g.det;
    for (int k = 0; k < 4; ++k) res[3 * k + 2] += wd * s.n[k] * div;
  }

  for (const auto& [le, pval] : in.pressure_edges) {
    int a = le, b = (le + 1) % 4;
    T ex = xm[b] - xm[a], ey = ym[b] - ym[a];
    for (int k : {a, b}) {
      res[3 * k] += 0.5 * pval * ey;
      res[3 * k + 1] += -0.5 * pval * ex;
    }
  }
  return res;
}

ElemInput gather_elem(const FluidState& st, const Mesh2D& mesh, int e,
                      const std::vector<std::vector<std::pair<int, double>>>& edge_loads) {
  ElemInput in;
  in.id = e;
  const auto& el = mesh.elems[e];
  for (int k = 0; k < 4; ++k) {
    in.x0[k] = mesh.nodes[el[k]];
    for (int c = 0; c < 3; ++c) {
      in.up_n[3 * k + c] = st.up[3 * el[k] + c];
      in.acc_n[3 * k + c] = st.acc[3 * el[k] + c];
    }
    for (int c = 0; c < 2; ++c) in.dg_n[2 * k + c] = st.dg[2 * el[k] + c];
  }
  in.pressure_edges = edge_loads[e];
  return in;
}

}  // namespace

FluidAssembly assemble_fluid(const FluidState& state, const Vec& up_new, const Vec& dg_new,
                             const FluidTimeScheme& scheme, double dt, const FluidMaterial& mat, const Mesh2D& mesh,
                             const DofMap& dofs, const PressureLoads& loads, const FluidStabilization& stab) {
  if (!(dt > 0.0)) throw InvalidConfig("time step must be positive");
  mat.validate();
  const int nn = int(mesh.nodes.size());
  const int nf = dofs.n_dofs(), ng = 2 * nn;
  if (dofs.dofs_per_node != 3 || int(up_new.size()) != nf || int(dg_new.size()) != ng ||
      int(state.up.size()) != nf || int(state.dg.size()) != ng)
    throw ShapeError("fluid vectors do not match dof map");
  ElemParams prm{fluid_time_weights(scheme), dt, mat.density, mat.viscosity, stab};

  std::vector<std::vector<std::pair<int, double>>> edge_loads(mesh.elems.size());
  for (const auto& [name, pval] : loads)
    for (const auto& e : mesh.edge_set(name)) edge_loads[e.elem].push_back({e.local_edge, pval});

  FluidAssembly out;
  out.r.assign(nf, 0.0);
  std::vector<Triplet> tf, tg;
  tf.reserve(mesh.elems.size() * 144);
  if (!stab.drop_shape_derivatives) tg.reserve(mesh.elems.size() * 96);
  using D = Dual<20>;
  for (int e = 0; e < int(mesh.elems.size()); ++e) {
    ElemInput in = gather_elem(state, mesh, e, edge_loads);
    const auto& el = mesh.elems[e];
    std::array<D, 12> up1;
    std::array<D, 8> dg1;
    std::array<int, 12> fd;
    std::array<int, 8> gd;
    for (int k = 0; k < 4; ++k) {
      for (int c = 0; c < 3; ++c) {
        fd[3 * k + c] = 3 * el[k] + c;
        up1[3 * k + c] = D::seed(up_new[fd[3 * k + c]], 3 * k + c);
      }
      for (int c = 0; c < 2; ++c) {
        gd[2 * k + c] = 2 * el[k] + c;
        dg1[2 * k + c] = D::seed(dg_new[gd[2 * k + c]], 12 + 2 * k + c);
      }
    }
    auto res = fluid_element(in, prm, up1, dg1);
    for (int i = 0; i < 12; ++i) {
      out.r[fd[i]] += res[i].v;
      for (int j = 0; j < 12; ++j) tf.push_back({fd[i], fd[j], res[i].d[j]});
      if (!stab.drop_shape_derivatives)
        for (int j = 0; j < 8; ++j) tg.push_back({fd[i], gd[j], res[i].d[12 + j]});
    }
  }
  out.f = CsrMatrix::from_triplets(nf, nf, std::move(tf));
  out.fg = CsrMatrix::from_triplets(nf, ng, std::move(tg));
  return out;
}

FluidState update_fluid_history(const FluidState& state, const Vec& up_new, const Vec& dg_new,
                                const FluidTimeScheme& scheme, double dt) {
  FluidWeights w = fluid_time_weights(scheme);
  FluidState s;
  s.up = up_new;
  s.dg = dg_new;
  s.t = state.t + dt;
  s.acc.assign(up_new.size(), 0.0);
  for (size_t n = 0; n < up_new.size() / 3; ++n)
    for (int c = 0; c < 2; ++c) {
      size_t i = 3 * n + c;
      s.acc[i] = (up_new[i] - state.up[i]) / (w.gamma * dt) - (1.0 - w.gamma) / w.gamma * state.acc[i];
    }
  s.ug.resize(dg_new.size());
  for (size_t i = 0; i < dg_new.size(); ++i) s.ug[i] = (dg_new[i] - state.dg[i]) / dt;
  return s;
}

AleAssembly assemble_ale(const Mesh2D& mesh, const DofMap& dofs, const Vec& dg) {
  const int ng = dofs.n_dofs();
  if (dofs.dofs_per_node != 2 || int(dg.size()) != ng) throw ShapeError("grid vectors do not match dof map");
  std::vector<Triplet> t;
  const auto& gps = gauss_2x2();
  for (int e = 0; e < int(mesh.elems.size()); ++e) {
    const auto& el = mesh.elems[e];
    std::array<double, 4> xs, ys;
    for (int k = 0; k < 4; ++k) {
      xs[k] = mesh.nodes[el[k]].x;
      ys[k] = mesh.nodes[el[k]].y;
    }
    std::array<double, 16> ke{};
    for (const auto& gp : gps) {
      auto g = map_gp(q1_eval(gp.xi, gp.eta), xs, ys, e);
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) ke[4 * a + b] += gp.w * g.det * (g.dx[a] * g.dx[b] + g.dy[a] * g.dy[b]);
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 2; ++c) t.push_back({2 * el[a] + c, 2 * el[b] + c, ke[4 * a + b]});
  }
  AleAssembly out;
  out.a = CsrMatrix::from_triplets(ng, ng, std::move(t));
  out.r = out.a.multiply(dg);
  return out;
}

Vec harmonic_extension(const Mesh2D& mesh, const std::vector<int>& fixed_dofs, const Vec& fixed_values) {
  const int ng = 2 * int(mesh.nodes.size());
  DofMap dm;
  dm.n_nodes = int(mesh.nodes.size());
  dm.dofs_per_node = 2;
  Vec d(ng, 0.0);
  std::vector<char> fixed(ng, 0);
  for (size_t i = 0; i < fixed_dofs.size(); ++i) {
    fixed[fixed_dofs[i]] = 1;
    d[fixed_dofs[i]] = fixed_values[i];
  }
  auto ale = assemble_ale(mesh, dm, d);
  std::vector<int> free;
  for (int i = 0; i < ng; ++i)
    if (!fixed[i]) free.push_back(i);
  if (free.empty()) return d;
  CsrMatrix aff = ale.a.submatrix(free, free);
  Vec rhs = gather(ale.r, free);
  for (auto& v : rhs) v = -v;
  LinearSolverConfig cfg;
  cfg.rel_tol = 1e-13;
  cfg.max_iterations = 10 * int(free.size()) + 100;
  if (int(free.size()) <= cfg.dense_cap) cfg.method = LinearSolverConfig::Method::DenseLU;
  auto sol = solve_linear(aff, rhs, cfg);
  scatter_add(sol.x, free, d);
  return d;
}

double fluid_kinetic_energy(const Mesh2D& mesh, const FluidMaterial& mat, const Vec& up, const Vec& dg) {
  double ke = 0.0;
  const auto& gps = gauss_2x2();
  for (int e = 0; e < int(mesh.elems.size()); ++e) {
    const auto& el = mesh.elems[e];
    std::array<double, 4> xs, ys;
    for (int k = 0; k < 4; ++k) {
      xs[k] = mesh.nodes[el[k]].x + dg[2 * el[k]];
      ys[k] = mesh.nodes[el[k]].y + dg[2 * el[k] + 1];
    }
    for (const auto& gp : gps) {
      auto s = q1_eval(gp.xi, gp.eta);
      auto g = map_gp(s, xs, ys, e);
      double ux = 0, uy = 0;
      for (int k = 0; k < 4; ++k) {
        ux += s.n[k] * up[3 * el[k]];
        uy += s.n[k] * up[3 * el[k] + 1];
      }
      ke += 0.5 * mat.density * (ux * ux + uy * uy) * gp.w * g.det;
    }
  }
  return ke;
}

}  // namespace fsi
