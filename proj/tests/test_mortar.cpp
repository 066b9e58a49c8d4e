#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsi/error.hpp"
#include "fsi/mesh.hpp"
#include "fsi/mortar.hpp"
#include "test_util.hpp"

using namespace fsi;

namespace {

struct Pair {
  Mesh2D fluid, solid;
  DofMap fd, sd;
};

Pair column_pair(int nxf, int nxs, int ny, int ny_solid, double width = 0.25) {
  auto [f, s] = generate_column_meshes(1, 1, width, nxf, nxs, ny, ny_solid);
  return {f, s, build_dofmap(f, 3, "interface", 2), build_dofmap(s, 2, "interface")};
}

MortarOperators solid_slave(const Pair& p) {
  return assemble_mortar(p.solid, "interface", p.sd, p.fluid, "interface", p.fd, FieldId::Solid, FieldId::Fluid);
}

MortarOperators fluid_slave(const Pair& p) {
  return assemble_mortar(p.fluid, "interface", p.fd, p.solid, "interface", p.sd, FieldId::Fluid, FieldId::Solid);
}

// Hat function of node value list `ys` (sorted) evaluated at y.
double hat(const std::vector<double>& ys, int k, double y) {
  if (k > 0 && y >= ys[k - 1] && y <= ys[k]) return (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
  if (k + 1 < int(ys.size()) && y >= ys[k] && y <= ys[k + 1]) return (ys[k + 1] - y) / (ys[k + 1] - ys[k]);
  return 0.0;
}

// Dual function of slave node k: 2 N_k - N_neighbour on each adjacent segment.
double dual(const std::vector<double>& ys, int k, double y) {
  double v = 0.0;
  if (k > 0 && y >= ys[k - 1] && y <= ys[k]) {
    double nk = (y - ys[k - 1]) / (ys[k] - ys[k - 1]);
    v += 2 * nk - (1 - nk);
  }
  if (k + 1 < int(ys.size()) && y >= ys[k] && y <= ys[k + 1]) {
    double nk = (ys[k + 1] - y) / (ys[k + 1] - ys[k]);
    v += 2 * nk - (1 - nk);
  }
  return v;
}

// Simpson's rule over the merged breakpoints: exact for piecewise quadratics.
template <class F>
double integrate(std::vector<double> breaks, F f) {
  std::sort(breaks.begin(), breaks.end());
  double s = 0.0;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    double a = breaks[i], b = breaks[i + 1];
    if (b - a < 1e-15) continue;
    double m = 0.5 * (a + b), e = 1e-13 * (b - a);
    // Evaluate just inside each piece so that piecewise definitions pick the right side.
    s += (b - a) / 6.0 * (f(a + e) + 4 * f(m) + f(b - e));
  }
  return s;
}

std::vector<double> node_ys(const Mesh2D& m, const std::vector<int>& nodes) {
  std::vector<double> ys;
  for (int k : nodes) ys.push_back(m.nodes[k].y);
  return ys;
}

}  // namespace

TEST_CASE("dual shapes on a segment") {
  for (auto [a, b] : {std::pair<Point, Point>{{0, 0}, {1, 0}}, {{1, 0.2}, {1, 0.9}}, {{-3, 2}, {4, -1}}}) {
    auto c = dual_shapes_segment(a, b);
    CHECK(c[0][0] == doctest::Approx(2.0));
    CHECK(c[0][1] == doctest::Approx(-1.0));
    CHECK(c[1][0] == doctest::Approx(-1.0));
    CHECK(c[1][1] == doctest::Approx(2.0));
    // Biorthogonality with exact integrals L/3 and L/6.
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        double mass[2][2] = {{1.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 3}};
        double v = c[j][0] * mass[0][k] + c[j][1] * mass[1][k];
        CHECK(v == doctest::Approx(j == k ? 0.5 : 0.0));
      }
  }
  CHECK_THROWS_AS(dual_shapes_segment({1, 1}, {1, 1}), Error);
}

TEST_CASE("conforming interface gives the identity projection") {
  for (int ny : {1, 2, 5}) {
    Pair p = column_pair(3, 4, ny, ny);
    for (auto m : {solid_slave(p), fluid_slave(p)}) {
      DenseMatrix pd = m.p.to_dense();
      REQUIRE(pd.rows() == pd.cols());
      for (int i = 0; i < pd.rows(); ++i)
        for (int j = 0; j < pd.cols(); ++j) CHECK(std::abs(pd(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-12);
      const double h = 0.25 / ny;
      for (int k = 1; k + 1 < int(m.d_nodal.size()); ++k) CHECK(m.d_nodal[k] == doctest::Approx(h));
    }
  }
}

TEST_CASE("mortar operators: D diagonal and positive, P row sums, total measure") {
  for (int nyf = 1; nyf <= 5; ++nyf)
    for (int nys = 1; nys <= 5; ++nys) {
      Pair p = column_pair(2, 3, nyf, nys, 0.3);
      for (auto m : {solid_slave(p), fluid_slave(p)}) {
        double sum = 0.0;
        for (int i = 0; i < m.d.rows(); ++i)
          for (int q = m.d.row_ptr()[i]; q < m.d.row_ptr()[i + 1]; ++q) {
            if (m.d.col_idx()[q] == i) {
              CHECK(m.d.values()[q] > 0.0);
              sum += m.d.values()[q];
            } else {
              CHECK(m.d.values()[q] == 0.0);
            }
          }
        CHECK(sum == doctest::Approx(0.3 * 2));
        Vec ones(m.n_master(), 1.0);
        for (double v : m.p.multiply(ones)) CHECK(std::abs(v - 1.0) <= 1e-12);
        // Per-component blocks do not mix x and y.
        Vec ex(m.n_master(), 0.0);
        for (int j = 0; j < m.n_master(); j += 2) ex[j] = 1.0;
        Vec pe = m.p.multiply(ex);
        for (int i = 0; i < m.n_slave(); ++i) CHECK(std::abs(pe[i] - (i % 2 == 0 ? 1.0 : 0.0)) <= 1e-12);
      }
    }
}

TEST_CASE("2:3 interface reproduces linear fields and matches direct integration") {
  Pair p = column_pair(2, 2, 2, 3);
  for (bool swap : {false, true}) {
    MortarOperators m = swap ? fluid_slave(p) : solid_slave(p);
    const Mesh2D& sm = swap ? p.fluid : p.solid;
    const Mesh2D& mm = swap ? p.solid : p.fluid;
    std::vector<double> sy = node_ys(sm, m.slave_nodes), my = node_ys(mm, m.master_nodes);
    REQUIRE(std::is_sorted(sy.begin(), sy.end()));
    REQUIRE(std::is_sorted(my.begin(), my.end()));
    std::vector<double> breaks = sy;
    breaks.insert(breaks.end(), my.begin(), my.end());

    for (int j = 0; j < int(sy.size()); ++j) {
      CHECK(m.d_nodal[j] == doctest::Approx(integrate(breaks, [&](double y) { return hat(sy, j, y); })).epsilon(1e-12));
      // Biorthogonality of the slave dual basis.
      for (int k = 0; k < int(sy.size()); ++k) {
        double v = integrate(breaks, [&](double y) { return dual(sy, j, y) * hat(sy, k, y); });
        CHECK(std::abs(v - (j == k ? m.d_nodal[j] : 0.0)) <= 1e-12);
      }
      for (int k = 0; k < int(my.size()); ++k) {
        double v = integrate(breaks, [&](double y) { return dual(sy, j, y) * hat(my, k, y); });
        CHECK(std::abs(v - m.m_nodal.at(j, k)) <= 1e-12);
      }
    }

    Vec master(m.n_master());
    for (int k = 0; k < int(my.size()); ++k) {
      master[2 * k] = 1.0 + 2.0 * my[k];
      master[2 * k + 1] = -0.5 + 3.0 * my[k];
    }
    Vec slave = project_master_to_slave(m, master);
    for (int j = 0; j < int(sy.size()); ++j) {
      CHECK(std::abs(slave[2 * j] - (1.0 + 2.0 * sy[j])) <= 1e-10);
      CHECK(std::abs(slave[2 * j + 1] - (-0.5 + 3.0 * sy[j])) <= 1e-10);
    }
  }
}

TEST_CASE("projection of constants and identity on conforming meshes") {
  Pair p = column_pair(1, 1, 3, 3);
  auto m = solid_slave(p);
  Vec c(m.n_master(), 4.2);
  for (double v : project_master_to_slave(m, c)) CHECK(v == doctest::Approx(4.2));
  Vec x(m.n_master());
  for (int i = 0; i < m.n_master(); ++i) x[i] = std::sin(1.0 + i);
  CHECK(testutil::max_abs_diff(project_master_to_slave(m, x), x) <= 1e-12);
}

TEST_CASE("mortar coupling errors") {
  Pair a = column_pair(2, 2, 2, 2, 0.25);
  Pair b = column_pair(2, 2, 2, 2, 0.3);
  CHECK_THROWS_AS(assemble_mortar(a.solid, "interface", a.sd, b.fluid, "interface", b.fd), CouplingError);
  CHECK_THROWS_AS(assemble_mortar(a.solid, "missing", a.sd, a.fluid, "interface", a.fd), Error);
}

TEST_CASE("coordinate dump lists all three operators") {
  Pair p = column_pair(2, 2, 1, 2);
  auto m = solid_slave(p);
  std::ostringstream os;
  write_mortar_coo(m, os);
  std::istringstream is(os.str());
  std::string name;
  int r, c;
  double v;
  int nd = 0, nm = 0, np = 0;
  while (is >> name >> r >> c >> v) {
    if (name == "D") ++nd;
    if (name == "M") ++nm;
    if (name == "P") ++np;
  }
  CHECK(nd == m.d.nnz());
  CHECK(nm == m.m.nnz());
  CHECK(np == m.p.nnz());
}
