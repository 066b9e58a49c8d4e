#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "fsi/error.hpp"
#include "fsi/mesh.hpp"

using namespace fsi;

namespace {

double shoelace(const Mesh2D& m, int e) {
  double a = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Point& p = m.nodes[m.elems[e][k]];
    const Point& q = m.nodes[m.elems[e][(k + 1) % 4]];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

void check_disjoint_cover(const DofMap& d) {
  std::set<int> all;
  for (int x : d.interior) CHECK(all.insert(x).second);
  for (int x : d.interface) CHECK(all.insert(x).second);
  CHECK(int(all.size()) == d.n_dofs());
  if (!all.empty()) {
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == d.n_dofs() - 1);
  }
  for (size_t k = 0; k < d.interior.size(); ++k) CHECK(d.slot[d.interior[k]] == int(k));
  for (size_t k = 0; k < d.interface.size(); ++k) CHECK(d.slot[d.interface[k]] == int(k));
}

}  // namespace

TEST_CASE("column meshes: conforming layout") {
  auto [f, s] = generate_column_meshes(1, 1, 0.25, 4, 4, 1);
  CHECK(f.elems.size() == 4);
  CHECK(s.elems.size() == 4);
  auto fi = f.edge_set_nodes("interface");
  auto si = s.edge_set_nodes("interface");
  REQUIRE(fi.size() == 2);
  REQUIRE(si.size() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(f.nodes[fi[k]].x == doctest::Approx(1.0));
    CHECK(s.nodes[si[k]].x == doctest::Approx(1.0));
    CHECK(f.nodes[fi[k]].y == doctest::Approx(s.nodes[si[k]].y));
  }
}

TEST_CASE("column meshes: different axial resolution and node counts") {
  auto [f, s] = generate_column_meshes(1, 1, 0.25, 4, 6, 1);
  CHECK(f.edge_set_nodes("interface").size() == 2);
  CHECK(s.edge_set_nodes("interface").size() == 2);
  CHECK(s.elems.size() == 6);

  auto [f2, s2] = generate_column_meshes(1, 1, 0.25, 4, 4, 2);
  CHECK(f2.nodes.size() == 15);
  CHECK(f2.edge_set("interface").size() == 2);
  CHECK(s2.edge_set("interface").size() == 2);

  auto [f3, s3] = generate_column_meshes(1, 1, 0.25, 4, 4, 2, 3);
  CHECK(s3.edge_set("interface").size() == 3);
  CHECK_THROWS_AS(generate_column_meshes(1, 1, 0.25, 0, 4, 1), InvalidConfig);
  CHECK_THROWS_AS(generate_column_meshes(-1, 1, 0.25, 4, 4, 1), InvalidConfig);
}

TEST_CASE("cavity meshes: desk scale and minimal") {
  auto [f, s] = generate_cavity_meshes(16, 2, 18, 1);
  CHECK(f.elems.size() == 16 * 18);
  CHECK(s.elems.size() == 18);
  CHECK(f.edge_set("interface").size() == 16);
  CHECK(s.edge_set("interface").size() == 18);
  for (const char* name : {"wall_left", "wall_right", "inflow", "outflow", "lid"}) CHECK(f.has_edge_set(name));
  for (const char* name : {"clamp_left", "clamp_right", "bottom"}) CHECK(s.has_edge_set(name));

  // One cavity row plus one top row on a single column of elements.
  auto [fm, sm] = generate_cavity_meshes(1, 1, 1, 1);
  CHECK(fm.elems.size() == 2);
  CHECK(sm.elems.size() == 1);
  CHECK_NOTHROW(fm.validate());
  CHECK_NOTHROW(sm.validate());
}

TEST_CASE("every generated element has positive area") {
  for (int nx = 1; nx <= 5; ++nx)
    for (int ny = 1; ny <= 3; ++ny) {
      auto [f, s] = generate_column_meshes(0.7 * nx, 1.3, 0.2 * ny, nx, nx + 2, ny, ny + 1);
      for (size_t e = 0; e < f.elems.size(); ++e) CHECK(shoelace(f, int(e)) > 0.0);
      for (size_t e = 0; e < s.elems.size(); ++e) CHECK(shoelace(s, int(e)) > 0.0);
      auto [cf, cs] = generate_cavity_meshes(nx, ny, nx + 1, ny);
      for (size_t e = 0; e < cf.elems.size(); ++e) CHECK(shoelace(cf, int(e)) > 0.0);
      for (size_t e = 0; e < cs.elems.size(); ++e) CHECK(shoelace(cs, int(e)) > 0.0);
    }
}

TEST_CASE("dof maps") {
  auto [f, s] = generate_column_meshes(1, 1, 0.25, 4, 4, 1);
  DofMap ds = build_dofmap(s, 2, "interface");
  CHECK(ds.interface.size() == 4);
  check_disjoint_cover(ds);

  DofMap df = build_dofmap(f, 3, "interface", 2);
  CHECK(df.interface.size() == 4);
  check_disjoint_cover(df);
  for (int n : df.interface_nodes) CHECK(!df.on_interface[df.dof(n, 2)]);

  Mesh2D one;
  one.nodes = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  one.elems = {{0, 1, 2, 3}};
  one.edge_sets["interface"] = {};
  DofMap d1 = build_dofmap(one, 3, "interface");
  CHECK(d1.n_dofs() == 12);
  CHECK(d1.interface.empty());
  CHECK(d1.interior.size() == 12);
  check_disjoint_cover(d1);
}

TEST_CASE("dof maps are disjoint covers for many layouts") {
  for (int nx = 1; nx <= 4; ++nx)
    for (int ny = 1; ny <= 3; ++ny)
      for (int dpn = 1; dpn <= 3; ++dpn) {
        auto [f, s] = generate_cavity_meshes(nx, ny, nx + 2, ny);
        check_disjoint_cover(build_dofmap(f, dpn, "interface", dpn == 3 ? 2 : -1));
        check_disjoint_cover(build_dofmap(s, dpn, "interface"));
      }
}

TEST_CASE("mesh text round trip") {
  for (auto [f, s] : {generate_column_meshes(1, 1, 0.25, 3, 5, 2), generate_cavity_meshes(4, 2, 5, 1)}) {
    for (const Mesh2D* m : {&f, &s}) {
      std::stringstream ss;
      write_mesh(*m, ss);
      Mesh2D back = read_mesh(ss);
      CHECK(back == *m);
    }
  }
}

TEST_CASE("mesh parse errors") {
  const std::string good =
      "mesh2d v1\n# unit square\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelems 1\n0 1 2 3\nedgeset interface 1\n0 1\n";
  std::istringstream ok(good);
  Mesh2D m = read_mesh(ok);
  CHECK(m.nodes.size() == 4);
  CHECK(m.edge_set("interface").size() == 1);

  std::istringstream dangling("mesh2d v1\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelems 1\n0 1 2 4\n");
  CHECK_THROWS_AS(read_mesh(dangling), ParseError);

  std::istringstream dup(
      "mesh2d v1\nnodes 4\n0 0\n1 0\n1 1\n0 1\nelems 1\n0 1 2 3\nedgeset a 1\n0 0\nedgeset a 1\n0 1\n");
  CHECK_THROWS_AS(read_mesh(dup), ParseError);

  std::istringstream header("mesh3d v1\n");
  CHECK_THROWS_AS(read_mesh(header), ParseError);
}

TEST_CASE("validation rejects inverted elements and interior tags") {
  Mesh2D m;
  m.nodes = {{0, 0}, {0, 1}, {1, 1}, {1, 0}};  // clockwise
  m.elems = {{0, 1, 2, 3}};
  CHECK_THROWS_AS(m.validate(), InvalidConfig);

  auto [f, s] = generate_column_meshes(1, 1, 0.25, 2, 2, 1);
  f.edge_sets["bad"] = {{0, 1}};  // shared with element 1
  CHECK_THROWS_AS(f.validate(), InvalidConfig);
}
