#include "fsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "fsi/error.hpp"

namespace fsi {

std::array<int, 2> Mesh2D::edge_nodes(const EdgeRef& e) const {
  const auto& el = elems.at(e.elem);
  return {el[e.local_edge], el[(e.local_edge + 1) % 4]};
}

const std::vector<EdgeRef>& Mesh2D::edge_set(const std::string& name) const {
  auto it = edge_sets.find(name);
  if (it == edge_sets.end()) throw InvalidConfig("unknown edge set '" + name + "'");
  return it->second;
}

std::vector<int> Mesh2D::edge_set_nodes(const std::string& name) const {
  std::set<int> ids;
  for (const auto& e : edge_set(name)) {
    auto n = edge_nodes(e);
    ids.insert(n[0]);
    ids.insert(n[1]);
  }
  return {ids.begin(), ids.end()};
}

double Mesh2D::diameter() const {
  if (nodes.empty()) return 0.0;
  double x0 = nodes[0].x, x1 = x0, y0 = nodes[0].y, y1 = y0;
  for (const auto& p : nodes) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return std::hypot(x1 - x0, y1 - y0);
}

void Mesh2D::validate() const {
  const int nn = int(nodes.size());
  for (size_t e = 0; e < elems.size(); ++e) {
    for (int k = 0; k < 4; ++k) {
      if (elems[e][k] < 0 || elems[e][k] >= nn)
        throw InvalidConfig("element " + std::to_string(e) + " references missing node");
    }
    for (int k = 0; k < 4; ++k) {
      const Point& p = nodes[elems[e][k]];
      const Point& n = nodes[elems[e][(k + 1) % 4]];
      const Point& q = nodes[elems[e][(k + 3) % 4]];
      double det = (n.x - p.x) * (q.y - p.y) - (n.y - p.y) * (q.x - p.x);
      if (!(det > 0.0))
        throw InvalidConfig("element " + std::to_string(e) + " has non-positive Jacobian at corner " +
                            std::to_string(k));
    }
  }
  std::map<std::pair<int, int>, int> count;
  for (const auto& el : elems)
    for (int k = 0; k < 4; ++k) {
      int a = el[k], b = el[(k + 1) % 4];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  for (const auto& [name, edges] : edge_sets) {
    for (const auto& e : edges) {
      if (e.elem < 0 || e.elem >= int(elems.size()) || e.local_edge < 0 || e.local_edge > 3)
        throw InvalidConfig("edge set '" + name + "' references missing element edge");
      auto n = edge_nodes(e);
      if (count[{std::min(n[0], n[1]), std::max(n[0], n[1])}] != 1)
        throw InvalidConfig("edge set '" + name + "' contains an interior edge");
    }
  }
}

bool operator==(const Mesh2D& a, const Mesh2D& b) {
  if (a.nodes.size() != b.nodes.size() || a.elems != b.elems) return false;
  for (size_t i = 0; i < a.nodes.size(); ++i)
    if (a.nodes[i].x != b.nodes[i].x || a.nodes[i].y != b.nodes[i].y) return false;
  if (a.edge_sets.size() != b.edge_sets.size()) return false;
  for (const auto& [name, edges] : a.edge_sets) {
    auto it = b.edge_sets.find(name);
    if (it == b.edge_sets.end() || it->second.size() != edges.size()) return false;
    for (size_t i = 0; i < edges.size(); ++i)
      if (edges[i].elem != it->second[i].elem || edges[i].local_edge != it->second[i].local_edge)
        return false;
  }
  return true;
}

DofMap build_dofmap(const Mesh2D& mesh, int dofs_per_node, const std::string& interface_set,
                    int interface_components) {
  if (dofs_per_node < 1) throw InvalidConfig("dofs_per_node must be >= 1");
  if (interface_components < 0 || interface_components > dofs_per_node) interface_components = dofs_per_node;
  DofMap m;
  m.n_nodes = int(mesh.nodes.size());
  m.dofs_per_node = dofs_per_node;
  m.interface_nodes = mesh.edge_set_nodes(interface_set);
  m.on_interface.assign(m.n_dofs(), 0);
  for (int n : m.interface_nodes)
    for (int c = 0; c < interface_components; ++c) m.on_interface[m.dof(n, c)] = 1;
  m.slot.assign(m.n_dofs(), -1);
  for (int d = 0; d < m.n_dofs(); ++d) {
    auto& list = m.on_interface[d] ? m.interface : m.interior;
    m.slot[d] = int(list.size());
    list.push_back(d);
  }
  return m;
}

namespace {

Mesh2D structured_grid(const std::vector<double>& xs, const std::vector<double>& ys) {
  Mesh2D m;
  const int nx = int(xs.size()) - 1, ny = int(ys.size()) - 1;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes.push_back({xs[i], ys[j]});
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) m.elems.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return m;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n + 1);
  for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * double(i) / n;
  v[n] = b;
  return v;
}

// Tag edges of a structured nx-by-ny grid; side: 0 bottom, 1 right, 2 top, 3 left.
std::vector<EdgeRef> side_edges(int nx, int ny, int side, int from, int to) {
  std::vector<EdgeRef> out;
  for (int k = from; k < to; ++k) {
    int i = 0, j = 0;
    switch (side) {
      case 0: i = k; j = 0; break;
      case 1: i = nx - 1; j = k; break;
      case 2: i = k; j = ny - 1; break;
      default: i = 0; j = k; break;
    }
    out.push_back({j * nx + i, side});
  }
  return out;
}

}  // namespace

std::pair<Mesh2D, Mesh2D> generate_column_meshes(double fluid_len, double solid_len, double width,
                                                 int nx_fluid, int nx_solid, int ny, int ny_solid) {
  if (ny_solid < 0) ny_solid = ny;
  if (!(fluid_len > 0.0 && solid_len > 0.0 && width > 0.0))
    throw InvalidConfig("column lengths must be positive");
  if (nx_fluid < 1 || nx_solid < 1 || ny < 1 || ny_solid < 1)
    throw InvalidConfig("column element counts must be >= 1");
  Mesh2D f = structured_grid(linspace(0.0, fluid_len, nx_fluid), linspace(0.0, width, ny));
  f.edge_sets["interface"] = side_edges(nx_fluid, ny, 1, 0, ny);
  f.edge_sets["inlet"] = side_edges(nx_fluid, ny, 3, 0, ny);
  f.edge_sets["bottom"] = side_edges(nx_fluid, ny, 0, 0, nx_fluid);
  f.edge_sets["top"] = side_edges(nx_fluid, ny, 2, 0, nx_fluid);
  Mesh2D s = structured_grid(linspace(fluid_len, fluid_len + solid_len, nx_solid), linspace(0.0, width, ny_solid));
  s.edge_sets["interface"] = side_edges(nx_solid, ny_solid, 3, 0, ny_solid);
  s.edge_sets["dry_end"] = side_edges(nx_solid, ny_solid, 1, 0, ny_solid);
  s.edge_sets["bottom"] = side_edges(nx_solid, ny_solid, 0, 0, nx_solid);
  s.edge_sets["top"] = side_edges(nx_solid, ny_solid, 2, 0, nx_solid);
  return {std::move(f), std::move(s)};
}

std::pair<Mesh2D, Mesh2D> generate_cavity_meshes(int n_cav, int n_top, int n_solid_x, int n_solid_y,
                                                 const CavityGeometry& geom) {
  if (n_cav < 1 || n_top < 1 || n_solid_x < 1 || n_solid_y < 1)
    throw InvalidConfig("cavity element counts must be >= 1");
  if (!(geom.top_height > 0.0 && geom.top_height < 1.0 && geom.solid_thickness > 0.0))
    throw InvalidConfig("cavity geometry out of range");
  const double yc = 1.0 - geom.top_height;
  std::vector<double> ys = linspace(0.0, yc, n_cav);
  auto top = linspace(yc, 1.0, n_top);
  ys.insert(ys.end(), top.begin() + 1, top.end());
  const int ny = n_cav + n_top;
  Mesh2D f = structured_grid(linspace(0.0, 1.0, n_cav), ys);
  f.edge_sets["interface"] = side_edges(n_cav, ny, 0, 0, n_cav);
  f.edge_sets["wall_left"] = side_edges(n_cav, ny, 3, 0, n_cav);
  f.edge_sets["wall_right"] = side_edges(n_cav, ny, 1, 0, n_cav);
  f.edge_sets["inflow"] = side_edges(n_cav, ny, 3, n_cav, ny);
  f.edge_sets["outflow"] = side_edges(n_cav, ny, 1, n_cav, ny);
  f.edge_sets["lid"] = side_edges(n_cav, ny, 2, 0, n_cav);
  Mesh2D s = structured_grid(linspace(0.0, 1.0, n_solid_x), linspace(-geom.solid_thickness, 0.0, n_solid_y));
  s.edge_sets["interface"] = side_edges(n_solid_x, n_solid_y, 2, 0, n_solid_x);
  s.edge_sets["clamp_left"] = side_edges(n_solid_x, n_solid_y, 3, 0, n_solid_y);
  s.edge_sets["clamp_right"] = side_edges(n_solid_x, n_solid_y, 1, 0, n_solid_y);
  s.edge_sets["bottom"] = side_edges(n_solid_x, n_solid_y, 0, 0, n_solid_x);
  return {std::move(f), std::move(s)};
}

void write_mesh(const Mesh2D& mesh, std::ostream& out) {
  out << "mesh2d v1\n" << std::setprecision(17);
  out << "nodes " << mesh.nodes.size() << "\n";
  for (const auto& p : mesh.nodes) out << p.x << " " << p.y << "\n";
  out << "elems " << mesh.elems.size() << "\n";
  for (const auto& e : mesh.elems) out << e[0] << " " << e[1] << " " << e[2] << " " << e[3] << "\n";
  for (const auto& [name, edges] : mesh.edge_sets) {
    out << "edgeset " << name << " " << edges.size() << "\n";
    for (const auto& e : edges) out << e.elem << " " << e.local_edge << "\n";
  }
}

namespace {

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Next non-empty line with comments stripped, split into tokens; false at EOF.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ss(line);
      tokens.clear();
      std::string t;
      while (ss >> t) tokens.push_back(t);
      if (!tokens.empty()) return true;
    }
    return false;
  }
  void require(std::vector<std::string>& tokens, const char* what) {
    if (!next(tokens)) throw ParseError(std::string("unexpected end of file, expected ") + what, line_no);
  }
};

long parse_int(const std::string& s, int line) {
  size_t pos = 0;
  long v = 0;
  try {
    v = std::stol(s, &pos);
  } catch (...) {
    throw ParseError("expected integer, got '" + s + "'", line);
  }
  if (pos != s.size()) throw ParseError("expected integer, got '" + s + "'", line);
  return v;
}

double parse_double(const std::string& s, int line) {
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (...) {
    throw ParseError("expected number, got '" + s + "'", line);
  }
  if (pos != s.size()) throw ParseError("expected number, got '" + s + "'", line);
  return v;
}

void expect_count(const std::vector<std::string>& t, size_t n, int line) {
  if (t.size() != n)
    throw ParseError("expected " + std::to_string(n) + " fields, got " + std::to_string(t.size()), line);
}

}  // namespace

Mesh2D read_mesh(std::istream& in) {
  LineReader r{in};
  std::vector<std::string> t;
  r.require(t, "header");
  if (t.size() != 2 || t[0] != "mesh2d" || t[1] != "v1") throw ParseError("bad header, expected 'mesh2d v1'", r.line_no);
  Mesh2D m;
  r.require(t, "nodes");
  if (t.size() != 2 || t[0] != "nodes") throw ParseError("expected 'nodes N'", r.line_no);
  long nn = parse_int(t[1], r.line_no);
  if (nn < 0) throw ParseError("negative node count", r.line_no);
  for (long i = 0; i < nn; ++i) {
    r.require(t, "node coordinates");
    expect_count(t, 2, r.line_no);
    m.nodes.push_back({parse_double(t[0], r.line_no), parse_double(t[1], r.line_no)});
  }
  r.require(t, "elems");
  if (t.size() != 2 || t[0] != "elems") throw ParseError("expected 'elems M'", r.line_no);
  long ne = parse_int(t[1], r.line_no);
  if (ne < 0) throw ParseError("negative element count", r.line_no);
  for (long i = 0; i < ne; ++i) {
    r.require(t, "element connectivity");
    expect_count(t, 4, r.line_no);
    std::array<int, 4> el{};
    for (int k = 0; k < 4; ++k) {
      long id = parse_int(t[k], r.line_no);
      if (id < 0 || id >= nn) throw ParseError("element node id " + std::to_string(id) + " out of range", r.line_no);
      el[k] = int(id);
    }
    m.elems.push_back(el);
  }
  while (r.next(t)) {
    if (t.size() != 3 || t[0] != "edgeset") throw ParseError("expected 'edgeset <name> K'", r.line_no);
    const std::string name = t[1];
    if (m.edge_sets.count(name)) throw ParseError("duplicate edge set '" + name + "'", r.line_no);
    long k = parse_int(t[2], r.line_no);
    if (k < 0) throw ParseError("negative edge count", r.line_no);
    auto& edges = m.edge_sets[name];
    for (long i = 0; i < k; ++i) {
      r.require(t, "edge reference");
      expect_count(t, 2, r.line_no);
      long e = parse_int(t[0], r.line_no), le = parse_int(t[1], r.line_no);
      if (e < 0 || e >= ne) throw ParseError("edge element id " + std::to_string(e) + " out of range", r.line_no);
      if (le < 0 || le > 3) throw ParseError("local edge must be 0..3", r.line_no);
      edges.push_back({int(e), int(le)});
    }
  }
  return m;
}

void save_mesh(const Mesh2D& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot write mesh file '" + path + "'");
  write_mesh(mesh, out);
}

Mesh2D load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open mesh file '" + path + "'");
  return read_mesh(in);
}

}  // namespace fsi
