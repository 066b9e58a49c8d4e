#include "fsi/mortar.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fsi/error.hpp"

namespace fsi {

namespace {

struct Segment {
  double s0, s1;  // s0 < s1
  int n0, n1;     // node ids at s0 and s1
};

struct Line {
  Point origin;
  double tx, ty;
  double param(const Point& p) const { return (p.x - origin.x) * tx + (p.y - origin.y) * ty; }
  double offset(const Point& p) const { return std::abs((p.x - origin.x) * ty - (p.y - origin.y) * tx); }
};

std::vector<Segment> interface_segments(const Mesh2D& mesh, const std::string& set, const Line& line) {
  std::vector<Segment> out;
  for (const auto& e : mesh.edge_set(set)) {
    auto nd = mesh.edge_nodes(e);
    double a = line.param(mesh.nodes[nd[0]]), b = line.param(mesh.nodes[nd[1]]);
    if (a < b)
      out.push_back({a, b, nd[0], nd[1]});
    else
      out.push_back({b, a, nd[1], nd[0]});
  }
  return out;
}

double linear_shape(const Segment& s, int which, double t) {
  double n0 = (s.s1 - t) / (s.s1 - s.s0);
  return which == 0 ? n0 : 1.0 - n0;
}

}  // namespace

DualCoefficients dual_shapes_segment(const Point& a, const Point& b) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (!(len > 0.0)) throw DomainError("zero-length mortar segment");
  // Solve c * Me = diag(len/2) with the consistent segment mass Me = len/6 [[2,1],[1,2]].
  const double m11 = len / 3.0, m12 = len / 6.0;
  const double det = m11 * m11 - m12 * m12;
  const double i11 = m11 / det, i12 = -m12 / det;
  const double h = 0.5 * len;
  return {{{h * i11, h * i12}, {h * i12, h * i11}}};
}

MortarOperators assemble_mortar(const Mesh2D& slave_mesh, const std::string& slave_set, const DofMap& slave_dofs,
                                const Mesh2D& master_mesh, const std::string& master_set,
                                const DofMap& master_dofs, FieldId slave_field, FieldId master_field) {
  MortarOperators out;
  out.slave_field = slave_field;
  out.master_field = master_field;
  out.slave_nodes = slave_mesh.edge_set_nodes(slave_set);
  out.master_nodes = master_mesh.edge_set_nodes(master_set);
  if (out.slave_nodes.size() < 2 || out.master_nodes.size() < 2)
    throw CouplingError("interface sets need at least one edge on each side");

  // Straight line through the two most distant slave nodes.
  const auto& sn = out.slave_nodes;
  Point p0 = slave_mesh.nodes[sn.front()], p1 = p0;
  double best = -1.0;
  for (int i : sn)
    for (int j : sn) {
      const auto &a = slave_mesh.nodes[i], &b = slave_mesh.nodes[j];
      double d = std::hypot(b.x - a.x, b.y - a.y);
      if (d > best) {
        best = d;
        p0 = a;
        p1 = b;
      }
    }
  if (!(best > 0.0)) throw CouplingError("degenerate slave interface");
  Line line{p0, (p1.x - p0.x) / best, (p1.y - p0.y) / best};
  const double tol = 1e-12 * std::max(slave_mesh.diameter(), master_mesh.diameter());
  for (int n : out.slave_nodes)
    if (line.offset(slave_mesh.nodes[n]) > tol) throw CouplingError("slave interface is not straight");
  for (int n : out.master_nodes)
    if (line.offset(master_mesh.nodes[n]) > tol)
      throw CouplingError("master interface node " + std::to_string(n) + " is off the slave interface line");

  auto slave_seg = interface_segments(slave_mesh, slave_set, line);
  auto master_seg = interface_segments(master_mesh, master_set, line);
  auto extent = [](const std::vector<Segment>& segs) {
    double lo = segs.front().s0, hi = segs.front().s1;
    for (const auto& s : segs) {
      lo = std::min(lo, s.s0);
      hi = std::max(hi, s.s1);
    }
    return std::pair{lo, hi};
  };
  auto [slo, shi] = extent(slave_seg);
  auto [mlo, mhi] = extent(master_seg);
  if (std::min(shi, mhi) - std::max(slo, mlo) <= tol) throw CouplingError("interface curves do not overlap");
  if (std::abs(slo - mlo) > tol || std::abs(shi - mhi) > tol)
    throw CouplingError("interface curves are not coincident");

  std::vector<int> sidx(slave_mesh.nodes.size(), -1), midx(master_mesh.nodes.size(), -1);
  for (size_t k = 0; k < out.slave_nodes.size(); ++k) sidx[out.slave_nodes[k]] = int(k);
  for (size_t k = 0; k < out.master_nodes.size(); ++k) midx[out.master_nodes[k]] = int(k);

  const int ns = int(out.slave_nodes.size()), nm = int(out.master_nodes.size());
  out.d_nodal.assign(ns, 0.0);
  for (const auto& s : slave_seg) {
    double len = s.s1 - s.s0;
    out.d_nodal[sidx[s.n0]] += 0.5 * len;
    out.d_nodal[sidx[s.n1]] += 0.5 * len;
  }
  for (int k = 0; k < ns; ++k)
    if (!(out.d_nodal[k] > 0.0))
      throw CouplingError("singular D: slave node " + std::to_string(out.slave_nodes[k]) + " has zero support");

  static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  std::vector<Triplet> mt;
  for (const auto& s : slave_seg) {
    Point a{line.origin.x + s.s0 * line.tx, line.origin.y + s.s0 * line.ty};
    Point b{line.origin.x + s.s1 * line.tx, line.origin.y + s.s1 * line.ty};
    DualCoefficients c = dual_shapes_segment(a, b);
    for (const auto& m : master_seg) {
      double lo = std::max(s.s0, m.s0), hi = std::min(s.s1, m.s1);
      if (hi - lo <= tol) continue;
      for (int q = 0; q < 3; ++q) {
        double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[q];
        double w = 0.5 * (hi - lo) * gw[q];
        double n0 = linear_shape(s, 0, t), n1 = linear_shape(s, 1, t);
        double phi[2] = {c[0][0] * n0 + c[0][1] * n1, c[1][0] * n0 + c[1][1] * n1};
        double nm0 = linear_shape(m, 0, t), nm1 = linear_shape(m, 1, t);
        int srow[2] = {sidx[s.n0], sidx[s.n1]};
        mt.push_back({srow[0], midx[m.n0], w * phi[0] * nm0});
        mt.push_back({srow[0], midx[m.n1], w * phi[0] * nm1});
        mt.push_back({srow[1], midx[m.n0], w * phi[1] * nm0});
        mt.push_back({srow[1], midx[m.n1], w * phi[1] * nm1});
      }
    }
  }
  out.m_nodal = CsrMatrix::from_triplets(ns, nm, std::move(mt));

  // Expand to dofs: identity over the components that sit on the interface.
  const int nsd = int(slave_dofs.interface.size()), nmd = int(master_dofs.interface.size());
  if (nsd % ns != 0 || nmd % nm != 0 || nsd / ns != nmd / nm)
    throw ShapeError("interface dof maps do not match the interface node sets");
  const int nc = nsd / ns;
  auto sdof = [&](int k, int c) { return slave_dofs.slot[slave_dofs.dof(out.slave_nodes[k], c)]; };
  auto mdof = [&](int k, int c) { return master_dofs.slot[master_dofs.dof(out.master_nodes[k], c)]; };
  std::vector<Triplet> dt, mtd, pt;
  const auto& rp = out.m_nodal.row_ptr();
  const auto& ci = out.m_nodal.col_idx();
  const auto& vv = out.m_nodal.values();
  for (int k = 0; k < ns; ++k)
    for (int c = 0; c < nc; ++c) {
      int r = sdof(k, c);
      dt.push_back({r, r, out.d_nodal[k]});
      for (int q = rp[k]; q < rp[k + 1]; ++q) {
        mtd.push_back({r, mdof(ci[q], c), vv[q]});
        pt.push_back({r, mdof(ci[q], c), vv[q] / out.d_nodal[k]});
      }
    }
  out.d = CsrMatrix::from_triplets(nsd, nsd, std::move(dt));
  out.m = CsrMatrix::from_triplets(nsd, nmd, std::move(mtd));
  out.p = CsrMatrix::from_triplets(nsd, nmd, std::move(pt));
  return out;
}

Vec project_master_to_slave(const MortarOperators& mortar, const Vec& master_values) {
  if (int(master_values.size()) != mortar.p.cols())
    throw ShapeError("master vector has " + std::to_string(master_values.size()) + " entries, expected " +
                     std::to_string(mortar.p.cols()));
  return mortar.p.multiply(master_values);
}

void write_mortar_coo(const MortarOperators& mortar, std::ostream& out) {
  auto dump = [&](const char* name, const CsrMatrix& a) {
    const auto& rp = a.row_ptr();
    for (int i = 0; i < a.rows(); ++i)
      for (int q = rp[i]; q < rp[i + 1]; ++q) out << name << " " << i << " " << a.col_idx()[q] << " " << a.values()[q] << "\n";
  };
  out.precision(17);
  dump("D", mortar.d);
  dump("M", mortar.m);
  dump("P", mortar.p);
}

}  // namespace fsi
