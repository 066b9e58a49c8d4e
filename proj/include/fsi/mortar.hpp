#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsi/mesh.hpp"
#include "fsi/sparse.hpp"

namespace fsi {

enum class FieldId { Solid, Fluid };

// Coefficients of the dual basis on one slave segment: phi_j = c[j][0] N1 + c[j][1] N2.
using DualCoefficients = std::array<std::array<double, 2>, 2>;

DualCoefficients dual_shapes_segment(const Point& a, const Point& b);

// Coupling operators on a straight interface. Row and column order follow the
// interface dofs of the slave and master DofMaps (node ascending, then component).
struct MortarOperators {
  CsrMatrix d;  // slave x slave, diagonal
  CsrMatrix m;  // slave x master
  CsrMatrix p;  // D^{-1} M
  Vec d_nodal;          // one entry per slave interface node
  CsrMatrix m_nodal;    // slave nodes x master nodes
  std::vector<int> slave_nodes;
  std::vector<int> master_nodes;
  FieldId slave_field = FieldId::Solid;
  FieldId master_field = FieldId::Fluid;

  int n_slave() const { return d.rows(); }
  int n_master() const { return m.cols(); }
};

MortarOperators assemble_mortar(const Mesh2D& slave_mesh, const std::string& slave_set, const DofMap& slave_dofs,
                                const Mesh2D& master_mesh, const std::string& master_set,
                                const DofMap& master_dofs, FieldId slave_field = FieldId::Solid,
                                FieldId master_field = FieldId::Fluid);

Vec project_master_to_slave(const MortarOperators& mortar, const Vec& master_values);

// "name row col value" lines for D, M and P.
void write_mortar_coo(const MortarOperators& mortar, std::ostream& out);

}  // namespace fsi
