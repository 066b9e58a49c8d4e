#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fsi {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Local edge k of a quad joins local nodes k and (k+1)%4.
struct EdgeRef {
  int elem = 0;
  int local_edge = 0;
};

struct Mesh2D {
  static constexpr int dim = 2;
  std::vector<Point> nodes;
  std::vector<std::array<int, 4>> elems;  // counter-clockwise
  std::map<std::string, std::vector<EdgeRef>> edge_sets;

  std::array<int, 2> edge_nodes(const EdgeRef& e) const;
  bool has_edge_set(const std::string& name) const { return edge_sets.count(name) > 0; }
  const std::vector<EdgeRef>& edge_set(const std::string& name) const;
  // Sorted unique node ids touched by the edge set.
  std::vector<int> edge_set_nodes(const std::string& name) const;
  double diameter() const;
  double geo_tol() const { return 1e-12 * diameter(); }
  // Throws InvalidConfig on non-positive corner Jacobians or non-boundary tagged edges.
  void validate() const;
};

bool operator==(const Mesh2D& a, const Mesh2D& b);

// Dof numbering: node index ascending, then component.
struct DofMap {
  int n_nodes = 0;
  int dofs_per_node = 0;
  std::vector<int> interior;         // sorted global dofs
  std::vector<int> interface;        // sorted global dofs
  std::vector<int> interface_nodes;  // sorted node ids
  std::vector<int> slot;             // dof -> position inside interior or interface
  std::vector<char> on_interface;    // dof -> flag

  int n_dofs() const { return n_nodes * dofs_per_node; }
  int dof(int node, int comp) const { return node * dofs_per_node + comp; }
};

// interface_components: leading components of each interface node that join Γ
// (-1 means all); the fluid puts velocities on Γ and keeps pressure interior.
DofMap build_dofmap(const Mesh2D& mesh, int dofs_per_node, const std::string& interface_set,
                    int interface_components = -1);

std::pair<Mesh2D, Mesh2D> generate_column_meshes(double fluid_len, double solid_len, double width,
                                                 int nx_fluid, int nx_solid, int ny,
                                                 int ny_solid = -1);

struct CavityGeometry {
  double top_height = 0.125;
  double solid_thickness = 0.05;
};

std::pair<Mesh2D, Mesh2D> generate_cavity_meshes(int n_cav, int n_top, int n_solid_x, int n_solid_y,
                                                 const CavityGeometry& geom = {});

void write_mesh(const Mesh2D& mesh, std::ostream& out);
Mesh2D read_mesh(std::istream& in);
void save_mesh(const Mesh2D& mesh, const std::string& path);
Mesh2D load_mesh(const std::string& path);

}  // namespace fsi
