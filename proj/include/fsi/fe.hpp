#pragma once

#include <array>
#include <vector>

#include "fsi/sparse.hpp"

namespace fsi {

struct GaussPoint {
  double xi;
  double eta;
  double w;
};

const std::array<GaussPoint, 4>& gauss_2x2();

// Bilinear shape functions on [-1,1]^2, nodes counter-clockwise from (-1,-1).
struct Q1Eval {
  std::array<double, 4> n;
  std::array<double, 4> dxi;
  std::array<double, 4> deta;
};
Q1Eval q1_eval(double xi, double eta);

// Partition of a field matrix into interior/interface row and column blocks.
struct Blocks {
  CsrMatrix ii, ig, gi, gg;
};
Blocks split_blocks(const CsrMatrix& k, const std::vector<int>& row_i, const std::vector<int>& row_g,
                    const std::vector<int>& col_i, const std::vector<int>& col_g);

Vec gather(const Vec& v, const std::vector<int>& idx);
void scatter_add(const Vec& part, const std::vector<int>& idx, Vec& v, double scale = 1.0);

// Prescribed values for a set of dofs of one field.
struct DirichletValues {
  std::vector<int> dofs;
  Vec values;
};

// Unit rows in k, zero rows in the optional coupling matrix, zero residual entries.
void apply_dirichlet_rows(CsrMatrix& k, Vec& r, const std::vector<int>& dofs, CsrMatrix* coupling = nullptr);
void zero_rows(CsrMatrix& k, const std::vector<int>& rows);

}  // namespace fsi
