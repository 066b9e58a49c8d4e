#include "fsi/fe.hpp"

#include <cmath>

namespace fsi {

const std::array<GaussPoint, 4>& gauss_2x2() {
  static const double g = 1.0 / std::sqrt(3.0);
  static const std::array<GaussPoint, 4> pts{{{-g, -g, 1.0}, {g, -g, 1.0}, {g, g, 1.0}, {-g, g, 1.0}}};
  return pts;
}

Q1Eval q1_eval(double xi, double eta) {
  static const double sx[4] = {-1, 1, 1, -1};
  static const double sy[4] = {-1, -1, 1, 1};
  Q1Eval e{};
  for (int k = 0; k < 4; ++k) {
    e.n[k] = 0.25 * (1 + sx[k] * xi) * (1 + sy[k] * eta);
    e.dxi[k] = 0.25 * sx[k] * (1 + sy[k] * eta);
    e.deta[k] = 0.25 * sy[k] * (1 + sx[k] * xi);
  }
  return e;
}

Blocks split_blocks(const CsrMatrix& k, const std::vector<int>& row_i, const std::vector<int>& row_g,
                    const std::vector<int>& col_i, const std::vector<int>& col_g) {
  return {k.submatrix(row_i, col_i), k.submatrix(row_i, col_g), k.submatrix(row_g, col_i),
          k.submatrix(row_g, col_g)};
}

Vec gather(const Vec& v, const std::vector<int>& idx) {
  Vec out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

void scatter_add(const Vec& part, const std::vector<int>& idx, Vec& v, double scale) {
  for (size_t i = 0; i < idx.size(); ++i) v[idx[i]] += scale * part[i];
}

void zero_rows(CsrMatrix& k, const std::vector<int>& rows) {
  const auto& rp = k.row_ptr();
  auto& vals = k.values();
  for (int r : rows)
    for (int p = rp[r]; p < rp[r + 1]; ++p) vals[p] = 0.0;
}

void apply_dirichlet_rows(CsrMatrix& k, Vec& r, const std::vector<int>& dofs, CsrMatrix* coupling) {
  for (int d : dofs) {
    k.set_unit_row(d);
    r[d] = 0.0;
  }
  if (coupling) zero_rows(*coupling, dofs);
}

}  // namespace fsi
