#include "fsi/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fsi/error.hpp"

namespace fsi {

Vec DenseMatrix::multiply(const Vec& x) const {
  if (int(x.size()) != cols_) throw ShapeError("dense multiply: size mismatch");
  Vec y(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> trips) {
  CsrMatrix m(rows, cols);
  for (const auto& t : trips) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw ShapeError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                       ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.col_idx_.reserve(trips.size());
  m.values_.reserve(trips.size());
  size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    while (k < trips.size() && trips[k].row == i) {
      int c = trips[k].col;
      double v = 0.0;
      while (k < trips.size() && trips[k].row == i && trips[k].col == c) v += trips[k++].val;
      m.col_idx_.push_back(c);
      m.values_.push_back(v);
    }
    m.row_ptr_[i + 1] = int(m.col_idx_.size());
  }
  return m;
}

CsrMatrix CsrMatrix::identity(int n, double diag) {
  return diagonal(Vec(n, diag));
}

CsrMatrix CsrMatrix::diagonal(const Vec& d) {
  int n = int(d.size());
  CsrMatrix m(n, n);
  m.col_idx_.resize(n);
  m.values_ = d;
  for (int i = 0; i < n; ++i) {
    m.col_idx_[i] = i;
    m.row_ptr_[i + 1] = i + 1;
  }
  return m;
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& d, double drop_tol) {
  std::vector<Triplet> t;
  for (int i = 0; i < d.rows(); ++i)
    for (int j = 0; j < d.cols(); ++j)
      if (std::abs(d(i, j)) > drop_tol) t.push_back({i, j, d(i, j)});
  return from_triplets(d.rows(), d.cols(), std::move(t));
}

double CsrMatrix::at(int i, int j) const {
  auto b = col_idx_.begin() + row_ptr_[i];
  auto e = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(b, e, j);
  if (it != e && *it == j) return values_[it - col_idx_.begin()];
  return 0.0;
}

Vec CsrMatrix::multiply(const Vec& x) const {
  Vec y(rows_, 0.0);
  multiply_add(x, y, 1.0);
  return y;
}

void CsrMatrix::multiply_add(const Vec& x, Vec& y, double alpha) const {
  if (int(x.size()) != cols_ || int(y.size()) != rows_)
    throw ShapeError("csr multiply: size mismatch");
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[col_idx_[k]];
    y[i] += alpha * s;
  }
}

Vec CsrMatrix::multiply_transpose(const Vec& x) const {
  if (int(x.size()) != rows_) throw ShapeError("csr transpose multiply: size mismatch");
  Vec y(cols_, 0.0);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) y[col_idx_[k]] += values_[k] * x[i];
  return y;
}

CsrMatrix CsrMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({col_idx_[k], i, values_[k]});
  return from_triplets(cols_, rows_, std::move(t));
}

CsrMatrix CsrMatrix::scaled(double s) const {
  CsrMatrix m = *this;
  for (auto& v : m.values_) v *= s;
  return m;
}

CsrMatrix CsrMatrix::submatrix(const std::vector<int>& rows, const std::vector<int>& cols) const {
  std::vector<int> col_map(cols_, -1);
  for (size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = int(j);
  std::vector<Triplet> t;
  for (size_t i = 0; i < rows.size(); ++i) {
    int r = rows[i];
    for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      int c = col_map[col_idx_[k]];
      if (c >= 0) t.push_back({int(i), c, values_[k]});
    }
  }
  return from_triplets(int(rows.size()), int(cols.size()), std::move(t));
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_idx_[k]) += values_[k];
  return d;
}

void CsrMatrix::append_to(std::vector<Triplet>& out, int row_off, int col_off, double scale) const {
  for (int i = 0; i < rows_; ++i)
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      out.push_back({row_off + i, col_off + col_idx_[k], scale * values_[k]});
}

void CsrMatrix::set_unit_row(int i) {
  bool has_diag = false;
  for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
    if (col_idx_[k] == i) {
      values_[k] = 1.0;
      has_diag = true;
    } else {
      values_[k] = 0.0;
    }
  }
  if (!has_diag) {
    auto pos = std::lower_bound(col_idx_.begin() + row_ptr_[i], col_idx_.begin() + row_ptr_[i + 1], i);
    size_t off = pos - col_idx_.begin();
    col_idx_.insert(pos, i);
    values_.insert(values_.begin() + off, 1.0);
    for (int r = i + 1; r <= rows_; ++r) ++row_ptr_[r];
  }
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("csr product: inner dimension mismatch");
  std::vector<Triplet> t;
  Vec acc(b.cols(), 0.0);
  std::vector<int> mark(b.cols(), -1);
  std::vector<int> used;
  const auto& ap = a.row_ptr();
  const auto& ac = a.col_idx();
  const auto& av = a.values();
  const auto& bp = b.row_ptr();
  const auto& bc = b.col_idx();
  const auto& bv = b.values();
  for (int i = 0; i < a.rows(); ++i) {
    used.clear();
    for (int ka = ap[i]; ka < ap[i + 1]; ++ka) {
      int r = ac[ka];
      for (int kb = bp[r]; kb < bp[r + 1]; ++kb) {
        int c = bc[kb];
        if (mark[c] != i) {
          mark[c] = i;
          acc[c] = 0.0;
          used.push_back(c);
        }
        acc[c] += av[ka] * bv[kb];
      }
    }
    for (int c : used) t.push_back({i, c, acc[c]});
  }
  return CsrMatrix::from_triplets(a.rows(), b.cols(), std::move(t));
}

CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha, double beta) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("csr add: shape mismatch");
  std::vector<Triplet> t;
  t.reserve(a.nnz() + b.nnz());
  a.append_to(t, 0, 0, alpha);
  b.append_to(t, 0, 0, beta);
  return CsrMatrix::from_triplets(a.rows(), a.cols(), std::move(t));
}

void LinearSolverConfig::validate() const {
  if (restart < 1) throw InvalidConfig("linear solver restart must be >= 1");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InvalidConfig("linear solver rel_tol must be in (0,1)");
  if (max_iterations < 1) throw InvalidConfig("linear solver max_iterations must be >= 1");
}

Ilu0::Ilu0(const CsrMatrix& a) : lu_(a), diag_(a.rows(), -1) {
  if (a.rows() != a.cols()) throw ShapeError("ilu0: matrix not square");
  const int n = a.rows();
  const auto& rp = lu_.row_ptr();
  const auto& ci = lu_.col_idx();
  auto& v = lu_.values();
  for (int i = 0; i < n; ++i)
    for (int k = rp[i]; k < rp[i + 1]; ++k)
      if (ci[k] == i) diag_[i] = k;
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    if (diag_[i] < 0) throw SolverError("ilu0: zero pivot (missing diagonal) in row " + std::to_string(i));
    for (int k = rp[i]; k < rp[i + 1]; ++k) pos[ci[k]] = k;
    for (int k = rp[i]; k < rp[i + 1] && ci[k] < i; ++k) {
      int j = ci[k];
      double piv = v[diag_[j]];
      v[k] /= piv;
      for (int kk = diag_[j] + 1; kk < rp[j + 1]; ++kk) {
        int p = pos[ci[kk]];
        if (p >= 0) v[p] -= v[k] * v[kk];
      }
    }
    for (int k = rp[i]; k < rp[i + 1]; ++k) pos[ci[k]] = -1;
    if (v[diag_[i]] == 0.0 || !std::isfinite(v[diag_[i]]))
      throw SolverError("ilu0: zero pivot in row " + std::to_string(i));
  }
}

void Ilu0::apply(const Vec& in, Vec& out) const {
  const int n = lu_.rows();
  const auto& rp = lu_.row_ptr();
  const auto& ci = lu_.col_idx();
  const auto& v = lu_.values();
  out = in;
  for (int i = 0; i < n; ++i) {
    double s = out[i];
    for (int k = rp[i]; k < diag_[i]; ++k) s -= v[k] * out[ci[k]];
    out[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = out[i];
    for (int k = diag_[i] + 1; k < rp[i + 1]; ++k) s -= v[k] * out[ci[k]];
    out[i] = s / v[diag_[i]];
  }
}

BlockIlu0::BlockIlu0(const CsrMatrix& a, const std::vector<int>& offsets) : offsets_(offsets) {
  if (offsets_.size() < 2 || offsets_.front() != 0 || offsets_.back() != a.rows())
    throw ShapeError("block ilu0: offsets must span [0, n]");
  for (size_t b = 0; b + 1 < offsets_.size(); ++b) {
    std::vector<int> idx(offsets_[b + 1] - offsets_[b]);
    std::iota(idx.begin(), idx.end(), offsets_[b]);
    try {
      blocks_.emplace_back(a.submatrix(idx, idx));
    } catch (const SolverError& e) {
      throw SolverError("block " + std::to_string(b) + ": " + e.what());
    }
  }
}

void BlockIlu0::apply(const Vec& in, Vec& out) const {
  out.assign(in.size(), 0.0);
  Vec seg, res;
  for (size_t b = 0; b < blocks_.size(); ++b) {
    seg.assign(in.begin() + offsets_[b], in.begin() + offsets_[b + 1]);
    blocks_[b].apply(seg, res);
    std::copy(res.begin(), res.end(), out.begin() + offsets_[b]);
  }
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const Vec& x, Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

namespace {

Vec residual(const CsrMatrix& a, const Vec& x, const Vec& b) {
  Vec r = b;
  a.multiply_add(x, r, -1.0);
  return r;
}

}  // namespace

LinearSolveResult gmres_solve(const CsrMatrix& a, const Vec& b, const LinearSolverConfig& cfg,
                              const Preconditioner* precond) {
  cfg.validate();
  if (a.rows() != a.cols() || int(b.size()) != a.rows()) throw ShapeError("gmres: shape mismatch");
  const int n = a.rows();
  LinearSolveResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) return res;

  const int m = cfg.restart;
  std::vector<Vec> v(m + 1, Vec(n));
  std::vector<Vec> z(m, Vec(n));
  std::vector<Vec> h(m + 1, Vec(m, 0.0));
  Vec cs(m), sn(m), g(m + 1);
  Vec w(n);

  Vec r = b;
  double rnorm = bnorm;
  while (true) {
    if (rnorm / bnorm <= cfg.rel_tol) break;
    if (res.iterations >= cfg.max_iterations)
      throw SolverError("gmres: no convergence after " + std::to_string(res.iterations) +
                        " iterations, relative residual " + std::to_string(rnorm / bnorm));
    for (int i = 0; i < n; ++i) v[0][i] = r[i] / rnorm;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = rnorm;
    int k = 0;
    for (; k < m && res.iterations < cfg.max_iterations; ++k) {
      ++res.iterations;
      if (precond)
        precond->apply(v[k], z[k]);
      else
        z[k] = v[k];
      w = a.multiply(z[k]);
      // modified Gram-Schmidt, two passes
      for (int j = 0; j <= k; ++j) h[j][k] = 0.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j <= k; ++j) {
          double c = dot(w, v[j]);
          h[j][k] += c;
          axpy(-c, v[j], w);
        }
      }
      double hn = norm2(w);
      h[k + 1][k] = hn;
      bool breakdown = hn <= 1e-14 * std::abs(g[0]);
      if (!breakdown)
        for (int i = 0; i < n; ++i) v[k + 1][i] = w[i] / hn;
      for (int j = 0; j < k; ++j) {
        double t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
        h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
        h[j][k] = t;
      }
      double den = std::hypot(h[k][k], h[k + 1][k]);
      if (den == 0.0) throw SolverError("gmres: breakdown with singular Hessenberg matrix");
      cs[k] = h[k][k] / den;
      sn[k] = h[k + 1][k] / den;
      h[k][k] = den;
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (breakdown || std::abs(g[k + 1]) / bnorm <= cfg.rel_tol) {
        ++k;
        break;
      }
    }
    Vec y(k, 0.0);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= h[i][j] * y[j];
      y[i] = s / h[i][i];
    }
    for (int j = 0; j < k; ++j) axpy(y[j], z[j], res.x);
    r = residual(a, res.x, b);
    double new_norm = norm2(r);
    if (new_norm >= rnorm * (1.0 - 1e-12) && new_norm / bnorm > cfg.rel_tol)
      throw SolverError("gmres: stagnation at relative residual " + std::to_string(new_norm / bnorm));
    rnorm = new_norm;
  }
  res.rel_residual = rnorm / bnorm;
  return res;
}

Vec dense_lu_solve(DenseMatrix a, Vec b) {
  const int n = a.rows();
  if (a.cols() != n || int(b.size()) != n) throw ShapeError("dense lu: shape mismatch");
  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  if (scale == 0.0 && n > 0) throw SolverError("dense lu: zero matrix");
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    double piv = std::abs(a(p, k));
    if (piv <= 1e-14 * scale)
      throw SolverError("dense lu: numerically singular, pivot " + std::to_string(piv) + " at column " +
                        std::to_string(k));
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (int i = k + 1; i < n; ++i) {
      double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      a(i, k) = f;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= a(i, j) * b[j];
    b[i] = s / a(i, i);
  }
  return b;
}

LinearSolveResult solve_linear(const CsrMatrix& a, const Vec& b, const LinearSolverConfig& cfg,
                               const std::vector<int>& block_offsets) {
  if (cfg.method == LinearSolverConfig::Method::DenseLU) {
    if (a.rows() > cfg.dense_cap)
      throw SolverError("dense lu: " + std::to_string(a.rows()) + " dofs exceed cap " +
                        std::to_string(cfg.dense_cap));
    LinearSolveResult r;
    r.x = dense_lu_solve(a.to_dense(), b);
    r.iterations = 1;
    double bn = norm2(b);
    r.rel_residual = bn > 0.0 ? norm2(residual(a, r.x, b)) / bn : 0.0;
    return r;
  }
  if (cfg.precond == LinearSolverConfig::Precond::None) return gmres_solve(a, b, cfg, nullptr);
  if (block_offsets.empty()) {
    Ilu0 p(a);
    return gmres_solve(a, b, cfg, &p);
  }
  BlockIlu0 p(a, block_offsets);
  return gmres_solve(a, b, cfg, &p);
}

}  // namespace fsi
