#pragma once

#include <vector>

namespace fsi {

using Vec = std::vector<double>;

struct Triplet {
  int row;
  int col;
  double val;
};

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(size_t(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return data_[size_t(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[size_t(i) * cols_ + j]; }
  Vec multiply(const Vec& x) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Compressed sparse row storage. Column indices are sorted and unique per row.
class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_(1, 0) {}
  CsrMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  // Duplicates are summed; explicit zeros are kept as structural entries.
  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> trips);
  static CsrMatrix identity(int n, double diag = 1.0);
  static CsrMatrix diagonal(const Vec& d);
  static CsrMatrix from_dense(const DenseMatrix& d, double drop_tol = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return int(col_idx_.size()); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  double at(int i, int j) const;
  Vec multiply(const Vec& x) const;
  // y += alpha * A x
  void multiply_add(const Vec& x, Vec& y, double alpha = 1.0) const;
  Vec multiply_transpose(const Vec& x) const;
  CsrMatrix transpose() const;
  CsrMatrix scaled(double s) const;
  CsrMatrix submatrix(const std::vector<int>& rows, const std::vector<int>& cols) const;
  DenseMatrix to_dense() const;
  void append_to(std::vector<Triplet>& out, int row_off, int col_off, double scale = 1.0) const;
  // Replace row i by the unit row e_i (entries outside the diagonal become zero).
  void set_unit_row(int i);

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);
// alpha*A + beta*B
CsrMatrix add(const CsrMatrix& a, const CsrMatrix& b, double alpha = 1.0, double beta = 1.0);

struct LinearSolverConfig {
  enum class Method { Gmres, DenseLU };
  enum class Precond { ILU0, None };
  Method method = Method::Gmres;
  int restart = 50;
  double rel_tol = 1e-5;
  int max_iterations = 2000;
  Precond precond = Precond::ILU0;
  int dense_cap = 600;

  void validate() const;
};

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(const Vec& in, Vec& out) const = 0;
};

class Ilu0 : public Preconditioner {
 public:
  explicit Ilu0(const CsrMatrix& a);
  void apply(const Vec& in, Vec& out) const override;
  // Combined L (unit lower, strict part) and U factors on A's pattern.
  const CsrMatrix& factors() const { return lu_; }

 private:
  CsrMatrix lu_;
  std::vector<int> diag_;
};

// ILU(0) per diagonal block; offsets delimit blocks, first 0 and last n.
class BlockIlu0 : public Preconditioner {
 public:
  BlockIlu0(const CsrMatrix& a, const std::vector<int>& offsets);
  void apply(const Vec& in, Vec& out) const override;

 private:
  std::vector<int> offsets_;
  std::vector<Ilu0> blocks_;
};

struct LinearSolveResult {
  Vec x;
  int iterations = 0;
  double rel_residual = 0.0;
};

LinearSolveResult gmres_solve(const CsrMatrix& a, const Vec& b, const LinearSolverConfig& cfg,
                              const Preconditioner* precond = nullptr);

Vec dense_lu_solve(DenseMatrix a, Vec b);

// Dispatches on cfg.method; block_offsets select block-Jacobi ILU(0) for GMRES.
LinearSolveResult solve_linear(const CsrMatrix& a, const Vec& b, const LinearSolverConfig& cfg,
                               const std::vector<int>& block_offsets = {});

double norm2(const Vec& v);
double norm_inf(const Vec& v);
double dot(const Vec& a, const Vec& b);
void axpy(double alpha, const Vec& x, Vec& y);

}  // namespace fsi
