#include <doctest.h>

#include <cmath>
#include <random>

#include "fsi/error.hpp"
#include "fsi/sparse.hpp"
#include "test_util.hpp"

using namespace fsi;

namespace {

CsrMatrix tridiagonal(int n, double lo, double d, double up) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, d});
    if (i > 0) t.push_back({i, i - 1, lo});
    if (i + 1 < n) t.push_back({i, i + 1, up});
  }
  return CsrMatrix::from_triplets(n, n, t);
}

LinearSolverConfig gmres_cfg(LinearSolverConfig::Precond pc = LinearSolverConfig::Precond::ILU0) {
  LinearSolverConfig c;
  c.precond = pc;
  return c;
}

}  // namespace

TEST_CASE("csr rows are sorted, unique and sum duplicates") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> idx(0, 9);
    std::vector<Triplet> t;
    DenseMatrix ref(10, 10);
    for (int k = 0; k < 60; ++k) {
      int i = idx(rng), j = idx(rng);
      double v = testutil::random_vec(rng, 1)[0];
      t.push_back({i, j, v});
      ref(i, j) += v;
    }
    CsrMatrix a = CsrMatrix::from_triplets(10, 10, t);
    const auto& rp = a.row_ptr();
    for (int i = 0; i < 10; ++i) {
      CHECK(rp[i] <= rp[i + 1]);
      for (int q = rp[i] + 1; q < rp[i + 1]; ++q) CHECK(a.col_idx()[q - 1] < a.col_idx()[q]);
    }
    Vec x = testutil::random_vec(rng, 10);
    CHECK(testutil::max_abs_diff(a.multiply(x), ref.multiply(x)) < 1e-13);
    CHECK(testutil::max_abs_diff(a.multiply_transpose(x), a.transpose().multiply(x)) < 1e-13);
  }
}

TEST_CASE("sparse products match dense arithmetic") {
  std::mt19937 rng(3);
  DenseMatrix da(4, 3), db(3, 5);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) da(i, j) = (i + 2 * j) % 3 == 0 ? 0.0 : i - j + 0.5;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) db(i, j) = (i * j) % 2 ? 1.5 : -0.25 * j;
  CsrMatrix c = multiply(CsrMatrix::from_dense(da), CsrMatrix::from_dense(db));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 5; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += da(i, k) * db(k, j);
      CHECK(c.at(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
  CsrMatrix a = CsrMatrix::from_dense(da);
  CsrMatrix sum = add(a, a, 2.0, -0.5);
  CHECK(sum.at(1, 0) == doctest::Approx(1.5 * da(1, 0)));
}

TEST_CASE("set_unit_row leaves a unit row") {
  CsrMatrix a = tridiagonal(4, -1, 2, -1);
  a.set_unit_row(2);
  CHECK(a.at(2, 1) == 0.0);
  CHECK(a.at(2, 2) == 1.0);
  CHECK(a.at(2, 3) == 0.0);
  CHECK(a.at(1, 2) == -1.0);
}

TEST_CASE("gmres on the identity takes one iteration") {
  Vec b = {1.0, -2.0, 3.0};
  auto r = gmres_solve(CsrMatrix::identity(3), b, gmres_cfg(), nullptr);
  CHECK(r.iterations == 1);
  CHECK(testutil::max_abs_diff(r.x, b) < 1e-14);
}

TEST_CASE("gmres solves a 2x2 SPD system exactly in two iterations") {
  // [[4,1],[1,3]]^{-1} = 1/11 [[3,-1],[-1,4]]
  CsrMatrix a = CsrMatrix::from_triplets(2, 2, {{0, 0, 4}, {0, 1, 1}, {1, 0, 1}, {1, 1, 3}});
  Vec b = {1.0, 2.0};
  LinearSolverConfig cfg = gmres_cfg(LinearSolverConfig::Precond::None);
  cfg.rel_tol = 1e-14;
  auto r = gmres_solve(a, b, cfg, nullptr);
  CHECK(r.iterations <= 2);
  CHECK(r.x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK(r.x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-12));
}

TEST_CASE("gmres meets the relative tolerance on random diagonally dominant systems") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 50;
    std::vector<Triplet> t;
    std::uniform_int_distribution<int> col(0, n - 1);
    for (int i = 0; i < n; ++i) {
      double off = 0.0;
      for (int k = 0; k < 5; ++k) {
        double v = testutil::random_vec(rng, 1)[0];
        t.push_back({i, col(rng), v});
        off += std::abs(v);
      }
      t.push_back({i, i, 2.0 * off + 1.0});
    }
    CsrMatrix a = CsrMatrix::from_triplets(n, n, t);
    Vec b = testutil::random_vec(rng, n);
    for (auto pc : {LinearSolverConfig::Precond::None, LinearSolverConfig::Precond::ILU0}) {
      auto r = solve_linear(a, b, gmres_cfg(pc));
      Vec res = b;
      a.multiply_add(r.x, res, -1.0);
      CHECK(norm2(res) / norm2(b) <= 1e-5);
    }
  }
}

TEST_CASE("ilu0 is exact for diagonal and tridiagonal matrices") {
  CsrMatrix d = CsrMatrix::diagonal({2.0, 4.0, 5.0});
  Ilu0 pd(d);
  Vec out;
  pd.apply({2.0, 4.0, 5.0}, out);
  CHECK(testutil::max_abs_diff(out, {1.0, 1.0, 1.0}) < 1e-15);

  CsrMatrix t = tridiagonal(30, -1.0, 2.5, -1.2);
  Ilu0 pt(t);
  CHECK(pt.factors().nnz() == t.nnz());
  std::mt19937 rng(5);
  Vec b = testutil::random_vec(rng, 30);
  LinearSolverConfig cfg = gmres_cfg();
  cfg.rel_tol = 1e-12;
  auto r = gmres_solve(t, b, cfg, &pt);
  CHECK(r.iterations == 1);
}

TEST_CASE("ilu0 reports a zero pivot") {
  CsrMatrix s = CsrMatrix::diagonal({1.0, 0.0, 2.0});
  CHECK_THROWS_AS(Ilu0{s}, SolverError);
}

TEST_CASE("block ilu0 is exact on block-diagonal tridiagonal blocks") {
  CsrMatrix a = tridiagonal(10, -1, 3, -1);
  BlockIlu0 p(a, {0, 4, 10});
  Vec out;
  Vec b(10, 1.0);
  p.apply(b, out);
  // Exact on each block: block solves of the tridiagonal pieces.
  CsrMatrix b1 = a.submatrix({0, 1, 2, 3}, {0, 1, 2, 3});
  Vec r1 = b1.multiply(Vec(out.begin(), out.begin() + 4));
  CHECK(testutil::max_abs_diff(r1, Vec(4, 1.0)) < 1e-14);
}

TEST_CASE("dense lu: identity, Hilbert, singular") {
  DenseMatrix id(3, 3);
  for (int i = 0; i < 3; ++i) id(i, i) = 1.0;
  CHECK(testutil::max_abs_diff(dense_lu_solve(id, {1, 2, 3}), {1, 2, 3}) == 0.0);

  DenseMatrix h(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = 1.0 / (i + j + 1);
  Vec b = h.multiply(Vec(4, 1.0));
  CHECK(testutil::max_abs_diff(dense_lu_solve(h, b), Vec(4, 1.0)) < 1e-8);

  DenseMatrix s(2, 2);
  s(0, 0) = 1;
  s(0, 1) = 2;
  s(1, 0) = 2;
  s(1, 1) = 4;
  CHECK_THROWS_AS(dense_lu_solve(s, {1, 1}), SolverError);
}

TEST_CASE("solver config validation") {
  LinearSolverConfig c;
  c.restart = 0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.rel_tol = 1.0;
  CHECK_THROWS_AS(c.validate(), InvalidConfig);
  c = {};
  c.method = LinearSolverConfig::Method::DenseLU;
  c.dense_cap = 2;
  CHECK_THROWS_AS(solve_linear(CsrMatrix::identity(3), {1, 1, 1}, c), Error);
}

TEST_CASE("gmres reports the true residual and agrees with dense lu") {
  std::mt19937 rng(21);
  for (int n : {10, 60, 200}) {
    DenseMatrix d(n, n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < 6; ++k) d(i, (i * 7 + k * 13) % n) += u(rng);
      d(i, i) += 8.0;
    }
    CsrMatrix a = CsrMatrix::from_dense(d);
    Vec b = testutil::random_vec(rng, n);
    LinearSolverConfig cfg;
    cfg.rel_tol = 1e-12;
    cfg.restart = 20;
    auto r = gmres_solve(a, b, cfg, nullptr);
    Vec res = b;
    a.multiply_add(r.x, res, -1.0);
    CHECK(std::abs(norm2(res) / norm2(b) - r.rel_residual) <= 1e-10);
    Vec x = dense_lu_solve(d, b);
    CHECK(testutil::rel_diff(x, r.x) <= 1e-8);
  }
}

TEST_CASE("ilu0 factor pattern equals the matrix pattern") {
  std::mt19937 rng(2);
  const int n = 40;
  std::vector<Triplet> t;
  std::uniform_int_distribution<int> col(0, n - 1);
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 10.0});
    for (int k = 0; k < 4; ++k) t.push_back({i, col(rng), 0.5});
  }
  CsrMatrix a = CsrMatrix::from_triplets(n, n, t);
  Ilu0 p(a);
  CHECK(p.factors().row_ptr() == a.row_ptr());
  CHECK(p.factors().col_idx() == a.col_idx());
}
