#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "hemorom/errors.hpp"
#include "hemorom/linalg.hpp"

using namespace hemorom;

TEST_CASE("dense LU solves a known system") {
  DenseMatrix a(3, 3);
  a(0, 0) = 2;  a(0, 1) = 1;  a(0, 2) = 0;
  a(1, 0) = 1;  a(1, 1) = 3;  a(1, 2) = 1;
  a(2, 0) = 0;  a(2, 1) = 1;  a(2, 2) = 2;
  // x = (1, -2, 3) -> b = A x
  const std::vector<double> x_ref = {1.0, -2.0, 3.0};
  const std::vector<double> b = matvec(a, x_ref);
  const std::vector<double> x = solve_dense(a, b);
  for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(x_ref[i]));
}

TEST_CASE("LU reports singular matrices") {
  DenseMatrix a(2, 2);
  a(0, 0) = 1;  a(0, 1) = 2;
  a(1, 0) = 2;  a(1, 1) = 4;
  std::vector<int> piv;
  CHECK_THROWS_AS(lu_factor(a, piv), NumericalError);
}

TEST_CASE("jacobi eigen decomposition on a hand-checked matrix") {
  DenseMatrix a(2, 2);
  a(0, 0) = 2;  a(0, 1) = 1;
  a(1, 0) = 1;  a(1, 1) = 2;
  std::vector<double> values;
  DenseMatrix vectors;
  symmetric_eigen(a, values, vectors);
  CHECK(values[0] == doctest::Approx(3.0));
  CHECK(values[1] == doctest::Approx(1.0));
}

TEST_CASE("jacobi eigen reproduces A = V diag(lambda) V^T") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const int n = 8;
  DenseMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) a(i, j) = a(j, i) = dist(gen);
  std::vector<double> values;
  DenseMatrix v;
  symmetric_eigen(a, values, v);
  // Orthonormal columns.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double dot = 0.0;
      for (int k = 0; k < n; ++k) dot += v(k, i) * v(k, j);
      CHECK(dot == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));
    }
  // Reconstruction.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += v(i, k) * values[k] * v(j, k);
      CHECK(s == doctest::Approx(a(i, j)).epsilon(1e-9));
    }
  // Descending order.
  for (int k = 1; k < n; ++k) CHECK(values[k - 1] >= values[k] - 1e-12);
}

TEST_CASE("singular values of a diagonal-like matrix") {
  DenseMatrix a(3, 2);
  a(0, 0) = 3.0;
  a(1, 1) = -4.0;
  const std::vector<double> sv = singular_values(a);
  CHECK(sv[0] == doctest::Approx(4.0));
  CHECK(sv[1] == doctest::Approx(3.0));
}

TEST_CASE("conjugate gradient solves an SPD system") {
  const int n = 40;
  // Tridiagonal SPD matrix.
  CsrMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m.add(i, i, 2.5);
    if (i > 0) m.add(i, i - 1, -1.0);
    if (i + 1 < n) m.add(i, i + 1, -1.0);
  }
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x_ref(n);
  for (double& v : x_ref) v = dist(gen);
  std::vector<double> b(n);
  m.multiply(x_ref.data(), b.data());
  std::vector<double> x;
  const KrylovResult res = conjugate_gradient(n, m.as_operator(), b, x, 1e-12, 1000);
  CHECK(res.converged);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_ref[i]).epsilon(1e-8));
}

TEST_CASE("bicgstab solves a nonsymmetric system") {
  const int n = 30;
  CsrMatrix m(n);
  for (int i = 0; i < n; ++i) {
    m.add(i, i, 3.0);
    if (i > 0) m.add(i, i - 1, -1.4);
    if (i + 1 < n) m.add(i, i + 1, -0.6);
  }
  std::mt19937 gen(13);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x_ref(n);
  for (double& v : x_ref) v = dist(gen);
  std::vector<double> b(n);
  m.multiply(x_ref.data(), b.data());
  const std::vector<double> diag = m.diagonal();
  std::vector<double> x;
  const KrylovResult res =
      bicgstab(n, m.as_operator(), b, x, 1e-12, 1000, &diag);
  CHECK(res.converged);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x_ref[i]).epsilon(1e-8));
}

TEST_CASE("krylov solvers handle the zero right-hand side") {
  CsrMatrix m(4);
  for (int i = 0; i < 4; ++i) m.add(i, i, 1.0);
  std::vector<double> b(4, 0.0), x;
  CHECK(conjugate_gradient(4, m.as_operator(), b, x, 1e-12, 10).converged);
  for (double v : x) CHECK(v == 0.0);
}
