#pragma once

#include <functional>
#include <vector>

namespace hemorom {

/// Row-major dense matrix.
struct DenseMatrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

/// Rank-3 tensor, row-major in (i, j, k).
struct Tensor3 {
  int d1 = 0, d2 = 0, d3 = 0;
  std::vector<double> a;

  Tensor3() = default;
  Tensor3(int n1, int n2, int n3)
      : d1(n1), d2(n2), d3(n3), a(static_cast<size_t>(n1) * n2 * n3, 0.0) {}

  double& operator()(int i, int j, int k) {
    return a[(static_cast<size_t>(i) * d2 + j) * d3 + k];
  }
  double operator()(int i, int j, int k) const {
    return a[(static_cast<size_t>(i) * d2 + j) * d3 + k];
  }
};

std::vector<double> matvec(const DenseMatrix& m, const std::vector<double>& x);

/// In-place LU factorization with partial pivoting. Throws NumericalError on
/// a singular pivot.
void lu_factor(DenseMatrix& m, std::vector<int>& piv);
void lu_solve(const DenseMatrix& lu, const std::vector<int>& piv,
              std::vector<double>& b);

/// Convenience direct solve of a square system (copies A).
std::vector<double> solve_dense(DenseMatrix a, std::vector<double> b);

/// Cyclic Jacobi eigensolver for a symmetric matrix. Eigenvalues are returned
/// in descending order, eigenvectors as matching columns of `vectors`.
void symmetric_eigen(const DenseMatrix& m, std::vector<double>& values,
                     DenseMatrix& vectors);

/// Singular values of a general matrix (descending), via the eigenvalues of
/// A^T A or A A^T, whichever is smaller.
std::vector<double> singular_values(const DenseMatrix& m);

struct KrylovResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
};

using LinearOperator = std::function<void(const double* x, double* y)>;

/// Unpreconditioned conjugate gradient for a symmetric positive
/// (semi)definite operator; relative tolerance on the residual norm.
KrylovResult conjugate_gradient(int n, const LinearOperator& apply,
                                const std::vector<double>& rhs,
                                std::vector<double>& x, double rel_tol,
                                int max_iter);

/// BiCGStab with optional Jacobi preconditioning (pass the matrix diagonal).
KrylovResult bicgstab(int n, const LinearOperator& apply,
                      const std::vector<double>& rhs, std::vector<double>& x,
                      double rel_tol, int max_iter,
                      const std::vector<double>* diag = nullptr);

/// Compressed sparse row matrix with a fixed pattern, assembled row by row.
class CsrMatrix {
 public:
  explicit CsrMatrix(int n) : n_(n), rows_(n) {}

  int size() const { return n_; }
  void add(int i, int j, double v);
  void multiply(const double* x, double* y) const;
  std::vector<double> diagonal() const;
  LinearOperator as_operator() const {
    return [this](const double* x, double* y) { multiply(x, y); };
  }

 private:
  struct Entry {
    int col;
    double val;
  };
  int n_;
  std::vector<std::vector<Entry>> rows_;
};

}  // namespace hemorom
