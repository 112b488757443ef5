#include "hemorom/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hemorom/errors.hpp"

namespace hemorom {

std::vector<double> matvec(const DenseMatrix& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.cols)
    throw DimensionError("matvec: size mismatch");
  std::vector<double> y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += m(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

void lu_factor(DenseMatrix& m, std::vector<int>& piv) {
  if (m.rows != m.cols) throw DimensionError("lu_factor: matrix not square");
  const int n = m.rows;
  piv.resize(n);
  std::iota(piv.begin(), piv.end(), 0);
  for (int k = 0; k < n; ++k) {
    int p = k;
    double best = std::abs(m(k, k));
    for (int i = k + 1; i < n; ++i) {
      double v = std::abs(m(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0) throw NumericalError("lu_factor: singular matrix");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      std::swap(piv[k], piv[p]);
    }
    for (int i = k + 1; i < n; ++i) {
      m(i, k) /= m(k, k);
      double lik = m(i, k);
      for (int j = k + 1; j < n; ++j) m(i, j) -= lik * m(k, j);
    }
  }
}

void lu_solve(const DenseMatrix& lu, const std::vector<int>& piv,
              std::vector<double>& b) {
  const int n = lu.rows;
  if (static_cast<int>(b.size()) != n) throw DimensionError("lu_solve: size mismatch");
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = b[piv[i]];
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
    x[i] /= lu(i, i);
  }
  b = x;
}

std::vector<double> solve_dense(DenseMatrix a, std::vector<double> b) {
  std::vector<int> piv;
  lu_factor(a, piv);
  lu_solve(a, piv, b);
  return b;
}

void symmetric_eigen(const DenseMatrix& m, std::vector<double>& values,
                     DenseMatrix& vectors) {
  if (m.rows != m.cols) throw DimensionError("symmetric_eigen: matrix not square");
  const int n = m.rows;
  DenseMatrix a = m;
  vectors = DenseMatrix(n, n);
  for (int i = 0; i < n; ++i) vectors(i, i) = 1.0;

  auto off_diagonal = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return s;
  };

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));
  const double tol = (scale > 0.0 ? scale : 1.0) * 1e-15;

  for (int sweep = 0; sweep < 100 && off_diagonal() > tol * tol * n * n; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= tol * 1e-2) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  values.resize(n);
  for (int i = 0; i < n; ++i) values[i] = a(i, i);

  // Descending order, columns permuted to match.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return values[i] > values[j]; });
  std::vector<double> sorted(n);
  DenseMatrix sorted_vec(n, n);
  for (int k = 0; k < n; ++k) {
    sorted[k] = values[order[k]];
    for (int i = 0; i < n; ++i) sorted_vec(i, k) = vectors(i, order[k]);
  }
  values = std::move(sorted);
  vectors = std::move(sorted_vec);
}

std::vector<double> singular_values(const DenseMatrix& m) {
  const bool wide = m.cols > m.rows;
  const int n = wide ? m.rows : m.cols;
  DenseMatrix gram(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      if (wide) {
        for (int k = 0; k < m.cols; ++k) s += m(i, k) * m(j, k);
      } else {
        for (int k = 0; k < m.rows; ++k) s += m(k, i) * m(k, j);
      }
      gram(i, j) = s;
    }
  std::vector<double> ev;
  DenseMatrix vec;
  symmetric_eigen(gram, ev, vec);
  for (double& v : ev) v = std::sqrt(std::max(0.0, v));
  return ev;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

}  // namespace

KrylovResult conjugate_gradient(int n, const LinearOperator& apply,
                                const std::vector<double>& rhs,
                                std::vector<double>& x, double rel_tol,
                                int max_iter) {
  x.assign(n, 0.0);
  std::vector<double> r = rhs, p = rhs, ap(n);
  const double rhs_norm = norm(rhs);
  if (rhs_norm == 0.0) return {true, 0, 0.0};
  const double target = rel_tol * rhs_norm;
  double rs_old = dot(r, r);
  KrylovResult res;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (std::sqrt(rs_old) <= target) {
      res.converged = true;
      break;
    }
    apply(p.data(), ap.data());
    double pap = dot(p, ap);
    if (pap == 0.0) break;
    double alpha = rs_old / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    double rs_new = dot(r, r);
    double beta = rs_new / rs_old;
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    rs_old = rs_new;
  }
  res.residual = std::sqrt(rs_old) / rhs_norm;
  if (res.residual <= rel_tol) res.converged = true;
  return res;
}

KrylovResult bicgstab(int n, const LinearOperator& apply,
                      const std::vector<double>& rhs, std::vector<double>& x,
                      double rel_tol, int max_iter,
                      const std::vector<double>* diag) {
  x.assign(n, 0.0);
  std::vector<double> r = rhs;
  const double rhs_norm = norm(rhs);
  if (rhs_norm == 0.0) return {true, 0, 0.0};
  const double target = rel_tol * rhs_norm;

  std::vector<double> r0 = r, p(n, 0.0), v(n, 0.0), s(n), t(n), y(n), z(n);
  auto precond = [&](const std::vector<double>& in, std::vector<double>& out) {
    if (diag) {
      for (int i = 0; i < n; ++i) out[i] = in[i] / (*diag)[i];
    } else {
      out = in;
    }
  };

  double rho = 1.0, alpha = 1.0, omega = 1.0;
  KrylovResult res;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (norm(r) <= target) {
      res.converged = true;
      break;
    }
    double rho_new = dot(r0, r);
    if (rho_new == 0.0) break;
    double beta = (rho_new / rho) * (alpha / omega);
    for (int i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    precond(p, y);
    apply(y.data(), v.data());
    double r0v = dot(r0, v);
    if (r0v == 0.0) break;
    alpha = rho_new / r0v;
    for (int i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    if (norm(s) <= target) {
      for (int i = 0; i < n; ++i) x[i] += alpha * y[i];
      res.converged = true;
      res.iterations++;
      break;
    }
    precond(s, z);
    apply(z.data(), t.data());
    double tt = dot(t, t);
    if (tt == 0.0) break;
    omega = dot(t, s) / tt;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * y[i] + omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    rho = rho_new;
    if (omega == 0.0) break;
  }
  res.residual = norm(r) / rhs_norm;
  if (res.residual <= rel_tol) res.converged = true;
  return res;
}

void CsrMatrix::add(int i, int j, double v) {
  for (Entry& e : rows_[i]) {
    if (e.col == j) {
      e.val += v;
      return;
    }
  }
  rows_[i].push_back({j, v});
}

void CsrMatrix::multiply(const double* x, double* y) const {
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (const Entry& e : rows_[i]) s += e.val * x[e.col];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(n_, 1.0);
  for (int i = 0; i < n_; ++i)
    for (const Entry& e : rows_[i])
      if (e.col == i) d[i] = e.val;
  return d;
}

}  // namespace hemorom
