#include "hemorom/pod.hpp"

#include <cmath>
#include <string>

#include "hemorom/errors.hpp"
#include "hemorom/operators.hpp"

namespace hemorom {

SnapshotMatrix::SnapshotMatrix(std::vector<std::vector<double>> columns,
                               std::vector<double> weights)
    : columns_(std::move(columns)), weights_(std::move(weights)) {
  if (columns_.empty()) throw DimensionError("snapshot matrix: no columns");
  for (const auto& c : columns_)
    if (c.size() != weights_.size())
      throw DimensionError("snapshot matrix: column/weight size mismatch");
}

double SnapshotMatrix::weighted_dot(const std::vector<double>& a,
                                    const std::vector<double>& b) const {
  double s = 0.0;
  for (size_t i = 0; i < weights_.size(); ++i) s += weights_[i] * a[i] * b[i];
  return s;
}

SnapshotMatrix velocity_snapshots(const SnapshotDatabase& db,
                                  const StructuredMesh& mesh) {
  std::vector<std::vector<double>> cols;
  cols.reserve(db.size());
  for (const auto& r : db.records()) cols.push_back(flatten(r.u));
  return SnapshotMatrix(std::move(cols), vector_weights(mesh));
}

SnapshotMatrix pressure_snapshots(const SnapshotDatabase& db,
                                  const StructuredMesh& mesh) {
  std::vector<std::vector<double>> cols;
  cols.reserve(db.size());
  for (const auto& r : db.records()) cols.push_back(flatten(r.p));
  return SnapshotMatrix(std::move(cols), scalar_weights(mesh));
}

DenseMatrix correlation_matrix(const SnapshotMatrix& s) {
  const int nt = s.n_snapshots();
  DenseMatrix c(nt, nt);
  for (int i = 0; i < nt; ++i)
    for (int j = i; j < nt; ++j) {
      const double v = s.weighted_dot(s.column(i), s.column(j)) / nt;
      c(i, j) = v;
      c(j, i) = v;
    }
  return c;
}

int numerical_rank(const std::vector<double>& eigenvalues) {
  if (eigenvalues.empty()) return 0;
  const double lead = eigenvalues.front();
  if (lead <= 0.0) return 0;
  int rank = 0;
  for (double l : eigenvalues)
    if (l > 1e-14 * lead) ++rank;
  return rank;
}

PodBasis compute_basis(const SnapshotMatrix& s, int n_modes) {
  const int nt = s.n_snapshots();
  if (n_modes < 1) throw DimensionError("compute_basis: need at least one mode");

  DenseMatrix corr = correlation_matrix(s);
  std::vector<double> ev;
  DenseMatrix vec;
  symmetric_eigen(corr, ev, vec);

  // Clip round-off negatives.
  const double lead = ev.empty() ? 0.0 : std::max(ev.front(), 0.0);
  for (double& l : ev)
    if (l < 0.0 && l > -1e-12 * std::max(lead, 1.0)) l = 0.0;

  const int usable = numerical_rank(ev);
  if (n_modes > usable)
    throw NumericalError("compute_basis: requested " + std::to_string(n_modes) +
                         " modes but numerical rank is " + std::to_string(usable));

  // Deterministic sign: first significant eigenvector component positive.
  for (int k = 0; k < nt; ++k) {
    double top = 0.0;
    for (int i = 0; i < nt; ++i) top = std::max(top, std::abs(vec(i, k)));
    for (int i = 0; i < nt; ++i) {
      if (std::abs(vec(i, k)) > 1e-12 * top) {
        if (vec(i, k) < 0.0)
          for (int r = 0; r < nt; ++r) vec(r, k) = -vec(r, k);
        break;
      }
    }
  }

  PodBasis basis;
  basis.eigenvalues = ev;
  basis.weights = s.weights();
  basis.n_retained = n_modes;
  basis.modes.assign(n_modes, std::vector<double>(s.n_dof(), 0.0));
  for (int k = 0; k < n_modes; ++k) {
    auto& mode = basis.modes[k];
    for (int j = 0; j < nt; ++j) {
      const double w = vec(j, k);
      const auto& col = s.column(j);
      for (int d = 0; d < s.n_dof(); ++d) mode[d] += w * col[d];
    }
    // Unit weighted norm: ||S c_k||_w = sqrt(N_t lambda_k).
    const double scale = 1.0 / std::sqrt(static_cast<double>(nt) * ev[k]);
    for (double& x : mode) x *= scale;
  }
  return basis;
}

int select_rank(const std::vector<double>& eigenvalues, double delta) {
  if (delta <= 0.0 || delta > 1.0)
    throw ConfigError("select_rank: delta must lie in (0, 1]");
  double total = 0.0;
  for (double l : eigenvalues) total += l;
  if (total <= 0.0) throw NumericalError("select_rank: all-zero spectrum");
  double cum = 0.0;
  for (size_t n = 0; n < eigenvalues.size(); ++n) {
    cum += eigenvalues[n];
    if (cum / total >= delta) return static_cast<int>(n) + 1;
  }
  return static_cast<int>(eigenvalues.size());
}

double truncation_energy(const std::vector<double>& eigenvalues, int n) {
  double s = 0.0;
  for (size_t i = n; i < eigenvalues.size(); ++i) s += eigenvalues[i];
  return s;
}

std::vector<double> PodBasis::project(const std::vector<double>& field) const {
  if (field.size() != weights.size())
    throw DimensionError("pod project: field size mismatch");
  std::vector<double> coeffs(modes.size(), 0.0);
  for (size_t k = 0; k < modes.size(); ++k) {
    double s = 0.0;
    for (size_t d = 0; d < weights.size(); ++d)
      s += weights[d] * modes[k][d] * field[d];
    coeffs[k] = s;
  }
  return coeffs;
}

std::vector<double> PodBasis::reconstruct(const std::vector<double>& coeffs) const {
  if (coeffs.size() != modes.size())
    throw DimensionError("pod reconstruct: coefficient size mismatch");
  std::vector<double> field(weights.size(), 0.0);
  for (size_t k = 0; k < modes.size(); ++k)
    for (size_t d = 0; d < weights.size(); ++d)
      field[d] += coeffs[k] * modes[k][d];
  return field;
}

std::vector<VectorField> basis_vector_modes(const PodBasis& b) {
  std::vector<VectorField> out;
  out.reserve(b.modes.size());
  for (const auto& m : b.modes) out.push_back(unflatten_vector(m));
  return out;
}

std::vector<ScalarField> basis_scalar_modes(const PodBasis& b) {
  std::vector<ScalarField> out;
  out.reserve(b.modes.size());
  for (const auto& m : b.modes) out.push_back(unflatten_scalar(m));
  return out;
}

}  // namespace hemorom
