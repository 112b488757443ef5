#pragma once

#include <vector>

#include "hemorom/field.hpp"
#include "hemorom/linalg.hpp"
#include "hemorom/snapshot_db.hpp"

namespace hemorom {

/// Snapshot columns for one variable, flattened, with the quadrature weights
/// that define the inner product (cell volumes, duplicated per component for
/// vector fields).
class SnapshotMatrix {
 public:
  SnapshotMatrix(std::vector<std::vector<double>> columns,
                 std::vector<double> weights);

  int n_snapshots() const { return static_cast<int>(columns_.size()); }
  int n_dof() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& column(int j) const { return columns_[j]; }
  const std::vector<double>& weights() const { return weights_; }

  double weighted_dot(const std::vector<double>& a,
                      const std::vector<double>& b) const;

 private:
  std::vector<std::vector<double>> columns_;
  std::vector<double> weights_;
};

SnapshotMatrix velocity_snapshots(const SnapshotDatabase& db,
                                  const StructuredMesh& mesh);
SnapshotMatrix pressure_snapshots(const SnapshotDatabase& db,
                                  const StructuredMesh& mesh);

/// Truncated orthonormal basis plus the full eigen-spectrum it came from.
/// Modes have unit weighted norm; eigenvalues belong to the (1/N_t)-scaled
/// snapshot Gram matrix and are sorted descending with tiny negatives clipped.
struct PodBasis {
  std::vector<std::vector<double>> modes;  ///< retained, flattened
  std::vector<double> eigenvalues;         ///< full spectrum, length N_t
  std::vector<double> weights;
  int n_retained = 0;

  std::vector<double> project(const std::vector<double>& field) const;
  std::vector<double> reconstruct(const std::vector<double>& coeffs) const;
};

/// (1/N_t) weighted Gram matrix of the snapshot set.
DenseMatrix correlation_matrix(const SnapshotMatrix& s);

/// Eigen-decompose the correlation matrix and assemble n_modes orthonormal
/// modes. Eigenvector signs are fixed (first significant component positive)
/// so bases are reproducible. Throws when n_modes exceeds the numerical rank.
PodBasis compute_basis(const SnapshotMatrix& s, int n_modes);

/// Smallest N whose cumulative eigenvalue fraction reaches delta.
int select_rank(const std::vector<double>& eigenvalues, double delta);

/// Sum of the neglected eigenvalues beyond the first n.
double truncation_energy(const std::vector<double>& eigenvalues, int n);

/// Largest usable rank: eigenvalues above 1e-14 * lambda_1.
int numerical_rank(const std::vector<double>& eigenvalues);

std::vector<VectorField> basis_vector_modes(const PodBasis& b);
std::vector<ScalarField> basis_scalar_modes(const PodBasis& b);

}  // namespace hemorom
