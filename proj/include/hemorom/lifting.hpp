#pragma once

#include <vector>

#include "hemorom/field.hpp"
#include "hemorom/operators.hpp"
#include "hemorom/snapshot_db.hpp"

namespace hemorom {

/// Velocity and pressure lifting fields with the boundary-trace samples needed
/// to homogenize snapshots and to re-attach boundary values at reconstruction.
struct LiftingSet {
  VectorField chi_u;
  std::vector<ScalarField> chi_p;  ///< one per pressure-Dirichlet outlet

  std::vector<double> times;
  std::vector<double> g_u;                 ///< inlet speed per sample time
  std::vector<std::vector<double>> g_p;    ///< [time][outlet]

  // Imposed boundary traces of the lifting fields (Dirichlet data).
  double chi_u_inlet_trace = 1.0;
  std::vector<double> chi_p_outlet_trace;
  double chi_u_outlet_gradient = 1.0;  ///< the outlet normal-gradient value

  int n_outlets() const { return static_cast<int>(chi_p.size()); }
  int sample_index(double t) const;  ///< exact-time lookup, -1 when absent
};

/// Boundary closures of the lifting solves and of the homogenized spaces.
ScalarBcSet velocity_potential_bc(double outlet_neumann);
VectorBcSet chi_u_bc(double outlet_neumann);
ScalarBcSet chi_p_bc(int outlet, int n_outlets);
VectorBcSet homogeneous_velocity_bc();
ScalarBcSet homogeneous_pressure_bc(int n_outlets);

/// Compact-Laplacian Poisson solve, laplacian(x) = rhs, via CG on the
/// symmetric flux-form system. Shared by the lifting and supremizer solves.
ScalarField solve_poisson(const StructuredMesh& mesh, const ScalarBcSet& bc,
                          const ScalarField& rhs, double rel_tol = 1e-12);

/// Scalar potential with unit inlet value, zero wall value and prescribed
/// outlet normal gradient, promoted to a vector field along the inlet flow
/// direction (+x).
VectorField solve_velocity_lifting(const StructuredMesh& mesh,
                                   double outlet_neumann = 1.0,
                                   double rel_tol = 1e-12);

/// Pressure lifting for one outlet: Poisson problem with the quadratic
/// velocity-lifting source, unit Dirichlet value on the selected outlet and
/// zero normal gradient elsewhere.
ScalarField solve_pressure_lifting(const StructuredMesh& mesh,
                                   const VectorField& chi_u, int outlet,
                                   double outlet_neumann = 1.0,
                                   double rel_tol = 1e-12);

/// Solve both lifting fields and collect the g traces of a database.
LiftingSet build_lifting(const StructuredMesh& mesh, const SnapshotDatabase& db,
                         double outlet_neumann = 1.0, double rel_tol = 1e-12);

/// Subtract the lifted boundary data from every snapshot:
/// u' = u - g_u chi_u, p' = p - sum_j g_p_j chi_p_j. The g entries of the
/// returned records hold the homogenized traces (zero up to rounding).
SnapshotDatabase homogenize(const SnapshotDatabase& db, const LiftingSet& lifting);

/// Lifted linear combinations.
VectorField reconstruct_velocity(const std::vector<double>& a,
                                 const std::vector<VectorField>& modes,
                                 const LiftingSet& lifting, double g_u);
ScalarField reconstruct_pressure(const std::vector<double>& b,
                                 const std::vector<ScalarField>& modes,
                                 const LiftingSet& lifting,
                                 const std::vector<double>& g_p);

}  // namespace hemorom
