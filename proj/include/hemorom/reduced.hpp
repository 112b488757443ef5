#pragma once

#include <vector>

#include "hemorom/field.hpp"
#include "hemorom/lifting.hpp"
#include "hemorom/linalg.hpp"
#include "hemorom/pod.hpp"

namespace hemorom {

enum class Stabilization { Supremizer, Ppe };
enum class SupremizerVariant { Exact, Approximate };

/// Basis fields entering the reduced system.
struct RomBases {
  std::vector<VectorField> u_modes;
  std::vector<VectorField> supremizers;  ///< orthonormalized enrichment
  std::vector<ScalarField> p_modes;

  int n_u() const { return static_cast<int>(u_modes.size()); }
  int n_sup() const { return static_cast<int>(supremizers.size()); }
  int n_p() const { return static_cast<int>(p_modes.size()); }
  int n_velocity() const { return n_u() + n_sup(); }
};

/// Galerkin tensors over the extended bases.
///
/// Velocity trial columns: [chi_u | u_modes | supremizers] (1 + Nv entries);
/// velocity test rows: [u_modes | supremizers] (Nv). Pressure trial columns:
/// [chi_p_0..chi_p_{NBC-1} | p_modes]; pressure test rows: the p_modes. The
/// lifting columns carry the boundary data, with coefficients g_u(t) and
/// g_p_j(t) pinned by the traces.
struct ReducedOperators {
  int n_u = 0;
  int n_sup = 0;
  int n_p = 0;
  int n_outlets = 1;

  std::vector<double> mass_chi;  ///< (v_i, chi_u), length Nv
  DenseMatrix diffusion;         ///< (v_i, lap u_hat_j),         Nv x (1+Nv)
  Tensor3 convection;            ///< (v_i, div(u_j ox u_k)),     Nv x (1+Nv) x (1+Nv)
  DenseMatrix pressure_grad;     ///< (v_i, grad p_hat_j),        Nv x (NBC+Np)
  DenseMatrix divergence;        ///< (psi_i, div u_hat_j),       Np x (1+Nv)
  DenseMatrix pressure_laplace;  ///< (grad psi_i, grad p_hat_j), Np x (NBC+Np)
  DenseMatrix outlet_boundary;   ///< (psi_i, grad p_hat_j . n)_outlets
  Tensor3 ppe_convection;        ///< (psi_i, div(div(u_j ox u_k)))

  int n_velocity() const { return n_u + n_sup; }
};

/// Pair every basis element with its boundary closure and evaluate the
/// tensors with the finite-volume operators and the weighted inner product.
ReducedOperators assemble_operators(const StructuredMesh& mesh,
                                    const RomBases& bases,
                                    const LiftingSet& lifting);

/// One vector Poisson solve per source field: lap s = -grad(source), s = 0 on
/// the whole boundary. Sources are pressure modes (exact variant) or pressure
/// snapshots (approximate variant).
std::vector<VectorField> compute_supremizers(
    const std::vector<ScalarField>& sources, const StructuredMesh& mesh,
    const ScalarBcSet& source_bc, double rel_tol = 1e-12);

/// Weighted Gram-Schmidt of the raw supremizers against the velocity modes
/// and each other; near-degenerate candidates are dropped.
std::vector<VectorField> orthonormalize_enrichment(
    const std::vector<VectorField>& u_modes,
    const std::vector<VectorField>& raw, const StructuredMesh& mesh);

/// Reduced coupling matrix rows for the inf-sup proxy: (v_i, grad psi_j) over
/// the given velocity set.
DenseMatrix coupling_matrix(const std::vector<VectorField>& velocity_set,
                            const std::vector<ScalarField>& p_modes,
                            const StructuredMesh& mesh, int n_outlets);

/// Boundary-trace time series driving the reduced system. dg_u holds the
/// finite-difference time derivative of g_u (central, one-sided at the ends).
struct GTraces {
  std::vector<double> times;
  std::vector<double> g_u;
  std::vector<double> dg_u;
  DenseMatrix g_p;  ///< rows = times, cols = outlets

  static GTraces build(std::vector<double> times, std::vector<double> g_u,
                       DenseMatrix g_p);
};

struct IntegrateOptions {
  double nu = 1.0;
  double newton_tol = 1e-12;
  int max_newton = 25;
  double blowup_guard = 1e6;
  int substeps = 1;
};

struct ReducedTrajectory {
  std::vector<double> times;
  DenseMatrix a;  ///< rows = times, cols = velocity coefficients
  DenseMatrix b;  ///< rows = times, cols = pressure coefficients
};

/// Implicit Euler with Newton on the coupled momentum/continuity saddle
/// system; a0/b0 are the coefficients at traces.times[0].
ReducedTrajectory integrate_supremizer(const ReducedOperators& ops,
                                       const std::vector<double>& a0,
                                       const std::vector<double>& b0,
                                       const GTraces& traces,
                                       const IntegrateOptions& opt);

/// Per step: reduced pressure Poisson solve for b, then implicit Euler in a
/// with b held fixed. Supremizer columns are excluded.
ReducedTrajectory integrate_ppe(const ReducedOperators& ops,
                                const std::vector<double>& a0,
                                const GTraces& traces,
                                const IntegrateOptions& opt);

}  // namespace hemorom
