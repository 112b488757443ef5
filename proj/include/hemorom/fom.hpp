#pragma once

#include <utility>
#include <vector>

#include "hemorom/field.hpp"
#include "hemorom/mesh.hpp"
#include "hemorom/operators.hpp"
#include "hemorom/snapshot_db.hpp"
#include "hemorom/windkessel.hpp"

namespace hemorom {

struct FluidParams {
  double nu = 1.0;    ///< kinematic viscosity
  double ref_u = 0.0; ///< reference velocity for Reynolds reporting
  double ref_l = 0.0; ///< reference length for Reynolds reporting

  void validate() const;
  double reynolds() const { return nu > 0.0 ? ref_u * ref_l / nu : 0.0; }
};

struct TimeGrid {
  double t0 = 0.0;
  double T = 1.0;
  double dt = 1e-3;
  int stride = 1;  ///< steps between stored snapshots

  void validate() const;
  int steps() const;
};

struct FomState {
  VectorField u;
  ScalarField p;
  std::vector<WindkesselState> wk;  ///< one per outlet
  double t = 0.0;
};

struct FomOptions {
  int n_piso = 2;
  double lin_tol = 1e-10;
  double u0 = 0.0;  ///< inlet ramp amplitude
  std::vector<WindkesselParams> wk;
};

/// Boundary data for one time level.
struct FomBoundary {
  double inlet_speed = 0.0;
  std::vector<double> outlet_pressure;
};

/// Cell-centered finite-volume solver for the unsteady incompressible
/// momentum/continuity system on the channel mesh: implicit momentum with
/// convective face fluxes frozen at the previous step, followed by a pressure
/// projection whose operator is the exact composition of the discrete
/// divergence and gradient, so the corrected cell field is discretely
/// divergence free.
class FomSolver {
 public:
  FomSolver(const StructuredMesh& mesh, FluidParams fluid, FomOptions options);

  const StructuredMesh& mesh() const { return mesh_; }
  const FluidParams& fluid() const { return fluid_; }
  const FomOptions& options() const { return options_; }

  FomState initial_state(double t0) const;

  /// Implicit momentum predictor using the state's own pressure gradient.
  VectorField momentum_predict(const FomState& state, double dt,
                               const FomBoundary& bc) const;

  /// Pressure solve and velocity correction: returns (p_new, u_new) with
  /// u_new = u_star - dt grad(p_new) and zero discrete divergence.
  std::pair<ScalarField, VectorField> pressure_correct(
      const VectorField& u_star, double dt, const FomBoundary& bc) const;

  FomState step(const FomState& state, double dt) const;

  SnapshotDatabase run(const TimeGrid& grid) const;

  double outlet_flux(const VectorField& u, int outlet) const;

  /// Signed sum of boundary fluxes of a corrected field (inlet prescribed,
  /// walls zero, outlets one-sided).
  double global_boundary_flux(const VectorField& u, double inlet_speed) const;

  // Boundary-set builders shared with the reduced-order assembly.
  VectorBcSet velocity_bc(double inlet_speed) const;
  ScalarBcSet pressure_bc(const std::vector<double>& outlet_pressure) const;

  /// Velocity predictor against an explicit pressure field/trace; used by the
  /// corrector sweeps.
  VectorField momentum_solve(const VectorField& u_old, double old_inlet_speed,
                             const ScalarField& p_grad_field,
                             const ScalarBcSet& p_bc, double dt,
                             const FomBoundary& bc,
                             const VectorField* convective_flux_of = nullptr) const;

 private:
  StructuredMesh mesh_;
  FluidParams fluid_;
  FomOptions options_;
};

}  // namespace hemorom
