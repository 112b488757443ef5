#pragma once

#include <vector>

namespace hemorom {

/// Three-element lumped outlet model: compliance C, proximal resistance Rp,
/// distal resistance Rd, distal reference pressure pd. The two-element model
/// is the rp = 0 special case.
struct WindkesselParams {
  double rp = 0.0;
  double rd = 1.0;
  double c = 1.0;
  double pd = 0.0;

  void validate() const;
};

struct WindkesselState {
  double pp = 0.0;  ///< proximal pressure
  double p = 0.0;   ///< downstream (outlet) pressure
  double t = 0.0;
};

/// One backward-Euler update with the flow rate held explicit:
///   C (pp' - pp)/dt + (pp' - pd)/Rd = Q,   p' = pp' + Rp Q.
WindkesselState wk_step(const WindkesselState& state, double flow, double dt,
                        const WindkesselParams& params);

/// Squared-sine inflow ramp: u(t) = u0 sin^2(t / (4 Rd C)).
double inlet_profile(double t, double u0, const WindkesselParams& params);

/// Closed-form outflow-pressure estimate for the squared-sine inflow through
/// an outlet of area `area` (flow rate Q = area * u(t)):
///   Rd u0 area [ (Rp/Rd + 1/2) sin^2(t/(4RdC))
///                + 1/4 (1 - e^{t/(2RdC)} - sin(t/(2RdC))) ].
/// The exponential grows with t as written; `decaying_exponential` flips its
/// sign. Intended for the window (0, 1] s.
double analytic_outflow_pressure(double t, double u0, double area,
                                 const WindkesselParams& params,
                                 bool decaying_exponential = false);

/// Same closed form for a circular outlet of radius R (area = pi R^2).
double analytic_outflow_pressure_pipe(double t, double u0, double radius,
                                      const WindkesselParams& params,
                                      bool decaying_exponential = false);

/// Exact solution of the outlet ODE under the squared-sine inflow, with
/// pp(0) = pp0 and pd = 0. Derivation: with w = 1/(2 Rd C) and
/// Q(t) = Q0 (1 - cos(w t))/2, the ODE C pp' + pp/Rd = Q has the solution
///   pp(t) = Q0 Rd [ 1/2 - (2 cos(w t) + sin(w t))/5 ]
///           + (pp0 - Q0 Rd / 10) e^{-2 w t},
///   p(t)  = pp(t) + Rp Q(t).
/// Used as the convergence reference for the discrete update.
double exact_outflow_response(double t, double u0, double area,
                              const WindkesselParams& params, double pp0 = 0.0);

/// Max-norm distance over [dt, T] between the discrete trace (wk_step driven
/// by Q(t) = area * u(t), explicit in Q) and a reference trace.
struct WkConvergencePoint {
  double dt = 0.0;
  double error_vs_exact = 0.0;     ///< vs exact_outflow_response
  double error_vs_analytic = 0.0;  ///< vs analytic_outflow_pressure
};

std::vector<WkConvergencePoint> wk_convergence_sweep(
    const std::vector<double>& dts, double horizon, double u0, double area,
    const WindkesselParams& params, bool decaying_exponential);

}  // namespace hemorom
