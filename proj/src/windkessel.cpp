#include "hemorom/windkessel.hpp"

#include <cmath>
#include <numbers>

#include "hemorom/errors.hpp"

namespace hemorom {

void WindkesselParams::validate() const {
  if (rd <= 0.0) throw ConfigError("windkessel: Rd must be > 0");
  if (c <= 0.0) throw ConfigError("windkessel: C must be > 0");
  if (rp < 0.0) throw ConfigError("windkessel: Rp must be >= 0");
}

WindkesselState wk_step(const WindkesselState& state, double flow, double dt,
                        const WindkesselParams& params) {
  if (dt <= 0.0) throw NumericalError("windkessel step: dt must be > 0");
  const double c_dt = params.c / dt;
  const double pp_new =
      (c_dt * state.pp + flow + params.pd / params.rd) / (c_dt + 1.0 / params.rd);
  return {pp_new, pp_new + params.rp * flow, state.t + dt};
}

double inlet_profile(double t, double u0, const WindkesselParams& params) {
  const double s = std::sin(t / (4.0 * params.rd * params.c));
  return u0 * s * s;
}

double analytic_outflow_pressure(double t, double u0, double area,
                                 const WindkesselParams& params,
                                 bool decaying_exponential) {
  const double tau = params.rd * params.c;
  const double s_half = std::sin(t / (4.0 * tau));
  const double arg = t / (2.0 * tau);
  const double expo = decaying_exponential ? std::exp(-arg) : std::exp(arg);
  return params.rd * u0 * area *
         ((params.rp / params.rd + 0.5) * s_half * s_half +
          0.25 * (1.0 - expo - std::sin(arg)));
}

double analytic_outflow_pressure_pipe(double t, double u0, double radius,
                                      const WindkesselParams& params,
                                      bool decaying_exponential) {
  return analytic_outflow_pressure(t, u0, std::numbers::pi * radius * radius,
                                   params, decaying_exponential);
}

double exact_outflow_response(double t, double u0, double area,
                              const WindkesselParams& params, double pp0) {
  const double q0 = u0 * area;
  const double w = 1.0 / (2.0 * params.rd * params.c);
  const double scale = q0 * params.rd;
  const double pp = scale * (0.5 - (2.0 * std::cos(w * t) + std::sin(w * t)) / 5.0) +
                    (pp0 - scale / 10.0) * std::exp(-2.0 * w * t);
  const double s = std::sin(0.5 * w * t);
  return pp + params.rp * q0 * s * s;
}

std::vector<WkConvergencePoint> wk_convergence_sweep(
    const std::vector<double>& dts, double horizon, double u0, double area,
    const WindkesselParams& params, bool decaying_exponential) {
  std::vector<WkConvergencePoint> out;
  out.reserve(dts.size());
  for (double dt : dts) {
    WindkesselState state{};
    const int steps = static_cast<int>(std::llround(horizon / dt));
    double err_exact = 0.0, err_analytic = 0.0;
    for (int n = 0; n < steps; ++n) {
      const double q_old = area * inlet_profile(state.t, u0, params);
      state = wk_step(state, q_old, dt, params);
      err_exact = std::max(
          err_exact,
          std::abs(state.p - exact_outflow_response(state.t, u0, area, params)));
      err_analytic = std::max(
          err_analytic,
          std::abs(state.p - analytic_outflow_pressure(state.t, u0, area, params,
                                                       decaying_exponential)));
    }
    out.push_back({dt, err_exact, err_analytic});
  }
  return out;
}

}  // namespace hemorom
