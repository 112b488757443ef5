#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hemorom/errors.hpp"
#include "hemorom/windkessel.hpp"

using namespace hemorom;

namespace {

WindkesselParams channel_params() {
  WindkesselParams p;
  p.rp = 1e4;
  p.rd = 1e5;
  p.c = 0.07957e-5;
  return p;
}

constexpr double kU0 = 0.007957;
constexpr double kRadius = 0.02;

// Independent RK4 reference for the outlet ODE C pp' + pp/Rd = Q(t).
double rk4_outlet_pressure(double T, double u0, double area,
                           const WindkesselParams& wk, int n_steps) {
  const double dt = T / n_steps;
  double pp = 0.0, t = 0.0;
  auto f = [&](double tt, double ppv) {
    return (area * inlet_profile(tt, u0, wk) - ppv / wk.rd) / wk.c;
  };
  for (int i = 0; i < n_steps; ++i) {
    const double k1 = f(t, pp);
    const double k2 = f(t + 0.5 * dt, pp + 0.5 * dt * k1);
    const double k3 = f(t + 0.5 * dt, pp + 0.5 * dt * k2);
    const double k4 = f(t + dt, pp + dt * k3);
    pp += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    t += dt;
  }
  return pp + wk.rp * area * inlet_profile(T, u0, wk);
}

}  // namespace

TEST_CASE("discrete step: rest state stays at rest") {
  WindkesselParams p;
  p.rp = 1.0;
  p.rd = 1.0;
  p.c = 1.0;
  const WindkesselState s = wk_step({0.0, 0.0, 0.0}, 0.0, 0.1, p);
  CHECK(s.pp == 0.0);
  CHECK(s.p == 0.0);
}

TEST_CASE("discrete step: hand-solved update") {
  // C = Rd = Rp = 1, pp = 0, Q = 1, dt = 0.1:
  // pp' (1/0.1 + 1) = 1  =>  pp' = 1/11, p' = 1/11 + 1 = 12/11.
  WindkesselParams p;
  p.rp = 1.0;
  p.rd = 1.0;
  p.c = 1.0;
  const WindkesselState s = wk_step({0.0, 0.0, 0.0}, 1.0, 0.1, p);
  CHECK(s.pp == doctest::Approx(0.090909090909090909).epsilon(1e-14));
  CHECK(s.p == doctest::Approx(1.0909090909090909).epsilon(1e-14));
}

TEST_CASE("constant flow converges to the resistive fixed point") {
  WindkesselParams p;
  p.rp = 2.0;
  p.rd = 5.0;
  p.c = 0.4;
  WindkesselState s{};
  const double q = 3.0;
  for (int i = 0; i < 20000; ++i) s = wk_step(s, q, 0.01, p);
  CHECK(s.pp == doctest::Approx(p.rd * q).epsilon(1e-10));
  CHECK(s.p == doctest::Approx((p.rd + p.rp) * q).epsilon(1e-10));
}

TEST_CASE("step rejects non-positive dt") {
  WindkesselParams p;
  CHECK_THROWS_AS(wk_step({}, 1.0, 0.0, p), NumericalError);
  CHECK_THROWS_AS(wk_step({}, 1.0, -0.1, p), NumericalError);
}

TEST_CASE("implicit update is a convex combination: unconditional stability") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  std::uniform_real_distribution<double> pos(0.01, 10.0);
  for (int trial = 0; trial < 200; ++trial) {
    WindkesselParams p;
    p.rp = pos(gen);
    p.rd = pos(gen);
    p.c = pos(gen);
    const double pp = dist(gen), q = dist(gen), dt = pos(gen);
    const WindkesselState s = wk_step({pp, 0.0, 0.0}, q, dt, p);
    CHECK(std::abs(s.pp) <=
          std::max(std::abs(pp), p.rd * std::abs(q)) * (1.0 + 1e-12));
  }
}

TEST_CASE("inlet ramp values") {
  const WindkesselParams p = channel_params();
  CHECK(inlet_profile(0.0, kU0, p) == 0.0);
  // sin^2 reaches one when the argument hits pi/2, i.e. t = 2 pi Rd C.
  const double t_peak = 2.0 * std::numbers::pi * p.rd * p.c;
  CHECK(inlet_profile(t_peak, kU0, p) == doctest::Approx(kU0).epsilon(1e-12));
  // Frozen high-precision evaluation of u0 sin^2(0.1 / 0.31828).
  CHECK(inlet_profile(0.1, kU0, p) ==
        doctest::Approx(0.00075996386169093576).epsilon(1e-14));
}

TEST_CASE("closed-form outflow estimate: endpoints and frozen values") {
  const WindkesselParams p = channel_params();
  CHECK(analytic_outflow_pressure_pipe(0.0, kU0, kRadius, p) == doctest::Approx(0.0));
  CHECK(analytic_outflow_pressure_pipe(0.0, kU0, kRadius, p, true) ==
        doctest::Approx(0.0));
  // Frozen arbitrary-precision evaluations at t = 0.5 s.
  CHECK(analytic_outflow_pressure_pipe(0.5, kU0, kRadius, p) ==
        doctest::Approx(-4.9363427397972256).epsilon(1e-14));
  CHECK(analytic_outflow_pressure_pipe(0.5, kU0, kRadius, p, true) ==
        doctest::Approx(0.83919464241813052).epsilon(1e-14));
}

TEST_CASE("closed-form estimate: two-element limit at Rp = 0") {
  WindkesselParams p = channel_params();
  p.rp = 0.0;
  const double area = std::numbers::pi * kRadius * kRadius;
  for (double t : {0.1, 0.3, 0.8}) {
    const double arg_half = t / (4.0 * p.rd * p.c);
    const double arg = t / (2.0 * p.rd * p.c);
    const double expected =
        p.rd * kU0 * area *
        (0.5 * std::sin(arg_half) * std::sin(arg_half) +
         0.25 * (1.0 - std::exp(arg) - std::sin(arg)));
    CHECK(analytic_outflow_pressure(t, kU0, area, p) ==
          doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("exact outlet response matches an independent RK4 oracle") {
  const WindkesselParams p = channel_params();
  const double area = std::numbers::pi * kRadius * kRadius;
  for (double T : {0.25, 0.5, 1.0}) {
    const double ref = rk4_outlet_pressure(T, kU0, area, p, 40000);
    CHECK(exact_outflow_response(T, kU0, area, p) ==
          doctest::Approx(ref).epsilon(1e-10));
  }
  // Frozen arbitrary-precision value at t = 0.5 s.
  CHECK(exact_outflow_response(0.5, kU0, area, p) ==
        doctest::Approx(0.99977846656190226).epsilon(1e-13));
}

TEST_CASE("discrete trace converges to the exact response at first order") {
  const WindkesselParams p = channel_params();
  const double area = std::numbers::pi * kRadius * kRadius;
  const std::vector<double> dts = {1e-3, 5e-4, 2.5e-4, 1.25e-4};
  const auto sweep = wk_convergence_sweep(dts, 1.0, kU0, area, p, false);
  for (size_t i = 1; i < sweep.size(); ++i) {
    const double ratio = sweep[i - 1].error_vs_exact / sweep[i].error_vs_exact;
    CHECK(ratio > 1.7);
    CHECK(ratio < 2.3);
  }
}

TEST_CASE("closed-form estimate as printed is not the ODE limit") {
  // The printed formula differs from the exact response by an O(1) gap, so
  // the discrete error against it saturates instead of halving.
  const WindkesselParams p = channel_params();
  const double area = std::numbers::pi * kRadius * kRadius;
  const auto sweep =
      wk_convergence_sweep({1e-3, 5e-4}, 1.0, kU0, area, p, false);
  const double ratio = sweep[0].error_vs_analytic / sweep[1].error_vs_analytic;
  CHECK(ratio < 1.7);  // saturated, far from first-order halving
  CHECK(sweep[1].error_vs_analytic > 1.0);
}
