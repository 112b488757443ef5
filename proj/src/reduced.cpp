#include "hemorom/reduced.hpp"

#include <cmath>
#include <string>

#include "hemorom/errors.hpp"

namespace hemorom {

namespace {

VectorBcSet supremizer_bc() { return VectorBcSet::all_dirichlet({0.0, 0.0}); }

/// Velocity trial element with its boundary closure.
struct VelocityElement {
  const VectorField* field;
  VectorBcSet bc;
};

/// Pressure trial element with its boundary closure.
struct PressureElement {
  const ScalarField* field;
  ScalarBcSet bc;
};

std::vector<VelocityElement> velocity_elements(const RomBases& bases,
                                               const LiftingSet& lifting) {
  std::vector<VelocityElement> els;
  els.push_back({&lifting.chi_u, chi_u_bc(lifting.chi_u_outlet_gradient)});
  for (const auto& m : bases.u_modes) els.push_back({&m, homogeneous_velocity_bc()});
  for (const auto& s : bases.supremizers) els.push_back({&s, supremizer_bc()});
  return els;
}

// Every element keeps the closure describing its boundary behavior: the
// lifting fields the ones they were solved with, the pressure modes the
// homogenized trace (Dirichlet zero on the outlets). The outlet closure
// carries the one-cell boundary layer of the pressure force; dropping it
// starves the reduced momentum equation of the gradient that drives the flow.
std::vector<PressureElement> pressure_elements(const RomBases& bases,
                                               const LiftingSet& lifting,
                                               int n_outlets) {
  std::vector<PressureElement> els;
  for (int j = 0; j < lifting.n_outlets(); ++j)
    els.push_back({&lifting.chi_p[j], chi_p_bc(j, n_outlets)});
  for (const auto& m : bases.p_modes)
    els.push_back({&m, homogeneous_pressure_bc(n_outlets)});
  return els;
}

}  // namespace

ReducedOperators assemble_operators(const StructuredMesh& mesh,
                                    const RomBases& bases,
                                    const LiftingSet& lifting) {
  ReducedOperators ops;
  ops.n_u = bases.n_u();
  ops.n_sup = bases.n_sup();
  ops.n_p = bases.n_p();
  ops.n_outlets = lifting.n_outlets();

  const auto u_els = velocity_elements(bases, lifting);
  const auto p_els = pressure_elements(bases, lifting, mesh.n_outlets());
  const int nv = ops.n_velocity();
  const int nu_ext = static_cast<int>(u_els.size());   // 1 + Nv
  const int np_ext = static_cast<int>(p_els.size());   // NBC + Np

  // Test rows: the velocity modes (+ supremizers) and the pressure modes.
  auto u_test = [&](int i) -> const VectorField& { return *u_els[i + 1].field; };
  auto p_test = [&](int i) -> const ScalarField& {
    return *p_els[i + ops.n_outlets].field;
  };

  ops.mass_chi.assign(nv, 0.0);
  for (int i = 0; i < nv; ++i)
    ops.mass_chi[i] = inner_product(u_test(i), lifting.chi_u, mesh);

  ops.diffusion = DenseMatrix(nv, nu_ext);
  for (int j = 0; j < nu_ext; ++j) {
    const VectorField lap = laplacian(*u_els[j].field, mesh, &u_els[j].bc);
    for (int i = 0; i < nv; ++i) ops.diffusion(i, j) = inner_product(u_test(i), lap, mesh);
  }

  ops.convection = Tensor3(nv, nu_ext, nu_ext);
  ops.ppe_convection = Tensor3(ops.n_p, nu_ext, nu_ext);
  for (int j = 0; j < nu_ext; ++j)
    for (int k = 0; k < nu_ext; ++k) {
      const VectorField conv = tensor_divergence(
          *u_els[j].field, *u_els[k].field, mesh, &u_els[j].bc, &u_els[k].bc);
      for (int i = 0; i < nv; ++i)
        ops.convection(i, j, k) = inner_product(u_test(i), conv, mesh);
      const ScalarField dconv = divergence(conv, mesh);
      for (int i = 0; i < ops.n_p; ++i)
        ops.ppe_convection(i, j, k) = inner_product(p_test(i), dconv, mesh);
    }

  ops.pressure_grad = DenseMatrix(nv, np_ext);
  std::vector<VectorField> p_grads;
  p_grads.reserve(np_ext);
  for (int j = 0; j < np_ext; ++j)
    p_grads.push_back(gradient(*p_els[j].field, mesh, &p_els[j].bc));
  for (int j = 0; j < np_ext; ++j)
    for (int i = 0; i < nv; ++i)
      ops.pressure_grad(i, j) = inner_product(u_test(i), p_grads[j], mesh);

  ops.divergence = DenseMatrix(ops.n_p, nu_ext);
  for (int j = 0; j < nu_ext; ++j) {
    const ScalarField div = divergence(*u_els[j].field, mesh, &u_els[j].bc);
    for (int i = 0; i < ops.n_p; ++i)
      ops.divergence(i, j) = inner_product(p_test(i), div, mesh);
  }

  ops.pressure_laplace = DenseMatrix(ops.n_p, np_ext);
  ops.outlet_boundary = DenseMatrix(ops.n_p, np_ext);
  for (int i = 0; i < ops.n_p; ++i) {
    const int row_el = i + ops.n_outlets;
    const VectorField& grad_i = p_grads[row_el];
    for (int j = 0; j < np_ext; ++j) {
      ops.pressure_laplace(i, j) = inner_product(grad_i, p_grads[j], mesh);
      ops.outlet_boundary(i, j) = outlet_boundary_integral(
          *p_els[row_el].field, p_els[row_el].bc, *p_els[j].field, p_els[j].bc,
          mesh);
    }
  }
  return ops;
}

std::vector<VectorField> compute_supremizers(
    const std::vector<ScalarField>& sources, const StructuredMesh& mesh,
    const ScalarBcSet& source_bc, double rel_tol) {
  if (sources.empty())
    throw DimensionError("compute_supremizers: no source fields");
  std::vector<VectorField> out;
  out.reserve(sources.size());
  const ScalarBcSet dirichlet0 = ScalarBcSet::all_dirichlet(0.0);
  for (const ScalarField& psi : sources) {
    const VectorField g = gradient(psi, mesh, &source_bc);
    ScalarField rhs_x(mesh.cell_count()), rhs_y(mesh.cell_count());
    for (int c = 0; c < mesh.cell_count(); ++c) {
      rhs_x[c] = -g[c].x;
      rhs_y[c] = -g[c].y;
    }
    const ScalarField sx = solve_poisson(mesh, dirichlet0, rhs_x, rel_tol);
    const ScalarField sy = solve_poisson(mesh, dirichlet0, rhs_y, rel_tol);
    VectorField s(mesh.cell_count());
    for (int c = 0; c < mesh.cell_count(); ++c) s[c] = {sx[c], sy[c]};
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<VectorField> orthonormalize_enrichment(
    const std::vector<VectorField>& u_modes,
    const std::vector<VectorField>& raw, const StructuredMesh& mesh) {
  std::vector<VectorField> accepted;
  for (const VectorField& candidate : raw) {
    VectorField s = candidate;
    const double original = weighted_norm(s, mesh);
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (const VectorField& v : u_modes)
        s = axpy(-inner_product(v, s, mesh), v, s);
      for (const VectorField& v : accepted)
        s = axpy(-inner_product(v, s, mesh), v, s);
    }
    const double nrm = weighted_norm(s, mesh);
    if (nrm < 1e-10 * original) continue;  // degenerate direction
    for (int c = 0; c < s.size(); ++c) s[c] = s[c] / nrm;
    accepted.push_back(std::move(s));
  }
  return accepted;
}

DenseMatrix coupling_matrix(const std::vector<VectorField>& velocity_set,
                            const std::vector<ScalarField>& p_modes,
                            const StructuredMesh& mesh, int n_outlets) {
  const ScalarBcSet p_bc = homogeneous_pressure_bc(n_outlets);
  DenseMatrix k(static_cast<int>(velocity_set.size()),
                static_cast<int>(p_modes.size()));
  for (int j = 0; j < k.cols; ++j) {
    const VectorField g = gradient(p_modes[j], mesh, &p_bc);
    for (int i = 0; i < k.rows; ++i) k(i, j) = inner_product(velocity_set[i], g, mesh);
  }
  return k;
}

GTraces GTraces::build(std::vector<double> times, std::vector<double> g_u,
                       DenseMatrix g_p) {
  if (times.size() < 1 || g_u.size() != times.size() ||
      g_p.rows != static_cast<int>(times.size()))
    throw DimensionError("g traces: inconsistent sample counts");
  GTraces t;
  t.times = std::move(times);
  t.g_u = std::move(g_u);
  t.g_p = std::move(g_p);
  const int n = static_cast<int>(t.times.size());
  t.dg_u.assign(n, 0.0);
  if (n >= 2) {
    t.dg_u[0] = (t.g_u[1] - t.g_u[0]) / (t.times[1] - t.times[0]);
    t.dg_u[n - 1] =
        (t.g_u[n - 1] - t.g_u[n - 2]) / (t.times[n - 1] - t.times[n - 2]);
    for (int k = 1; k + 1 < n; ++k)
      t.dg_u[k] = (t.g_u[k + 1] - t.g_u[k - 1]) / (t.times[k + 1] - t.times[k - 1]);
  }
  return t;
}

namespace {

// Linear interpolation of the traces inside a step (used with substepping).
struct TraceSample {
  double g_u, dg_u;
  std::vector<double> g_p;
};

TraceSample sample_traces(const GTraces& tr, int k0, int k1, double theta) {
  TraceSample s;
  s.g_u = (1.0 - theta) * tr.g_u[k0] + theta * tr.g_u[k1];
  s.dg_u = (1.0 - theta) * tr.dg_u[k0] + theta * tr.dg_u[k1];
  s.g_p.resize(tr.g_p.cols);
  for (int j = 0; j < tr.g_p.cols; ++j)
    s.g_p[j] = (1.0 - theta) * tr.g_p(k0, j) + theta * tr.g_p(k1, j);
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void check_blowup(const std::vector<double>& a, double guard, double scale0,
                  double t) {
  if (max_abs(a) > guard * scale0)
    throw NumericalError("reduced integration blow-up at t = " + std::to_string(t));
}

}  // namespace

ReducedTrajectory integrate_supremizer(const ReducedOperators& ops,
                                       const std::vector<double>& a0,
                                       const std::vector<double>& b0,
                                       const GTraces& traces,
                                       const IntegrateOptions& opt) {
  const int nv = ops.n_velocity();
  const int np = ops.n_p;
  const int nbc = ops.n_outlets;
  if (static_cast<int>(a0.size()) != nv || static_cast<int>(b0.size()) != np)
    throw DimensionError("integrate_supremizer: initial coefficient sizes");
  const int nt = static_cast<int>(traces.times.size());

  ReducedTrajectory out;
  out.times = traces.times;
  out.a = DenseMatrix(nt, nv);
  out.b = DenseMatrix(nt, np);
  std::vector<double> a = a0, b = b0;
  for (int i = 0; i < nv; ++i) out.a(0, i) = a[i];
  for (int i = 0; i < np; ++i) out.b(0, i) = b[i];
  const double scale0 = std::max(1.0, max_abs(a0));

  // Momentum residual at given extended coefficients; rows then continuity.
  auto residual = [&](const std::vector<double>& an,
                      const std::vector<double>& av,
                      const std::vector<double>& bv, double dt,
                      const TraceSample& ts, std::vector<double>& f) {
    std::vector<double> a_ext(1 + nv), b_ext(nbc + np);
    a_ext[0] = ts.g_u;
    for (int i = 0; i < nv; ++i) a_ext[1 + i] = av[i];
    for (int j = 0; j < nbc; ++j) b_ext[j] = ts.g_p[j];
    for (int i = 0; i < np; ++i) b_ext[nbc + i] = bv[i];

    f.assign(nv + np, 0.0);
    for (int i = 0; i < nv; ++i) {
      double r = (av[i] - an[i]) / dt + ops.mass_chi[i] * ts.dg_u;
      for (int j = 0; j < 1 + nv; ++j) r -= opt.nu * ops.diffusion(i, j) * a_ext[j];
      for (int j = 0; j < 1 + nv; ++j)
        for (int k = 0; k < 1 + nv; ++k)
          r += ops.convection(i, j, k) * a_ext[j] * a_ext[k];
      for (int j = 0; j < nbc + np; ++j) r += ops.pressure_grad(i, j) * b_ext[j];
      f[i] = r;
    }
    for (int i = 0; i < np; ++i) {
      double r = 0.0;
      for (int j = 0; j < 1 + nv; ++j) r += ops.divergence(i, j) * a_ext[j];
      f[nv + i] = r;
    }
  };

  auto jacobian = [&](const std::vector<double>& av, double dt,
                      const TraceSample& ts, DenseMatrix& jac) {
    std::vector<double> a_ext(1 + nv);
    a_ext[0] = ts.g_u;
    for (int i = 0; i < nv; ++i) a_ext[1 + i] = av[i];
    jac = DenseMatrix(nv + np, nv + np);
    for (int i = 0; i < nv; ++i) {
      for (int l = 0; l < nv; ++l) {
        double v = (i == l ? 1.0 / dt : 0.0) - opt.nu * ops.diffusion(i, l + 1);
        for (int k = 0; k < 1 + nv; ++k) v += ops.convection(i, l + 1, k) * a_ext[k];
        for (int j = 0; j < 1 + nv; ++j) v += ops.convection(i, j, l + 1) * a_ext[j];
        jac(i, l) = v;
      }
      for (int l = 0; l < np; ++l) jac(i, nv + l) = ops.pressure_grad(i, nbc + l);
    }
    for (int i = 0; i < np; ++i)
      for (int l = 0; l < nv; ++l) jac(nv + i, l) = ops.divergence(i, l + 1);
  };

  std::vector<double> f, x(nv + np);
  for (int k = 0; k + 1 < nt; ++k) {
    const double t0 = traces.times[k], t1 = traces.times[k + 1];
    const int sub = std::max(1, opt.substeps);
    const double dt = (t1 - t0) / sub;
    if (dt <= 0.0) throw NumericalError("integrate: times must increase");
    for (int s = 1; s <= sub; ++s) {
      const TraceSample ts =
          sample_traces(traces, k, k + 1, static_cast<double>(s) / sub);
      const std::vector<double> a_prev = a;
      residual(a_prev, a, b, dt, ts, f);
      const double f_scale = std::max(1.0, max_abs(f));
      bool converged = false;
      for (int it = 0; it < opt.max_newton; ++it) {
        if (max_abs(f) <= opt.newton_tol * f_scale) {
          converged = true;
          break;
        }
        DenseMatrix jac;
        jacobian(a, dt, ts, jac);
        std::vector<double> rhs(nv + np);
        for (int i = 0; i < nv + np; ++i) rhs[i] = -f[i];
        std::vector<double> delta = solve_dense(std::move(jac), std::move(rhs));
        for (int i = 0; i < nv; ++i) a[i] += delta[i];
        for (int i = 0; i < np; ++i) b[i] += delta[nv + i];
        residual(a_prev, a, b, dt, ts, f);
      }
      if (!converged && max_abs(f) > opt.newton_tol * f_scale)
        throw NumericalError(
            "reduced Newton did not converge at t = " + std::to_string(t0) +
            ": residual " + std::to_string(max_abs(f)));
      check_blowup(a, opt.blowup_guard, scale0, t1);
    }
    for (int i = 0; i < nv; ++i) out.a(k + 1, i) = a[i];
    for (int i = 0; i < np; ++i) out.b(k + 1, i) = b[i];
  }
  return out;
}

ReducedTrajectory integrate_ppe(const ReducedOperators& ops,
                                const std::vector<double>& a0,
                                const GTraces& traces,
                                const IntegrateOptions& opt) {
  const int nu = ops.n_u;  // supremizer columns are not part of the PPE space
  const int np = ops.n_p;
  const int nbc = ops.n_outlets;
  if (static_cast<int>(a0.size()) != nu)
    throw DimensionError("integrate_ppe: initial coefficient size");
  const int nt = static_cast<int>(traces.times.size());

  ReducedTrajectory out;
  out.times = traces.times;
  out.a = DenseMatrix(nt, nu);
  out.b = DenseMatrix(nt, np);
  std::vector<double> a = a0;
  const double scale0 = std::max(1.0, max_abs(a0));

  // Reduced pressure matrix (D - N) over the pressure-mode columns.
  DenseMatrix m(np, np);
  for (int i = 0; i < np; ++i)
    for (int l = 0; l < np; ++l)
      m(i, l) = ops.pressure_laplace(i, nbc + l) - ops.outlet_boundary(i, nbc + l);
  std::vector<int> piv;
  DenseMatrix m_lu = m;
  try {
    lu_factor(m_lu, piv);
  } catch (const NumericalError&) {
    throw NumericalError(
        "reduced pressure system is singular; a Dirichlet anchor via the "
        "pressure lifting block is required");
  }

  auto solve_pressure = [&](const std::vector<double>& av,
                            const TraceSample& ts) {
    std::vector<double> a_ext(1 + nu);
    a_ext[0] = ts.g_u;
    for (int i = 0; i < nu; ++i) a_ext[1 + i] = av[i];
    std::vector<double> rhs(np, 0.0);
    for (int i = 0; i < np; ++i) {
      double r = 0.0;
      for (int j = 0; j < 1 + nu; ++j)
        for (int k = 0; k < 1 + nu; ++k)
          r += ops.ppe_convection(i, j, k) * a_ext[j] * a_ext[k];
      for (int j = 0; j < nbc; ++j)
        r -= (ops.pressure_laplace(i, j) - ops.outlet_boundary(i, j)) * ts.g_p[j];
      rhs[i] = r;
    }
    lu_solve(m_lu, piv, rhs);
    return rhs;
  };

  auto momentum_residual = [&](const std::vector<double>& an,
                               const std::vector<double>& av,
                               const std::vector<double>& bv, double dt,
                               const TraceSample& ts, std::vector<double>& f) {
    std::vector<double> a_ext(1 + nu), b_ext(nbc + np);
    a_ext[0] = ts.g_u;
    for (int i = 0; i < nu; ++i) a_ext[1 + i] = av[i];
    for (int j = 0; j < nbc; ++j) b_ext[j] = ts.g_p[j];
    for (int i = 0; i < np; ++i) b_ext[nbc + i] = bv[i];
    f.assign(nu, 0.0);
    for (int i = 0; i < nu; ++i) {
      double r = (av[i] - an[i]) / dt + ops.mass_chi[i] * ts.dg_u;
      for (int j = 0; j < 1 + nu; ++j) r -= opt.nu * ops.diffusion(i, j) * a_ext[j];
      for (int j = 0; j < 1 + nu; ++j)
        for (int k = 0; k < 1 + nu; ++k)
          r += ops.convection(i, j, k) * a_ext[j] * a_ext[k];
      for (int j = 0; j < nbc + np; ++j) r += ops.pressure_grad(i, j) * b_ext[j];
      f[i] = r;
    }
  };

  // Algebraic pressure at the initial time for reporting.
  {
    const TraceSample ts0 = sample_traces(traces, 0, 0, 0.0);
    const std::vector<double> b_init = solve_pressure(a, ts0);
    for (int i = 0; i < nu; ++i) out.a(0, i) = a[i];
    for (int i = 0; i < np; ++i) out.b(0, i) = b_init[i];
  }

  std::vector<double> f;
  for (int k = 0; k + 1 < nt; ++k) {
    const double t0 = traces.times[k], t1 = traces.times[k + 1];
    const int sub = std::max(1, opt.substeps);
    const double dt = (t1 - t0) / sub;
    if (dt <= 0.0) throw NumericalError("integrate: times must increase");
    std::vector<double> b;
    for (int s = 1; s <= sub; ++s) {
      const TraceSample ts =
          sample_traces(traces, k, k + 1, static_cast<double>(s) / sub);
      b = solve_pressure(a, ts);
      const std::vector<double> a_prev = a;
      momentum_residual(a_prev, a, b, dt, ts, f);
      const double f_scale = std::max(1.0, max_abs(f));
      bool converged = false;
      for (int it = 0; it < opt.max_newton; ++it) {
        if (max_abs(f) <= opt.newton_tol * f_scale) {
          converged = true;
          break;
        }
        DenseMatrix jac(nu, nu);
        std::vector<double> a_ext(1 + nu);
        a_ext[0] = ts.g_u;
        for (int i = 0; i < nu; ++i) a_ext[1 + i] = a[i];
        for (int i = 0; i < nu; ++i)
          for (int l = 0; l < nu; ++l) {
            double v = (i == l ? 1.0 / dt : 0.0) - opt.nu * ops.diffusion(i, l + 1);
            for (int kk = 0; kk < 1 + nu; ++kk)
              v += ops.convection(i, l + 1, kk) * a_ext[kk];
            for (int j = 0; j < 1 + nu; ++j)
              v += ops.convection(i, j, l + 1) * a_ext[j];
            jac(i, l) = v;
          }
        std::vector<double> rhs(nu);
        for (int i = 0; i < nu; ++i) rhs[i] = -f[i];
        std::vector<double> delta = solve_dense(std::move(jac), std::move(rhs));
        for (int i = 0; i < nu; ++i) a[i] += delta[i];
        momentum_residual(a_prev, a, b, dt, ts, f);
      }
      if (!converged && max_abs(f) > opt.newton_tol * f_scale)
        throw NumericalError(
            "reduced Newton (ppe) did not converge at t = " + std::to_string(t0) +
            ": residual " + std::to_string(max_abs(f)));
      check_blowup(a, opt.blowup_guard, scale0, t1);
    }
    for (int i = 0; i < nu; ++i) out.a(k + 1, i) = a[i];
    for (int i = 0; i < np; ++i) out.b(k + 1, i) = b[i];
  }
  return out;
}

}  // namespace hemorom
