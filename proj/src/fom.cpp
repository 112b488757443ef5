#include "hemorom/fom.hpp"

#include <cmath>
#include <string>

#include "hemorom/errors.hpp"
#include "hemorom/linalg.hpp"

namespace hemorom {

void FluidParams::validate() const {
  if (nu <= 0.0) throw ConfigError("fluid: nu must be > 0");
}

void TimeGrid::validate() const {
  if (dt <= 0.0) throw ConfigError("time: dt must be > 0");
  if (T <= t0) throw ConfigError("time: T must exceed t0");
  if (stride < 1) throw ConfigError("time: stride must be >= 1");
  if (steps() < 1) throw ConfigError("time: fewer than one step");
}

int TimeGrid::steps() const {
  return static_cast<int>(std::llround((T - t0) / dt));
}

FomSolver::FomSolver(const StructuredMesh& mesh, FluidParams fluid,
                     FomOptions options)
    : mesh_(mesh), fluid_(fluid), options_(std::move(options)) {
  fluid_.validate();
  if (options_.n_piso < 1) throw ConfigError("fom: n_piso must be >= 1");
  if (options_.lin_tol <= 0.0) throw ConfigError("fom: lin_tol must be > 0");
  if (static_cast<int>(options_.wk.size()) != mesh_.n_outlets())
    throw ConfigError("fom: need one Windkessel block per outlet");
  for (const auto& p : options_.wk) p.validate();
}

FomState FomSolver::initial_state(double t0) const {
  FomState s;
  s.u = VectorField(mesh_.cell_count());
  s.p = ScalarField(mesh_.cell_count());
  s.wk.assign(mesh_.n_outlets(), WindkesselState{0.0, 0.0, t0});
  s.t = t0;
  return s;
}

VectorBcSet FomSolver::velocity_bc(double inlet_speed) const {
  VectorBcSet bc;
  bc.inlet = {BcKind::Dirichlet, {inlet_speed, 0.0}};
  bc.wall = {BcKind::Dirichlet, {0.0, 0.0}};
  bc.outlet = {{BcKind::ZeroGradient, {}}};
  return bc;
}

ScalarBcSet FomSolver::pressure_bc(const std::vector<double>& outlet_pressure) const {
  ScalarBcSet bc;
  bc.inlet = {BcKind::ZeroGradient, 0.0};
  bc.wall = {BcKind::ZeroGradient, 0.0};
  bc.outlet.clear();
  for (double p : outlet_pressure) bc.outlet.push_back({BcKind::Dirichlet, p});
  return bc;
}

double FomSolver::outlet_flux(const VectorField& u, int outlet) const {
  double q = 0.0;
  for (const BoundaryFace& f : mesh_.boundary_faces())
    if (f.region == BoundaryRegion::Outlet && f.outlet == outlet)
      q += u[f.cell].dot(f.area);
  return q;
}

double FomSolver::global_boundary_flux(const VectorField& u,
                                       double inlet_speed) const {
  const VectorBcSet bc = velocity_bc(inlet_speed);
  double q = 0.0;
  for (const BoundaryFace& f : mesh_.boundary_faces())
    q += face_value(u, f, bc.at(f), mesh_).dot(f.area);
  return q;
}

VectorField FomSolver::momentum_solve(const VectorField& u_old,
                                      double old_inlet_speed,
                                      const ScalarField& p_grad_field,
                                      const ScalarBcSet& p_bc, double dt,
                                      const FomBoundary& bc,
                                      const VectorField* convective_flux_of) const {
  const int n = mesh_.cell_count();
  const double nu = fluid_.nu;
  const double dx = mesh_.dx(), dy = mesh_.dy();

  const VectorBcSet old_vbc = velocity_bc(old_inlet_speed);
  const VectorBcSet new_vbc = velocity_bc(bc.inlet_speed);
  const VectorField& flux_of = convective_flux_of ? *convective_flux_of : u_old;

  CsrMatrix mat(n);
  std::vector<double> rhs_x(n, 0.0), rhs_y(n, 0.0);

  const VectorField grad_p = gradient(p_grad_field, mesh_, &p_bc);
  for (int c = 0; c < n; ++c) {
    mat.add(c, c, 1.0 / dt);
    rhs_x[c] = u_old[c].x / dt - grad_p[c].x;
    rhs_y[c] = u_old[c].y / dt - grad_p[c].y;
  }

  // Interior faces: central interpolation for convection, two-point normal
  // gradients for diffusion. Everything per unit cell volume.
  auto add_interior = [&](int c1, int c2, Vec2 area, double delta) {
    const double vol1 = mesh_.cell_volume(c1), vol2 = mesh_.cell_volume(c2);
    const double phi = (0.5 * (flux_of[c1] + flux_of[c2])).dot(area);
    mat.add(c1, c1, 0.5 * phi / vol1);
    mat.add(c1, c2, 0.5 * phi / vol1);
    mat.add(c2, c2, -0.5 * phi / vol2);
    mat.add(c2, c1, -0.5 * phi / vol2);
    const double dcoef = nu * area.norm() / delta;
    mat.add(c1, c1, dcoef / vol1);
    mat.add(c1, c2, -dcoef / vol1);
    mat.add(c2, c2, dcoef / vol2);
    mat.add(c2, c1, -dcoef / vol2);
  };
  for (int j = 0; j < mesh_.ny(); ++j)
    for (int i = 0; i + 1 < mesh_.nx(); ++i)
      add_interior(mesh_.cell_index(i, j), mesh_.cell_index(i + 1, j),
                   Vec2{dy, 0.0}, dx);
  for (int j = 0; j + 1 < mesh_.ny(); ++j)
    for (int i = 0; i < mesh_.nx(); ++i)
      add_interior(mesh_.cell_index(i, j), mesh_.cell_index(i, j + 1),
                   Vec2{0.0, dx}, dy);

  for (const BoundaryFace& f : mesh_.boundary_faces()) {
    const int c = f.cell;
    const double vol = mesh_.cell_volume(c);
    const double phi = face_value(flux_of, f, old_vbc.at(f), mesh_).dot(f.area);
    const VectorBc& vb = new_vbc.at(f);
    switch (vb.kind) {
      case BcKind::Dirichlet: {
        rhs_x[c] -= phi * vb.value.x / vol;
        rhs_y[c] -= phi * vb.value.y / vol;
        const double dcoef = nu * f.area.norm() / mesh_.wall_distance(f);
        mat.add(c, c, dcoef / vol);
        rhs_x[c] += dcoef * vb.value.x / vol;
        rhs_y[c] += dcoef * vb.value.y / vol;
        break;
      }
      case BcKind::ZeroGradient:
        mat.add(c, c, phi / vol);  // face value = cell value, no diffusive flux
        break;
      case BcKind::FixedGradient:
        throw NumericalError("momentum: unsupported velocity closure");
    }
  }

  const std::vector<double> diag = mat.diagonal();
  const auto op = mat.as_operator();
  const int max_iter = 40 * n + 200;
  std::vector<double> ux, uy;
  KrylovResult rx = bicgstab(n, op, rhs_x, ux, options_.lin_tol, max_iter, &diag);
  KrylovResult ry = bicgstab(n, op, rhs_y, uy, options_.lin_tol, max_iter, &diag);
  if (!rx.converged || !ry.converged)
    throw NumericalError("momentum solve did not converge: residuals " +
                         std::to_string(rx.residual) + ", " +
                         std::to_string(ry.residual));

  VectorField u_star(n);
  for (int c = 0; c < n; ++c) u_star[c] = {ux[c], uy[c]};
  return u_star;
}

VectorField FomSolver::momentum_predict(const FomState& state, double dt,
                                        const FomBoundary& bc) const {
  std::vector<double> old_outlet_p(mesh_.n_outlets());
  for (int j = 0; j < mesh_.n_outlets(); ++j) old_outlet_p[j] = state.wk[j].p;
  const double old_speed = inlet_profile(state.t, options_.u0, options_.wk[0]);
  return momentum_solve(state.u, old_speed, state.p,
                        pressure_bc(old_outlet_p), dt, bc);
}

std::pair<ScalarField, VectorField> FomSolver::pressure_correct(
    const VectorField& u_star, double dt, const FomBoundary& bc) const {
  check_size(u_star, mesh_, "pressure_correct");
  const int n = mesh_.cell_count();

  // Divergence of the predictor with the target boundary fluxes.
  VectorBcSet star_bc = velocity_bc(bc.inlet_speed);
  const ScalarField div_star = divergence(u_star, mesh_, &star_bc);

  // Correction fluxes: prescribed inlet/wall faces do not move, outlet faces
  // follow the one-sided cell gradient.
  VectorBcSet corr_bc;
  corr_bc.inlet = {BcKind::Dirichlet, {0.0, 0.0}};
  corr_bc.wall = {BcKind::Dirichlet, {0.0, 0.0}};
  corr_bc.outlet = {{BcKind::ZeroGradient, {}}};

  const ScalarBcSet p_bc_actual = pressure_bc(bc.outlet_pressure);
  ScalarBcSet p_bc_hom = p_bc_actual;
  for (auto& b : p_bc_hom.outlet) b.value = 0.0;

  auto apply_hom = [&](const double* x, double* y) {
    ScalarField p(n);
    p.v.assign(x, x + n);
    const VectorField g = gradient(p, mesh_, &p_bc_hom);
    const ScalarField lp = divergence(g, mesh_, &corr_bc);
    for (int c = 0; c < n; ++c) y[c] = -lp[c];  // sign keeps CG positive definite
  };

  // Affine part carried by the nonzero Dirichlet values.
  ScalarField zero(n);
  const VectorField g0 = gradient(zero, mesh_, &p_bc_actual);
  const ScalarField l_aff = divergence(g0, mesh_, &corr_bc);

  std::vector<double> rhs(n);
  for (int c = 0; c < n; ++c) rhs[c] = l_aff[c] - div_star[c] / dt;

  std::vector<double> sol;
  KrylovResult res = conjugate_gradient(n, apply_hom, rhs, sol,
                                        options_.lin_tol, 40 * n + 200);
  if (!res.converged)
    throw NumericalError("pressure solve did not converge: residual " +
                         std::to_string(res.residual));

  ScalarField p_new(n);
  p_new.v = std::move(sol);
  const VectorField grad_p = gradient(p_new, mesh_, &p_bc_actual);
  VectorField u_new(n);
  for (int c = 0; c < n; ++c) u_new[c] = u_star[c] - dt * grad_p[c];
  return {std::move(p_new), std::move(u_new)};
}

FomState FomSolver::step(const FomState& state, double dt) const {
  if (dt <= 0.0) throw NumericalError("fom step: dt must be > 0");
  const double t_new = state.t + dt;

  // Windkessel advance, explicit in the previous-step outlet flux.
  FomState next;
  next.wk.resize(mesh_.n_outlets());
  for (int j = 0; j < mesh_.n_outlets(); ++j) {
    const double q = outlet_flux(state.u, j);
    next.wk[j] = wk_step(state.wk[j], q, dt, options_.wk[j]);
  }

  FomBoundary bc;
  bc.inlet_speed = inlet_profile(t_new, options_.u0, options_.wk[0]);
  bc.outlet_pressure.resize(mesh_.n_outlets());
  for (int j = 0; j < mesh_.n_outlets(); ++j)
    bc.outlet_pressure[j] = next.wk[j].p;

  const double old_speed = inlet_profile(state.t, options_.u0, options_.wk[0]);
  std::vector<double> old_outlet_p(mesh_.n_outlets());
  for (int j = 0; j < mesh_.n_outlets(); ++j) old_outlet_p[j] = state.wk[j].p;

  // Predictor/corrector sweeps: convective fluxes stay frozen at the old
  // velocity, the pressure gradient is refreshed between sweeps.
  ScalarField p_field = state.p;
  ScalarBcSet p_bc = pressure_bc(old_outlet_p);
  VectorField u_new;
  for (int sweep = 0; sweep < options_.n_piso; ++sweep) {
    VectorField u_star = momentum_solve(state.u, old_speed, p_field, p_bc, dt,
                                        bc, &state.u);
    auto [p_corr, u_corr] = pressure_correct(u_star, dt, bc);
    p_field = std::move(p_corr);
    p_bc = pressure_bc(bc.outlet_pressure);
    u_new = std::move(u_corr);
  }

  next.u = std::move(u_new);
  next.p = std::move(p_field);
  next.t = t_new;

  if (!all_finite(next.u) || !all_finite(next.p))
    throw NumericalError("fom step produced a non-finite field at t = " +
                         std::to_string(t_new));
  return next;
}

SnapshotDatabase FomSolver::run(const TimeGrid& grid) const {
  grid.validate();
  SnapshotDatabase db(mesh_.nx(), mesh_.ny(), mesh_.n_outlets());
  FomState state = initial_state(grid.t0);
  const int n_steps = grid.steps();
  int snap_index = 0;
  for (int n = 1; n <= n_steps; ++n) {
    state = step(state, grid.dt);
    if (n % grid.stride == 0) {
      SnapshotRecord rec;
      rec.index = snap_index++;
      rec.t = state.t;
      rec.u = state.u;
      rec.p = state.p;
      rec.g_u = inlet_profile(state.t, options_.u0, options_.wk[0]);
      rec.g_p.resize(mesh_.n_outlets());
      for (int j = 0; j < mesh_.n_outlets(); ++j) rec.g_p[j] = state.wk[j].p;
      db.append(std::move(rec));
    }
  }
  return db;
}

}  // namespace hemorom
