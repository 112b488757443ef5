#include "hemorom/lifting.hpp"

#include <cmath>
#include <string>

#include "hemorom/errors.hpp"
#include "hemorom/linalg.hpp"

namespace hemorom {

int LiftingSet::sample_index(double t) const {
  for (size_t k = 0; k < times.size(); ++k) {
    double scale = std::max({1.0, std::abs(t), std::abs(times[k])});
    if (std::abs(times[k] - t) <= 1e-9 * scale) return static_cast<int>(k);
  }
  return -1;
}

ScalarBcSet velocity_potential_bc(double outlet_neumann) {
  ScalarBcSet bc;
  bc.inlet = {BcKind::Dirichlet, 1.0};
  bc.wall = {BcKind::Dirichlet, 0.0};
  bc.outlet = {{BcKind::FixedGradient, outlet_neumann}};
  return bc;
}

VectorBcSet chi_u_bc(double outlet_neumann) {
  VectorBcSet bc;
  bc.inlet = {BcKind::Dirichlet, {1.0, 0.0}};
  bc.wall = {BcKind::Dirichlet, {0.0, 0.0}};
  bc.outlet = {{BcKind::FixedGradient, {outlet_neumann, 0.0}}};
  return bc;
}

ScalarBcSet chi_p_bc(int outlet, int n_outlets) {
  ScalarBcSet bc;
  bc.inlet = {BcKind::ZeroGradient, 0.0};
  bc.wall = {BcKind::ZeroGradient, 0.0};
  bc.outlet.assign(n_outlets, {BcKind::ZeroGradient, 0.0});
  bc.outlet.at(outlet) = {BcKind::Dirichlet, 1.0};
  return bc;
}

VectorBcSet homogeneous_velocity_bc() {
  VectorBcSet bc;
  bc.inlet = {BcKind::Dirichlet, {0.0, 0.0}};
  bc.wall = {BcKind::Dirichlet, {0.0, 0.0}};
  bc.outlet = {{BcKind::ZeroGradient, {}}};
  return bc;
}

ScalarBcSet homogeneous_pressure_bc(int n_outlets) {
  ScalarBcSet bc;
  bc.inlet = {BcKind::ZeroGradient, 0.0};
  bc.wall = {BcKind::ZeroGradient, 0.0};
  bc.outlet.assign(n_outlets, {BcKind::Dirichlet, 0.0});
  return bc;
}

ScalarField solve_poisson(const StructuredMesh& mesh, const ScalarBcSet& bc,
                          const ScalarField& rhs, double rel_tol) {
  check_size(rhs, mesh, "solve_poisson");
  const int n = mesh.cell_count();
  const double dx = mesh.dx(), dy = mesh.dy();

  // Flux-form system: negate and scale by cell volume so the matrix is a
  // symmetric M-matrix suited to CG.
  CsrMatrix mat(n);
  std::vector<double> b(n);
  for (int c = 0; c < n; ++c) b[c] = -mesh.cell_volume(c) * rhs[c];

  auto add_face = [&](int c1, int c2, double area, double delta) {
    const double k = area / delta;
    mat.add(c1, c1, k);
    mat.add(c1, c2, -k);
    mat.add(c2, c2, k);
    mat.add(c2, c1, -k);
  };
  for (int j = 0; j < mesh.ny(); ++j)
    for (int i = 0; i + 1 < mesh.nx(); ++i)
      add_face(mesh.cell_index(i, j), mesh.cell_index(i + 1, j), dy, dx);
  for (int j = 0; j + 1 < mesh.ny(); ++j)
    for (int i = 0; i < mesh.nx(); ++i)
      add_face(mesh.cell_index(i, j), mesh.cell_index(i, j + 1), dx, dy);

  bool anchored = false;
  for (const BoundaryFace& f : mesh.boundary_faces()) {
    const ScalarBc& sb = bc.at(f);
    const double area = f.area.norm();
    switch (sb.kind) {
      case BcKind::Dirichlet: {
        const double k = area / mesh.wall_distance(f);
        mat.add(f.cell, f.cell, k);
        b[f.cell] += k * sb.value;
        anchored = true;
        break;
      }
      case BcKind::FixedGradient:
        b[f.cell] += sb.value * area;
        break;
      case BcKind::ZeroGradient:
        break;
    }
  }
  if (!anchored)
    throw NumericalError("poisson solve: no Dirichlet anchor, system singular");

  std::vector<double> x;
  KrylovResult res =
      conjugate_gradient(n, mat.as_operator(), b, x, rel_tol, 40 * n + 200);
  if (!res.converged)
    throw NumericalError("poisson solve did not converge: residual " +
                         std::to_string(res.residual));
  ScalarField out(n);
  out.v = std::move(x);
  return out;
}

VectorField solve_velocity_lifting(const StructuredMesh& mesh,
                                   double outlet_neumann, double rel_tol) {
  const ScalarBcSet bc = velocity_potential_bc(outlet_neumann);
  const ScalarField zero(mesh.cell_count());
  const ScalarField potential = solve_poisson(mesh, bc, zero, rel_tol);
  VectorField chi(mesh.cell_count());
  for (int c = 0; c < mesh.cell_count(); ++c) chi[c] = {potential[c], 0.0};
  return chi;
}

ScalarField solve_pressure_lifting(const StructuredMesh& mesh,
                                   const VectorField& chi_u, int outlet,
                                   double outlet_neumann, double rel_tol) {
  check_size(chi_u, mesh, "solve_pressure_lifting");
  if (outlet < 0 || outlet >= mesh.n_outlets())
    throw DimensionError("solve_pressure_lifting: outlet index out of range");

  // Quadratic source: divergence applied twice to the chi_u outer product,
  // with the default one-sided face closures of the field operators.
  (void)outlet_neumann;
  const VectorField inner = tensor_divergence(chi_u, chi_u, mesh);
  const ScalarField source = divergence(inner, mesh);

  // lap(chi_p) = -source
  ScalarField rhs(mesh.cell_count());
  for (int c = 0; c < mesh.cell_count(); ++c) rhs[c] = -source[c];
  return solve_poisson(mesh, chi_p_bc(outlet, mesh.n_outlets()), rhs, rel_tol);
}

LiftingSet build_lifting(const StructuredMesh& mesh, const SnapshotDatabase& db,
                         double outlet_neumann, double rel_tol) {
  LiftingSet set;
  set.chi_u = solve_velocity_lifting(mesh, outlet_neumann, rel_tol);
  for (int j = 0; j < mesh.n_outlets(); ++j) {
    set.chi_p.push_back(
        solve_pressure_lifting(mesh, set.chi_u, j, outlet_neumann, rel_tol));
    set.chi_p_outlet_trace.push_back(1.0);
  }
  set.chi_u_inlet_trace = 1.0;
  set.chi_u_outlet_gradient = outlet_neumann;
  for (const SnapshotRecord& r : db.records()) {
    set.times.push_back(r.t);
    set.g_u.push_back(r.g_u);
    set.g_p.push_back(r.g_p);
  }
  return set;
}

SnapshotDatabase homogenize(const SnapshotDatabase& db, const LiftingSet& lifting) {
  if (lifting.n_outlets() != db.n_outlets())
    throw DimensionError("homogenize: outlet count mismatch");
  SnapshotDatabase out(db.nx(), db.ny(), db.n_outlets());
  for (const SnapshotRecord& r : db.records()) {
    if (lifting.sample_index(r.t) < 0)
      throw NumericalError("homogenize: no g sample for snapshot time t = " +
                           std::to_string(r.t));
    SnapshotRecord h;
    h.index = r.index;
    h.t = r.t;
    h.u = axpy(-r.g_u, lifting.chi_u, r.u);
    h.p = r.p;
    for (int j = 0; j < db.n_outlets(); ++j)
      h.p = axpy(-r.g_p[j], lifting.chi_p[j], h.p);
    // Homogenized boundary traces: original data minus the lifted traces.
    h.g_u = r.g_u - r.g_u * lifting.chi_u_inlet_trace;
    h.g_p.resize(db.n_outlets());
    for (int j = 0; j < db.n_outlets(); ++j)
      h.g_p[j] = r.g_p[j] - r.g_p[j] * lifting.chi_p_outlet_trace[j];
    out.append(std::move(h));
  }
  return out;
}

VectorField reconstruct_velocity(const std::vector<double>& a,
                                 const std::vector<VectorField>& modes,
                                 const LiftingSet& lifting, double g_u) {
  if (a.size() != modes.size())
    throw DimensionError("reconstruct_velocity: coefficient/basis mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(modes.size()) + ")");
  VectorField out(lifting.chi_u.size());
  for (int c = 0; c < out.size(); ++c) out[c] = g_u * lifting.chi_u[c];
  for (size_t i = 0; i < modes.size(); ++i) out = axpy(a[i], modes[i], out);
  return out;
}

ScalarField reconstruct_pressure(const std::vector<double>& b,
                                 const std::vector<ScalarField>& modes,
                                 const LiftingSet& lifting,
                                 const std::vector<double>& g_p) {
  if (b.size() != modes.size())
    throw DimensionError("reconstruct_pressure: coefficient/basis mismatch (" +
                         std::to_string(b.size()) + " vs " +
                         std::to_string(modes.size()) + ")");
  if (static_cast<int>(g_p.size()) != lifting.n_outlets())
    throw DimensionError("reconstruct_pressure: g_p size mismatch");
  ScalarField out(lifting.chi_p.empty() ? 0 : lifting.chi_p[0].size());
  for (int j = 0; j < lifting.n_outlets(); ++j)
    out = axpy(g_p[j], lifting.chi_p[j], out);
  for (size_t i = 0; i < modes.size(); ++i) out = axpy(b[i], modes[i], out);
  return out;
}

}  // namespace hemorom
