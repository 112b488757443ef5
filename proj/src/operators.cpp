#include "hemorom/operators.hpp"

#include "hemorom/errors.hpp"

namespace hemorom {

const ScalarBc& ScalarBcSet::at(const BoundaryFace& f) const {
  switch (f.region) {
    case BoundaryRegion::Inlet:
      return inlet;
    case BoundaryRegion::Wall:
      return wall;
    case BoundaryRegion::Outlet:
      break;
  }
  static const ScalarBc zero_grad{};
  if (outlet.empty()) return zero_grad;
  if (outlet.size() == 1) return outlet[0];
  return outlet.at(f.outlet);
}

ScalarBcSet ScalarBcSet::all_dirichlet(double value) {
  ScalarBcSet s;
  s.inlet = s.wall = {BcKind::Dirichlet, value};
  s.outlet = {{BcKind::Dirichlet, value}};
  return s;
}

const VectorBc& VectorBcSet::at(const BoundaryFace& f) const {
  switch (f.region) {
    case BoundaryRegion::Inlet:
      return inlet;
    case BoundaryRegion::Wall:
      return wall;
    case BoundaryRegion::Outlet:
      break;
  }
  static const VectorBc zero_grad{};
  if (outlet.empty()) return zero_grad;
  if (outlet.size() == 1) return outlet[0];
  return outlet.at(f.outlet);
}

VectorBcSet VectorBcSet::all_dirichlet(Vec2 value) {
  VectorBcSet s;
  s.inlet = s.wall = {BcKind::Dirichlet, value};
  s.outlet = {{BcKind::Dirichlet, value}};
  return s;
}

double face_value(const ScalarField& f, const BoundaryFace& bf,
                  const ScalarBc& bc, const StructuredMesh& mesh) {
  switch (bc.kind) {
    case BcKind::Dirichlet:
      return bc.value;
    case BcKind::FixedGradient:
      return f[bf.cell] + mesh.wall_distance(bf) * bc.value;
    case BcKind::ZeroGradient:
      break;
  }
  return f[bf.cell];
}

Vec2 face_value(const VectorField& f, const BoundaryFace& bf,
                const VectorBc& bc, const StructuredMesh& mesh) {
  switch (bc.kind) {
    case BcKind::Dirichlet:
      return bc.value;
    case BcKind::FixedGradient:
      return f[bf.cell] + mesh.wall_distance(bf) * bc.value;
    case BcKind::ZeroGradient:
      break;
  }
  return f[bf.cell];
}

double inner_product(const ScalarField& f, const ScalarField& g,
                     const StructuredMesh& mesh) {
  check_size(f, mesh, "inner_product");
  check_size(g, mesh, "inner_product");
  double s = 0.0;
  for (int c = 0; c < mesh.cell_count(); ++c) s += mesh.cell_volume(c) * f[c] * g[c];
  return s;
}

double inner_product(const VectorField& f, const VectorField& g,
                     const StructuredMesh& mesh) {
  check_size(f, mesh, "inner_product");
  check_size(g, mesh, "inner_product");
  double s = 0.0;
  for (int c = 0; c < mesh.cell_count(); ++c)
    s += mesh.cell_volume(c) * f[c].dot(g[c]);
  return s;
}

namespace {

// Shared face sweep: calls `interior(c1, c2, area)` for every interior face
// with the outward area vector seen from c1.
template <typename F>
void for_interior_faces(const StructuredMesh& m, F&& interior) {
  const double dx = m.dx(), dy = m.dy();
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i + 1 < m.nx(); ++i)
      interior(m.cell_index(i, j), m.cell_index(i + 1, j), Vec2{dy, 0.0});
  for (int j = 0; j + 1 < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i)
      interior(m.cell_index(i, j), m.cell_index(i, j + 1), Vec2{0.0, dx});
}

}  // namespace

VectorField gradient(const ScalarField& p, const StructuredMesh& mesh,
                     const ScalarBcSet* bc) {
  check_size(p, mesh, "gradient");
  VectorField g(mesh.cell_count());
  for_interior_faces(mesh, [&](int c1, int c2, Vec2 area) {
    double pf = 0.5 * (p[c1] + p[c2]);
    g[c1] += pf * area;
    g[c2] -= pf * area;
  });
  static const ScalarBcSet default_bc;
  const ScalarBcSet& b = bc ? *bc : default_bc;
  for (const BoundaryFace& f : mesh.boundary_faces())
    g[f.cell] += face_value(p, f, b.at(f), mesh) * f.area;
  for (int c = 0; c < mesh.cell_count(); ++c) g[c] = g[c] / mesh.cell_volume(c);
  return g;
}

std::pair<VectorField, VectorField> gradient(const VectorField& u,
                                             const StructuredMesh& mesh,
                                             const VectorBcSet* bc) {
  check_size(u, mesh, "gradient");
  VectorField gx(mesh.cell_count()), gy(mesh.cell_count());
  for_interior_faces(mesh, [&](int c1, int c2, Vec2 area) {
    Vec2 uf = 0.5 * (u[c1] + u[c2]);
    gx[c1] += uf.x * area;
    gx[c2] -= uf.x * area;
    gy[c1] += uf.y * area;
    gy[c2] -= uf.y * area;
  });
  static const VectorBcSet default_bc;
  const VectorBcSet& b = bc ? *bc : default_bc;
  for (const BoundaryFace& f : mesh.boundary_faces()) {
    Vec2 uf = face_value(u, f, b.at(f), mesh);
    gx[f.cell] += uf.x * f.area;
    gy[f.cell] += uf.y * f.area;
  }
  for (int c = 0; c < mesh.cell_count(); ++c) {
    gx[c] = gx[c] / mesh.cell_volume(c);
    gy[c] = gy[c] / mesh.cell_volume(c);
  }
  return {gx, gy};
}

ScalarField divergence(const VectorField& u, const StructuredMesh& mesh,
                       const VectorBcSet* bc) {
  check_size(u, mesh, "divergence");
  ScalarField d(mesh.cell_count());
  for_interior_faces(mesh, [&](int c1, int c2, Vec2 area) {
    Vec2 uf = 0.5 * (u[c1] + u[c2]);
    double flux = uf.dot(area);
    d[c1] += flux;
    d[c2] -= flux;
  });
  static const VectorBcSet default_bc;
  const VectorBcSet& b = bc ? *bc : default_bc;
  for (const BoundaryFace& f : mesh.boundary_faces())
    d[f.cell] += face_value(u, f, b.at(f), mesh).dot(f.area);
  for (int c = 0; c < mesh.cell_count(); ++c) d[c] /= mesh.cell_volume(c);
  return d;
}

namespace {

// Compact two-point diffusive flux through a boundary face, per unit area.
double boundary_normal_gradient(double cell_value, const BoundaryFace& f,
                                const ScalarBc& bc, const StructuredMesh& mesh) {
  switch (bc.kind) {
    case BcKind::Dirichlet:
      return (bc.value - cell_value) / mesh.wall_distance(f);
    case BcKind::FixedGradient:
      return bc.value;
    case BcKind::ZeroGradient:
      break;
  }
  return 0.0;
}

}  // namespace

ScalarField laplacian(const ScalarField& f, const StructuredMesh& mesh,
                      const ScalarBcSet* bc) {
  check_size(f, mesh, "laplacian");
  ScalarField r(mesh.cell_count());
  const double dx = mesh.dx(), dy = mesh.dy();
  for_interior_faces(mesh, [&](int c1, int c2, Vec2 area) {
    double delta = (area.x != 0.0) ? dx : dy;
    double flux = (f[c2] - f[c1]) / delta * area.norm();
    r[c1] += flux;
    r[c2] -= flux;
  });
  static const ScalarBcSet default_bc;
  const ScalarBcSet& b = bc ? *bc : default_bc;
  for (const BoundaryFace& bf : mesh.boundary_faces())
    r[bf.cell] +=
        boundary_normal_gradient(f[bf.cell], bf, b.at(bf), mesh) * bf.area.norm();
  for (int c = 0; c < mesh.cell_count(); ++c) r[c] /= mesh.cell_volume(c);
  return r;
}

VectorField laplacian(const VectorField& f, const StructuredMesh& mesh,
                      const VectorBcSet* bc) {
  check_size(f, mesh, "laplacian");
  VectorField r(mesh.cell_count());
  const double dx = mesh.dx(), dy = mesh.dy();
  for_interior_faces(mesh, [&](int c1, int c2, Vec2 area) {
    double delta = (area.x != 0.0) ? dx : dy;
    Vec2 flux = (f[c2] - f[c1]) / delta * area.norm();
    r[c1] += flux;
    r[c2] -= flux;
  });
  static const VectorBcSet default_bc;
  const VectorBcSet& b = bc ? *bc : default_bc;
  for (const BoundaryFace& bf : mesh.boundary_faces()) {
    const VectorBc& vb = b.at(bf);
    Vec2 grad_n{};
    switch (vb.kind) {
      case BcKind::Dirichlet:
        grad_n = (vb.value - f[bf.cell]) / mesh.wall_distance(bf);
        break;
      case BcKind::FixedGradient:
        grad_n = vb.value;
        break;
      case BcKind::ZeroGradient:
        break;
    }
    r[bf.cell] += grad_n * bf.area.norm();
  }
  for (int c = 0; c < mesh.cell_count(); ++c) r[c] = r[c] / mesh.cell_volume(c);
  return r;
}

VectorField tensor_divergence(const VectorField& a, const VectorField& b,
                              const StructuredMesh& mesh,
                              const VectorBcSet* bc_a, const VectorBcSet* bc_b) {
  check_size(a, mesh, "tensor_divergence");
  check_size(b, mesh, "tensor_divergence");
  VectorField r(mesh.cell_count());
  for_interior_faces(mesh, [&](int c1, int c2, Vec2 area) {
    Vec2 af = 0.5 * (a[c1] + a[c2]);
    Vec2 bf = 0.5 * (b[c1] + b[c2]);
    Vec2 flux = af.dot(area) * bf;
    r[c1] += flux;
    r[c2] -= flux;
  });
  static const VectorBcSet default_bc;
  const VectorBcSet& ba = bc_a ? *bc_a : default_bc;
  const VectorBcSet& bb = bc_b ? *bc_b : default_bc;
  for (const BoundaryFace& f : mesh.boundary_faces()) {
    Vec2 af = face_value(a, f, ba.at(f), mesh);
    Vec2 bf = face_value(b, f, bb.at(f), mesh);
    r[f.cell] += af.dot(f.area) * bf;
  }
  for (int c = 0; c < mesh.cell_count(); ++c) r[c] = r[c] / mesh.cell_volume(c);
  return r;
}

double outlet_boundary_integral(const ScalarField& f, const ScalarBcSet& f_bc,
                                const ScalarField& g, const ScalarBcSet& g_bc,
                                const StructuredMesh& mesh) {
  check_size(f, mesh, "outlet_boundary_integral");
  check_size(g, mesh, "outlet_boundary_integral");
  double s = 0.0;
  for (const BoundaryFace& bf : mesh.boundary_faces()) {
    if (bf.region != BoundaryRegion::Outlet) continue;
    double fv = face_value(f, bf, f_bc.at(bf), mesh);
    double gn = boundary_normal_gradient(g[bf.cell], bf, g_bc.at(bf), mesh);
    s += fv * gn * bf.area.norm();
  }
  return s;
}

std::vector<double> flatten(const ScalarField& f) { return f.v; }

std::vector<double> flatten(const VectorField& f) {
  std::vector<double> a(static_cast<size_t>(f.size()) * 2);
  for (int c = 0; c < f.size(); ++c) {
    a[2 * c] = f[c].x;
    a[2 * c + 1] = f[c].y;
  }
  return a;
}

ScalarField unflatten_scalar(const std::vector<double>& a) {
  ScalarField f(static_cast<int>(a.size()));
  f.v = a;
  return f;
}

VectorField unflatten_vector(const std::vector<double>& a) {
  VectorField f(static_cast<int>(a.size() / 2));
  for (int c = 0; c < f.size(); ++c) f[c] = {a[2 * c], a[2 * c + 1]};
  return f;
}

std::vector<double> scalar_weights(const StructuredMesh& mesh) {
  return mesh.cell_volumes();
}

std::vector<double> vector_weights(const StructuredMesh& mesh) {
  std::vector<double> w(static_cast<size_t>(mesh.cell_count()) * 2);
  for (int c = 0; c < mesh.cell_count(); ++c)
    w[2 * c] = w[2 * c + 1] = mesh.cell_volume(c);
  return w;
}

}  // namespace hemorom
