#include "hemorom/mesh.hpp"

#include "hemorom/errors.hpp"

namespace hemorom {

StructuredMesh StructuredMesh::channel(int nx, int ny, double length,
                                       double radius, int n_outlets) {
  if (nx < 1 || ny < 1) throw ConfigError("mesh: nx and ny must be >= 1");
  if (length <= 0.0 || radius <= 0.0)
    throw ConfigError("mesh: length and radius must be positive");
  if (n_outlets < 1 || n_outlets > ny)
    throw ConfigError("mesh: n_outlets must be in [1, ny]");

  StructuredMesh m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.length_ = length;
  m.radius_ = radius;
  m.n_outlets_ = n_outlets;
  m.dx_ = length / nx;
  m.dy_ = 2.0 * radius / ny;
  m.cell_volumes_.assign(static_cast<size_t>(nx) * ny, m.dx_ * m.dy_);
  m.total_volume_ = m.dx_ * m.dy_ * nx * ny;
  m.inlet_area_ = 2.0 * radius;
  m.outlet_areas_.assign(n_outlets, 0.0);

  // Outlet segments: contiguous runs of rows on the x = L edge, distributed
  // as evenly as possible from bottom to top.
  std::vector<int> outlet_of_row(ny);
  for (int j = 0; j < ny; ++j)
    outlet_of_row[j] = static_cast<int>((static_cast<long long>(j) * n_outlets) / ny);

  for (int j = 0; j < ny; ++j) {
    double yc = (j + 0.5) * m.dy_;
    // inlet, x = 0
    m.boundary_faces_.push_back({m.cell_index(0, j), Vec2{-m.dy_, 0.0},
                                 Vec2{0.0, yc}, BoundaryRegion::Inlet, -1});
    // outlet, x = L
    int out = outlet_of_row[j];
    m.boundary_faces_.push_back({m.cell_index(nx - 1, j), Vec2{m.dy_, 0.0},
                                 Vec2{length, yc}, BoundaryRegion::Outlet, out});
    m.outlet_areas_[out] += m.dy_;
  }
  for (int i = 0; i < nx; ++i) {
    double xc = (i + 0.5) * m.dx_;
    // bottom wall, y = 0
    m.boundary_faces_.push_back({m.cell_index(i, 0), Vec2{0.0, -m.dx_},
                                 Vec2{xc, 0.0}, BoundaryRegion::Wall, -1});
    // top wall, y = 2R
    m.boundary_faces_.push_back({m.cell_index(i, ny - 1), Vec2{0.0, m.dx_},
                                 Vec2{xc, 2.0 * radius}, BoundaryRegion::Wall, -1});
  }
  return m;
}

}  // namespace hemorom
