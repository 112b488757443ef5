#pragma once

#include <cmath>
#include <vector>

namespace hemorom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

enum class BoundaryRegion { Inlet, Outlet, Wall };

/// One boundary face of the mesh. `area` is the outward face-area vector
/// (unit depth in the out-of-plane direction), `cell` the owning cell.
struct BoundaryFace {
  int cell = -1;
  Vec2 area;
  Vec2 center;
  BoundaryRegion region = BoundaryRegion::Wall;
  int outlet = -1;  ///< outlet index when region == Outlet, else -1
};

/// Uniform Cartesian mesh of a 2D channel section: x in [0, L], y in [0, 2R].
/// The inlet is the x = 0 edge, walls are y = 0 and y = 2R, and the x = L edge
/// is split into `n_outlets` contiguous outlet segments.
///
/// Cells are stored row-major: cell (i, j) -> index j*nx + i.
class StructuredMesh {
 public:
  static StructuredMesh channel(int nx, int ny, double length, double radius,
                                int n_outlets = 1);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int cell_count() const { return nx_ * ny_; }
  double length() const { return length_; }
  double radius() const { return radius_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }

  int cell_index(int i, int j) const { return j * nx_ + i; }
  Vec2 cell_center(int i, int j) const {
    return {(i + 0.5) * dx_, (j + 0.5) * dy_};
  }
  double cell_volume(int c) const { return cell_volumes_[c]; }
  const std::vector<double>& cell_volumes() const { return cell_volumes_; }
  double total_volume() const { return total_volume_; }

  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }
  int n_outlets() const { return n_outlets_; }
  double inlet_area() const { return inlet_area_; }
  double outlet_area(int outlet) const { return outlet_areas_[outlet]; }

  /// True when the cell touches no boundary face.
  bool interior_cell(int i, int j) const {
    return i > 0 && i < nx_ - 1 && j > 0 && j < ny_ - 1;
  }

  /// Distance from a cell center to one of its boundary faces (half cell width
  /// along the face normal). Uniform grid: dx/2 for x-faces, dy/2 for y-faces.
  double wall_distance(const BoundaryFace& f) const {
    return (f.area.x != 0.0) ? 0.5 * dx_ : 0.5 * dy_;
  }

 private:
  int nx_ = 0, ny_ = 0;
  double length_ = 0.0, radius_ = 0.0;
  double dx_ = 0.0, dy_ = 0.0;
  double total_volume_ = 0.0;
  double inlet_area_ = 0.0;
  int n_outlets_ = 1;
  std::vector<double> cell_volumes_;
  std::vector<double> outlet_areas_;
  std::vector<BoundaryFace> boundary_faces_;
};

}  // namespace hemorom
