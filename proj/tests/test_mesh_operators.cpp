#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "hemorom/errors.hpp"
#include "hemorom/operators.hpp"

using namespace hemorom;

namespace {

ScalarField coordinate_field(const StructuredMesh& m, bool x_coord) {
  ScalarField f(m.cell_count());
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i) {
      const Vec2 c = m.cell_center(i, j);
      f[m.cell_index(i, j)] = x_coord ? c.x : c.y;
    }
  return f;
}

ScalarField random_scalar(const StructuredMesh& m, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  ScalarField f(m.cell_count());
  for (int c = 0; c < m.cell_count(); ++c) f[c] = dist(gen);
  return f;
}

VectorField random_vector(const StructuredMesh& m, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  VectorField f(m.cell_count());
  for (int c = 0; c < m.cell_count(); ++c) f[c] = {dist(gen), dist(gen)};
  return f;
}

}  // namespace

TEST_CASE("channel mesh geometry and tags") {
  const StructuredMesh m = StructuredMesh::channel(6, 4, 0.3, 0.02);
  CHECK(m.cell_count() == 24);
  CHECK(m.dx() == doctest::Approx(0.05));
  CHECK(m.dy() == doctest::Approx(0.01));
  CHECK(m.total_volume() == doctest::Approx(0.3 * 0.04));
  for (int c = 0; c < m.cell_count(); ++c) CHECK(m.cell_volume(c) > 0.0);

  // Every boundary face carries exactly one tag; counts match the perimeter.
  CHECK(m.boundary_faces().size() == size_t(2 * 6 + 2 * 4));
  int inlet = 0, outlet = 0, wall = 0;
  for (const auto& f : m.boundary_faces()) {
    if (f.region == BoundaryRegion::Inlet) ++inlet;
    if (f.region == BoundaryRegion::Outlet) {
      ++outlet;
      CHECK(f.outlet == 0);
    }
    if (f.region == BoundaryRegion::Wall) ++wall;
  }
  CHECK(inlet == 4);
  CHECK(outlet == 4);
  CHECK(wall == 12);
  CHECK(m.inlet_area() == doctest::Approx(0.04));
  CHECK(m.outlet_area(0) == doctest::Approx(0.04));
}

TEST_CASE("closed cells: divergence of a constant vanishes everywhere") {
  const StructuredMesh m = StructuredMesh::channel(5, 3, 1.0, 0.5);
  VectorField u(m.cell_count(), {3.0, -2.0});
  // Matching Dirichlet data closes every boundary face with the same value.
  const VectorBcSet bc = VectorBcSet::all_dirichlet({3.0, -2.0});
  const ScalarField d = divergence(u, m, &bc);
  for (int c = 0; c < m.cell_count(); ++c) CHECK(d[c] == doctest::Approx(0.0));
}

TEST_CASE("multi-outlet tagging splits the outflow edge") {
  const StructuredMesh m = StructuredMesh::channel(4, 6, 1.0, 0.5, 2);
  int out0 = 0, out1 = 0;
  for (const auto& f : m.boundary_faces())
    if (f.region == BoundaryRegion::Outlet) (f.outlet == 0 ? out0 : out1)++;
  CHECK(out0 == 3);
  CHECK(out1 == 3);
  CHECK(m.outlet_area(0) == doctest::Approx(m.outlet_area(1)));
}

TEST_CASE("inner product definition and hand-derived value") {
  // Unit constant on a mesh of total volume V gives V.
  const StructuredMesh m = StructuredMesh::channel(4, 4, 2.0, 0.75);
  ScalarField ones(m.cell_count(), 1.0);
  CHECK(inner_product(ones, ones, m) == doctest::Approx(m.total_volume()));

  // Disjoint indicator fields are orthogonal.
  ScalarField e1(m.cell_count()), e2(m.cell_count());
  e1[0] = 1.0;
  e2[1] = 1.0;
  CHECK(inner_product(e1, e2, m) == 0.0);

  // x-coordinate field against 1 on the unit square, 2x2 mesh: cell centers
  // 0.25/0.75 with volume 0.25 each, so 0.25*(0.25+0.25+0.75+0.75) = 0.5.
  const StructuredMesh unit = StructuredMesh::channel(2, 2, 1.0, 0.5);
  const ScalarField x = coordinate_field(unit, true);
  ScalarField one(unit.cell_count(), 1.0);
  CHECK(inner_product(x, one, unit) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("inner product is a symmetric positive-definite bilinear form") {
  const StructuredMesh m = StructuredMesh::channel(7, 3, 1.3, 0.4);
  for (unsigned seed = 0; seed < 5; ++seed) {
    const ScalarField f = random_scalar(m, seed);
    const ScalarField g = random_scalar(m, seed + 100);
    const ScalarField h = random_scalar(m, seed + 200);
    CHECK(inner_product(f, g, m) == doctest::Approx(inner_product(g, f, m)));
    CHECK(inner_product(f, f, m) > 0.0);
    const double alpha = 0.37, beta = -1.21;
    ScalarField combo(m.cell_count());
    for (int c = 0; c < m.cell_count(); ++c) combo[c] = alpha * f[c] + beta * g[c];
    CHECK(inner_product(combo, h, m) ==
          doctest::Approx(alpha * inner_product(f, h, m) +
                          beta * inner_product(g, h, m)));
  }
  const VectorField vf = random_vector(m, 7);
  CHECK(inner_product(vf, vf, m) > 0.0);
}

TEST_CASE("inner product rejects mismatched sizes") {
  const StructuredMesh m = StructuredMesh::channel(3, 3, 1.0, 0.5);
  ScalarField f(m.cell_count()), g(m.cell_count() + 1);
  CHECK_THROWS_AS(inner_product(f, g, m), DimensionError);
}

TEST_CASE("gradient of a constant is zero") {
  const StructuredMesh m = StructuredMesh::channel(5, 4, 1.0, 0.5);
  ScalarField p(m.cell_count(), 3.5);
  const VectorField g = gradient(p, m);
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(g[c].x == doctest::Approx(0.0));
    CHECK(g[c].y == doctest::Approx(0.0));
  }
}

TEST_CASE("gradient is exact for linear fields away from the boundary") {
  const StructuredMesh m = StructuredMesh::channel(6, 6, 1.2, 0.6);
  const double a = 2.0, b = -0.7;
  ScalarField p(m.cell_count());
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i) {
      const Vec2 c = m.cell_center(i, j);
      p[m.cell_index(i, j)] = a * c.x + b * c.y;
    }
  const VectorField g = gradient(p, m);
  for (int j = 1; j + 1 < m.ny(); ++j)
    for (int i = 1; i + 1 < m.nx(); ++i) {
      const int c = m.cell_index(i, j);
      CHECK(g[c].x == doctest::Approx(a).epsilon(1e-12));
      CHECK(g[c].y == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("gradient of x^2 matches an independent face-sum oracle") {
  // 4x1 unit-length mesh; the oracle reassembles the same face sums by hand.
  const StructuredMesh m = StructuredMesh::channel(4, 1, 1.0, 0.5);
  ScalarField p(m.cell_count());
  for (int i = 0; i < 4; ++i) {
    const double x = m.cell_center(i, 0).x;
    p[i] = x * x;
  }
  const VectorField g = gradient(p, m);

  const double dx = m.dx(), dy = m.dy();
  const double vol = dx * dy;
  for (int i = 1; i <= 2; ++i) {
    // Interior x-faces carry the mean of the adjacent cells; the one-sided
    // boundary closure never enters for interior cells. Top/bottom faces use
    // the cell value and cancel in y.
    const double right = 0.5 * (p[i] + p[i + 1]) * dy;
    const double left = 0.5 * (p[i - 1] + p[i]) * dy;
    CHECK(g[i].x == doctest::Approx((right - left) / vol).epsilon(1e-14));
    CHECK(g[i].y == doctest::Approx(0.0));
  }
}

TEST_CASE("divergence of (x, -y) vanishes on interior cells") {
  const StructuredMesh m = StructuredMesh::channel(8, 6, 2.0, 0.5);
  VectorField u(m.cell_count());
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i) {
      const Vec2 c = m.cell_center(i, j);
      u[m.cell_index(i, j)] = {c.x, -c.y};
    }
  const ScalarField d = divergence(u, m);
  for (int j = 1; j + 1 < m.ny(); ++j)
    for (int i = 1; i + 1 < m.nx(); ++i)
      CHECK(std::abs(d[m.cell_index(i, j)]) < 1e-12);
}

TEST_CASE("laplacian of a linear field vanishes on interior cells") {
  const StructuredMesh m = StructuredMesh::channel(7, 5, 1.0, 0.5);
  ScalarField p(m.cell_count());
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i) {
      const Vec2 c = m.cell_center(i, j);
      p[m.cell_index(i, j)] = 1.5 * c.x - 2.25 * c.y + 0.3;
    }
  const ScalarField l = laplacian(p, m);
  for (int j = 1; j + 1 < m.ny(); ++j)
    for (int i = 1; i + 1 < m.nx(); ++i)
      CHECK(std::abs(l[m.cell_index(i, j)]) < 1e-10);
}

TEST_CASE("operators are linear") {
  const StructuredMesh m = StructuredMesh::channel(6, 4, 1.0, 0.5);
  const ScalarField f = random_scalar(m, 11), g = random_scalar(m, 12);
  const double a = 1.7, b = -0.4;
  ScalarField combo(m.cell_count());
  for (int c = 0; c < m.cell_count(); ++c) combo[c] = a * f[c] + b * g[c];

  const VectorField gf = gradient(f, m), gg = gradient(g, m),
                    gc = gradient(combo, m);
  const ScalarField lf = laplacian(f, m), lg = laplacian(g, m),
                    lc = laplacian(combo, m);
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(gc[c].x == doctest::Approx(a * gf[c].x + b * gg[c].x).epsilon(1e-12));
    CHECK(gc[c].y == doctest::Approx(a * gf[c].y + b * gg[c].y).epsilon(1e-12));
    CHECK(lc[c] == doctest::Approx(a * lf[c] + b * lg[c]).epsilon(1e-12));
  }
}

TEST_CASE("discrete integration by parts reduces to boundary terms") {
  // (div u, p) + (u, grad p) telescopes to the boundary velocity-trace terms
  // when the divergence closes with Dirichlet traces and the gradient with the
  // default one-sided cell value. Homogeneous traces leave exactly zero.
  const StructuredMesh m = StructuredMesh::channel(9, 5, 1.4, 0.35);
  const VectorBcSet ubc = VectorBcSet::all_dirichlet({0.0, 0.0});
  for (unsigned seed = 0; seed < 4; ++seed) {
    const VectorField u = random_vector(m, 40 + seed);
    const ScalarField p = random_scalar(m, 80 + seed);
    const ScalarField du = divergence(u, m, &ubc);
    const VectorField gp = gradient(p, m);
    const double lhs = inner_product(du, p, m) + inner_product(u, gp, m);
    const double scale = std::abs(inner_product(du, p, m)) +
                         std::abs(inner_product(u, gp, m)) + 1e-30;
    CHECK(std::abs(lhs) / scale < 1e-10);
  }

  // Nonzero traces: the same pairing equals the boundary face sum of
  // p_cell * (u_trace . A), the discrete flux of p through the boundary.
  const VectorBcSet ubc2 = VectorBcSet::all_dirichlet({0.8, -0.3});
  for (unsigned seed = 0; seed < 3; ++seed) {
    const VectorField u = random_vector(m, 300 + seed);
    const ScalarField p = random_scalar(m, 400 + seed);
    const ScalarField du = divergence(u, m, &ubc2);
    const VectorField gp = gradient(p, m);
    double boundary = 0.0;
    for (const BoundaryFace& f : m.boundary_faces())
      boundary += p[f.cell] * Vec2{0.8, -0.3}.dot(f.area);
    const double lhs = inner_product(du, p, m) + inner_product(u, gp, m);
    CHECK(lhs == doctest::Approx(boundary).epsilon(1e-10));
  }
}

TEST_CASE("tensor divergence matches divergence on aligned products") {
  // div(a ox b) with b constant equals div(a) * b for matching closures.
  const StructuredMesh m = StructuredMesh::channel(6, 4, 1.0, 0.5);
  const VectorField a = random_vector(m, 3);
  VectorField b(m.cell_count(), {1.0, 0.0});
  const VectorBcSet b_bc = VectorBcSet::all_dirichlet({1.0, 0.0});
  const VectorField td = tensor_divergence(a, b, m, nullptr, &b_bc);
  const ScalarField da = divergence(a, m);
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(td[c].x == doctest::Approx(da[c]).epsilon(1e-12));
    CHECK(td[c].y == doctest::Approx(0.0));
  }
}
