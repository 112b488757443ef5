#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "hemorom/errors.hpp"
#include "hemorom/lifting.hpp"
#include "hemorom/linalg.hpp"

using namespace hemorom;

namespace {

// Independent dense assembly of the compact flux-form Poisson system used by
// the lifting solves.
ScalarField dense_poisson_oracle(const StructuredMesh& m, const ScalarBcSet& bc,
                                 const ScalarField& rhs) {
  const int n = m.cell_count();
  DenseMatrix a(n, n);
  std::vector<double> b(n);
  for (int c = 0; c < n; ++c) b[c] = -m.cell_volume(c) * rhs[c];
  auto face = [&](int c1, int c2, double area, double delta) {
    const double k = area / delta;
    a(c1, c1) += k;
    a(c1, c2) -= k;
    a(c2, c2) += k;
    a(c2, c1) -= k;
  };
  for (int j = 0; j < m.ny(); ++j)
    for (int i = 0; i + 1 < m.nx(); ++i)
      face(m.cell_index(i, j), m.cell_index(i + 1, j), m.dy(), m.dx());
  for (int j = 0; j + 1 < m.ny(); ++j)
    for (int i = 0; i < m.nx(); ++i)
      face(m.cell_index(i, j), m.cell_index(i, j + 1), m.dx(), m.dy());
  for (const BoundaryFace& f : m.boundary_faces()) {
    const ScalarBc& sb = bc.at(f);
    const double area = f.area.norm();
    if (sb.kind == BcKind::Dirichlet) {
      const double k = area / m.wall_distance(f);
      a(f.cell, f.cell) += k;
      b[f.cell] += k * sb.value;
    } else if (sb.kind == BcKind::FixedGradient) {
      b[f.cell] += sb.value * area;
    }
  }
  ScalarField out(n);
  out.v = solve_dense(a, b);
  return out;
}

SnapshotDatabase synthetic_db(const StructuredMesh& m, const LiftingSet& lift,
                              int count, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  SnapshotDatabase db(m.nx(), m.ny(), m.n_outlets());
  for (int k = 0; k < count; ++k) {
    SnapshotRecord r;
    r.index = k;
    r.t = 0.1 * (k + 1);
    r.g_u = 0.3 + 0.1 * k;
    r.g_p.assign(m.n_outlets(), 0.0);
    for (int j = 0; j < m.n_outlets(); ++j) r.g_p[j] = 0.5 + 0.2 * j + 0.05 * k;
    // Lifted contribution plus an interior disturbance.
    r.u = VectorField(m.cell_count());
    r.p = ScalarField(m.cell_count());
    for (int c = 0; c < m.cell_count(); ++c) {
      r.u[c] = r.g_u * lift.chi_u[c] + Vec2{0.01 * dist(gen), 0.01 * dist(gen)};
      double pv = 0.01 * dist(gen);
      for (int j = 0; j < m.n_outlets(); ++j) pv += r.g_p[j] * lift.chi_p[j][c];
      r.p[c] = pv;
    }
    db.append(std::move(r));
  }
  return db;
}

}  // namespace

TEST_CASE("velocity lifting matches the dense oracle on a 1D-like channel") {
  const StructuredMesh m = StructuredMesh::channel(12, 1, 1.0, 0.5);
  const VectorField chi = solve_velocity_lifting(m);
  const ScalarField zero(m.cell_count());
  const ScalarField oracle =
      dense_poisson_oracle(m, velocity_potential_bc(1.0), zero);
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(chi[c].x == doctest::Approx(oracle[c]).epsilon(1e-9));
    CHECK(chi[c].y == 0.0);
  }
}

TEST_CASE("velocity lifting satisfies its boundary-value problem") {
  const StructuredMesh m = StructuredMesh::channel(10, 6, 0.3, 0.02);
  const VectorField chi = solve_velocity_lifting(m);
  // The discrete Laplacian with the lifting closures reproduces the residual
  // of the solved system: it must vanish everywhere.
  const VectorBcSet bc = chi_u_bc(1.0);
  const VectorField lap = laplacian(chi, m, &bc);
  double scale = 0.0;
  for (int c = 0; c < m.cell_count(); ++c) scale = std::max(scale, chi[c].norm());
  const double h2 = std::min(m.dx(), m.dy()) * std::min(m.dx(), m.dy());
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(std::abs(lap[c].x) * h2 <= 1e-8 * std::max(scale, 1.0));
    CHECK(lap[c].y == 0.0);
  }
}

TEST_CASE("pressure lifting with zero velocity lifting is constant one") {
  // Laplace with unit Dirichlet on the outlet and zero flux elsewhere: the
  // constant extension, checked against the dense oracle.
  const StructuredMesh m = StructuredMesh::channel(9, 4, 0.3, 0.02);
  const VectorField chi_zero(m.cell_count());
  const ScalarField chi_p = solve_pressure_lifting(m, chi_zero, 0);
  const ScalarField zero(m.cell_count());
  const ScalarField oracle = dense_poisson_oracle(m, chi_p_bc(0, 1), zero);
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(chi_p[c] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(chi_p[c] == doctest::Approx(oracle[c]).epsilon(1e-9));
  }
}

TEST_CASE("pressure lifting with the quadratic source matches the oracle") {
  const StructuredMesh m = StructuredMesh::channel(8, 4, 0.3, 0.02);
  const VectorField chi_u = solve_velocity_lifting(m);
  const ScalarField chi_p = solve_pressure_lifting(m, chi_u, 0);

  const VectorField inner = tensor_divergence(chi_u, chi_u, m);
  const ScalarField source = divergence(inner, m);
  ScalarField rhs(m.cell_count());
  for (int c = 0; c < m.cell_count(); ++c) rhs[c] = -source[c];
  const ScalarField oracle = dense_poisson_oracle(m, chi_p_bc(0, 1), rhs);
  double scale = 0.0;
  for (int c = 0; c < m.cell_count(); ++c)
    scale = std::max(scale, std::abs(oracle[c]));
  for (int c = 0; c < m.cell_count(); ++c)
    CHECK(std::abs(chi_p[c] - oracle[c]) <= 1e-9 * scale);
}

TEST_CASE("two-outlet pressure liftings satisfy their own problems") {
  const StructuredMesh m = StructuredMesh::channel(6, 6, 0.3, 0.02, 2);
  const VectorField chi_u = solve_velocity_lifting(m);
  const ScalarField p0 = solve_pressure_lifting(m, chi_u, 0);
  const ScalarField p1 = solve_pressure_lifting(m, chi_u, 1);
  const VectorField inner = tensor_divergence(chi_u, chi_u, m);
  const ScalarField source = divergence(inner, m);
  ScalarField rhs(m.cell_count());
  for (int c = 0; c < m.cell_count(); ++c) rhs[c] = -source[c];
  const ScalarField o0 = dense_poisson_oracle(m, chi_p_bc(0, 2), rhs);
  const ScalarField o1 = dense_poisson_oracle(m, chi_p_bc(1, 2), rhs);
  double diff = 0.0;
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(p0[c] == doctest::Approx(o0[c]).epsilon(1e-8));
    CHECK(p1[c] == doctest::Approx(o1[c]).epsilon(1e-8));
    diff = std::max(diff, std::abs(p0[c] + p1[c] - 1.0));
  }
  CHECK(diff > 1e-6);  // the two liftings are independent, their sum is not 1
}

TEST_CASE("homogenize: zero traces leave the database bit-identical") {
  const StructuredMesh m = StructuredMesh::channel(5, 3, 0.3, 0.02);
  LiftingSet lift;
  lift.chi_u = solve_velocity_lifting(m);
  lift.chi_p.push_back(solve_pressure_lifting(m, lift.chi_u, 0));
  lift.chi_p_outlet_trace = {1.0};

  SnapshotDatabase db(m.nx(), m.ny(), 1);
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    SnapshotRecord r;
    r.index = k;
    r.t = 0.1 * (k + 1);
    r.g_u = 0.0;
    r.g_p = {0.0};
    r.u = VectorField(m.cell_count());
    r.p = ScalarField(m.cell_count());
    for (int c = 0; c < m.cell_count(); ++c) {
      r.u[c] = {dist(gen), dist(gen)};
      r.p[c] = dist(gen);
    }
    db.append(std::move(r));
    lift.times.push_back(0.1 * (k + 1));
    lift.g_u.push_back(0.0);
    lift.g_p.push_back({0.0});
  }
  const SnapshotDatabase hom = homogenize(db, lift);
  for (int k = 0; k < db.size(); ++k)
    for (int c = 0; c < m.cell_count(); ++c) {
      CHECK(hom[k].u[c].x == db[k].u[c].x);
      CHECK(hom[k].u[c].y == db[k].u[c].y);
      CHECK(hom[k].p[c] == db[k].p[c]);
    }
}

TEST_CASE("homogenize: a pure lifted snapshot maps to zero") {
  const StructuredMesh m = StructuredMesh::channel(6, 4, 0.3, 0.02);
  SnapshotDatabase probe(m.nx(), m.ny(), 1);
  LiftingSet lift;
  lift.chi_u = solve_velocity_lifting(m);
  lift.chi_p.push_back(solve_pressure_lifting(m, lift.chi_u, 0));
  lift.chi_p_outlet_trace = {1.0};
  SnapshotRecord r;
  r.index = 0;
  r.t = 0.5;
  r.g_u = 1.7;
  r.g_p = {-0.8};
  r.u = VectorField(m.cell_count());
  r.p = ScalarField(m.cell_count());
  for (int c = 0; c < m.cell_count(); ++c) {
    r.u[c] = 1.7 * lift.chi_u[c];
    r.p[c] = -0.8 * lift.chi_p[0][c];
  }
  probe.append(std::move(r));
  lift.times = {0.5};
  lift.g_u = {1.7};
  lift.g_p = {{-0.8}};
  const SnapshotDatabase hom = homogenize(probe, lift);
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(std::abs(hom[0].u[c].x) < 1e-14);
    CHECK(std::abs(hom[0].u[c].y) < 1e-14);
    CHECK(std::abs(hom[0].p[c]) < 1e-14);
  }
  CHECK(hom[0].g_u == 0.0);
  CHECK(hom[0].g_p[0] == 0.0);
}

TEST_CASE("homogenized traces vanish relative to the field scale") {
  const StructuredMesh m = StructuredMesh::channel(8, 4, 0.3, 0.02);
  const LiftingSet base = [&] {
    LiftingSet l;
    l.chi_u = solve_velocity_lifting(m);
    l.chi_p.push_back(solve_pressure_lifting(m, l.chi_u, 0));
    l.chi_p_outlet_trace = {1.0};
    return l;
  }();
  LiftingSet lift = base;
  SnapshotDatabase db = synthetic_db(m, base, 5, 17);
  for (const auto& r : db.records()) {
    lift.times.push_back(r.t);
    lift.g_u.push_back(r.g_u);
    lift.g_p.push_back(r.g_p);
  }
  const SnapshotDatabase hom = homogenize(db, lift);
  double u_scale = 0.0, p_scale = 0.0;
  for (const auto& r : db.records())
    for (int c = 0; c < m.cell_count(); ++c) {
      u_scale = std::max(u_scale, r.u[c].norm());
      p_scale = std::max(p_scale, std::abs(r.p[c]));
    }
  for (const auto& r : hom.records()) {
    CHECK(std::abs(r.g_u) <= 1e-8 * u_scale);
    CHECK(std::abs(r.g_p[0]) <= 1e-8 * p_scale);
  }
}

TEST_CASE("homogenize requires a g sample for every snapshot time") {
  const StructuredMesh m = StructuredMesh::channel(4, 2, 0.3, 0.02);
  LiftingSet lift;
  lift.chi_u = solve_velocity_lifting(m);
  lift.chi_p.push_back(solve_pressure_lifting(m, lift.chi_u, 0));
  lift.chi_p_outlet_trace = {1.0};
  lift.times = {0.1};
  lift.g_u = {1.0};
  lift.g_p = {{1.0}};
  SnapshotDatabase db(m.nx(), m.ny(), 1);
  SnapshotRecord r;
  r.index = 0;
  r.t = 0.2;  // not sampled
  r.g_u = 1.0;
  r.g_p = {1.0};
  r.u = VectorField(m.cell_count());
  r.p = ScalarField(m.cell_count());
  db.append(std::move(r));
  CHECK_THROWS_AS(homogenize(db, lift), NumericalError);
}

TEST_CASE("reconstruct: pure lifting and linearity in the boundary value") {
  const StructuredMesh m = StructuredMesh::channel(6, 3, 0.3, 0.02);
  LiftingSet lift;
  lift.chi_u = solve_velocity_lifting(m);
  lift.chi_p.push_back(solve_pressure_lifting(m, lift.chi_u, 0));
  lift.chi_p_outlet_trace = {1.0};

  const std::vector<VectorField> no_modes;
  const std::vector<ScalarField> no_p_modes;
  const VectorField u1 = reconstruct_velocity({}, no_modes, lift, 0.4);
  const VectorField u2 = reconstruct_velocity({}, no_modes, lift, 0.8);
  const ScalarField p1 = reconstruct_pressure({}, no_p_modes, lift, {2.0});
  for (int c = 0; c < m.cell_count(); ++c) {
    CHECK(u1[c].x == doctest::Approx(0.4 * lift.chi_u[c].x));
    CHECK(u2[c].x == doctest::Approx(2.0 * u1[c].x).epsilon(1e-14));
    CHECK(p1[c] == doctest::Approx(2.0 * lift.chi_p[0][c]));
  }
}

TEST_CASE("reconstruct rejects mismatched coefficient lengths") {
  const StructuredMesh m = StructuredMesh::channel(4, 2, 0.3, 0.02);
  LiftingSet lift;
  lift.chi_u = solve_velocity_lifting(m);
  lift.chi_p.push_back(solve_pressure_lifting(m, lift.chi_u, 0));
  lift.chi_p_outlet_trace = {1.0};
  const std::vector<VectorField> modes{lift.chi_u};
  CHECK_THROWS_AS(reconstruct_velocity({1.0, 2.0}, modes, lift, 0.0),
                  DimensionError);
}
