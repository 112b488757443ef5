#pragma once

#include <cmath>
#include <vector>

#include "hemorom/errors.hpp"
#include "hemorom/mesh.hpp"

namespace hemorom {

/// One real value per cell (row-major).
struct ScalarField {
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(int n, double init = 0.0) : v(n, init) {}

  int size() const { return static_cast<int>(v.size()); }
  double& operator[](int c) { return v[c]; }
  double operator[](int c) const { return v[c]; }
};

/// One 2-vector per cell (row-major).
struct VectorField {
  std::vector<Vec2> v;

  VectorField() = default;
  explicit VectorField(int n, Vec2 init = {}) : v(n, init) {}

  int size() const { return static_cast<int>(v.size()); }
  Vec2& operator[](int c) { return v[c]; }
  const Vec2& operator[](int c) const { return v[c]; }
};

inline bool all_finite(const ScalarField& f) {
  for (double x : f.v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const VectorField& f) {
  for (const Vec2& x : f.v)
    if (!std::isfinite(x.x) || !std::isfinite(x.y)) return false;
  return true;
}

inline void check_size(const ScalarField& f, const StructuredMesh& mesh,
                       const char* what) {
  if (f.size() != mesh.cell_count())
    throw DimensionError(std::string(what) + ": field size " +
                         std::to_string(f.size()) + " != cell count " +
                         std::to_string(mesh.cell_count()));
}

inline void check_size(const VectorField& f, const StructuredMesh& mesh,
                       const char* what) {
  if (f.size() != mesh.cell_count())
    throw DimensionError(std::string(what) + ": field size " +
                         std::to_string(f.size()) + " != cell count " +
                         std::to_string(mesh.cell_count()));
}

// Field arithmetic used by homogenization, reconstruction and error norms.

inline ScalarField axpy(double a, const ScalarField& x, const ScalarField& y) {
  ScalarField r(y.size());
  for (int c = 0; c < y.size(); ++c) r[c] = a * x[c] + y[c];
  return r;
}

inline VectorField axpy(double a, const VectorField& x, const VectorField& y) {
  VectorField r(y.size());
  for (int c = 0; c < y.size(); ++c) r[c] = a * x[c] + y[c];
  return r;
}

/// Flatten to a plain coefficient vector (vector fields interleave x, y).
std::vector<double> flatten(const ScalarField& f);
std::vector<double> flatten(const VectorField& f);
ScalarField unflatten_scalar(const std::vector<double>& a);
VectorField unflatten_vector(const std::vector<double>& a);

/// Quadrature weights matching flatten(): cell volumes, duplicated per
/// component for vector fields.
std::vector<double> scalar_weights(const StructuredMesh& mesh);
std::vector<double> vector_weights(const StructuredMesh& mesh);

}  // namespace hemorom
