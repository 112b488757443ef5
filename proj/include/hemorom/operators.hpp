#pragma once

#include <vector>

#include "hemorom/field.hpp"
#include "hemorom/mesh.hpp"

namespace hemorom {

/// Boundary closure for a single mesh region.
///   ZeroGradient  : face value = one-sided cell value, zero normal derivative
///   Dirichlet     : face value prescribed
///   FixedGradient : normal derivative prescribed (face value extrapolated)
enum class BcKind { ZeroGradient, Dirichlet, FixedGradient };

struct ScalarBc {
  BcKind kind = BcKind::ZeroGradient;
  double value = 0.0;
};

struct VectorBc {
  BcKind kind = BcKind::ZeroGradient;
  Vec2 value{};
};

struct ScalarBcSet {
  ScalarBc inlet, wall;
  std::vector<ScalarBc> outlet;  ///< per outlet index; size 1 broadcasts

  const ScalarBc& at(const BoundaryFace& f) const;
  static ScalarBcSet all_zero_gradient() { return {}; }
  static ScalarBcSet all_dirichlet(double value);
};

struct VectorBcSet {
  VectorBc inlet, wall;
  std::vector<VectorBc> outlet;

  const VectorBc& at(const BoundaryFace& f) const;
  static VectorBcSet all_zero_gradient() { return {}; }
  static VectorBcSet all_dirichlet(Vec2 value);
};

/// Face value of a field on a boundary face under the given closure.
double face_value(const ScalarField& f, const BoundaryFace& bf,
                  const ScalarBc& bc, const StructuredMesh& mesh);
Vec2 face_value(const VectorField& f, const BoundaryFace& bf,
                const VectorBc& bc, const StructuredMesh& mesh);

/// Volume-weighted L2 pairing: sum over cells of vol * f * g.
double inner_product(const ScalarField& f, const ScalarField& g,
                     const StructuredMesh& mesh);
double inner_product(const VectorField& f, const VectorField& g,
                     const StructuredMesh& mesh);

inline double weighted_norm(const ScalarField& f, const StructuredMesh& m) {
  return std::sqrt(inner_product(f, f, m));
}
inline double weighted_norm(const VectorField& f, const StructuredMesh& m) {
  return std::sqrt(inner_product(f, f, m));
}

/// Gauss cell gradient: (1/vol) sum over faces of p_face * A. Interior faces
/// take the arithmetic mean of the adjacent cells; boundary faces follow `bc`
/// (one-sided cell value when no bc is given).
VectorField gradient(const ScalarField& p, const StructuredMesh& mesh,
                     const ScalarBcSet* bc = nullptr);

/// Per-component Gauss gradients of a vector field; returns the gradients of
/// the x and y components as a pair of vector fields.
std::pair<VectorField, VectorField> gradient(const VectorField& u,
                                             const StructuredMesh& mesh,
                                             const VectorBcSet* bc = nullptr);

/// (1/vol) sum over faces of u_face . A.
ScalarField divergence(const VectorField& u, const StructuredMesh& mesh,
                       const VectorBcSet* bc = nullptr);

/// Compact Laplacian with two-point face-normal gradients. Dirichlet faces use
/// the half-cell one-sided difference, FixedGradient uses the given slope, and
/// ZeroGradient faces carry no flux.
ScalarField laplacian(const ScalarField& f, const StructuredMesh& mesh,
                      const ScalarBcSet* bc = nullptr);
VectorField laplacian(const VectorField& f, const StructuredMesh& mesh,
                      const VectorBcSet* bc = nullptr);

/// FV divergence of the outer product: (1/vol) sum over faces of
/// (a_face . A) b_face. Used for convection and for the quadratic sources.
VectorField tensor_divergence(const VectorField& a, const VectorField& b,
                              const StructuredMesh& mesh,
                              const VectorBcSet* bc_a = nullptr,
                              const VectorBcSet* bc_b = nullptr);

/// Boundary integral over the union of outlet faces of f_face * (grad g . n),
/// with the face value of f and the normal gradient of g taken from their
/// closures (two-point one-sided gradient for Dirichlet g).
double outlet_boundary_integral(const ScalarField& f, const ScalarBcSet& f_bc,
                                const ScalarField& g, const ScalarBcSet& g_bc,
                                const StructuredMesh& mesh);

}  // namespace hemorom
