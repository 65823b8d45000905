#pragma once

// Embedded-manifold primitives for the two supported manifolds:
//   - flat 2-torus, angle coordinates (x, y) with period 2*pi, isometrically
//     embedded in R^4 as (cos x, sin x, cos y, sin y);
//   - unit 2-sphere, ambient coordinates in R^3.
// Both carry their Levi-Civita connection; geodesics and parallel transport
// are exact (translation on the torus, great circles on the sphere).

#include <array>
#include <functional>
#include <vector>

namespace bundleflow {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

enum class ManifoldKind { FlatTorus2, UnitSphere2 };

struct Manifold {
  ManifoldKind kind;

  int dim() const { return 2; }
  int ambient_dim() const { return kind == ManifoldKind::FlatTorus2 ? 4 : 3; }
  // Number of embedding gradient fields A_i driving the noise.
  int noise_count() const { return ambient_dim(); }
  double volume() const;
  const char* name() const;
};

// Position on the manifold. Torus: a[0], a[1] are angles reduced mod 2*pi
// (a[2] unused). Sphere: a = unit vector in R^3.
struct Point {
  ManifoldKind kind{ManifoldKind::FlatTorus2};
  std::array<double, 3> a{};

  static Point torus(double x, double y);
  static Point sphere(double x, double y, double z);
};

// Tangent vector at `base`. Torus: c[0], c[1] are components in the
// coordinate frame (d/dx, d/dy). Sphere: c is an ambient vector with
// base . c = 0.
struct TangentVector {
  Point base;
  std::array<double, 3> c{};
};

// Ambient vector of the embedding space (R^4 for the torus, R^3 for the
// sphere; unused entries zero).
using AmbientVector = std::array<double, 4>;

using VectorSampler = std::function<TangentVector(const Point&)>;

double wrap_angle(double a);

void validate_point(const Point& p);
void validate_tangent(const TangentVector& v);

// Riemannian inner product <v, w> at p. Throws std::invalid_argument if the
// base points disagree beyond tolerance.
double metric(const Point& p, const TangentVector& v, const TangentVector& w);

double norm(const TangentVector& v);

// Orthogonal projection Pi(p) of an ambient vector onto T_p M.
TangentVector project_to_tangent(const Point& p, const AmbientVector& a);

// The fields A_i = Pi(.) e_i, gradients of the embedding coordinates.
// They satisfy sum_i <A_i, w>^2 = |w|^2 and sum_i nabla_{A_i} A_i = 0.
std::vector<TangentVector> embedding_fields(const Point& p);
TangentVector embedding_field(const Point& p, int i);

// Closed form of nabla_r A_i at the base point of r.
TangentVector embedding_field_derivative(const Point& p, int i,
                                         const TangentVector& r);

// Levi-Civita covariant derivative nabla_w v of a black-box field, by central
// finite differences along the geodesic through p with velocity w followed by
// tangent projection. Step size 1e-5.
TangentVector covariant_derivative(const VectorSampler& v, const Point& p,
                                   const TangentVector& w);

// div v(p) = sum_i <nabla_{E_i} v, E_i> in an orthonormal basis.
double divergence(const VectorSampler& v, const Point& p);

// Ric^sharp: zero on the torus, identity on the unit sphere.
TangentVector ricci_sharp(const Point& p, const TangentVector& v);

Point exp_map(const Point& p, const TangentVector& v);

// Parallel transport of u along t -> exp(p, t v), t in [0, 1].
TangentVector parallel_transport(const Point& p, const TangentVector& v,
                                 const TangentVector& u);

// Inverse of exp_map (sphere: minimal geodesic; ill-posed at antipodes).
TangentVector log_map(const Point& p, const Point& q);

double geodesic_distance(const Point& p, const Point& q);

// Canonical orthonormal basis at p: the coordinate frame on the torus; the
// (colatitude, longitude) unit vectors on the sphere with a fixed fallback
// within 1e-8 of the poles.
std::array<TangentVector, 2> canonical_basis(const Point& p);

}  // namespace bundleflow
