#pragma once

// Manifold-agnostic spectral field interface over the torus and sphere
// engines: gradients, divergence, Laplacians and their inverse, the Leray
// projection, the advective divergence and pressure force, Sobolev norms,
// and fitting Monte-Carlo point values back to a spectral field.

#include <optional>
#include <string>
#include <vector>

#include "bundleflow/spectral_sphere.hpp"
#include "bundleflow/spectral_torus.hpp"

namespace bundleflow {

// Viscosity operator choice for the Navier-Stokes solvers and oracles.
enum class LaplacianMode { Bochner, HodgeDeRham };

struct FieldResolution {
  ManifoldKind kind = ManifoldKind::FlatTorus2;
  TorusResolution tor{};
  SphereResolution sph{};

  bool operator==(const FieldResolution&) const = default;
  static FieldResolution torus(int K, int N) {
    FieldResolution r;
    r.kind = ManifoldKind::FlatTorus2;
    r.tor = {K, N};
    return r;
  }
  static FieldResolution sphere(int L) {
    FieldResolution r;
    r.kind = ManifoldKind::UnitSphere2;
    r.sph = SphereResolution::standard(L);
    return r;
  }
  static FieldResolution sphere(int L, int n_lat, int n_lon) {
    FieldResolution r;
    r.kind = ManifoldKind::UnitSphere2;
    r.sph = {L, n_lat, n_lon};
    return r;
  }
};

// Sink for numerical warnings that must surface in run manifests.
using WarningSink = std::vector<std::string>;

struct ScalarFieldSpec {
  FieldResolution res;
  TorusScalar tor;
  SphereScalar sph;

  static ScalarFieldSpec zero(const FieldResolution& r);
  ManifoldKind kind() const { return res.kind; }
  double eval(const Point& p) const;
  double mean() const;
  double l2norm() const;
};

struct VectorFieldSpec {
  FieldResolution res;
  TorusScalar tor_x, tor_y;  // angle components
  SphereVector sph;          // Helmholtz pair

  static VectorFieldSpec zero(const FieldResolution& r);
  ManifoldKind kind() const { return res.kind; }
  TangentVector eval(const Point& p) const;
  double l2norm() const;
};

ScalarFieldSpec add(const ScalarFieldSpec& a, const ScalarFieldSpec& b,
                    double sa = 1.0, double sb = 1.0);
VectorFieldSpec add(const VectorFieldSpec& a, const VectorFieldSpec& b,
                    double sa = 1.0, double sb = 1.0);
VectorFieldSpec scale(const VectorFieldSpec& a, double s);

VectorFieldSpec grad(const ScalarFieldSpec& f);
ScalarFieldSpec divergence(const VectorFieldSpec& v);
// Surface rotation of a scalar: on the torus (-d_y f, d_x f); on the sphere
// x cross grad f.
VectorFieldSpec rot(const ScalarFieldSpec& f);

ScalarFieldSpec laplace_beltrami(const ScalarFieldSpec& f);
// Zero-mean inverse of the Laplace-Beltrami operator. Inputs with
// |mean| > 1e-10 have the mean subtracted and a warning recorded.
ScalarFieldSpec laplace_inverse(const ScalarFieldSpec& f,
                                WarningSink* warnings = nullptr);

// Bochner Laplacian (trace of nabla^2) and Hodge-de Rham -box = Bochner - Ric.
VectorFieldSpec laplacian_bochner(const VectorFieldSpec& v);
VectorFieldSpec laplacian_hodge(const VectorFieldSpec& v);

// P(v) = v - grad lap^-1 div v.
VectorFieldSpec leray_project(const VectorFieldSpec& v);

// div(nabla_v w), dealiased collocation product projected to the truncation.
ScalarFieldSpec advective_divergence(const VectorFieldSpec& v,
                                     const VectorFieldSpec& w);

// <v, grad f> as a spectral scalar (dealiased).
ScalarFieldSpec scalar_advection(const VectorFieldSpec& v,
                                 const ScalarFieldSpec& f);

// F_v = grad lap^-1 (div(nabla_v v) - nu div(Ric# v)). Requires
// ||div v||_2 <= 1e-8. The hodge flag is accepted for interface symmetry and
// has no effect here.
VectorFieldSpec pressure_force(const VectorFieldSpec& v, double nu,
                               bool hodge = false,
                               WarningSink* warnings = nullptr);

// W^{order,p} norm by collocation quadrature of |v|^p + sum |nabla^i v|^p.
double sobolev_norm(const VectorFieldSpec& v, int order, double p);

// Pointwise covariant derivative nabla_w v from the spectral representation.
TangentVector covariant_derivative_spectral(const VectorFieldSpec& v,
                                            const Point& p,
                                            const TangentVector& w);

std::vector<Point> collocation_points(const FieldResolution& r);
std::vector<double> quadrature_weights(const FieldResolution& r);

struct FitResult {
  VectorFieldSpec field;
  double residual_rms = 0.0;
};
// Samples must sit on the collocation grid of `r`, in grid row-major order.
FitResult fit_field(const FieldResolution& r,
                    const std::vector<TangentVector>& samples);

// Velocity field sampled on a strictly increasing time grid, linear in time
// between nodes.
struct TimeField {
  std::vector<double> t;
  std::vector<VectorFieldSpec> f;

  void validate_grid() const;
  // Index pair and blend weight for time s (clamped to the grid range).
  void locate(double s, int& i0, int& i1, double& w1) const;
  VectorFieldSpec at_time(double s) const;
  TangentVector eval(double s, const Point& p) const;
};

double sup_sobolev_distance(const TimeField& a, const TimeField& b, int order,
                            double p);

}  // namespace bundleflow
