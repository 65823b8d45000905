#pragma once

// Spherical-harmonic representation of fields on the unit 2-sphere.
//
// Scalars carry real orthonormal Y_lm coefficients for l <= L. Tangent vector
// fields are stored as a Helmholtz pair (psi, phi) of scalar potentials with
//   v = rot psi + grad phi,   rot f := x cross grad f,
// which makes div, the Leray projection and the Laplacians diagonal.
//
// Collocation: Gauss-Legendre colatitudes x uniform longitudes. Pointwise
// evaluation away from the grid uses pole-stable Legendre kernels, so Monte
// Carlo paths may pass arbitrarily close to the poles.

#include <memory>
#include <vector>

#include "bundleflow/geometry.hpp"

namespace bundleflow {

struct SphereResolution {
  int L = 15;
  int n_lat = 32;
  int n_lon = 64;

  bool operator==(const SphereResolution&) const = default;
  static SphereResolution standard(int L) {
    return {L, 2 * (L + 1), std::max(8, 4 * L + 4)};
  }
};

void validate(const SphereResolution& r);

inline int sh_count(int L) { return (L + 1) * (L + 1); }
inline int sh_index(int l, int m) { return l * l + l + m; }  // m in [-l, l]

struct SphereScalar {
  SphereResolution res;
  std::vector<double> a;  // sh_count(L) real coefficients

  static SphereScalar zero(const SphereResolution& r);
  double& at(int l, int m) { return a[sh_index(l, m)]; }
  double at(int l, int m) const { return a[sh_index(l, m)]; }

  double mean() const;    // integral / area
  double l2norm() const;  // sqrt(integral of f^2)
  double eval(const Point& p) const;
};

// Tangent field as Helmholtz potentials. l = 0 components are immaterial and
// kept at zero.
struct SphereVector {
  SphereResolution res;
  std::vector<double> psi, phi;

  static SphereVector zero(const SphereResolution& r);
};

SphereScalar laplacian(const SphereScalar& f);
SphereScalar laplacian_inverse(const SphereScalar& f, double* dropped_mean);
SphereScalar add(const SphereScalar& a, const SphereScalar& b, double sa = 1.0,
                 double sb = 1.0);

// Gradient/derivative ladders of the normalized Legendre functions at one
// colatitude; packed index m >= 0: pack(l, m) = l(l+1)/2 + m.
inline int leg_pack(int l, int m) { return l * (l + 1) / 2 + m; }

struct LegendreLadder {
  int L = -1;
  int depth = 0;                      // number of theta-derivative levels
  std::vector<double> P, P1, P2, P3;  // d^k/dtheta^k of normalized P_l^m
  std::vector<double> Q, Q1, Q2;      // (m/sin) P and theta derivatives

  // depth: 1 = P, Q; 2 = + P1; 3 = + Q1, P2; 4 = + Q2, P3.
  void compute(int L, double costh, double sinth, int depth);
};

// Immutable per-resolution grid with node tables; shared via cache.
class SphereGrid {
 public:
  static std::shared_ptr<const SphereGrid> get(const SphereResolution& r);

  SphereResolution res;
  std::vector<double> xnode, wnode;       // Gauss-Legendre in cos(theta)
  std::vector<double> sinth, costh;       // per latitude node
  std::vector<double> phi;                // longitudes
  std::vector<LegendreLadder> lad;        // per latitude node, depth 4

  int n_points() const { return res.n_lat * res.n_lon; }
  std::vector<Point> points() const;      // row-major (lat, lon)
  Point point(int i, int j) const;
  double quad_weight(int i) const;        // includes longitude factor

  std::vector<double> synth_scalar(const SphereScalar& f) const;
  SphereScalar analyze_scalar(const std::vector<double>& grid) const;

  // Vector synthesis/analysis in (e_theta, e_phi) components at the nodes.
  void synth_vector(const SphereVector& v, std::vector<double>& vth,
                    std::vector<double>& vph) const;
  struct VectorFit {
    SphereVector field;
    double residual_rms;
  };
  VectorFit analyze_vector(const std::vector<double>& vth,
                           const std::vector<double>& vph) const;

  // Pointwise jets on the grid: value, first and second covariant derivative
  // components in the orthonormal frame (e_theta, e_phi).
  struct VectorJet {
    // Arrays sized n_points, index i*n_lon+j.
    std::vector<double> vth, vph;
    std::vector<double> t[2][2];     // T_ab = <nabla_{e_a} v, e_b>
    std::vector<double> s[2][2][2];  // (nabla^2 v)_{a,b,c}
  };
  void vector_jet(const SphereVector& v, VectorJet& jet,
                  bool second_order) const;

 private:
  explicit SphereGrid(const SphereResolution& r);
};

// Pointwise evaluation (workspace reused across calls by one thread).
struct SphereWorkspace {
  LegendreLadder lad;
  std::vector<double> cm, sm;  // cos(m phi), sin(m phi)
};

double sphere_eval_scalar(const SphereScalar& f, const Point& p,
                          SphereWorkspace& ws);

// Value of v at p (ambient components). When grad is non-null it receives
// T_ab = <nabla_{e_a} v, e_b> in the local (e_theta, e_phi) frame together
// with that frame, for consumers that need nabla_w v at path points.
struct SphereGradFrame {
  std::array<TangentVector, 2> basis;
  double t[2][2];
};
TangentVector sphere_eval_vector(const SphereVector& v, const Point& p,
                                 SphereWorkspace& ws,
                                 SphereGradFrame* grad = nullptr);

// Flat coefficient view used by the Monte Carlo kernel: evaluates a vector
// field (and nothing else) with caller-provided workspace.
struct SphereVectorEvalRef {
  int L = 0;
  const double* psi = nullptr;
  const double* phi = nullptr;
};
TangentVector sphere_eval_vector_ref(const SphereVectorEvalRef& v,
                                     const Point& p, SphereWorkspace& ws);

std::vector<double> gauss_legendre_nodes(int n, std::vector<double>& weights);

}  // namespace bundleflow
