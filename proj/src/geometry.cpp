#include "bundleflow/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bundleflow {

namespace {

constexpr double kBaseTol = 1e-9;

double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

std::array<double, 3> cross3(const std::array<double, 3>& a,
                             const std::array<double, 3>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

double angle_gap(double a, double b) {
  double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

void require_same_base(const Point& p, const Point& q, const char* what) {
  if (p.kind != q.kind) throw std::invalid_argument(std::string(what) + ": manifold mismatch");
  double d = 0;
  if (p.kind == ManifoldKind::FlatTorus2) {
    d = std::max(angle_gap(p.a[0], q.a[0]), angle_gap(p.a[1], q.a[1]));
  } else {
    d = std::sqrt((p.a[0] - q.a[0]) * (p.a[0] - q.a[0]) +
                  (p.a[1] - q.a[1]) * (p.a[1] - q.a[1]) +
                  (p.a[2] - q.a[2]) * (p.a[2] - q.a[2]));
  }
  if (d > kBaseTol)
    throw std::invalid_argument(std::string(what) + ": base point mismatch");
}

}  // namespace

double Manifold::volume() const {
  return kind == ManifoldKind::FlatTorus2 ? kTwoPi * kTwoPi : 2.0 * kTwoPi;
}

const char* Manifold::name() const {
  return kind == ManifoldKind::FlatTorus2 ? "torus2" : "sphere2";
}

double wrap_angle(double a) {
  double r = a - kTwoPi * std::floor(a / kTwoPi);
  if (r >= kTwoPi) r -= kTwoPi;
  if (r < 0) r = 0;
  return r;
}

Point Point::torus(double x, double y) {
  Point p;
  p.kind = ManifoldKind::FlatTorus2;
  p.a = {wrap_angle(x), wrap_angle(y), 0.0};
  return p;
}

Point Point::sphere(double x, double y, double z) {
  double n = std::sqrt(x * x + y * y + z * z);
  if (!(n > 0))
    throw std::invalid_argument("Point::sphere: zero vector");
  Point p;
  p.kind = ManifoldKind::UnitSphere2;
  p.a = {x / n, y / n, z / n};
  return p;
}

void validate_point(const Point& p) {
  if (p.kind == ManifoldKind::UnitSphere2) {
    double n = std::sqrt(dot3(p.a, p.a));
    if (std::fabs(n - 1.0) > 1e-12)
      throw std::invalid_argument("sphere point is not unit norm");
  }
}

void validate_tangent(const TangentVector& v) {
  validate_point(v.base);
  if (v.base.kind == ManifoldKind::UnitSphere2) {
    if (std::fabs(dot3(v.base.a, v.c)) > 1e-10 * std::max(1.0, norm(v)))
      throw std::invalid_argument("sphere tangent vector is not tangent");
  }
}

double metric(const Point& p, const TangentVector& v, const TangentVector& w) {
  require_same_base(p, v.base, "metric");
  require_same_base(p, w.base, "metric");
  if (p.kind == ManifoldKind::FlatTorus2) return v.c[0] * w.c[0] + v.c[1] * w.c[1];
  return dot3(v.c, w.c);
}

double norm(const TangentVector& v) {
  double s = v.base.kind == ManifoldKind::FlatTorus2
                 ? v.c[0] * v.c[0] + v.c[1] * v.c[1]
                 : dot3(v.c, v.c);
  return std::sqrt(s);
}

TangentVector project_to_tangent(const Point& p, const AmbientVector& a) {
  TangentVector t;
  t.base = p;
  if (p.kind == ManifoldKind::FlatTorus2) {
    // Pushforwards of d/dx, d/dy under (cos x, sin x, cos y, sin y) are
    // orthonormal, so the projection has components <a, dPhi(d/dx)> etc.
    double sx = std::sin(p.a[0]), cx = std::cos(p.a[0]);
    double sy = std::sin(p.a[1]), cy = std::cos(p.a[1]);
    t.c = {-sx * a[0] + cx * a[1], -sy * a[2] + cy * a[3], 0.0};
  } else {
    double r = a[0] * p.a[0] + a[1] * p.a[1] + a[2] * p.a[2];
    t.c = {a[0] - r * p.a[0], a[1] - r * p.a[1], a[2] - r * p.a[2]};
  }
  return t;
}

std::vector<TangentVector> embedding_fields(const Point& p) {
  int k = Manifold{p.kind}.noise_count();
  std::vector<TangentVector> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) out.push_back(embedding_field(p, i));
  return out;
}

TangentVector embedding_field(const Point& p, int i) {
  TangentVector t;
  t.base = p;
  if (p.kind == ManifoldKind::FlatTorus2) {
    switch (i) {
      case 0: t.c = {-std::sin(p.a[0]), 0.0, 0.0}; break;
      case 1: t.c = {std::cos(p.a[0]), 0.0, 0.0}; break;
      case 2: t.c = {0.0, -std::sin(p.a[1]), 0.0}; break;
      case 3: t.c = {0.0, std::cos(p.a[1]), 0.0}; break;
      default: throw std::invalid_argument("embedding_field: index");
    }
  } else {
    if (i < 0 || i > 2) throw std::invalid_argument("embedding_field: index");
    t.c = {-p.a[i] * p.a[0], -p.a[i] * p.a[1], -p.a[i] * p.a[2]};
    t.c[i] += 1.0;
  }
  return t;
}

TangentVector embedding_field_derivative(const Point& p, int i,
                                         const TangentVector& r) {
  TangentVector t;
  t.base = p;
  if (p.kind == ManifoldKind::FlatTorus2) {
    switch (i) {
      case 0: t.c = {-std::cos(p.a[0]) * r.c[0], 0.0, 0.0}; break;
      case 1: t.c = {-std::sin(p.a[0]) * r.c[0], 0.0, 0.0}; break;
      case 2: t.c = {0.0, -std::cos(p.a[1]) * r.c[1], 0.0}; break;
      case 3: t.c = {0.0, -std::sin(p.a[1]) * r.c[1], 0.0}; break;
      default: throw std::invalid_argument("embedding_field_derivative: index");
    }
  } else {
    // nabla_r (Pi(.) e_i) = -x_i r on the unit sphere.
    if (i < 0 || i > 2) throw std::invalid_argument("embedding_field_derivative: index");
    t.c = {-p.a[i] * r.c[0], -p.a[i] * r.c[1], -p.a[i] * r.c[2]};
  }
  return t;
}

TangentVector covariant_derivative(const VectorSampler& v, const Point& p,
                                   const TangentVector& w) {
  constexpr double h = 1e-5;
  TangentVector step = w;
  for (auto& x : step.c) x *= h;
  TangentVector neg = w;
  for (auto& x : neg.c) x *= -h;
  TangentVector vp = v(exp_map(p, step));
  TangentVector vm = v(exp_map(p, neg));
  AmbientVector d{};
  for (int i = 0; i < 3; ++i) d[i] = (vp.c[i] - vm.c[i]) / (2.0 * h);
  if (p.kind == ManifoldKind::FlatTorus2) {
    TangentVector t;
    t.base = p;
    t.c = {d[0], d[1], 0.0};
    return t;
  }
  return project_to_tangent(p, d);
}

double divergence(const VectorSampler& v, const Point& p) {
  auto basis = canonical_basis(p);
  double s = 0;
  for (const auto& e : basis) s += metric(p, covariant_derivative(v, p, e), e);
  return s;
}

TangentVector ricci_sharp(const Point& p, const TangentVector& v) {
  require_same_base(p, v.base, "ricci_sharp");
  if (p.kind == ManifoldKind::FlatTorus2) {
    TangentVector t;
    t.base = p;
    return t;
  }
  return v;
}

Point exp_map(const Point& p, const TangentVector& v) {
  require_same_base(p, v.base, "exp_map");
  if (p.kind == ManifoldKind::FlatTorus2)
    return Point::torus(p.a[0] + v.c[0], p.a[1] + v.c[1]);
  double th = norm(v);
  if (th < 1e-300) return p;
  double c = std::cos(th), s = std::sin(th);
  std::array<double, 3> q{};
  for (int i = 0; i < 3; ++i) q[i] = c * p.a[i] + s * v.c[i] / th;
  return Point::sphere(q[0], q[1], q[2]);
}

TangentVector parallel_transport(const Point& p, const TangentVector& v,
                                 const TangentVector& u) {
  require_same_base(p, v.base, "parallel_transport");
  require_same_base(p, u.base, "parallel_transport");
  Point q = exp_map(p, v);
  TangentVector out;
  out.base = q;
  if (p.kind == ManifoldKind::FlatTorus2) {
    out.c = u.c;
    return out;
  }
  double th = norm(v);
  if (th < 1e-300) {
    out.c = u.c;
    return out;
  }
  std::array<double, 3> dir{v.c[0] / th, v.c[1] / th, v.c[2] / th};
  double along = dot3(u.c, dir);
  double c = std::cos(th), s = std::sin(th);
  for (int i = 0; i < 3; ++i)
    out.c[i] = u.c[i] - along * dir[i] + along * (c * dir[i] - s * p.a[i]);
  return out;
}

TangentVector log_map(const Point& p, const Point& q) {
  if (p.kind != q.kind) throw std::invalid_argument("log_map: manifold mismatch");
  TangentVector t;
  t.base = p;
  if (p.kind == ManifoldKind::FlatTorus2) {
    for (int i = 0; i < 2; ++i) {
      double d = wrap_angle(q.a[i] - p.a[i]);
      if (d > kTwoPi / 2) d -= kTwoPi;  // shortest representative
      t.c[i] = d;
    }
    return t;
  }
  double cth = std::clamp(dot3(p.a, q.a), -1.0, 1.0);
  std::array<double, 3> perp{};
  for (int i = 0; i < 3; ++i) perp[i] = q.a[i] - cth * p.a[i];
  double n = std::sqrt(dot3(perp, perp));
  double th = std::acos(cth);
  if (n < 1e-300) {
    if (cth < 0) throw std::invalid_argument("log_map: antipodal points");
    return t;
  }
  for (int i = 0; i < 3; ++i) t.c[i] = th * perp[i] / n;
  return t;
}

double geodesic_distance(const Point& p, const Point& q) {
  return norm(log_map(p, q));
}

std::array<TangentVector, 2> canonical_basis(const Point& p) {
  std::array<TangentVector, 2> b;
  b[0].base = p;
  b[1].base = p;
  if (p.kind == ManifoldKind::FlatTorus2) {
    b[0].c = {1.0, 0.0, 0.0};
    b[1].c = {0.0, 1.0, 0.0};
    return b;
  }
  double sth = std::sqrt(p.a[0] * p.a[0] + p.a[1] * p.a[1]);
  if (sth > 1e-8) {
    double z = p.a[2];
    b[0].c = {z * p.a[0] / sth, z * p.a[1] / sth, -sth};          // e_theta
    b[1].c = {-p.a[1] / sth, p.a[0] / sth, 0.0};                  // e_phi
  } else {
    AmbientVector e1{1.0, 0.0, 0.0, 0.0};
    TangentVector t = project_to_tangent(p, e1);
    double n = norm(t);
    for (auto& x : t.c) x /= n;
    b[0] = t;
    b[1].c = cross3(p.a, t.c);
  }
  return b;
}

}  // namespace bundleflow
