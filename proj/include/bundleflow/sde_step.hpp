#pragma once

// Single-step integrators for the frame-bundle SDE, shared by the ensemble
// engine and the backward-solver kernel. One step moves the base point by
//   delta = sqrt(2 nu) sum_i A_i dB_i + drift dt
// with a Heun predictor-corrector realizing the Stratonovich convention, then
// transports the frame along the final geodesic. Geodesics and transport are
// exact on both supported manifolds.

#include <cmath>

#include "bundleflow/frame.hpp"

namespace bundleflow::detail {

// sum_i A_i(x) db_i scaled by s, plus drift components (already scaled by dt)
// passed in `dr`. Torus: angle components; sphere: ambient tangent.
inline void noise_increment(const Point& x, const double* db, double s,
                            double* out) {
  if (x.kind == ManifoldKind::FlatTorus2) {
    double sx = std::sin(x.a[0]), cx = std::cos(x.a[0]);
    double sy = std::sin(x.a[1]), cy = std::cos(x.a[1]);
    out[0] = s * (-sx * db[0] + cx * db[1]);
    out[1] = s * (-sy * db[2] + cy * db[3]);
    out[2] = 0.0;
  } else {
    double r = x.a[0] * db[0] + x.a[1] * db[1] + x.a[2] * db[2];
    out[0] = s * (db[0] - r * x.a[0]);
    out[1] = s * (db[1] - r * x.a[1]);
    out[2] = s * (db[2] - r * x.a[2]);
  }
}

// DriftFn: void(const Point&, bool predictor, double* out3) writing tangent
// components scaled by dt (predictor = evaluation at the trial point / next
// time level).
template <class DriftFn>
inline void heun_geodesic_step(Point& x, Frame& u, const double* db,
                               double sqrt2nu, const DriftFn& drift) {
  TangentVector d1;
  d1.base = x;
  noise_increment(x, db, sqrt2nu, d1.c.data());
  double dr[3];
  drift(x, false, dr);
  for (int i = 0; i < 3; ++i) d1.c[i] += dr[i];

  Point xt = exp_map(x, d1);
  TangentVector d2;
  d2.base = xt;
  noise_increment(xt, db, sqrt2nu, d2.c.data());
  drift(xt, true, dr);
  for (int i = 0; i < 3; ++i) d2.c[i] += dr[i];

  TangentVector delta;
  delta.base = x;
  if (x.kind == ManifoldKind::FlatTorus2) {
    for (int i = 0; i < 3; ++i) delta.c[i] = 0.5 * (d1.c[i] + d2.c[i]);
  } else {
    TangentVector back = parallel_transport(xt, log_map(xt, x), d2);
    for (int i = 0; i < 3; ++i) delta.c[i] = 0.5 * (d1.c[i] + back.c[i]);
  }
  u = transport_frame(u, delta);
  x = u.base;
}

// Ambient Euler step followed by projection back to the manifold; cross-check
// scheme for the geodesic integrator.
template <class DriftFn>
inline void projected_euler_step(Point& x, Frame& u, const double* db,
                                 double sqrt2nu, const DriftFn& drift) {
  double dr[3];
  drift(x, false, dr);
  if (x.kind == ManifoldKind::FlatTorus2) {
    double sx = std::sin(x.a[0]), cx = std::cos(x.a[0]);
    double sy = std::sin(x.a[1]), cy = std::cos(x.a[1]);
    // Ambient R^4 step on the Clifford embedding; A_i push forward to
    // (tangent) multiples of the unit circle tangents.
    double tx = sqrt2nu * (-sx * db[0] + cx * db[1]) + dr[0];
    double ty = sqrt2nu * (-sy * db[2] + cy * db[3]) + dr[1];
    double y0 = cx - sx * tx, y1 = sx + cx * tx;
    double y2 = cy - sy * ty, y3 = sy + cy * ty;
    Point nx = Point::torus(std::atan2(y1, y0), std::atan2(y3, y2));
    Frame nu_;
    nu_.base = nx;
    for (int i = 0; i < 2; ++i) {
      nu_.e[i].base = nx;
      nu_.e[i].c = u.e[i].c;
    }
    u = orthonormalized(nu_);
    x = nx;
    return;
  }
  double y[3];
  double r = x.a[0] * db[0] + x.a[1] * db[1] + x.a[2] * db[2];
  for (int i = 0; i < 3; ++i)
    y[i] = x.a[i] + sqrt2nu * (db[i] - r * x.a[i]) + dr[i];
  Point nx = Point::sphere(y[0], y[1], y[2]);
  Frame nu_;
  nu_.base = nx;
  for (int i = 0; i < 2; ++i)
    nu_.e[i] = project_to_tangent(nx, {u.e[i].c[0], u.e[i].c[1], u.e[i].c[2], 0});
  u = orthonormalized(nu_);
  x = nx;
}

}  // namespace bundleflow::detail
