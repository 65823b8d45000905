#include "bundleflow/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace bundleflow {

namespace {

void require_kind(const Point& p, ManifoldKind kind, const char* what) {
  if (p.kind != kind)
    throw std::invalid_argument(std::string(what) + ": wrong manifold");
}

}  // namespace

TangentVector taylor_green(double s, const Point& p, double nu) {
  require_kind(p, ManifoldKind::FlatTorus2, "taylor_green");
  double a = std::exp(-2.0 * nu * s);
  TangentVector t;
  t.base = p;
  t.c = {a * std::sin(p.a[0]) * std::cos(p.a[1]),
         -a * std::cos(p.a[0]) * std::sin(p.a[1]), 0.0};
  return t;
}

VectorFieldSpec taylor_green_spec(const FieldResolution& r) {
  if (r.kind != ManifoldKind::FlatTorus2)
    throw std::invalid_argument("taylor_green_spec: wrong manifold");
  VectorFieldSpec v = VectorFieldSpec::zero(r);
  // sin x cos y = (sin(x+y) + sin(x-y))/2, -cos x sin y = -(sin(x+y)-sin(x-y))/2.
  v.tor_x.set_mode(1, 1, {0.0, -0.25});
  v.tor_x.set_mode(1, -1, {0.0, -0.25});
  v.tor_y.set_mode(1, 1, {0.0, 0.25});
  v.tor_y.set_mode(1, -1, {0.0, -0.25});
  return v;
}

TangentVector sphere_killing(double s, const Point& p, double nu,
                             LaplacianMode mode) {
  require_kind(p, ManifoldKind::UnitSphere2, "sphere_killing");
  double rate = mode == LaplacianMode::Bochner ? nu : 2.0 * nu;
  double a = std::exp(-rate * s);
  TangentVector t;
  t.base = p;
  t.c = {-a * p.a[1], a * p.a[0], 0.0};
  return t;
}

VectorFieldSpec sphere_killing_spec(const FieldResolution& r) {
  if (r.kind != ManifoldKind::UnitSphere2)
    throw std::invalid_argument("sphere_killing_spec: wrong manifold");
  VectorFieldSpec v = VectorFieldSpec::zero(r);
  // K = e3 x x = rot(-z); z = sqrt(4 pi / 3) Y_10.
  double c = std::sqrt(3.0 / (4.0 * 3.14159265358979323846));
  v.sph.psi[sh_index(1, 0)] = -1.0 / c;
  return v;
}

TangentVector torus_heat_mode(double s, const Point& p, double nu) {
  require_kind(p, ManifoldKind::FlatTorus2, "torus_heat_mode");
  TangentVector t;
  t.base = p;
  t.c = {std::exp(-nu * s) * std::sin(p.a[0]), 0.0, 0.0};
  return t;
}

VectorFieldSpec torus_heat_mode_spec(const FieldResolution& r) {
  if (r.kind != ManifoldKind::FlatTorus2)
    throw std::invalid_argument("torus_heat_mode_spec: wrong manifold");
  VectorFieldSpec v = VectorFieldSpec::zero(r);
  v.tor_x.set_mode(1, 0, {0.0, -0.5});
  return v;
}

TimeField torus_spectral_ns(const VectorFieldSpec& v0, double nu, double s_end,
                            double dt, int snapshots) {
  if (v0.res.kind != ManifoldKind::FlatTorus2)
    throw std::invalid_argument("torus_spectral_ns: wrong manifold");
  if (snapshots < 2) throw std::invalid_argument("torus_spectral_ns: snapshots >= 2");
  if (divergence(v0).l2norm() > 1e-8)
    throw std::invalid_argument("torus_spectral_ns: v0 must be divergence-free");
  const TorusResolution res = v0.res.tor;
  // Align the step grid with the snapshot grid.
  const int segs = snapshots - 1;
  const int steps_per_seg =
      std::max(1, int(std::llround(s_end / (segs * dt))));
  const int n_steps = steps_per_seg * segs;
  dt = s_end / n_steps;

  // omega = dx v_y - dy v_x; v = (-dy psi, dx psi) with lap psi = omega.
  TorusScalar omega = add(dx(v0.tor_y), dy(v0.tor_x), 1.0, -1.0);

  auto velocity = [&](const TorusScalar& w, TorusScalar& vx, TorusScalar& vy) {
    TorusScalar psi = laplacian_inverse(w, nullptr);
    vx = add(dy(psi), dy(psi), -1.0, 0.0);
    vy = dx(psi);
  };

  auto rhs = [&](const TorusScalar& w) {
    TorusScalar vx = TorusScalar::zero(res), vy = TorusScalar::zero(res);
    velocity(w, vx, vy);
    // -(v . grad) omega + nu lap omega, dealiased product.
    TorusScalar adv = add(product(vx, dx(w)), product(vy, dy(w)));
    return add(laplacian(w), adv, nu, -1.0);
  };

  auto cfl_check = [&](const TorusScalar& w) {
    TorusScalar vx = TorusScalar::zero(res), vy = TorusScalar::zero(res);
    velocity(w, vx, vy);
    auto gx = torus_synth(vx);
    auto gy = torus_synth(vy);
    double vmax = 0;
    for (size_t i = 0; i < gx.size(); ++i)
      vmax = std::max(vmax, std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]));
    double cfl = vmax * dt / (kTwoPi / res.N);
    if (cfl > 0.9)
      throw std::runtime_error("torus_spectral_ns: CFL " + std::to_string(cfl) +
                               " exceeds 0.9");
  };

  TimeField out;
  out.t.resize(snapshots);
  for (int i = 0; i < snapshots; ++i)
    out.t[i] = s_end * double(i) / (snapshots - 1);
  out.f.reserve(snapshots);

  auto snapshot = [&](const TorusScalar& w) {
    VectorFieldSpec v = VectorFieldSpec::zero(v0.res);
    velocity(w, v.tor_x, v.tor_y);
    return v;
  };

  cfl_check(omega);
  out.f.push_back(snapshot(omega));
  for (int step = 0; step < n_steps; ++step) {
    TorusScalar k1 = rhs(omega);
    TorusScalar k2 = rhs(add(omega, k1, 1.0, dt / 2));
    TorusScalar k3 = rhs(add(omega, k2, 1.0, dt / 2));
    TorusScalar k4 = rhs(add(omega, k3, 1.0, dt));
    TorusScalar incr = add(add(k1, k4), add(k2, k3), 1.0, 2.0);
    omega = add(omega, incr, 1.0, dt / 6.0);
    if (step % 16 == 0) cfl_check(omega);
    if ((step + 1) % steps_per_seg == 0) out.f.push_back(snapshot(omega));
  }
  out.validate_grid();
  return out;
}

}  // namespace bundleflow
