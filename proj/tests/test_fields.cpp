#include <cmath>
#include <random>
#include <stdexcept>

#include "bundleflow/fields.hpp"
#include "doctest.h"

using namespace bundleflow;

namespace {

const FieldResolution kTor = FieldResolution::torus(5, 16);
const FieldResolution kSph = FieldResolution::sphere(6);

std::mt19937_64 gen(4242);

VectorFieldSpec taylor_green_spec(const FieldResolution& r) {
  // (sin x cos y, -cos x sin y): sin x cos y = (sin(x+y) + sin(x-y)) / 2.
  VectorFieldSpec v = VectorFieldSpec::zero(r);
  v.tor_x.set_mode(1, 1, {0.0, -0.25});
  v.tor_x.set_mode(1, -1, {0.0, -0.25});
  v.tor_y.set_mode(1, 1, {0.0, 0.25});
  v.tor_y.set_mode(1, -1, {0.0, -0.25});
  return v;
}

VectorFieldSpec killing_spec(const FieldResolution& r) {
  VectorFieldSpec v = VectorFieldSpec::zero(r);
  double c = std::sqrt(3.0 / (4.0 * 3.14159265358979323846));
  v.sph.psi[sh_index(1, 0)] = -1.0 / c;
  return v;
}

VectorFieldSpec random_divfree_sphere(int maxl) {
  std::normal_distribution<double> nrm(0.0, 1.0);
  VectorFieldSpec v = VectorFieldSpec::zero(kSph);
  for (int l = 1; l <= maxl; ++l)
    for (int m = -l; m <= l; ++m) v.sph.psi[sh_index(l, m)] = nrm(gen);
  return v;
}

}  // namespace

TEST_CASE("taylor-green spec evaluates correctly and is divergence-free") {
  auto v = taylor_green_spec(kTor);
  for (int it = 0; it < 20; ++it) {
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    Point p = Point::torus(ang(gen), ang(gen));
    auto t = v.eval(p);
    CHECK(t.c[0] == doctest::Approx(std::sin(p.a[0]) * std::cos(p.a[1]))
                        .epsilon(1e-12)
                        .scale(1.0));
    CHECK(t.c[1] == doctest::Approx(-std::cos(p.a[0]) * std::sin(p.a[1]))
                        .epsilon(1e-12)
                        .scale(1.0));
  }
  CHECK(divergence(v).l2norm() < 1e-14);
}

TEST_CASE("grad / div examples") {
  ScalarFieldSpec f = ScalarFieldSpec::zero(kTor);
  f.tor.set_mode(1, 0, {0.5, 0.0});  // cos x
  auto g = grad(f);
  Point p = Point::torus(0.3, 1.7);
  CHECK(g.eval(p).c[0] == doctest::Approx(-std::sin(p.a[0])).epsilon(1e-12));
  CHECK(g.eval(p).c[1] == doctest::Approx(0.0).scale(1.0));
  auto dg = divergence(g);
  CHECK(dg.eval(p) == doctest::Approx(-std::cos(p.a[0])).epsilon(1e-12));

  // div rot = 0 identically on the sphere.
  auto v = random_divfree_sphere(5);
  CHECK(divergence(v).l2norm() < 1e-13);
}

TEST_CASE("laplace inverse examples") {
  ScalarFieldSpec f = ScalarFieldSpec::zero(kTor);
  f.tor.set_mode(1, 0, {0.5, 0.0});
  WarningSink warns;
  auto g = laplace_inverse(f, &warns);
  CHECK(warns.empty());
  Point p = Point::torus(2.5, 0.2);
  CHECK(g.eval(p) == doctest::Approx(-std::cos(p.a[0])).epsilon(1e-12));

  // Mean subtraction records a warning.
  f.tor.set_mode(0, 0, {0.3, 0.0});
  auto g2 = laplace_inverse(f, &warns);
  CHECK(warns.size() == 1);
  CHECK(g2.mean() == doctest::Approx(0.0));

  ScalarFieldSpec s = ScalarFieldSpec::zero(kSph);
  s.sph.at(3, -1) = 2.0;
  auto is = laplace_inverse(s, nullptr);
  CHECK(is.sph.at(3, -1) == doctest::Approx(-2.0 / 12));
}

TEST_CASE("leray projection") {
  // v = (sin x + sin y, 0) -> (sin y, 0).
  VectorFieldSpec v = VectorFieldSpec::zero(kTor);
  v.tor_x.set_mode(1, 0, {0.0, -0.5});
  v.tor_x.set_mode(0, 1, {0.0, -0.5});
  auto pv = leray_project(v);
  Point p = Point::torus(1.3, 2.9);
  CHECK(pv.eval(p).c[0] == doctest::Approx(std::sin(p.a[1])).epsilon(1e-12).scale(1.0));
  CHECK(pv.eval(p).c[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(divergence(pv).l2norm() < 1e-12);

  // Idempotence and fixed points.
  auto tg = taylor_green_spec(kTor);
  auto ptg = leray_project(tg);
  CHECK(sobolev_norm(add(ptg, tg, 1.0, -1.0), 0, 2) < 1e-12);
  auto ppv = leray_project(pv);
  CHECK(sobolev_norm(add(ppv, pv, 1.0, -1.0), 0, 2) < 1e-13);

  // Pure gradients map to zero on the sphere.
  ScalarFieldSpec phi = ScalarFieldSpec::zero(kSph);
  phi.sph.at(2, 1) = 1.4;
  phi.sph.at(4, -3) = -0.3;
  auto gphi = grad(phi);
  auto pg = leray_project(gphi);
  CHECK(pg.l2norm() < 1e-14);
}

TEST_CASE("advective divergence examples") {
  // v = w = (sin x, 0): div(nabla_v v) = cos 2x.
  VectorFieldSpec v = VectorFieldSpec::zero(kTor);
  v.tor_x.set_mode(1, 0, {0.0, -0.5});
  auto adv = advective_divergence(v, v);
  Point p = Point::torus(0.77, 0.1);
  CHECK(adv.eval(p) == doctest::Approx(std::cos(2 * p.a[0])).epsilon(1e-11));

  // Constant field advects nothing.
  VectorFieldSpec c = VectorFieldSpec::zero(kTor);
  c.tor_x.set_mode(0, 0, {0.7, 0.0});
  c.tor_y.set_mode(0, 0, {-0.2, 0.0});
  CHECK(advective_divergence(c, c).l2norm() < 1e-13);

  // Killing field: div(nabla_K K) = -lap(|K|^2/2) = 1 - 3 z^2.
  auto k = killing_spec(kSph);
  auto ak = advective_divergence(k, k);
  for (int it = 0; it < 15; ++it) {
    std::normal_distribution<double> nrm(0.0, 1.0);
    Point q = Point::sphere(nrm(gen), nrm(gen), nrm(gen));
    CHECK(ak.eval(q) ==
          doctest::Approx(1.0 - 3.0 * q.a[2] * q.a[2]).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("advective divergence against a finite-difference oracle") {
  // Random smooth fields; oracle = geometry::divergence of the sampled
  // covariant derivative.
  auto vf = random_divfree_sphere(3);
  VectorFieldSpec wf = VectorFieldSpec::zero(kSph);
  {
    std::normal_distribution<double> nrm(0.0, 1.0);
    for (int l = 1; l <= 3; ++l)
      for (int m = -l; m <= l; ++m) {
        wf.sph.psi[sh_index(l, m)] = nrm(gen);
        wf.sph.phi[sh_index(l, m)] = nrm(gen);
      }
  }
  auto advected = advective_divergence(vf, wf);
  auto sampler = [&](const Point& q) {
    return covariant_derivative_spectral(wf, q, vf.eval(q));
  };
  std::normal_distribution<double> nrm(0.0, 1.0);
  for (int it = 0; it < 10; ++it) {
    Point q = Point::sphere(nrm(gen), nrm(gen), 0.5 * nrm(gen));
    double oracle = divergence(sampler, q);
    CHECK(advected.eval(q) == doctest::Approx(oracle).epsilon(5e-4).scale(1.0));
  }
}

TEST_CASE("pressure force") {
  auto tg = taylor_green_spec(kTor);
  auto f = pressure_force(tg, 0.1);
  // F = (sin 2x / 2, sin 2y / 2).
  Point p = Point::torus(0.9, 2.2);
  CHECK(f.eval(p).c[0] == doctest::Approx(std::sin(2 * p.a[0]) / 2).epsilon(1e-10).scale(1.0));
  CHECK(f.eval(p).c[1] == doctest::Approx(std::sin(2 * p.a[1]) / 2).epsilon(1e-10).scale(1.0));

  VectorFieldSpec z = VectorFieldSpec::zero(kTor);
  CHECK(pressure_force(z, 0.3).l2norm() == doctest::Approx(0.0));

  // Killing field: F_v = -grad(|K|^2/2); |K|^2 = 1 - z^2.
  auto k = killing_spec(kSph);
  auto fk = pressure_force(k, 0.25);
  SphereWorkspace ws;
  std::normal_distribution<double> nrm(0.0, 1.0);
  for (int it = 0; it < 10; ++it) {
    Point q = Point::sphere(nrm(gen), nrm(gen), nrm(gen));
    auto val = fk.eval(q);
    // -grad((1-z^2)/2) = z * grad(z) = z * Pi(e3).
    auto expect = project_to_tangent(q, {0, 0, q.a[2], 0});
    for (int c = 0; c < 3; ++c)
      CHECK(val.c[c] == doctest::Approx(expect.c[c]).epsilon(1e-9).scale(1.0));
  }

  VectorFieldSpec bad = VectorFieldSpec::zero(kTor);
  bad.tor_x.set_mode(1, 0, {0.5, 0.0});  // cos x, divergent
  CHECK_THROWS_AS(pressure_force(bad, 0.1), std::invalid_argument);
}

TEST_CASE("sobolev norms") {
  // Constant field of unit length over area 4 pi^2.
  VectorFieldSpec c = VectorFieldSpec::zero(kTor);
  c.tor_x.set_mode(0, 0, {1.0, 0.0});
  CHECK(sobolev_norm(c, 0, 2) == doctest::Approx(kTwoPi).epsilon(1e-13));

  VectorFieldSpec z = VectorFieldSpec::zero(kTor);
  CHECK(sobolev_norm(z, 2, 4) == doctest::Approx(0.0));

  // (sin x, 0): W^{1,2} norm sqrt(int sin^2 + cos^2) = 2 pi.
  VectorFieldSpec s = VectorFieldSpec::zero(kTor);
  s.tor_x.set_mode(1, 0, {0.0, -0.5});
  CHECK(sobolev_norm(s, 1, 2) == doctest::Approx(kTwoPi).epsilon(1e-13));
}

TEST_CASE("homogeneity of the advection structure term") {
  // [div(nabla_{v1} v2) - v1(div v2)] scales linearly in v1.
  auto v1 = random_divfree_sphere(3);
  auto v2 = random_divfree_sphere(4);
  auto base = add(advective_divergence(v1, v2),
                  scalar_advection(v1, divergence(v2)), 1.0, -1.0);
  auto scaled = add(advective_divergence(scale(v1, 3.0), v2),
                    scalar_advection(scale(v1, 3.0), divergence(v2)), 1.0, -1.0);
  CHECK(add(scaled, base, 1.0, -3.0).l2norm() < 1e-10);
}

TEST_CASE("fit_field round trip and aliasing report") {
  auto tg = taylor_green_spec(kTor);
  auto pts = collocation_points(kTor);
  std::vector<TangentVector> samples;
  samples.reserve(pts.size());
  for (const auto& p : pts) samples.push_back(tg.eval(p));
  auto fit = fit_field(kTor, samples);
  CHECK(fit.residual_rms < 1e-13);
  CHECK(sobolev_norm(add(fit.field, tg, 1.0, -1.0), 0, 2) < 1e-12);

  // Zero samples -> zero spec.
  std::vector<TangentVector> zs(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    zs[i].base = pts[i];
  }
  auto zfit = fit_field(kTor, zs);
  CHECK(zfit.field.l2norm() == doctest::Approx(0.0));
  CHECK(zfit.residual_rms == doctest::Approx(0.0));

  // A super-truncation mode is reported in the residual, not silently kept.
  for (size_t i = 0; i < pts.size(); ++i)
    zs[i].c[0] = std::sin(6.0 * pts[i].a[0]);
  auto afit = fit_field(kTor, zs);
  CHECK(afit.residual_rms > 0.1);

  // Sphere round trip.
  auto k = killing_spec(kSph);
  auto spts = collocation_points(kSph);
  std::vector<TangentVector> ks;
  ks.reserve(spts.size());
  for (const auto& p : spts) ks.push_back(k.eval(p));
  auto kfit = fit_field(kSph, ks);
  CHECK(kfit.residual_rms < 1e-12);
  double worst = 0;
  for (size_t i = 0; i < kfit.field.sph.psi.size(); ++i)
    worst = std::max(worst, std::fabs(kfit.field.sph.psi[i] - k.sph.psi[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("time field interpolation") {
  TimeField tf;
  tf.t = {0.0, 1.0};
  auto a = taylor_green_spec(kTor);
  tf.f = {scale(a, 1.0), scale(a, 3.0)};
  tf.validate_grid();
  Point p = Point::torus(1.0, 0.5);
  double v0 = a.eval(p).c[0];
  CHECK(tf.eval(0.5, p).c[0] == doctest::Approx(2.0 * v0).epsilon(1e-12));
  CHECK(tf.eval(-1.0, p).c[0] == doctest::Approx(v0).epsilon(1e-12));
  CHECK(tf.eval(9.0, p).c[0] == doctest::Approx(3.0 * v0).epsilon(1e-12));
  auto mid = tf.at_time(0.25);
  CHECK(mid.eval(p).c[0] == doctest::Approx(1.5 * v0).epsilon(1e-12));

  TimeField bad;
  bad.t = {0.0, 0.0};
  bad.f = {a, a};
  CHECK_THROWS_AS(bad.validate_grid(), std::invalid_argument);
}

TEST_CASE("bochner and hodge laplacians") {
  // Torus: componentwise Fourier multiplier.
  auto tg = taylor_green_spec(kTor);
  auto btg = laplacian_bochner(tg);
  CHECK(sobolev_norm(add(btg, tg, 1.0, 2.0), 0, 2) < 1e-12);
  // Sphere Killing: Bochner eigenvalue -1, Hodge eigenvalue -2.
  auto k = killing_spec(kSph);
  CHECK(sobolev_norm(add(laplacian_bochner(k), k, 1.0, 1.0), 0, 2) < 1e-12);
  CHECK(sobolev_norm(add(laplacian_hodge(k), k, 1.0, 2.0), 0, 2) < 1e-12);
}
