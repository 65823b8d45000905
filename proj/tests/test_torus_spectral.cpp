#include <cmath>
#include <random>

#include "bundleflow/spectral_torus.hpp"
#include "doctest.h"

using namespace bundleflow;

namespace {
const TorusResolution kRes{5, 16};
}

TEST_CASE("synthesis / analysis round trip") {
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nrm(0.0, 1.0);
  TorusScalar f = TorusScalar::zero(kRes);
  for (int m = -kRes.K; m <= kRes.K; ++m)
    for (int n = -kRes.K; n <= kRes.K; ++n)
      f.set_mode(m, n, {nrm(gen), nrm(gen)});
  f.enforce_hermitian();
  auto grid = torus_synth(f);
  auto back = torus_analyze(kRes, grid);
  CHECK(back.residual_rms < 1e-12);
  double worst = 0;
  for (size_t i = 0; i < f.c.size(); ++i)
    worst = std::max(worst, std::abs(back.field.c[i] - f.c[i]));
  CHECK(worst < 1e-12);
}

TEST_CASE("pointwise evaluation matches the grid") {
  TorusScalar f = TorusScalar::zero(kRes);
  f.set_mode(1, 0, {0.5, 0.0});   // cos x
  f.set_mode(2, 3, {0.1, -0.2});
  auto grid = torus_synth(f);
  auto pts = torus_grid_points(kRes);
  for (size_t k = 0; k < pts.size(); k += 7)
    CHECK(f.eval(pts[k]) == doctest::Approx(grid[k]).epsilon(1e-12).scale(1.0));
  Point p = Point::torus(0.123, 4.56);
  double expect = std::cos(p.a[0]) +
                  2 * (0.1 * std::cos(2 * p.a[0] + 3 * p.a[1]) +
                       0.2 * std::sin(2 * p.a[0] + 3 * p.a[1]));
  CHECK(f.eval(p) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("derivatives and laplacian") {
  TorusScalar f = TorusScalar::zero(kRes);
  f.set_mode(1, 0, {0.5, 0.0});  // f = cos x
  auto fx = dx(f);
  Point p = Point::torus(0.7, 0.1);
  CHECK(fx.eval(p) == doctest::Approx(-std::sin(p.a[0])).epsilon(1e-13));
  auto lf = laplacian(f);
  CHECK(lf.eval(p) == doctest::Approx(-std::cos(p.a[0])).epsilon(1e-13));
  double dropped = 0;
  auto inv = laplacian_inverse(f, &dropped);
  CHECK(dropped == doctest::Approx(0.0));
  CHECK(inv.eval(p) == doctest::Approx(-std::cos(p.a[0])).epsilon(1e-13));
}

TEST_CASE("dealiased product") {
  TorusScalar a = TorusScalar::zero(kRes);
  TorusScalar b = TorusScalar::zero(kRes);
  a.set_mode(1, 0, {0.5, 0.0});   // cos x
  b.set_mode(0, 1, {0.0, -0.5});  // sin y
  auto ab = product(a, b);
  Point p = Point::torus(1.9, 0.55);
  CHECK(ab.eval(p) ==
        doctest::Approx(std::cos(p.a[0]) * std::sin(p.a[1])).epsilon(1e-12));
  // cos^2 x = 1/2 + cos(2x)/2.
  auto aa = product(a, a);
  CHECK(aa.mean() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(aa.at(2, 0).real() == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("parseval norm") {
  TorusScalar f = TorusScalar::zero(kRes);
  f.set_mode(1, 0, {0.0, -0.5});  // sin x
  // integral of sin^2 x over the torus = 2 pi^2.
  CHECK(f.l2norm() == doctest::Approx(std::sqrt(2.0) * kTwoPi / 2).epsilon(1e-13));
}
