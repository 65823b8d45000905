#include <cmath>
#include <random>

#include "bundleflow/spectral_sphere.hpp"
#include "doctest.h"

using namespace bundleflow;

namespace {

const SphereResolution kRes = SphereResolution::standard(6);

std::mt19937_64 gen(31337);

SphereScalar random_scalar(int maxl = -1) {
  std::normal_distribution<double> nrm(0.0, 1.0);
  SphereScalar f = SphereScalar::zero(kRes);
  int top = maxl < 0 ? kRes.L : maxl;
  for (int l = 0; l <= top; ++l)
    for (int m = -l; m <= l; ++m) f.at(l, m) = nrm(gen);
  return f;
}

SphereVector random_vector(int maxl = -1) {
  std::normal_distribution<double> nrm(0.0, 1.0);
  SphereVector v = SphereVector::zero(kRes);
  int top = maxl < 0 ? kRes.L : maxl;
  for (int l = 1; l <= top; ++l)
    for (int m = -l; m <= l; ++m) {
      v.psi[sh_index(l, m)] = nrm(gen);
      v.phi[sh_index(l, m)] = nrm(gen);
    }
  return v;
}

Point random_sphere_point() {
  std::normal_distribution<double> nrm(0.0, 1.0);
  return Point::sphere(nrm(gen), nrm(gen), nrm(gen));
}

}  // namespace

TEST_CASE("gauss-legendre quadrature integrates polynomials") {
  std::vector<double> w;
  auto x = gauss_legendre_nodes(8, w);
  double s0 = 0, s2 = 0, s8 = 0;
  for (int i = 0; i < 8; ++i) {
    s0 += w[i];
    s2 += w[i] * x[i] * x[i];
    s8 += w[i] * std::pow(x[i], 8);
  }
  CHECK(s0 == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(s8 == doctest::Approx(2.0 / 9).epsilon(1e-13));
}

TEST_CASE("scalar basis is orthonormal under the grid quadrature") {
  auto grid = SphereGrid::get(kRes);
  for (int trial = 0; trial < 20; ++trial) {
    int l1 = int(gen() % (kRes.L + 1));
    int l2 = int(gen() % (kRes.L + 1));
    int m1 = l1 ? int(gen() % (2 * l1 + 1)) - l1 : 0;
    int m2 = l2 ? int(gen() % (2 * l2 + 1)) - l2 : 0;
    SphereScalar a = SphereScalar::zero(kRes);
    SphereScalar b = SphereScalar::zero(kRes);
    a.at(l1, m1) = 1.0;
    b.at(l2, m2) = 1.0;
    auto ga = grid->synth_scalar(a);
    auto gb = grid->synth_scalar(b);
    double dot = 0;
    for (int i = 0; i < kRes.n_lat; ++i)
      for (int j = 0; j < kRes.n_lon; ++j) {
        size_t k = size_t(i) * kRes.n_lon + j;
        dot += grid->quad_weight(i) * ga[k] * gb[k];
      }
    double want = (l1 == l2 && m1 == m2) ? 1.0 : 0.0;
    CHECK(dot == doctest::Approx(want).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("scalar analysis round trip and pointwise eval") {
  auto grid = SphereGrid::get(kRes);
  SphereScalar f = random_scalar();
  auto g = grid->synth_scalar(f);
  auto back = grid->analyze_scalar(g);
  double worst = 0;
  for (size_t i = 0; i < f.a.size(); ++i)
    worst = std::max(worst, std::fabs(back.a[i] - f.a[i]));
  CHECK(worst < 1e-12);

  auto pts = grid->points();
  SphereWorkspace ws;
  for (size_t k = 0; k < pts.size(); k += 13)
    CHECK(sphere_eval_scalar(f, pts[k], ws) ==
          doctest::Approx(g[k]).epsilon(1e-11).scale(1.0));
}

TEST_CASE("first degree harmonics are the coordinates") {
  // Y_{1,0} = sqrt(3/(4 pi)) z and the m = +-1 pair give x and y.
  SphereScalar f = SphereScalar::zero(kRes);
  f.at(1, 0) = 1.0;
  Point p = random_sphere_point();
  SphereWorkspace ws;
  double c = std::sqrt(3.0 / (4.0 * 3.14159265358979323846));
  CHECK(sphere_eval_scalar(f, p, ws) == doctest::Approx(c * p.a[2]).epsilon(1e-12));
}

TEST_CASE("gradient field matches finite differences of the scalar") {
  SphereScalar f = random_scalar(4);
  SphereVector v = SphereVector::zero(kRes);
  v.phi = f.a;
  v.phi[0] = 0.0;
  SphereWorkspace ws;
  for (int it = 0; it < 40; ++it) {
    Point p = random_sphere_point();
    TangentVector g = sphere_eval_vector(v, p, ws);
    // Direction-by-direction check along geodesics.
    std::normal_distribution<double> nrm(0.0, 1.0);
    TangentVector w = project_to_tangent(p, {nrm(gen), nrm(gen), nrm(gen), 0});
    const double h = 1e-6;
    TangentVector wp = w, wm = w;
    for (auto& x : wp.c) x *= h;
    for (auto& x : wm.c) x *= -h;
    double fp = sphere_eval_scalar(f, exp_map(p, wp), ws);
    double fm = sphere_eval_scalar(f, exp_map(p, wm), ws);
    double fd = (fp - fm) / (2 * h);
    // The l = 0 part of f is constant; dropping it does not change the slope.
    CHECK(metric(p, g, w) == doctest::Approx(fd).epsilon(5e-5).scale(1.0));
  }
}

TEST_CASE("rot field is x cross grad") {
  SphereScalar f = random_scalar(4);
  SphereVector gradf = SphereVector::zero(kRes);
  gradf.phi = f.a;
  gradf.phi[0] = 0.0;
  SphereVector rotf = SphereVector::zero(kRes);
  rotf.psi = f.a;
  rotf.psi[0] = 0.0;
  SphereWorkspace ws;
  for (int it = 0; it < 30; ++it) {
    Point p = random_sphere_point();
    TangentVector g = sphere_eval_vector(gradf, p, ws);
    TangentVector r = sphere_eval_vector(rotf, p, ws);
    // x cross g
    std::array<double, 3> xg{p.a[1] * g.c[2] - p.a[2] * g.c[1],
                             p.a[2] * g.c[0] - p.a[0] * g.c[2],
                             p.a[0] * g.c[1] - p.a[1] * g.c[0]};
    for (int k = 0; k < 3; ++k)
      CHECK(r.c[k] == doctest::Approx(xg[k]).epsilon(1e-11).scale(1.0));
  }
}

TEST_CASE("killing field from its stream potential") {
  // K = e3 cross x = rot(-z).
  SphereVector v = SphereVector::zero(kRes);
  double c = std::sqrt(3.0 / (4.0 * 3.14159265358979323846));
  v.psi[sh_index(1, 0)] = -1.0 / c;
  SphereWorkspace ws;
  for (int it = 0; it < 20; ++it) {
    Point p = random_sphere_point();
    TangentVector k = sphere_eval_vector(v, p, ws);
    CHECK(k.c[0] == doctest::Approx(-p.a[1]).epsilon(1e-12).scale(1.0));
    CHECK(k.c[1] == doctest::Approx(p.a[0]).epsilon(1e-12).scale(1.0));
    CHECK(k.c[2] == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("vector synthesis / analysis round trip") {
  auto grid = SphereGrid::get(kRes);
  SphereVector v = random_vector();
  std::vector<double> vth, vph;
  grid->synth_vector(v, vth, vph);
  auto fit = grid->analyze_vector(vth, vph);
  CHECK(fit.residual_rms < 1e-11);
  double worst = 0;
  for (size_t i = 0; i < v.psi.size(); ++i) {
    worst = std::max(worst, std::fabs(fit.field.psi[i] - v.psi[i]));
    worst = std::max(worst, std::fabs(fit.field.phi[i] - v.phi[i]));
  }
  CHECK(worst < 1e-11);
}

TEST_CASE("pointwise gradient frame matches finite differences") {
  SphereVector v = random_vector(4);
  SphereWorkspace ws;
  auto sampler = [&](const Point& q) {
    SphereWorkspace w2;
    return sphere_eval_vector(v, q, w2);
  };
  for (int it = 0; it < 25; ++it) {
    Point p = random_sphere_point();
    if (std::fabs(p.a[2]) > 0.99) continue;  // FD oracle avoids the poles
    SphereGradFrame gf;
    sphere_eval_vector(v, p, ws, &gf);
    for (int a = 0; a < 2; ++a) {
      auto d = covariant_derivative(sampler, p, gf.basis[a]);
      for (int b = 0; b < 2; ++b)
        CHECK(metric(p, d, gf.basis[b]) ==
              doctest::Approx(gf.t[a][b]).epsilon(2e-5).scale(1.0));
    }
  }
}

TEST_CASE("grid jet: gradient and second derivatives") {
  auto grid = SphereGrid::get(kRes);
  SphereVector v = random_vector(5);
  SphereGrid::VectorJet jet;
  grid->vector_jet(v, jet, true);

  // Spot-check T against the pointwise evaluator.
  SphereWorkspace ws;
  for (int i = 0; i < kRes.n_lat; i += 3)
    for (int j = 0; j < kRes.n_lon; j += 7) {
      size_t k = size_t(i) * kRes.n_lon + j;
      SphereGradFrame gf;
      sphere_eval_vector(v, grid->point(i, j), ws, &gf);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          CHECK(jet.t[a][b][k] ==
                doctest::Approx(gf.t[a][b]).epsilon(1e-10).scale(1.0));
    }

  // Trace of nabla^2 is the Bochner Laplacian: multiplier 1 - l(l+1) on both
  // Helmholtz channels.
  SphereVector lv = v;
  for (int l = 1; l <= kRes.L; ++l)
    for (int m = -l; m <= l; ++m) {
      double mul = 1.0 - double(l) * (l + 1);
      lv.psi[sh_index(l, m)] *= mul;
      lv.phi[sh_index(l, m)] *= mul;
    }
  std::vector<double> lth, lph;
  grid->synth_vector(lv, lth, lph);
  double worst = 0;
  for (int k = 0; k < grid->n_points(); ++k) {
    worst = std::max(worst,
                     std::fabs(jet.s[0][0][0][k] + jet.s[1][1][0][k] - lth[k]));
    worst = std::max(worst,
                     std::fabs(jet.s[0][0][1][k] + jet.s[1][1][1][k] - lph[k]));
  }
  CHECK(worst < 1e-9);

  // Antisymmetric part of nabla^2 is the curvature term:
  // (nabla^2 v)(X,Y) - (nabla^2 v)(Y,X) = <Y,v> X - <X,v> Y on S^2.
  worst = 0;
  for (int k = 0; k < grid->n_points(); ++k) {
    double vth = jet.vth[k], vph = jet.vph[k];
    // c = theta component: R(e_th,e_ph)v . e_th = <e_ph, v> = vph
    worst = std::max(
        worst, std::fabs((jet.s[0][1][0][k] - jet.s[1][0][0][k]) - vph));
    worst = std::max(
        worst, std::fabs((jet.s[0][1][1][k] - jet.s[1][0][1][k]) - (-vth)));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("laplacian inverse on harmonics") {
  SphereScalar f = SphereScalar::zero(kRes);
  f.at(3, 2) = 1.0;
  double dropped = 1;
  auto g = laplacian_inverse(f, &dropped);
  CHECK(dropped == doctest::Approx(0.0));
  CHECK(g.at(3, 2) == doctest::Approx(-1.0 / 12));
  auto lg = laplacian(g);
  CHECK(lg.at(3, 2) == doctest::Approx(1.0));
}

TEST_CASE("pole-adjacent evaluation stays finite and accurate") {
  SphereVector v = random_vector(4);
  SphereWorkspace ws;
  // Approach the pole along a meridian; compare against a rotated-away point
  // by transporting expectations: just check continuity of |v|.
  double prev = -1;
  for (double eps : {1e-6, 1e-8, 1e-10, 1e-13, 0.0}) {
    Point p = Point::sphere(eps, 0.0, 1.0);
    TangentVector t = sphere_eval_vector(v, p, ws);
    double n = norm(t);
    CHECK(std::isfinite(n));
    if (prev >= 0) CHECK(std::fabs(n - prev) < 1e-4);
    prev = n;
  }
}
