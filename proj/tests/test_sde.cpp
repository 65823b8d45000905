#include <cmath>
#include <random>
#include <stdexcept>

#include "bundleflow/rng.hpp"
#include "bundleflow/sde.hpp"
#include "doctest.h"

using namespace bundleflow;

namespace {

TangentVector killing_eval(double, const Point& p) {
  TangentVector t;
  t.base = p;
  t.c = {-p.a[1], p.a[0], 0.0};
  return t;
}

NoiseSpec make_noise(ManifoldKind kind, double dt, int n_steps, uint64_t seed) {
  NoiseSpec n;
  n.k = Manifold{kind}.noise_count();
  n.dt = dt;
  n.n_steps = n_steps;
  n.seed = seed;
  return n;
}

}  // namespace

TEST_CASE("noiseless flat flow is exact translation") {
  LambdaFlow drift([](double, const Point& p) {
    TangentVector t;
    t.base = p;
    t.c = {1.0, 0.0, 0.0};
    return t;
  });
  Frame u0 = canonical_frame(Point::torus(0.25, 1.5));
  auto noise = make_noise(ManifoldKind::FlatTorus2, 0.01, 100, 7);
  auto ens = simulate_forward(u0, &drift, 0.0, noise, 3);
  for (const auto& path : ens.paths) {
    const Frame& uT = path.frames.back();
    CHECK(uT.base.a[0] == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(uT.base.a[1] == doctest::Approx(1.5).epsilon(1e-12));
    for (int j = 0; j < 2; ++j)
      for (int c = 0; c < 3; ++c)
        CHECK(uT.e[j].c[c] == doctest::Approx(u0.e[j].c[c]).epsilon(1e-12));
  }
}

TEST_CASE("zero steps returns the constant ensemble") {
  Frame u0 = canonical_frame(Point::sphere(0.1, -0.2, 0.97));
  auto noise = make_noise(ManifoldKind::UnitSphere2, 0.01, 0, 3);
  auto ens = simulate_forward(u0, nullptr, 0.5, noise, 5);
  for (const auto& path : ens.paths) {
    REQUIRE(path.frames.size() == 1);
    CHECK(path.frames[0].base.a[0] == u0.base.a[0]);
  }
}

TEST_CASE("ensembles are bit-identical across worker counts") {
  Frame u0 = canonical_frame(Point::sphere(0.3, 0.4, 0.866));
  auto noise = make_noise(ManifoldKind::UnitSphere2, 0.02, 25, 99);
  LambdaFlow drift(killing_eval);
  auto a = simulate_forward(u0, &drift, 0.4, noise, 64, 0.0, 0, 1);
  auto b = simulate_forward(u0, &drift, 0.4, noise, 64, 0.0, 0, 4);
  auto c = simulate_forward(u0, &drift, 0.4, noise, 64, 0.0, 0, 16);
  for (size_t p = 0; p < a.paths.size(); ++p) {
    for (size_t j = 0; j < a.paths[p].db.size(); ++j) {
      CHECK(a.paths[p].db[j] == b.paths[p].db[j]);
      CHECK(a.paths[p].db[j] == c.paths[p].db[j]);
    }
    for (size_t j = 0; j < a.paths[p].frames.size(); ++j)
      for (int d = 0; d < 3; ++d) {
        CHECK(a.paths[p].frames[j].base.a[d] == b.paths[p].frames[j].base.a[d]);
        CHECK(a.paths[p].frames[j].base.a[d] == c.paths[p].frames[j].base.a[d]);
      }
  }
}

TEST_CASE("frame invariants hold along stored paths") {
  Frame u0 = canonical_frame(Point::sphere(0, 0, 1));
  auto noise = make_noise(ManifoldKind::UnitSphere2, 0.01, 200, 5);
  auto ens = simulate_forward(u0, nullptr, 0.6, noise, 4);
  for (const auto& path : ens.paths)
    for (const auto& u : path.frames) {
      CHECK(std::fabs(metric(u.base, u.e[0], u.e[0]) - 1) < 1e-12);
      CHECK(std::fabs(metric(u.base, u.e[1], u.e[1]) - 1) < 1e-12);
      CHECK(std::fabs(metric(u.base, u.e[0], u.e[1])) < 1e-12);
    }
}

TEST_CASE("weak generator consistency (reduced-size)") {
  // (E[f(X_dt)] - f(x)) / dt -> nu lap f + <drift, grad f>, antithetic pairs.
  const double dt = 1e-3;
  const int n_paths = 100000;

  SUBCASE("sphere") {
    const double nu = 0.8;
    Point x0 = Point::sphere(0.3, -0.5, 0.81);
    Frame u0 = canonical_frame(x0);
    LambdaFlow drift(killing_eval);
    auto noise = make_noise(ManifoldKind::UnitSphere2, dt, 1, 2024);
    double mean = 0;
    for (double sign : {1.0, -1.0}) {
      auto n2 = noise;
      n2.sign = sign;
      auto ens = simulate_forward(u0, &drift, nu, n2, n_paths);
      for (const auto& path : ens.paths) mean += path.frames.back().base.a[0];
    }
    mean /= 2.0 * n_paths;
    double lhs = (mean - x0.a[0]) / dt;
    // lap x_1 = -2 x_1; <K, grad x_1> = -x_2.
    double rhs = nu * (-2.0 * x0.a[0]) + (-x0.a[1]);
    CHECK(lhs == doctest::Approx(rhs).epsilon(0.05));
  }

  SUBCASE("torus") {
    const double nu = 0.7;
    Point x0 = Point::torus(0.9, 2.1);
    Frame u0 = canonical_frame(x0);
    LambdaFlow drift([](double, const Point& p) {
      TangentVector t;
      t.base = p;
      t.c = {0.3, -0.2, 0.0};
      return t;
    });
    auto noise = make_noise(ManifoldKind::FlatTorus2, dt, 1, 515);
    double mean = 0;
    for (double sign : {1.0, -1.0}) {
      auto n2 = noise;
      n2.sign = sign;
      auto ens = simulate_forward(u0, &drift, nu, n2, n_paths);
      for (const auto& path : ens.paths)
        mean += std::cos(path.frames.back().base.a[0]);
    }
    mean /= 2.0 * n_paths;
    double lhs = (mean - std::cos(x0.a[0])) / dt;
    double rhs = nu * (-std::cos(x0.a[0])) + 0.3 * (-std::sin(x0.a[0]));
    CHECK(lhs == doctest::Approx(rhs).epsilon(0.05));
  }
}

TEST_CASE("heun and projected euler agree in law on the torus") {
  // Same generator; compare E[cos x] after a short horizon.
  Point x0 = Point::torus(1.2, 0.3);
  Frame u0 = canonical_frame(x0);
  auto noise = make_noise(ManifoldKind::FlatTorus2, 5e-3, 40, 31);
  double m[2] = {0, 0};
  int idx = 0;
  for (Scheme s : {Scheme::ExactGeodesicHeun, Scheme::ProjectedEuler}) {
    auto n2 = noise;
    n2.scheme = s;
    n2.seed = 1000 + idx;
    auto ens = simulate_forward(u0, nullptr, 0.5, n2, 40000);
    for (const auto& path : ens.paths) m[idx] += std::cos(path.frames.back().base.a[0]);
    m[idx] /= double(ens.paths.size());
    ++idx;
  }
  // exact heat decay of cos x: e^{-nu t} cos x0 with nu t = 0.1.
  double exact = std::exp(-0.5 * 0.2) * std::cos(x0.a[0]);
  CHECK(m[0] == doctest::Approx(exact).epsilon(0.03));
  CHECK(m[1] == doctest::Approx(exact).epsilon(0.03));
}

TEST_CASE("sphere coordinate decay matches the spectral gap") {
  // E[x_i(X_t)] = e^{-2 nu t} x_i(x0).
  const double nu = 0.3, dt = 2e-3, T = 0.5;
  Point x0 = Point::sphere(0.3, -0.5, 0.81);
  Frame u0 = canonical_frame(x0);
  auto noise = make_noise(ManifoldKind::UnitSphere2, dt, int(T / dt + 0.5), 8);
  const int n_paths = 20000;
  auto ens = simulate_forward(u0, nullptr, nu, noise, n_paths);
  double mean[3] = {0, 0, 0}, var[3] = {0, 0, 0};
  for (const auto& path : ens.paths)
    for (int c = 0; c < 3; ++c) {
      double v = path.frames.back().base.a[c];
      mean[c] += v;
      var[c] += v * v;
    }
  double decay = std::exp(-2.0 * nu * T);
  for (int c = 0; c < 3; ++c) {
    mean[c] /= n_paths;
    var[c] = (var[c] / n_paths - mean[c] * mean[c]) / n_paths;
    double sigma = std::sqrt(var[c]);
    CHECK(std::fabs(mean[c] - decay * x0.a[c]) < 3.5 * sigma + 2e-3);
  }
}

TEST_CASE("ergodic relaxation on the sphere with divergence-free drift") {
  const double nu = 1.0, t_end = 5.0, dt = 0.01;
  Point x0 = Point::sphere(0, 0, 1);
  Frame u0 = canonical_frame(x0);
  LambdaFlow drift(killing_eval);
  auto noise = make_noise(ManifoldKind::UnitSphere2, dt, int(t_end / dt), 404);
  const int n_paths = 20000;
  auto ens = simulate_forward(u0, &drift, nu, noise, n_paths, 0.0, 0, 4);
  // f = 1 + 0.5 * P2(z); spatial mean is 1.
  double mean = 0;
  for (const auto& path : ens.paths) {
    double z = path.frames.back().base.a[2];
    mean += 1.0 + 0.5 * 0.5 * (3 * z * z - 1);
  }
  mean /= n_paths;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("transported source accumulation") {
  SUBCASE("zero source") {
    Frame u0 = canonical_frame(Point::sphere(0.2, 0.5, 0.84));
    auto noise = make_noise(ManifoldKind::UnitSphere2, 0.01, 50, 11);
    auto ens = simulate_forward(u0, nullptr, 0.3, noise, 8);
    LambdaFlow zero([](double, const Point& p) {
      TangentVector t;
      t.base = p;
      return t;
    });
    accumulate_transported_source(ens, zero);
    for (const auto& path : ens.paths) {
      CHECK(path.integral[0] == 0.0);
      CHECK(path.integral[1] == 0.0);
    }
  }

  SUBCASE("constant field with frozen flat paths") {
    const double c = 0.7, T = 1.0;
    Frame u0 = canonical_frame(Point::torus(0.5, 0.5));
    auto noise = make_noise(ManifoldKind::FlatTorus2, 0.01, 100, 2);
    auto ens = simulate_forward(u0, nullptr, 0.0, noise, 2);
    LambdaFlow g([c](double, const Point& p) {
      TangentVector t;
      t.base = p;
      t.c = {c, 0.0, 0.0};
      return t;
    });
    accumulate_transported_source(ens, g);
    for (const auto& path : ens.paths) {
      CHECK(path.integral[0] == doctest::Approx(c * T).epsilon(1e-12));
      CHECK(path.integral[1] == doctest::Approx(0.0).scale(1.0));
    }
  }

  SUBCASE("recomputation oracle along a stored sphere path") {
    Frame u0 = canonical_frame(Point::sphere(0.1, 0.2, 0.97));
    auto noise = make_noise(ManifoldKind::UnitSphere2, 0.005, 80, 77);
    auto ens = simulate_forward(u0, nullptr, 0.5, noise, 1);
    LambdaFlow g(killing_eval);
    accumulate_transported_source(ens, g);
    const auto& path = ens.paths[0];
    double acc0 = 0, acc1 = 0;
    for (int j = 0; j + 1 < int(path.frames.size()); ++j) {
      const Frame& u = path.frames[j];
      TangentVector v = killing_eval(0.0, u.base);
      acc0 += metric(u.base, v, u.e[0]) * noise.dt;
      acc1 += metric(u.base, v, u.e[1]) * noise.dt;
    }
    CHECK(path.integral[0] == doctest::Approx(acc0).epsilon(1e-13));
    CHECK(path.integral[1] == doctest::Approx(acc1).epsilon(1e-13));
  }
}

TEST_CASE("variational flow") {
  SUBCASE("frozen flat flow keeps R constant") {
    Frame u0 = canonical_frame(Point::torus(0.8, 1.9));
    auto noise = make_noise(ManifoldKind::FlatTorus2, 0.01, 60, 21);
    auto ens = simulate_forward(u0, nullptr, 0.0, noise, 3);
    auto var = simulate_variational(ens, 0.0, nullptr);
    for (size_t p = 0; p < ens.paths.size(); ++p)
      for (int i = 0; i < noise.k; ++i) {
        TangentVector a0 = embedding_field(u0.base, i);
        const TangentVector& r = var.r[p * noise.k + i];
        for (int c = 0; c < 3; ++c)
          CHECK(r.c[c] == doctest::Approx(a0.c[c]).epsilon(1e-12));
      }
  }

  SUBCASE("second moments bounded with a path-count independent rate") {
    const double nu = 0.5, T = 0.5;
    Frame u0 = canonical_frame(Point::sphere(0.3, -0.5, 0.81));
    auto noise = make_noise(ManifoldKind::UnitSphere2, 1.0 / 128, 64, 3030);
    double cfit[2];
    int runs = 0;
    for (int n_paths : {200, 800}) {
      auto ens = simulate_forward(u0, nullptr, nu, noise, n_paths);
      auto var = simulate_variational(ens, nu, nullptr);
      double m2 = 0;
      for (const auto& r : var.r) m2 += norm(r) * norm(r);
      m2 /= double(var.r.size());
      cfit[runs++] = std::log(std::max(m2, 1e-12)) / ((1.0 + nu) * T);
    }
    CHECK(std::isfinite(cfit[0]));
    CHECK(std::isfinite(cfit[1]));
    CHECK(std::fabs(cfit[0] - cfit[1]) < 0.35);
  }

  SUBCASE("finite-difference consistency with shared noise") {
    const double nu = 0.25, dt = 1.0 / 128, T = 0.25, eps = 0.05;
    const int n_paths = 64, dir = 0;
    Point x0 = Point::sphere(0.3, -0.5, 0.81);
    Frame u0 = canonical_frame(x0);
    auto noise = make_noise(ManifoldKind::UnitSphere2, dt, int(T / dt + 0.5), 606);

    auto run_err = [&](double e, double step) {
      auto n2 = noise;
      n2.dt = step;
      n2.n_steps = int(T / step + 0.5);
      auto base = simulate_forward(u0, nullptr, nu, n2, n_paths);
      TangentVector a0 = embedding_field(x0, dir);
      TangentVector ea = a0;
      for (auto& c : ea.c) c *= e;
      Frame u0e = canonical_frame(exp_map(x0, ea));
      auto shifted = simulate_forward(u0e, nullptr, nu, n2, n_paths);
      auto var = simulate_variational(base, nu, nullptr);
      double err = 0;
      for (int p = 0; p < n_paths; ++p) {
        Point xT = base.paths[p].frames.back().base;
        Point xTe = shifted.paths[p].frames.back().base;
        TangentVector fd = log_map(xT, xTe);
        for (auto& c : fd.c) c /= e;
        const TangentVector& r = var.r[size_t(p) * noise.k + dir];
        TangentVector d = fd;
        for (int c = 0; c < 3; ++c) d.c[c] -= r.c[c];
        err += norm(d);
      }
      return err / n_paths;
    };

    double e1 = run_err(eps, dt);
    double e2 = run_err(eps / 2, dt / 2);
    CHECK(e1 < 0.2);
    CHECK(e2 < 0.75 * e1);
  }
}

TEST_CASE("nan in drift aborts with the path index") {
  Frame u0 = canonical_frame(Point::torus(0, 0));
  LambdaFlow bad([](double, const Point& p) {
    TangentVector t;
    t.base = p;
    t.c = {std::nan(""), 0.0, 0.0};
    return t;
  });
  auto noise = make_noise(ManifoldKind::FlatTorus2, 0.01, 5, 1);
  CHECK_THROWS_AS(simulate_forward(u0, &bad, 0.1, noise, 2),
                  std::runtime_error);
}
