#include "bundleflow/sde.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "bundleflow/rng.hpp"
#include "bundleflow/sde_step.hpp"

namespace bundleflow {

void validate(const NoiseSpec& n, ManifoldKind kind) {
  Manifold mf{kind};
  if (n.k != mf.noise_count())
    throw std::invalid_argument("NoiseSpec: k must equal the manifold noise count");
  if (!(n.dt > 0)) throw std::invalid_argument("NoiseSpec: dt > 0 required");
  if (n.n_steps < 0) throw std::invalid_argument("NoiseSpec: n_steps >= 0");
  if (n.sign != 1.0 && n.sign != -1.0)
    throw std::invalid_argument("NoiseSpec: sign must be +-1");
}

void run_parallel(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

namespace {

struct FlowDrift {
  const FlowField* field;
  double t_now, t_next, dt;
  uint64_t path_id;

  void operator()(const Point& x, bool predictor, double* out) const {
    if (!field) {
      out[0] = out[1] = out[2] = 0.0;
      return;
    }
    TangentVector v = field->eval(predictor ? t_next : t_now, x);
    for (int i = 0; i < 3; ++i) {
      if (!std::isfinite(v.c[i]))
        throw std::runtime_error("drift evaluation produced NaN on path " +
                                 std::to_string(path_id));
      out[i] = v.c[i] * dt;
    }
  }
};

}  // namespace

PathEnsemble simulate_forward(const Frame& u0, const FlowField* drift,
                              double nu, const NoiseSpec& noise, int n_paths,
                              double t0, uint64_t path_base, int workers) {
  validate(noise, u0.base.kind);
  if (nu < 0) throw std::invalid_argument("simulate_forward: nu >= 0 required");
  PathEnsemble ens;
  ens.kind = u0.base.kind;
  ens.noise = noise;
  ens.t0 = t0;
  ens.path_base = path_base;
  ens.paths.resize(n_paths);
  const double sqrt2nu = std::sqrt(2.0 * nu);
  const int k = noise.k;

  run_parallel(n_paths, workers, [&](int p) {
    FramePath& path = ens.paths[p];
    path.frames.reserve(noise.n_steps + 1);
    path.db.assign(size_t(noise.n_steps) * k, 0.0);
    Frame u = u0;
    Point x = u0.base;
    path.frames.push_back(u);
    uint64_t pid = path_base + uint64_t(p);
    for (int j = 0; j < noise.n_steps; ++j) {
      double* db = path.db.data() + size_t(j) * k;
      rng::fill_normals(noise.seed, pid, uint32_t(j), k, db);
      double sdt = std::sqrt(noise.dt);
      for (int c = 0; c < k; ++c) db[c] *= sdt * noise.sign;
      FlowDrift d{drift, t0 + j * noise.dt, t0 + (j + 1) * noise.dt, noise.dt,
                  pid};
      if (noise.scheme == Scheme::ExactGeodesicHeun)
        detail::heun_geodesic_step(x, u, db, sqrt2nu, d);
      else
        detail::projected_euler_step(x, u, db, sqrt2nu, d);
      path.frames.push_back(u);
    }
  });
  return ens;
}

void accumulate_transported_source(PathEnsemble& ens, const FlowField& g) {
  const double dt = ens.noise.dt;
  for (auto& path : ens.paths) {
    std::array<double, 2> acc{0.0, 0.0};
    for (int j = 0; j + 1 < int(path.frames.size()); ++j) {
      const Frame& u = path.frames[j];
      TangentVector v = g.eval(ens.t0 + j * dt, u.base);
      acc[0] += metric(u.base, v, u.e[0]) * dt;
      acc[1] += metric(u.base, v, u.e[1]) * dt;
    }
    path.integral = acc;
  }
}

VariationalState simulate_variational(const PathEnsemble& ens, double nu,
                                      const FlowField* drift) {
  const int k = ens.noise.k;
  const double dt = ens.noise.dt;
  const double sqrt2nu = std::sqrt(2.0 * nu);
  VariationalState out;
  out.k = k;
  out.r.resize(ens.paths.size() * k);

  for (size_t p = 0; p < ens.paths.size(); ++p) {
    const FramePath& path = ens.paths[p];
    const Point x0 = path.frames.front().base;
    for (int i = 0; i < k; ++i) {
      TangentVector r = embedding_field(x0, i);
      for (int j = 0; j + 1 < int(path.frames.size()); ++j) {
        const Point& x = path.frames[j].base;
        const Point& xn = path.frames[j + 1].base;
        const double* db = path.db.data() + size_t(j) * k;
        TangentVector incr = r;
        for (int m = 0; m < k; ++m) {
          TangentVector da = embedding_field_derivative(x, m, r);
          for (int c = 0; c < 3; ++c) incr.c[c] += sqrt2nu * da.c[c] * db[m];
        }
        TangentVector ric = ricci_sharp(x, r);
        for (int c = 0; c < 3; ++c) incr.c[c] -= nu * ric.c[c] * dt;
        if (drift) {
          double t = ens.t0 + j * dt;
          auto sampler = [&](const Point& q) { return drift->eval(t, q); };
          TangentVector dw = covariant_derivative(sampler, x, r);
          for (int c = 0; c < 3; ++c) incr.c[c] += dw.c[c] * dt;
        }
        r = parallel_transport(x, log_map(x, xn), incr);
      }
      out.r[p * k + i] = r;
    }
  }
  return out;
}

}  // namespace bundleflow
