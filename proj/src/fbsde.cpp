#include "bundleflow/fbsde.hpp"

#include <cmath>
#include <stdexcept>

#include "bundleflow/rng.hpp"
#include "bundleflow/sde_step.hpp"

namespace bundleflow {

namespace {

// Fields frozen at one step time level.
struct Level {
  bool has_drift = false, has_source = false, has_theta = false;
  // torus eval tables
  TorusEvalTable tor_drift, tor_source;
  TorusEvalTable tor_theta, tor_theta_dx, tor_theta_dy;
  // sphere coefficient blends
  SphereVector sph_drift, sph_source, sph_theta;
};

struct DriverCtx {
  const DriverFn* fn = nullptr;
  int k = 0;
};

struct KernelPlan {
  ManifoldKind kind;
  double t0 = 0, dt = 0;
  int n_steps = 0;
  double sqrt2nu = 0;
  int k = 0;
  Scheme scheme = Scheme::ExactGeodesicHeun;
  uint64_t seed = 0;
  int paths = 0;
  std::vector<Level> levels;  // n_steps + 1
  const VectorFieldSpec* terminal = nullptr;
  DriverCtx driver;
};

void build_torus_tables(const VectorFieldSpec& f, TorusEvalTable& val,
                        TorusEvalTable* ddx, TorusEvalTable* ddy) {
  val.build(f.tor_x, &f.tor_y);
  if (ddx) {
    TorusScalar fx = dx(f.tor_x), fy = dx(f.tor_y);
    ddx->build(fx, &fy);
  }
  if (ddy) {
    TorusScalar fx = dy(f.tor_x), fy = dy(f.tor_y);
    ddy->build(fx, &fy);
  }
}

// Per-point accumulators in the coordinates of the initial frame.
struct PointStats {
  std::array<double, 2> mean{0, 0};
  std::array<double, 2> se{0, 0};  // standard error of the mean
};

struct TorusTrig {
  std::vector<double> cx, sx, cy, sy;
  void init(int K) {
    cx.resize(K + 1);
    sx.resize(K + 1);
    cy.resize(K + 1);
    sy.resize(K + 1);
  }
  void at(const Point& p, int K) {
    torus_trig_table(p.a[0], K, cx.data(), sx.data());
    torus_trig_table(p.a[1], K, cy.data(), sy.data());
  }
};

PointStats run_point(const KernelPlan& plan, const FieldResolution& res,
                     const Point& x0, uint64_t point_id) {
  const int K = res.tor.K;
  const Frame u0 = canonical_frame(x0);
  const int k = plan.k;
  const double dt = plan.dt;
  PointStats stats;
  std::array<double, 2> sum{0, 0}, sumsq{0, 0};

  SphereWorkspace ws;
  TorusTrig trig, trig2;
  if (plan.kind == ManifoldKind::FlatTorus2) {
    trig.init(K);
    trig2.init(K);
  }
  std::vector<TangentVector> zvec(plan.driver.fn ? k : 0);
  double db[4];

  for (int p = 0; p < plan.paths; ++p) {
    uint64_t pid = point_id * uint64_t(plan.paths) + uint64_t(p);
    Point x = x0;
    Frame u = u0;
    std::array<double, 2> acc{0, 0};

    for (int j = 0; j < plan.n_steps; ++j) {
      const Level& lev = plan.levels[j];
      const Level& nxt = plan.levels[j + 1];
      double s_now = plan.t0 + j * dt;

      // Left-rectangle source accumulation in the running frame.
      if (lev.has_source || plan.driver.fn) {
        TangentVector g;
        g.base = x;
        if (lev.has_source) {
          if (plan.kind == ManifoldKind::FlatTorus2) {
            trig.at(x, K);
            lev.tor_source.eval(trig.cx.data(), trig.sx.data(), trig.cy.data(),
                                trig.sy.data(), g.c[0], g.c[1]);
          } else {
            SphereVectorEvalRef ref{res.sph.L, lev.sph_source.psi.data(),
                                    lev.sph_source.phi.data()};
            g = sphere_eval_vector_ref(ref, x, ws);
          }
        }
        if (plan.driver.fn) {
          TangentVector y;
          y.base = x;
          if (plan.kind == ManifoldKind::FlatTorus2) {
            trig.at(x, K);
            double yx, yy, gxx, gxy, gyx, gyy;
            lev.tor_theta.eval(trig.cx.data(), trig.sx.data(), trig.cy.data(),
                               trig.sy.data(), yx, yy);
            lev.tor_theta_dx.eval(trig.cx.data(), trig.sx.data(),
                                  trig.cy.data(), trig.sy.data(), gxx, gxy);
            lev.tor_theta_dy.eval(trig.cx.data(), trig.sx.data(),
                                  trig.cy.data(), trig.sy.data(), gyx, gyy);
            y.c = {yx, yy, 0.0};
            for (int i = 0; i < k; ++i) {
              TangentVector a = embedding_field(x, i);
              zvec[i].base = x;
              zvec[i].c = {a.c[0] * gxx + a.c[1] * gyx,
                           a.c[0] * gxy + a.c[1] * gyy, 0.0};
            }
          } else {
            SphereGradFrame gf;
            y = sphere_eval_vector(lev.sph_theta, x, ws, &gf);
            for (int i = 0; i < k; ++i) {
              TangentVector a = embedding_field(x, i);
              double a0 = metric(x, a, gf.basis[0]);
              double a1 = metric(x, a, gf.basis[1]);
              zvec[i].base = x;
              for (int c = 0; c < 3; ++c)
                zvec[i].c[c] =
                    (a0 * gf.t[0][0] + a1 * gf.t[1][0]) * gf.basis[0].c[c] +
                    (a0 * gf.t[0][1] + a1 * gf.t[1][1]) * gf.basis[1].c[c];
            }
          }
          TangentVector f = (*plan.driver.fn)(s_now, x, y, zvec);
          for (int c = 0; c < 3; ++c) g.c[c] += f.c[c];
        }
        acc[0] += metric(x, g, u.e[0]) * dt;
        acc[1] += metric(x, g, u.e[1]) * dt;
      }

      rng::fill_normals(plan.seed, pid, uint32_t(j), k, db);
      double sdt = std::sqrt(dt);
      for (int c = 0; c < k; ++c) db[c] *= sdt;

      auto drift_fn = [&](const Point& q, bool predictor, double* out) {
        const Level& l = predictor ? nxt : lev;
        if (!l.has_drift) {
          out[0] = out[1] = out[2] = 0.0;
          return;
        }
        if (plan.kind == ManifoldKind::FlatTorus2) {
          trig2.at(q, K);
          double v0, v1;
          l.tor_drift.eval(trig2.cx.data(), trig2.sx.data(), trig2.cy.data(),
                           trig2.sy.data(), v0, v1);
          out[0] = v0 * dt;
          out[1] = v1 * dt;
          out[2] = 0.0;
        } else {
          SphereVectorEvalRef ref{res.sph.L, l.sph_drift.psi.data(),
                                  l.sph_drift.phi.data()};
          TangentVector v = sphere_eval_vector_ref(ref, q, ws);
          for (int c = 0; c < 3; ++c) out[c] = v.c[c] * dt;
        }
      };
      if (plan.scheme == Scheme::ExactGeodesicHeun)
        detail::heun_geodesic_step(x, u, db, plan.sqrt2nu, drift_fn);
      else
        detail::projected_euler_step(x, u, db, plan.sqrt2nu, drift_fn);
    }

    // Terminal payoff in the final frame.
    TangentVector h = plan.terminal->eval(x);
    acc[0] += metric(x, h, u.e[0]);
    acc[1] += metric(x, h, u.e[1]);
    if (!std::isfinite(acc[0]) || !std::isfinite(acc[1]))
      throw std::runtime_error("backward kernel: NaN estimator at point " +
                               std::to_string(point_id) + " path " +
                               std::to_string(p));
    for (int c = 0; c < 2; ++c) {
      sum[c] += acc[c];
      sumsq[c] += acc[c] * acc[c];
    }
  }

  const double n = double(plan.paths);
  for (int c = 0; c < 2; ++c) {
    stats.mean[c] = sum[c] / n;
    double var = std::max(0.0, sumsq[c] / n - stats.mean[c] * stats.mean[c]);
    stats.se[c] = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
  }
  return stats;
}

// One backward sweep producing theta at all evaluation times. theta_prev
// supplies the driver channels when a general driver is present.
BackwardSolution backward_sweep(const BackwardProblem& prob,
                                const DriverFn* driver,
                                const TimeField* theta_prev) {
  validate(prob);
  BackwardSolution out;
  const auto pts = collocation_points(prob.fit_res);
  const auto wq = quadrature_weights(prob.fit_res);
  const int n_pts = int(pts.size());
  const int k = Manifold{prob.manifold}.noise_count();

  out.theta.t = prob.eval_times;
  out.theta.f.reserve(prob.eval_times.size());

  for (double t_eval : prob.eval_times) {
    double span = prob.horizon - t_eval;
    int n_steps = span <= 0 ? 0 : std::max(1, int(std::llround(span / prob.mc.dt)));
    double dt_loc = n_steps > 0 ? span / n_steps : 0.0;

    KernelPlan plan;
    plan.kind = prob.manifold;
    plan.t0 = t_eval;
    plan.dt = dt_loc;
    plan.n_steps = n_steps;
    plan.sqrt2nu = std::sqrt(2.0 * prob.nu);
    plan.k = k;
    plan.scheme = prob.mc.scheme;
    plan.seed = prob.mc.seed;
    plan.paths = prob.mc.paths_per_point;
    plan.terminal = &prob.terminal;
    if (driver) plan.driver = DriverCtx{driver, k};

    plan.levels.resize(n_steps + 1);
    for (int j = 0; j <= n_steps; ++j) {
      double s = t_eval + j * dt_loc;
      Level& lev = plan.levels[j];
      if (prob.drift) {
        lev.has_drift = true;
        VectorFieldSpec d = prob.drift->at_time(s);
        if (prob.manifold == ManifoldKind::FlatTorus2)
          build_torus_tables(d, lev.tor_drift, nullptr, nullptr);
        else
          lev.sph_drift = d.sph;
      }
      if (prob.source) {
        lev.has_source = true;
        VectorFieldSpec g = prob.source->at_time(s);
        if (prob.manifold == ManifoldKind::FlatTorus2)
          build_torus_tables(g, lev.tor_source, nullptr, nullptr);
        else
          lev.sph_source = g.sph;
      }
      if (driver) {
        lev.has_theta = true;
        VectorFieldSpec th = theta_prev->at_time(s);
        if (prob.manifold == ManifoldKind::FlatTorus2)
          build_torus_tables(th, lev.tor_theta, &lev.tor_theta_dx,
                             &lev.tor_theta_dy);
        else
          lev.sph_theta = th.sph;
      }
    }

    std::vector<PointStats> stats(n_pts);
    run_parallel(n_pts, prob.mc.workers, [&](int i) {
      stats[i] = run_point(plan, prob.fit_res, pts[i], uint64_t(i));
    });

    std::vector<TangentVector> values(n_pts);
    double noise2 = 0;
    for (int i = 0; i < n_pts; ++i) {
      Frame u0 = canonical_frame(pts[i]);
      TensorCoords c;
      c.m = 1;
      c.n = 0;
      c.c = {stats[i].mean[0], stats[i].mean[1]};
      values[i] = realize_vector(u0, c);
      noise2 += wq[i] * (stats[i].se[0] * stats[i].se[0] +
                         stats[i].se[1] * stats[i].se[1]);
    }
    auto fit = fit_field(prob.fit_res, values);
    out.theta.f.push_back(fit.field);
    out.mc_std.push_back(std::sqrt(noise2));
    out.fit_residual.push_back(fit.residual_rms);
  }
  out.theta.validate_grid();
  return out;
}

}  // namespace

void validate(const BackwardProblem& prob) {
  if (!(prob.horizon >= 0))
    throw std::invalid_argument("BackwardProblem: horizon >= 0");
  if (prob.eval_times.empty())
    throw std::invalid_argument("BackwardProblem: eval_times empty");
  for (size_t i = 0; i < prob.eval_times.size(); ++i) {
    if (prob.eval_times[i] < -1e-12 ||
        prob.eval_times[i] > prob.horizon + 1e-12)
      throw std::invalid_argument("BackwardProblem: eval time out of range");
    if (i > 0 && !(prob.eval_times[i] > prob.eval_times[i - 1]))
      throw std::invalid_argument("BackwardProblem: eval_times must increase");
  }
  if (prob.fit_res.kind != prob.manifold ||
      prob.terminal.res.kind != prob.manifold)
    throw std::invalid_argument("BackwardProblem: manifold mismatch");
  if (!(prob.nu >= 0)) throw std::invalid_argument("BackwardProblem: nu >= 0");
  if (prob.mc.paths_per_point < 1 || !(prob.mc.dt > 0))
    throw std::invalid_argument("BackwardProblem: bad MC parameters");
  if (prob.lipschitz < 0)
    throw std::invalid_argument("BackwardProblem: lipschitz >= 0");
}

BackwardSolution evaluate_backward_linear(const BackwardProblem& prob) {
  return backward_sweep(prob, nullptr, nullptr);
}

GeneralSolveResult solve_general_fbsde(const BackwardProblem& prob,
                                       const DriverFn& driver,
                                       const PicardOptions& opts) {
  GeneralSolveResult res;
  TimeField theta;
  theta.t = prob.eval_times;
  for (size_t i = 0; i < prob.eval_times.size(); ++i)
    theta.f.push_back(VectorFieldSpec::zero(prob.fit_res));

  int rising = 0;
  double prev_dist = -1;
  for (int it = 0; it < opts.max_iters; ++it) {
    BackwardSolution sweep = backward_sweep(prob, &driver, &theta);
    double dist = sup_sobolev_distance(sweep.theta, theta, 1, 2.0);
    res.distance_history.push_back(dist);
    theta = sweep.theta;
    res.solution = std::move(sweep);
    if (dist < opts.tol) {
      res.converged = true;
      return res;
    }
    if (prev_dist >= 0 && dist >= prev_dist) {
      if (++rising >= 3) {
        res.failure = "picard iteration failed to contract for 3 steps";
        return res;
      }
    } else {
      rising = 0;
    }
    prev_dist = dist;
  }
  res.failure = "picard iteration did not reach tolerance";
  return res;
}

ResidualReport pde_residual_check(const TimeField& theta,
                                  const BackwardProblem& prob,
                                  const DriverFn* driver) {
  theta.validate_grid();
  if (theta.t.size() < 3)
    throw std::invalid_argument("pde_residual_check: need >= 3 time nodes");
  ResidualReport rep;
  const auto pts = collocation_points(prob.fit_res);
  const auto wq = quadrature_weights(prob.fit_res);
  const int k = Manifold{prob.manifold}.noise_count();
  std::vector<TangentVector> z(k);

  for (size_t i = 1; i + 1 < theta.t.size(); ++i) {
    double t = theta.t[i];
    double dtspan = theta.t[i + 1] - theta.t[i - 1];
    VectorFieldSpec dtheta = add(theta.f[i + 1], theta.f[i - 1], 1.0 / dtspan,
                                 -1.0 / dtspan);
    VectorFieldSpec lap = laplacian_bochner(theta.f[i]);
    double num = 0, den = 0;
    for (size_t q = 0; q < pts.size(); ++q) {
      const Point& p = pts[q];
      TangentVector r = dtheta.eval(p);
      TangentVector lp = lap.eval(p);
      for (int c = 0; c < 3; ++c) r.c[c] += prob.nu * lp.c[c];
      if (prob.drift) {
        TangentVector a0 = prob.drift->eval(t, p);
        TangentVector adv = covariant_derivative_spectral(theta.f[i], p, a0);
        for (int c = 0; c < 3; ++c) r.c[c] += adv.c[c];
      }
      if (prob.source) {
        TangentVector g = prob.source->eval(t, p);
        for (int c = 0; c < 3; ++c) r.c[c] += g.c[c];
      }
      if (driver) {
        TangentVector y = theta.f[i].eval(p);
        for (int d = 0; d < k; ++d)
          z[d] = covariant_derivative_spectral(theta.f[i], p,
                                               embedding_field(p, d));
        TangentVector f = (*driver)(t, p, y, z);
        for (int c = 0; c < 3; ++c) r.c[c] += f.c[c];
      }
      TangentVector th = theta.f[i].eval(p);
      num += wq[q] * metric(p, r, r);
      den += wq[q] * metric(p, th, th);
    }
    rep.time.push_back(t);
    rep.abs_l2.push_back(std::sqrt(num));
    rep.rel_l2.push_back(den > 0 ? std::sqrt(num / den) : std::sqrt(num));
  }
  return rep;
}

}  // namespace bundleflow
