#include "bundleflow/ns.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace bundleflow {

namespace {

// Ric# as a spectral map: zero on the torus, identity on the unit sphere.
VectorFieldSpec ricci_sharp_field(const VectorFieldSpec& v) {
  if (v.res.kind == ManifoldKind::FlatTorus2)
    return VectorFieldSpec::zero(v.res);
  return v;
}

TimeField backward_sweep_ns(const TimeField& w, const NsConfig& cfg,
                            bool project, PicardMapStats* stats) {
  validate(cfg);
  w.validate_grid();
  const int n = int(w.t.size());
  if (n < 2) throw std::invalid_argument("picard_map: need >= 2 time nodes");
  if (std::fabs(w.t.front()) > 1e-12 || std::fabs(w.t.back() - cfg.T) > 1e-9)
    throw std::invalid_argument("picard_map: time grid must span [0, T]");

  WarningSink warnings;
  // Frozen iterate, projected; the pressure force is defined on
  // divergence-free fields. Diagnostic (unprojected) sweeps keep the raw
  // iterate in the drift so injected gradient defects propagate.
  std::vector<VectorFieldSpec> wp;
  wp.reserve(n);
  for (int i = 0; i < n; ++i) {
    double div = divergence(w.f[i]).l2norm();
    if (project && div > 1e-6)
      throw std::invalid_argument(
          "picard_map: iterate is not divergence-free (||div|| = " +
          std::to_string(div) + ")");
    wp.push_back(leray_project(w.f[i]));
  }

  // Terminal-value clock tau = T - s; node tau_i = T - s_{n-1-i} ascending.
  TimeField drift, source;
  drift.t.resize(n);
  source.t.resize(n);
  drift.f.reserve(n);
  source.f.reserve(n);
  for (int i = 0; i < n; ++i) {
    int j = n - 1 - i;
    drift.t[i] = cfg.T - w.t[j];
    source.t[i] = cfg.T - w.t[j];
    drift.f.push_back(scale(project ? wp[j] : w.f[j], -1.0));
    VectorFieldSpec g = pressure_force(wp[j], cfg.nu, false, &warnings);
    if (cfg.laplacian == LaplacianMode::HodgeDeRham)
      g = add(g, ricci_sharp_field(wp[j]), 1.0, -cfg.nu);
    source.f.push_back(std::move(g));
  }

  BackwardProblem prob;
  prob.manifold = cfg.manifold;
  prob.horizon = cfg.T;
  prob.eval_times = drift.t;
  prob.terminal = cfg.v0;
  prob.drift = &drift;
  prob.source = &source;
  prob.nu = cfg.nu;
  prob.fit_res = cfg.fit_res;
  prob.mc = cfg.mc;
  BackwardSolution sol = evaluate_backward_linear(prob);

  TimeField out;
  out.t = w.t;
  out.f.resize(n, VectorFieldSpec::zero(cfg.fit_res));
  if (stats) {
    stats->mc_std.assign(n, 0.0);
    stats->fit_residual.assign(n, 0.0);
  }
  for (int i = 0; i < n; ++i) {
    int j = n - 1 - i;  // physical index for paper node i
    out.f[j] = project ? leray_project(sol.theta.f[i]) : sol.theta.f[i];
    if (stats) {
      stats->mc_std[j] = sol.mc_std[i];
      stats->fit_residual[j] = sol.fit_residual[i];
    }
  }
  if (stats) {
    stats->warnings = std::move(warnings);
    for (auto& msg : sol.warnings) stats->warnings.push_back(msg);
  }
  return out;
}

}  // namespace

void validate(const NsConfig& cfg) {
  if (!(cfg.nu > 0)) throw std::invalid_argument("NsConfig: nu > 0");
  if (!(cfg.T > 0)) throw std::invalid_argument("NsConfig: T > 0");
  if (!(cfg.picard_tol > 0)) throw std::invalid_argument("NsConfig: tol > 0");
  if (!(cfg.p > 2)) throw std::invalid_argument("NsConfig: p > 2 required");
  if (cfg.time_nodes < 2) throw std::invalid_argument("NsConfig: time_nodes >= 2");
  if (cfg.picard_max_iters < 1)
    throw std::invalid_argument("NsConfig: picard_max_iters >= 1");
  if (cfg.v0.res.kind != cfg.manifold || cfg.fit_res.kind != cfg.manifold)
    throw std::invalid_argument("NsConfig: manifold mismatch");
  if (divergence(cfg.v0).l2norm() > 1e-8)
    throw std::invalid_argument("NsConfig: v0 is not divergence-free");
}

std::vector<double> ns_time_nodes(const NsConfig& cfg) {
  std::vector<double> t(cfg.time_nodes);
  for (int i = 0; i < cfg.time_nodes; ++i)
    t[i] = cfg.T * double(i) / (cfg.time_nodes - 1);
  return t;
}

TimeField picard_map(const TimeField& w, const NsConfig& cfg,
                     PicardMapStats* stats) {
  return backward_sweep_ns(w, cfg, true, stats);
}

NsResult solve_ns(const NsConfig& cfg) {
  validate(cfg);
  NsResult res;
  TimeField w;
  w.t = ns_time_nodes(cfg);
  w.f.assign(w.t.size(), cfg.v0);

  for (int it = 0; it < cfg.picard_max_iters; ++it) {
    auto start = std::chrono::steady_clock::now();
    PicardMapStats stats;
    TimeField next = picard_map(w, cfg, &stats);
    double wall =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    double dist = sup_sobolev_distance(next, w, 1, cfg.p);
    double norm2p = 0, noise = 0;
    for (size_t i = 0; i < next.f.size(); ++i) {
      norm2p = std::max(norm2p, sobolev_norm(next.f[i], 2, cfg.p));
      noise = std::max(noise, stats.mc_std[i]);
    }
    res.trace.distance.push_back(dist);
    res.trace.norm2p.push_back(norm2p);
    res.trace.wall_ms.push_back(wall);
    res.trace.mc_std.push_back(noise);
    for (auto& msg : stats.warnings) res.warnings.push_back(msg);
    w = std::move(next);
    if (dist < cfg.picard_tol) {
      res.converged = true;
      break;
    }
  }
  res.v = std::move(w);
  if (!res.converged)
    res.failure =
        "picard iteration did not contract to tolerance within max_iters "
        "(horizon too large for the data?)";
  // Flag non-monotone tails after burn-in.
  for (size_t i = 2; i < res.trace.distance.size(); ++i)
    if (res.trace.distance[i] > res.trace.distance[i - 1]) {
      res.warnings.push_back("picard distances not monotone after burn-in");
      break;
    }
  return res;
}

ContractionReport contraction_probe(const TimeField& w1, const TimeField& w2,
                                    const NsConfig& cfg) {
  if (w1.t.size() != w2.t.size())
    throw std::invalid_argument("contraction_probe: time grids differ");
  ContractionReport rep;
  rep.den = sup_sobolev_distance(w1, w2, 1, cfg.p);
  if (rep.den < 1e-13)
    throw std::invalid_argument("contraction_probe: inputs coincide");
  TimeField i1 = picard_map(w1, cfg);
  TimeField i2 = picard_map(w2, cfg);
  for (size_t i = 0; i < i1.f.size(); ++i)
    rep.per_time_num.push_back(
        sobolev_norm(add(i1.f[i], i2.f[i], 1.0, -1.0), 1, cfg.p));
  rep.num = 0;
  for (double x : rep.per_time_num) rep.num = std::max(rep.num, x);
  rep.ratio = rep.num / rep.den;
  return rep;
}

DivergenceReport divergence_decay_check(const TimeField& w,
                                        const NsConfig& cfg) {
  DivergenceReport rep;
  PicardMapStats stats;
  TimeField theta = backward_sweep_ns(w, cfg, false, &stats);
  double kmax = cfg.manifold == ManifoldKind::FlatTorus2
                    ? std::sqrt(2.0) * cfg.fit_res.tor.K
                    : std::sqrt(double(cfg.fit_res.sph.L) *
                                (cfg.fit_res.sph.L + 1));
  double noise = 0;
  for (size_t i = 0; i < theta.f.size(); ++i) {
    rep.per_time.push_back(divergence(theta.f[i]).l2norm());
    noise = std::max(noise, stats.mc_std[i]);
  }
  for (double d : rep.per_time) rep.sup_div_l2 = std::max(rep.sup_div_l2, d);
  rep.mc_allowance = 5.0 * kmax * noise;
  rep.threshold = std::max(1e-3, rep.mc_allowance);
  rep.pass = rep.sup_div_l2 <= rep.threshold;
  return rep;
}

}  // namespace bundleflow
