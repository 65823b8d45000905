#include "bundleflow/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace bundleflow {

namespace {

void require_same(const FieldResolution& a, const FieldResolution& b,
                  const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": resolution mismatch");
}

// Torus component jets on the collocation grid: values and first/second
// angle derivatives of one scalar.
struct TorusJet {
  std::vector<double> v, vx, vy, vxx, vxy, vyy;
};

TorusJet torus_jet(const TorusScalar& f, bool second) {
  TorusJet j;
  j.v = torus_synth(f);
  TorusScalar fx = dx(f), fy = dy(f);
  j.vx = torus_synth(fx);
  j.vy = torus_synth(fy);
  if (second) {
    j.vxx = torus_synth(dx(fx));
    j.vxy = torus_synth(dy(fx));
    j.vyy = torus_synth(dy(fy));
  }
  return j;
}

}  // namespace

ScalarFieldSpec ScalarFieldSpec::zero(const FieldResolution& r) {
  ScalarFieldSpec f;
  f.res = r;
  if (r.kind == ManifoldKind::FlatTorus2)
    f.tor = TorusScalar::zero(r.tor);
  else
    f.sph = SphereScalar::zero(r.sph);
  return f;
}

double ScalarFieldSpec::eval(const Point& p) const {
  if (p.kind != res.kind) throw std::invalid_argument("scalar eval: manifold mismatch");
  return res.kind == ManifoldKind::FlatTorus2 ? tor.eval(p) : sph.eval(p);
}

double ScalarFieldSpec::mean() const {
  return res.kind == ManifoldKind::FlatTorus2 ? tor.mean() : sph.mean();
}

double ScalarFieldSpec::l2norm() const {
  return res.kind == ManifoldKind::FlatTorus2 ? tor.l2norm() : sph.l2norm();
}

VectorFieldSpec VectorFieldSpec::zero(const FieldResolution& r) {
  VectorFieldSpec v;
  v.res = r;
  if (r.kind == ManifoldKind::FlatTorus2) {
    v.tor_x = TorusScalar::zero(r.tor);
    v.tor_y = TorusScalar::zero(r.tor);
  } else {
    v.sph = SphereVector::zero(r.sph);
  }
  return v;
}

TangentVector VectorFieldSpec::eval(const Point& p) const {
  if (p.kind != res.kind) throw std::invalid_argument("vector eval: manifold mismatch");
  if (res.kind == ManifoldKind::FlatTorus2) {
    TangentVector t;
    t.base = p;
    t.c = {tor_x.eval(p), tor_y.eval(p), 0.0};
    return t;
  }
  SphereWorkspace ws;
  return sphere_eval_vector(sph, p, ws);
}

double VectorFieldSpec::l2norm() const {
  if (res.kind == ManifoldKind::FlatTorus2) {
    double a = tor_x.l2norm(), b = tor_y.l2norm();
    return std::sqrt(a * a + b * b);
  }
  double s = 0;
  for (int l = 1; l <= res.sph.L; ++l)
    for (int m = -l; m <= l; ++m) {
      double lm = double(l) * (l + 1);
      s += lm * (sph.psi[sh_index(l, m)] * sph.psi[sh_index(l, m)] +
                 sph.phi[sh_index(l, m)] * sph.phi[sh_index(l, m)]);
    }
  return std::sqrt(s);
}

ScalarFieldSpec add(const ScalarFieldSpec& a, const ScalarFieldSpec& b,
                    double sa, double sb) {
  require_same(a.res, b.res, "scalar add");
  ScalarFieldSpec g = a;
  if (a.res.kind == ManifoldKind::FlatTorus2)
    g.tor = add(a.tor, b.tor, sa, sb);
  else
    g.sph = add(a.sph, b.sph, sa, sb);
  return g;
}

VectorFieldSpec add(const VectorFieldSpec& a, const VectorFieldSpec& b,
                    double sa, double sb) {
  require_same(a.res, b.res, "vector add");
  VectorFieldSpec g = a;
  if (a.res.kind == ManifoldKind::FlatTorus2) {
    g.tor_x = add(a.tor_x, b.tor_x, sa, sb);
    g.tor_y = add(a.tor_y, b.tor_y, sa, sb);
  } else {
    for (size_t i = 0; i < g.sph.psi.size(); ++i) {
      g.sph.psi[i] = sa * a.sph.psi[i] + sb * b.sph.psi[i];
      g.sph.phi[i] = sa * a.sph.phi[i] + sb * b.sph.phi[i];
    }
  }
  return g;
}

VectorFieldSpec scale(const VectorFieldSpec& a, double s) {
  return add(a, a, s, 0.0);
}

VectorFieldSpec grad(const ScalarFieldSpec& f) {
  VectorFieldSpec v = VectorFieldSpec::zero(f.res);
  if (f.res.kind == ManifoldKind::FlatTorus2) {
    v.tor_x = dx(f.tor);
    v.tor_y = dy(f.tor);
  } else {
    v.sph.phi = f.sph.a;
    for (auto& c : v.sph.psi) c = 0.0;
    v.sph.phi[0] = 0.0;
  }
  return v;
}

VectorFieldSpec rot(const ScalarFieldSpec& f) {
  VectorFieldSpec v = VectorFieldSpec::zero(f.res);
  if (f.res.kind == ManifoldKind::FlatTorus2) {
    v.tor_x = add(dy(f.tor), dy(f.tor), -1.0, 0.0);
    v.tor_y = dx(f.tor);
  } else {
    v.sph.psi = f.sph.a;
    v.sph.psi[0] = 0.0;
  }
  return v;
}

ScalarFieldSpec divergence(const VectorFieldSpec& v) {
  ScalarFieldSpec f = ScalarFieldSpec::zero(v.res);
  if (v.res.kind == ManifoldKind::FlatTorus2) {
    f.tor = add(dx(v.tor_x), dy(v.tor_y));
  } else {
    // div(rot psi + grad phi) = lap phi.
    f.sph.a = v.sph.phi;
    f.sph = laplacian(f.sph);
  }
  return f;
}

ScalarFieldSpec laplace_beltrami(const ScalarFieldSpec& f) {
  ScalarFieldSpec g = f;
  if (f.res.kind == ManifoldKind::FlatTorus2)
    g.tor = laplacian(f.tor);
  else
    g.sph = laplacian(f.sph);
  return g;
}

ScalarFieldSpec laplace_inverse(const ScalarFieldSpec& f,
                                WarningSink* warnings) {
  ScalarFieldSpec g = f;
  double dropped = 0;
  if (f.res.kind == ManifoldKind::FlatTorus2)
    g.tor = laplacian_inverse(f.tor, &dropped);
  else
    g.sph = laplacian_inverse(f.sph, &dropped);
  if (std::fabs(dropped) > 1e-10 && warnings)
    warnings->push_back("laplace_inverse: subtracted nonzero mean " +
                        std::to_string(dropped));
  return g;
}

VectorFieldSpec laplacian_bochner(const VectorFieldSpec& v) {
  VectorFieldSpec g = v;
  if (v.res.kind == ManifoldKind::FlatTorus2) {
    g.tor_x = laplacian(v.tor_x);
    g.tor_y = laplacian(v.tor_y);
    return g;
  }
  // Bochner = Hodge + Ric on both Helmholtz channels of S^2.
  for (int l = 1; l <= v.res.sph.L; ++l) {
    double mul = -double(l) * (l + 1) + 1.0;
    for (int m = -l; m <= l; ++m) {
      g.sph.psi[sh_index(l, m)] *= mul;
      g.sph.phi[sh_index(l, m)] *= mul;
    }
  }
  return g;
}

VectorFieldSpec laplacian_hodge(const VectorFieldSpec& v) {
  VectorFieldSpec g = v;
  if (v.res.kind == ManifoldKind::FlatTorus2) return laplacian_bochner(v);
  for (int l = 1; l <= v.res.sph.L; ++l) {
    double mul = -double(l) * (l + 1);
    for (int m = -l; m <= l; ++m) {
      g.sph.psi[sh_index(l, m)] *= mul;
      g.sph.phi[sh_index(l, m)] *= mul;
    }
  }
  return g;
}

VectorFieldSpec leray_project(const VectorFieldSpec& v) {
  if (v.res.kind == ManifoldKind::UnitSphere2) {
    VectorFieldSpec g = v;
    for (auto& c : g.sph.phi) c = 0.0;
    return g;
  }
  ScalarFieldSpec d = divergence(v);
  ScalarFieldSpec pot = laplace_inverse(d, nullptr);
  return add(v, grad(pot), 1.0, -1.0);
}

ScalarFieldSpec advective_divergence(const VectorFieldSpec& v,
                                     const VectorFieldSpec& w) {
  require_same(v.res, w.res, "advective_divergence");
  // div(nabla_v w) = v(div w) + tr(nabla v . nabla w) + Ric(v, w).
  if (v.res.kind == ManifoldKind::FlatTorus2) {
    TorusJet jv[2] = {torus_jet(v.tor_x, false), torus_jet(v.tor_y, false)};
    TorusJet jw[2] = {torus_jet(w.tor_x, false), torus_jet(w.tor_y, false)};
    size_t n = jv[0].v.size();
    ScalarFieldSpec dw = divergence(w);
    auto gdwx = torus_synth(dx(dw.tor));
    auto gdwy = torus_synth(dy(dw.tor));
    std::vector<double> out(n);
    for (size_t k = 0; k < n; ++k) {
      double tr = jv[0].vx[k] * jw[0].vx[k] + jv[0].vy[k] * jw[1].vx[k] +
                  jv[1].vx[k] * jw[0].vy[k] + jv[1].vy[k] * jw[1].vy[k];
      out[k] = tr + jv[0].v[k] * gdwx[k] + jv[1].v[k] * gdwy[k];
    }
    ScalarFieldSpec f = ScalarFieldSpec::zero(v.res);
    f.tor = torus_analyze(v.res.tor, out).field;
    return f;
  }

  auto grid = SphereGrid::get(v.res.sph);
  SphereGrid::VectorJet jv, jw;
  grid->vector_jet(v.sph, jv, false);
  grid->vector_jet(w.sph, jw, false);
  // div w and its surface gradient at the nodes.
  ScalarFieldSpec dw = divergence(w);
  SphereVector gdw = SphereVector::zero(v.res.sph);
  gdw.phi = dw.sph.a;
  gdw.phi[0] = 0.0;
  std::vector<double> gth, gph;
  grid->synth_vector(gdw, gth, gph);
  std::vector<double> out(grid->n_points());
  for (int k = 0; k < grid->n_points(); ++k) {
    double tr = 0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) tr += jv.t[a][b][k] * jw.t[b][a][k];
    double ric = jv.vth[k] * jw.vth[k] + jv.vph[k] * jw.vph[k];
    double vd = jv.vth[k] * gth[k] + jv.vph[k] * gph[k];
    out[k] = vd + tr + ric;
  }
  ScalarFieldSpec f = ScalarFieldSpec::zero(v.res);
  f.sph = grid->analyze_scalar(out);
  return f;
}

ScalarFieldSpec scalar_advection(const VectorFieldSpec& v,
                                 const ScalarFieldSpec& f) {
  require_same(v.res, f.res, "scalar_advection");
  if (v.res.kind == ManifoldKind::FlatTorus2) {
    auto gx = torus_synth(dx(f.tor)), gy = torus_synth(dy(f.tor));
    auto vx = torus_synth(v.tor_x), vy = torus_synth(v.tor_y);
    for (size_t k = 0; k < gx.size(); ++k) gx[k] = vx[k] * gx[k] + vy[k] * gy[k];
    ScalarFieldSpec out = ScalarFieldSpec::zero(f.res);
    out.tor = torus_analyze(f.res.tor, gx).field;
    return out;
  }
  auto grid = SphereGrid::get(v.res.sph);
  SphereVector gf = SphereVector::zero(f.res.sph);
  gf.phi = f.sph.a;
  gf.phi[0] = 0.0;
  std::vector<double> gth, gph, vth, vph;
  grid->synth_vector(gf, gth, gph);
  grid->synth_vector(v.sph, vth, vph);
  std::vector<double> out(grid->n_points());
  for (int k = 0; k < grid->n_points(); ++k)
    out[k] = vth[k] * gth[k] + vph[k] * gph[k];
  ScalarFieldSpec g = ScalarFieldSpec::zero(f.res);
  g.sph = grid->analyze_scalar(out);
  return g;
}

VectorFieldSpec pressure_force(const VectorFieldSpec& v, double nu, bool hodge,
                               WarningSink* warnings) {
  (void)hodge;
  ScalarFieldSpec dv = divergence(v);
  if (dv.l2norm() > 1e-8)
    throw std::invalid_argument("pressure_force: input is not divergence-free");
  ScalarFieldSpec adv = advective_divergence(v, v);
  // div(Ric# v): zero on the torus; equals div v = 0 on the unit sphere for
  // divergence-free input, but keep the generic term.
  if (v.res.kind == ManifoldKind::UnitSphere2) {
    ScalarFieldSpec ric_div = ScalarFieldSpec::zero(v.res);
    ric_div.sph.a = v.sph.phi;
    ric_div.sph = laplacian(ric_div.sph);
    adv = add(adv, ric_div, 1.0, -nu);
  }
  return grad(laplace_inverse(adv, warnings));
}

double sobolev_norm(const VectorFieldSpec& v, int order, double p) {
  if (order < 0 || order > 2)
    throw std::invalid_argument("sobolev_norm: order must be 0, 1 or 2");
  if (p < 2) throw std::invalid_argument("sobolev_norm: p >= 2");
  auto pts_w = quadrature_weights(v.res);
  double acc = 0;
  if (v.res.kind == ManifoldKind::FlatTorus2) {
    TorusJet jx = torus_jet(v.tor_x, order >= 2);
    TorusJet jy = torus_jet(v.tor_y, order >= 2);
    for (size_t k = 0; k < jx.v.size(); ++k) {
      double s = std::pow(jx.v[k] * jx.v[k] + jy.v[k] * jy.v[k], p / 2);
      if (order >= 1)
        s += std::pow(jx.vx[k] * jx.vx[k] + jx.vy[k] * jx.vy[k] +
                          jy.vx[k] * jy.vx[k] + jy.vy[k] * jy.vy[k],
                      p / 2);
      if (order >= 2)
        s += std::pow(jx.vxx[k] * jx.vxx[k] + 2 * jx.vxy[k] * jx.vxy[k] +
                          jx.vyy[k] * jx.vyy[k] + jy.vxx[k] * jy.vxx[k] +
                          2 * jy.vxy[k] * jy.vxy[k] + jy.vyy[k] * jy.vyy[k],
                      p / 2);
      acc += pts_w[k] * s;
    }
  } else {
    auto grid = SphereGrid::get(v.res.sph);
    SphereGrid::VectorJet jet;
    grid->vector_jet(v.sph, jet, order >= 2);
    for (int k = 0; k < grid->n_points(); ++k) {
      double s =
          std::pow(jet.vth[k] * jet.vth[k] + jet.vph[k] * jet.vph[k], p / 2);
      if (order >= 1) {
        double t2 = 0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) t2 += jet.t[a][b][k] * jet.t[a][b][k];
        s += std::pow(t2, p / 2);
      }
      if (order >= 2) {
        double s2 = 0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
              s2 += jet.s[a][b][c][k] * jet.s[a][b][c][k];
        s += std::pow(s2, p / 2);
      }
      acc += pts_w[k] * s;
    }
  }
  return std::pow(acc, 1.0 / p);
}

TangentVector covariant_derivative_spectral(const VectorFieldSpec& v,
                                            const Point& p,
                                            const TangentVector& w) {
  if (v.res.kind == ManifoldKind::FlatTorus2) {
    TangentVector out;
    out.base = p;
    out.c = {w.c[0] * dx(v.tor_x).eval(p) + w.c[1] * dy(v.tor_x).eval(p),
             w.c[0] * dx(v.tor_y).eval(p) + w.c[1] * dy(v.tor_y).eval(p), 0.0};
    return out;
  }
  SphereWorkspace ws;
  SphereGradFrame gf;
  sphere_eval_vector(v.sph, p, ws, &gf);
  double wa[2] = {metric(p, w, gf.basis[0]), metric(p, w, gf.basis[1])};
  TangentVector out;
  out.base = p;
  for (int c = 0; c < 3; ++c)
    out.c[c] = (wa[0] * gf.t[0][0] + wa[1] * gf.t[1][0]) * gf.basis[0].c[c] +
               (wa[0] * gf.t[0][1] + wa[1] * gf.t[1][1]) * gf.basis[1].c[c];
  return out;
}

std::vector<Point> collocation_points(const FieldResolution& r) {
  if (r.kind == ManifoldKind::FlatTorus2) return torus_grid_points(r.tor);
  return SphereGrid::get(r.sph)->points();
}

std::vector<double> quadrature_weights(const FieldResolution& r) {
  if (r.kind == ManifoldKind::FlatTorus2) {
    double w = kTwoPi * kTwoPi / (double(r.tor.N) * r.tor.N);
    return std::vector<double>(size_t(r.tor.N) * r.tor.N, w);
  }
  auto grid = SphereGrid::get(r.sph);
  std::vector<double> w(grid->n_points());
  for (int i = 0; i < r.sph.n_lat; ++i)
    for (int j = 0; j < r.sph.n_lon; ++j)
      w[size_t(i) * r.sph.n_lon + j] = grid->quad_weight(i);
  return w;
}

FitResult fit_field(const FieldResolution& r,
                    const std::vector<TangentVector>& samples) {
  FitResult out;
  if (r.kind == ManifoldKind::FlatTorus2) {
    size_t n = size_t(r.tor.N) * r.tor.N;
    if (samples.size() != n)
      throw std::invalid_argument("fit_field: sample grid mismatch");
    std::vector<double> gx(n), gy(n);
    for (size_t k = 0; k < n; ++k) {
      gx[k] = samples[k].c[0];
      gy[k] = samples[k].c[1];
    }
    auto ax = torus_analyze(r.tor, gx);
    auto ay = torus_analyze(r.tor, gy);
    out.field = VectorFieldSpec::zero(r);
    out.field.tor_x = ax.field;
    out.field.tor_y = ay.field;
    out.residual_rms = std::sqrt(ax.residual_rms * ax.residual_rms +
                                 ay.residual_rms * ay.residual_rms);
    return out;
  }
  auto grid = SphereGrid::get(r.sph);
  if (samples.size() != size_t(grid->n_points()))
    throw std::invalid_argument("fit_field: sample grid mismatch");
  std::vector<double> vth(samples.size()), vph(samples.size());
  for (int i = 0; i < r.sph.n_lat; ++i)
    for (int j = 0; j < r.sph.n_lon; ++j) {
      size_t k = size_t(i) * r.sph.n_lon + j;
      Point p = grid->point(i, j);
      auto basis = canonical_basis(p);
      vth[k] = metric(p, samples[k], basis[0]);
      vph[k] = metric(p, samples[k], basis[1]);
    }
  auto fit = grid->analyze_vector(vth, vph);
  out.field = VectorFieldSpec::zero(r);
  out.field.sph = fit.field;
  out.residual_rms = fit.residual_rms;
  return out;
}

void TimeField::validate_grid() const {
  if (t.size() != f.size() || t.empty())
    throw std::invalid_argument("TimeField: node count mismatch");
  for (size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1]))
      throw std::invalid_argument("TimeField: grid must be strictly increasing");
}

void TimeField::locate(double s, int& i0, int& i1, double& w1) const {
  if (t.empty()) throw std::invalid_argument("TimeField: empty");
  if (s <= t.front()) {
    i0 = i1 = 0;
    w1 = 0;
    return;
  }
  if (s >= t.back()) {
    i0 = i1 = int(t.size()) - 1;
    w1 = 0;
    return;
  }
  int lo = 0, hi = int(t.size()) - 1;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    (t[mid] <= s ? lo : hi) = mid;
  }
  i0 = lo;
  i1 = hi;
  w1 = (s - t[lo]) / (t[hi] - t[lo]);
}

VectorFieldSpec TimeField::at_time(double s) const {
  int i0, i1;
  double w1;
  locate(s, i0, i1, w1);
  if (i0 == i1) return f[i0];
  return add(f[i0], f[i1], 1.0 - w1, w1);
}

TangentVector TimeField::eval(double s, const Point& p) const {
  int i0, i1;
  double w1;
  locate(s, i0, i1, w1);
  if (i0 == i1) return f[i0].eval(p);
  TangentVector a = f[i0].eval(p);
  TangentVector b = f[i1].eval(p);
  TangentVector out;
  out.base = p;
  for (int k = 0; k < 3; ++k) out.c[k] = (1.0 - w1) * a.c[k] + w1 * b.c[k];
  return out;
}

double sup_sobolev_distance(const TimeField& a, const TimeField& b, int order,
                            double p) {
  if (a.t.size() != b.t.size())
    throw std::invalid_argument("sup_sobolev_distance: time grids differ");
  double worst = 0;
  for (size_t i = 0; i < a.t.size(); ++i)
    worst = std::max(worst, sobolev_norm(add(a.f[i], b.f[i], 1.0, -1.0), order, p));
  return worst;
}

}  // namespace bundleflow
