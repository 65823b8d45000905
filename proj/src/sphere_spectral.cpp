#include "bundleflow/spectral_sphere.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace bundleflow {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
const double kInvSqrtPi = 1.0 / std::sqrt(kPi);
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

struct ResLess {
  bool operator()(const SphereResolution& a, const SphereResolution& b) const {
    return std::tie(a.L, a.n_lat, a.n_lon) < std::tie(b.L, b.n_lat, b.n_lon);
  }
};

inline double lam(int l) { return double(l) * (l + 1); }

// Coefficients of the ladder recurrences, all safe to form directly at the
// degrees used here.
inline double coefA(int l, int m) { return std::sqrt(double(l + m) * (l - m + 1)); }
inline double coefB(int l, int m) { return std::sqrt(double(l - m) * (l + m + 1)); }
inline double coefAlpha(int l, int m) {
  return std::sqrt((2.0 * l + 1) * (l - m) * (l - m - 1) / (2.0 * l - 1));
}
inline double coefBeta(int l, int m) {
  return std::sqrt((2.0 * l + 1) * (l + m) * (l + m - 1) / (2.0 * l - 1));
}

}  // namespace

void validate(const SphereResolution& r) {
  if (r.L < 1) throw std::invalid_argument("sphere resolution: L >= 1");
  if (r.n_lat < std::max(r.L + 2, (3 * r.L + 3) / 2))
    throw std::invalid_argument("sphere resolution: n_lat too small");
  if (r.n_lon < 3 * r.L + 1)
    throw std::invalid_argument("sphere resolution: n_lon too small");
}

SphereScalar SphereScalar::zero(const SphereResolution& r) {
  validate(r);
  SphereScalar f;
  f.res = r;
  f.a.assign(sh_count(r.L), 0.0);
  return f;
}

double SphereScalar::mean() const {
  // Y_00 = 1/sqrt(4 pi); integral = a_00 * sqrt(4 pi); area = 4 pi.
  return a[0] / std::sqrt(4.0 * kPi);
}

double SphereScalar::l2norm() const {
  double s = 0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

SphereVector SphereVector::zero(const SphereResolution& r) {
  validate(r);
  SphereVector v;
  v.res = r;
  v.psi.assign(sh_count(r.L), 0.0);
  v.phi.assign(sh_count(r.L), 0.0);
  return v;
}

SphereScalar laplacian(const SphereScalar& f) {
  SphereScalar g = f;
  for (int l = 0; l <= f.res.L; ++l)
    for (int m = -l; m <= l; ++m) g.at(l, m) *= -lam(l);
  return g;
}

SphereScalar laplacian_inverse(const SphereScalar& f, double* dropped_mean) {
  SphereScalar g = f;
  g.a[0] = 0.0;
  for (int l = 1; l <= f.res.L; ++l)
    for (int m = -l; m <= l; ++m) g.at(l, m) /= -lam(l);
  if (dropped_mean) *dropped_mean = f.mean();
  return g;
}

SphereScalar add(const SphereScalar& a, const SphereScalar& b, double sa,
                 double sb) {
  if (!(a.res == b.res))
    throw std::invalid_argument("sphere add: resolution mismatch");
  SphereScalar g = a;
  for (size_t i = 0; i < g.a.size(); ++i) g.a[i] = sa * a.a[i] + sb * b.a[i];
  return g;
}

void LegendreLadder::compute(int L_, double x, double s, int depth_) {
  L = L_;
  depth = depth_;
  const int nc = leg_pack(L, L) + 1;
  P.assign(nc, 0.0);
  Q.assign(nc, 0.0);
  if (depth >= 2) P1.assign(nc, 0.0);
  if (depth >= 3) {
    Q1.assign(nc, 0.0);
    P2.assign(nc, 0.0);
  }
  if (depth >= 4) {
    Q2.assign(nc, 0.0);
    P3.assign(nc, 0.0);
  }

  // Normalized associated Legendre values, no Condon-Shortley phase:
  // integral over [-1,1] of P_lm^2 dx = 1.
  P[0] = std::sqrt(0.5);
  for (int m = 1; m <= L; ++m)
    P[leg_pack(m, m)] =
        std::sqrt((2.0 * m + 1) / (2.0 * m)) * s * P[leg_pack(m - 1, m - 1)];
  for (int m = 0; m < L; ++m)
    P[leg_pack(m + 1, m)] = std::sqrt(2.0 * m + 3) * x * P[leg_pack(m, m)];
  for (int m = 0; m <= L; ++m)
    for (int l = m + 2; l <= L; ++l) {
      double a = std::sqrt((4.0 * l * l - 1) / (double(l) * l - double(m) * m));
      double b = std::sqrt((double(l - 1) * (l - 1) - double(m) * m) /
                           (4.0 * double(l - 1) * (l - 1) - 1));
      P[leg_pack(l, m)] = a * (x * P[leg_pack(l - 1, m)] - b * P[leg_pack(l - 2, m)]);
    }

  auto at = [&](const std::vector<double>& arr, int l, int m) -> double {
    if (m > l || l < 0) return 0.0;
    return arr[leg_pack(l, m)];
  };
  // d/dtheta maps the degree-l row to neighbours in order m.
  auto ddtheta = [&](const std::vector<double>& src, std::vector<double>& dst) {
    for (int l = 0; l <= L; ++l) {
      dst[leg_pack(l, 0)] = l >= 1 ? -std::sqrt(lam(l)) * at(src, l, 1) : 0.0;
      for (int m = 1; m <= l; ++m)
        dst[leg_pack(l, m)] = 0.5 * (coefA(l, m) * at(src, l, m - 1) -
                                     coefB(l, m) * at(src, l, m + 1));
    }
  };
  // (m/sin) applied through the degree-(l-1) row, stable at the poles.
  auto msin = [&](const std::vector<double>& src, std::vector<double>& dst) {
    for (int l = 0; l <= L; ++l) {
      dst[leg_pack(l, 0)] = 0.0;
      for (int m = 1; m <= l; ++m)
        dst[leg_pack(l, m)] = 0.5 * (coefAlpha(l, m) * at(src, l - 1, m + 1) +
                                     coefBeta(l, m) * at(src, l - 1, m - 1));
    }
  };

  msin(P, Q);
  if (depth >= 2) ddtheta(P, P1);
  if (depth >= 3) {
    ddtheta(P1, P2);
    msin(P1, Q1);
  }
  if (depth >= 4) {
    ddtheta(P2, P3);
    msin(P2, Q2);
  }
}

std::vector<double> gauss_legendre_nodes(int n, std::vector<double>& weights) {
  std::vector<double> x(n);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    // Newton from the Chebyshev-like initial guess; nodes in decreasing x.
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p0 = 0, p1 = 0;
    for (int it = 0; it < 100; ++it) {
      p0 = 1.0;
      p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1) * t * p1 - k * p2) / (k + 1);
      }
      double dp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / dp;
      t -= dt;
      if (std::fabs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int k = 0; k < n; ++k) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k + 1) * t * p1 - k * p2) / (k + 1);
    }
    double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = t;
    weights[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  return x;
}

SphereGrid::SphereGrid(const SphereResolution& r) : res(r) {
  validate(r);
  xnode = gauss_legendre_nodes(r.n_lat, wnode);
  sinth.resize(r.n_lat);
  costh.resize(r.n_lat);
  lad.resize(r.n_lat);
  for (int i = 0; i < r.n_lat; ++i) {
    costh[i] = xnode[i];
    sinth[i] = std::sqrt(std::max(0.0, 1.0 - xnode[i] * xnode[i]));
    lad[i].compute(r.L, costh[i], sinth[i], 4);
  }
  phi.resize(r.n_lon);
  for (int j = 0; j < r.n_lon; ++j) phi[j] = kTwoPi * j / r.n_lon;
}

std::shared_ptr<const SphereGrid> SphereGrid::get(const SphereResolution& r) {
  static std::mutex mu;
  static std::map<SphereResolution, std::shared_ptr<const SphereGrid>, ResLess>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[r];
  if (!slot) slot = std::shared_ptr<const SphereGrid>(new SphereGrid(r));
  return slot;
}

Point SphereGrid::point(int i, int j) const {
  double s = sinth[i];
  return Point::sphere(s * std::cos(phi[j]), s * std::sin(phi[j]), costh[i]);
}

std::vector<Point> SphereGrid::points() const {
  std::vector<Point> pts;
  pts.reserve(n_points());
  for (int i = 0; i < res.n_lat; ++i)
    for (int j = 0; j < res.n_lon; ++j) pts.push_back(point(i, j));
  return pts;
}

double SphereGrid::quad_weight(int i) const {
  return wnode[i] * kTwoPi / res.n_lon;
}

std::vector<double> SphereGrid::synth_scalar(const SphereScalar& f) const {
  const int L = res.L;
  std::vector<double> out(size_t(n_points()), 0.0);
  std::vector<double> gc(L + 1), gs(L + 1);
  for (int i = 0; i < res.n_lat; ++i) {
    const auto& P = lad[i].P;
    for (int m = 0; m <= L; ++m) {
      double sc = 0, ss = 0;
      for (int l = m; l <= L; ++l) {
        sc += f.at(l, m) * P[leg_pack(l, m)];
        if (m > 0) ss += f.at(l, -m) * P[leg_pack(l, m)];
      }
      gc[m] = sc;
      gs[m] = ss;
    }
    for (int j = 0; j < res.n_lon; ++j) {
      double v = gc[0] * kInvSqrt2Pi;
      for (int m = 1; m <= L; ++m)
        v += (gc[m] * std::cos(m * phi[j]) + gs[m] * std::sin(m * phi[j])) *
             kInvSqrtPi;
      out[size_t(i) * res.n_lon + j] = v;
    }
  }
  return out;
}

SphereScalar SphereGrid::analyze_scalar(const std::vector<double>& grid) const {
  if (grid.size() != size_t(n_points()))
    throw std::invalid_argument("sphere analyze: grid size mismatch");
  const int L = res.L;
  SphereScalar f = SphereScalar::zero(res);
  const double dphi = kTwoPi / res.n_lon;
  std::vector<double> fc(L + 1), fs(L + 1);
  for (int i = 0; i < res.n_lat; ++i) {
    for (int m = 0; m <= L; ++m) {
      double c = 0, s = 0;
      for (int j = 0; j < res.n_lon; ++j) {
        double g = grid[size_t(i) * res.n_lon + j];
        c += g * std::cos(m * phi[j]);
        s += g * std::sin(m * phi[j]);
      }
      fc[m] = c * dphi;
      fs[m] = s * dphi;
    }
    const auto& P = lad[i].P;
    for (int l = 0; l <= L; ++l) {
      f.at(l, 0) += wnode[i] * P[leg_pack(l, 0)] * fc[0] * kInvSqrt2Pi;
      for (int m = 1; m <= l; ++m) {
        f.at(l, m) += wnode[i] * P[leg_pack(l, m)] * fc[m] * kInvSqrtPi;
        f.at(l, -m) += wnode[i] * P[leg_pack(l, m)] * fs[m] * kInvSqrtPi;
      }
    }
  }
  return f;
}

double SphereScalar::eval(const Point& p) const {
  SphereWorkspace ws;
  return sphere_eval_scalar(*this, p, ws);
}

namespace {

// Per-latitude theta sums for one potential and one kernel: Sc[m], Ss[m].
struct MSums {
  std::vector<double> c, s;
  void init(int L) {
    c.assign(L + 1, 0.0);
    s.assign(L + 1, 0.0);
  }
};

void theta_sums(const std::vector<double>& coef, const std::vector<double>& ker,
                int L, MSums& out) {
  out.init(L);
  for (int m = 0; m <= L; ++m) {
    double sc = 0, ss = 0;
    for (int l = std::max(1, m); l <= L; ++l) {
      sc += coef[sh_index(l, m)] * ker[leg_pack(l, m)];
      if (m > 0) ss += coef[sh_index(l, -m)] * ker[leg_pack(l, m)];
    }
    out.c[m] = sc;
    out.s[m] = ss;
  }
}

// Assembles a series value at one longitude. swap=false: sum of
// (Sc cos + Ss sin); swap=true: the phi-derivative pairing (-Sc sin + Ss cos).
// msums entries carry the 1/sqrt(pi) normalizations applied here.
double series(const MSums& ms, const double* cm, const double* sm, int L,
              bool swap) {
  double v = swap ? 0.0 : ms.c[0] * kInvSqrt2Pi;
  for (int m = 1; m <= L; ++m) {
    double t = swap ? (-ms.c[m] * sm[m] + ms.s[m] * cm[m])
                    : (ms.c[m] * cm[m] + ms.s[m] * sm[m]);
    v += t * kInvSqrtPi;
  }
  return v;
}

}  // namespace

void SphereGrid::synth_vector(const SphereVector& v, std::vector<double>& vth,
                              std::vector<double>& vph) const {
  const int L = res.L;
  vth.assign(n_points(), 0.0);
  vph.assign(n_points(), 0.0);
  std::vector<double> cm(L + 1), sm(L + 1);
  MSums phiP1, phiQ, psiP1, psiQ;
  for (int i = 0; i < res.n_lat; ++i) {
    theta_sums(v.phi, lad[i].P1, L, phiP1);
    theta_sums(v.phi, lad[i].Q, L, phiQ);
    theta_sums(v.psi, lad[i].P1, L, psiP1);
    theta_sums(v.psi, lad[i].Q, L, psiQ);
    for (int j = 0; j < res.n_lon; ++j) {
      for (int m = 0; m <= L; ++m) {
        cm[m] = std::cos(m * phi[j]);
        sm[m] = std::sin(m * phi[j]);
      }
      // v_theta = d_theta(phi) - (1/s) d_phi(psi)
      // v_phi   = (1/s) d_phi(phi) + d_theta(psi)
      vth[size_t(i) * res.n_lon + j] =
          series(phiP1, cm.data(), sm.data(), L, false) -
          series(psiQ, cm.data(), sm.data(), L, true);
      vph[size_t(i) * res.n_lon + j] =
          series(phiQ, cm.data(), sm.data(), L, true) +
          series(psiP1, cm.data(), sm.data(), L, false);
    }
  }
}

SphereGrid::VectorFit SphereGrid::analyze_vector(
    const std::vector<double>& vth, const std::vector<double>& vph) const {
  if (vth.size() != size_t(n_points()) || vph.size() != size_t(n_points()))
    throw std::invalid_argument("sphere vector analyze: grid size mismatch");
  const int L = res.L;
  VectorFit out{SphereVector::zero(res), 0.0};
  const double dphi = kTwoPi / res.n_lon;
  std::vector<double> tc(L + 1), ts(L + 1), pc(L + 1), ps(L + 1);
  for (int i = 0; i < res.n_lat; ++i) {
    for (int m = 0; m <= L; ++m) {
      double a = 0, b = 0, c = 0, d = 0;
      for (int j = 0; j < res.n_lon; ++j) {
        double t = vth[size_t(i) * res.n_lon + j];
        double p = vph[size_t(i) * res.n_lon + j];
        double cmj = std::cos(m * phi[j]), smj = std::sin(m * phi[j]);
        a += t * cmj;
        b += t * smj;
        c += p * cmj;
        d += p * smj;
      }
      tc[m] = a * dphi;
      ts[m] = b * dphi;
      pc[m] = c * dphi;
      ps[m] = d * dphi;
    }
    const auto& P1 = lad[i].P1;
    const auto& Q = lad[i].Q;
    for (int l = 1; l <= L; ++l) {
      double w = wnode[i] / lam(l);
      // m = 0: grad Y ~ (P1, 0), rot Y ~ (0, P1).
      out.field.phi[sh_index(l, 0)] += w * P1[leg_pack(l, 0)] * tc[0] * kInvSqrt2Pi;
      out.field.psi[sh_index(l, 0)] += w * P1[leg_pack(l, 0)] * pc[0] * kInvSqrt2Pi;
      for (int m = 1; m <= l; ++m) {
        double p1 = P1[leg_pack(l, m)], q = Q[leg_pack(l, m)];
        // cos-type Y: grad Y = (P1 cos, -Q sin)/sqrt(pi),
        //             rot Y = (Q sin, P1 cos)/sqrt(pi).
        out.field.phi[sh_index(l, m)] += w * (p1 * tc[m] - q * ps[m]) * kInvSqrtPi;
        out.field.psi[sh_index(l, m)] += w * (q * ts[m] + p1 * pc[m]) * kInvSqrtPi;
        // sin-type Y: grad Y = (P1 sin, Q cos)/sqrt(pi),
        //             rot Y = (-Q cos, P1 sin)/sqrt(pi).
        out.field.phi[sh_index(l, -m)] += w * (p1 * ts[m] + q * pc[m]) * kInvSqrtPi;
        out.field.psi[sh_index(l, -m)] += w * (-q * tc[m] + p1 * ps[m]) * kInvSqrtPi;
      }
    }
  }
  std::vector<double> rth, rph;
  synth_vector(out.field, rth, rph);
  double num = 0, den = 0;
  for (int i = 0; i < res.n_lat; ++i)
    for (int j = 0; j < res.n_lon; ++j) {
      size_t k = size_t(i) * res.n_lon + j;
      double w = quad_weight(i);
      num += w * ((rth[k] - vth[k]) * (rth[k] - vth[k]) +
                  (rph[k] - vph[k]) * (rph[k] - vph[k]));
      den += w;
    }
  out.residual_rms = std::sqrt(num / den);
  return out;
}

void SphereGrid::vector_jet(const SphereVector& v, VectorJet& jet,
                            bool second_order) const {
  const int L = res.L;
  const int np = n_points();
  jet.vth.assign(np, 0.0);
  jet.vph.assign(np, 0.0);
  for (auto& row : jet.t)
    for (auto& x : row) x.assign(np, 0.0);
  if (second_order)
    for (auto& s1 : jet.s)
      for (auto& s2 : s1)
        for (auto& x : s2) x.assign(np, 0.0);

  std::vector<double> cm(L + 1), sm(L + 1);
  // theta-sum tables per kernel and potential
  MSums fP1, fQ, fP2, fQ1, fP3, fQ2, fMS1, fMSQ, fMSP2, fMSQ1, fM2P1, fM2Q;
  MSums gP1, gQ, gP2, gQ1, gP3, gQ2, gMS1, gMSQ, gMSP2, gMSQ1, gM2P1, gM2Q;

  std::vector<double> kbuf(leg_pack(L, L) + 1);
  auto scaled = [&](const std::vector<double>& ker, double invs,
                    int mpow) -> const std::vector<double>& {
    for (int l = 0; l <= L; ++l)
      for (int m = 0; m <= l; ++m) {
        double f = 1.0;
        for (int k = 0; k < mpow; ++k) f *= m * invs;
        kbuf[leg_pack(l, m)] = f * ker[leg_pack(l, m)];
      }
    return kbuf;
  };

  for (int i = 0; i < res.n_lat; ++i) {
    const auto& ld = lad[i];
    double invs = 1.0 / sinth[i];
    double cot = costh[i] * invs;

    theta_sums(v.phi, ld.P1, L, fP1);
    theta_sums(v.phi, ld.Q, L, fQ);
    theta_sums(v.psi, ld.P1, L, gP1);
    theta_sums(v.psi, ld.Q, L, gQ);
    theta_sums(v.phi, ld.P2, L, fP2);
    theta_sums(v.phi, ld.Q1, L, fQ1);
    theta_sums(v.psi, ld.P2, L, gP2);
    theta_sums(v.psi, ld.Q1, L, gQ1);
    theta_sums(v.phi, scaled(ld.P1, invs, 1), L, fMS1);
    theta_sums(v.psi, scaled(ld.P1, invs, 1), L, gMS1);
    theta_sums(v.phi, scaled(ld.Q, invs, 1), L, fMSQ);
    theta_sums(v.psi, scaled(ld.Q, invs, 1), L, gMSQ);
    if (second_order) {
      theta_sums(v.phi, ld.P3, L, fP3);
      theta_sums(v.phi, ld.Q2, L, fQ2);
      theta_sums(v.psi, ld.P3, L, gP3);
      theta_sums(v.psi, ld.Q2, L, gQ2);
      theta_sums(v.phi, scaled(ld.P2, invs, 1), L, fMSP2);
      theta_sums(v.psi, scaled(ld.P2, invs, 1), L, gMSP2);
      theta_sums(v.phi, scaled(ld.Q1, invs, 1), L, fMSQ1);
      theta_sums(v.psi, scaled(ld.Q1, invs, 1), L, gMSQ1);
      theta_sums(v.phi, scaled(ld.P1, invs, 2), L, fM2P1);
      theta_sums(v.psi, scaled(ld.P1, invs, 2), L, gM2P1);
      theta_sums(v.phi, scaled(ld.Q, invs, 2), L, fM2Q);
      theta_sums(v.psi, scaled(ld.Q, invs, 2), L, gM2Q);
    }

    for (int j = 0; j < res.n_lon; ++j) {
      size_t k = size_t(i) * res.n_lon + j;
      for (int m = 0; m <= L; ++m) {
        cm[m] = std::cos(m * phi[j]);
        sm[m] = std::sin(m * phi[j]);
      }
      auto S = [&](const MSums& ms, bool swap) {
        return series(ms, cm.data(), sm.data(), L, swap);
      };

      double vt = S(fP1, false) - S(gQ, true);
      double vp = S(fQ, true) + S(gP1, false);
      jet.vth[k] = vt;
      jet.vph[k] = vp;

      double Ttt = S(fP2, false) - S(gQ1, true);
      double Ttp = S(fQ1, true) + S(gP2, false);
      double dpvt = S(fMS1, true) + S(gMSQ, false);   // (1/s) d_phi v_theta
      double dpvp = -S(fMSQ, false) + S(gMS1, true);  // (1/s) d_phi v_phi
      double Tpt = dpvt - cot * vp;
      double Tpp = dpvp + cot * vt;
      jet.t[0][0][k] = Ttt;
      jet.t[0][1][k] = Ttp;
      jet.t[1][0][k] = Tpt;
      jet.t[1][1][k] = Tpp;

      if (!second_order) continue;

      double dtTtt = S(fP3, false) - S(gQ2, true);
      double dtTtp = S(fQ2, true) + S(gP3, false);
      // d_theta of the (1/s) d_phi channels via product rule on (m/s).
      double dtdpvt = (S(fMSP2, true) - cot * S(fMS1, true)) +
                      (S(gMSQ1, false) - cot * S(gMSQ, false));
      double dtdpvp = -(S(fMSQ1, false) - cot * S(fMSQ, false)) +
                      (S(gMSP2, true) - cot * S(gMS1, true));
      double dcot = -(1.0 + cot * cot);
      double dtTpt = dtdpvt - dcot * vp - cot * Ttp;
      double dtTpp = dtdpvp + dcot * vt + cot * Ttt;

      double dpTtt = S(fMSP2, true) + S(gMSQ1, false);
      double dpTtp = -S(fMSQ1, false) + S(gMSP2, true);
      double dpdpvt = -S(fM2P1, false) + S(gM2Q, true);
      double dpdpvp = -S(fM2Q, true) - S(gM2P1, false);
      double dpTpt = dpdpvt - cot * dpvp;
      double dpTpp = dpdpvp + cot * dpvt;

      // (nabla^2 v)_{theta,b,c} = d_theta T_bc
      jet.s[0][0][0][k] = dtTtt;
      jet.s[0][0][1][k] = dtTtp;
      jet.s[0][1][0][k] = dtTpt;
      jet.s[0][1][1][k] = dtTpp;
      // (nabla^2 v)_{phi,b,c} = (1/s) d_phi T_bc - Gamma corrections
      jet.s[1][0][0][k] = dpTtt - cot * Tpt - cot * Ttp;
      jet.s[1][0][1][k] = dpTtp - cot * Tpp + cot * Ttt;
      jet.s[1][1][0][k] = dpTpt + cot * Ttt - cot * Tpp;
      jet.s[1][1][1][k] = dpTpp + cot * Ttp + cot * Tpt;
    }
  }
}

double sphere_eval_scalar(const SphereScalar& f, const Point& p,
                          SphereWorkspace& ws) {
  const int L = f.res.L;
  double z = std::clamp(p.a[2], -1.0, 1.0);
  double s = std::sqrt(std::max(0.0, p.a[0] * p.a[0] + p.a[1] * p.a[1]));
  ws.lad.compute(L, z, s, 1);
  if (int(ws.cm.size()) < L + 1) {
    ws.cm.resize(L + 1);
    ws.sm.resize(L + 1);
  }
  double c1 = s > 1e-290 ? p.a[0] / s : 1.0;
  double s1 = s > 1e-290 ? p.a[1] / s : 0.0;
  ws.cm[0] = 1.0;
  ws.sm[0] = 0.0;
  for (int m = 1; m <= L; ++m) {
    ws.cm[m] = ws.cm[m - 1] * c1 - ws.sm[m - 1] * s1;
    ws.sm[m] = ws.sm[m - 1] * c1 + ws.cm[m - 1] * s1;
  }
  double v = 0;
  for (int m = 0; m <= L; ++m) {
    double sc = 0, ss = 0;
    for (int l = std::max(0, m); l <= L; ++l) {
      sc += f.at(l, m) * ws.lad.P[leg_pack(l, m)];
      if (m > 0) ss += f.at(l, -m) * ws.lad.P[leg_pack(l, m)];
    }
    if (m == 0)
      v += sc * kInvSqrt2Pi;
    else
      v += (sc * ws.cm[m] + ss * ws.sm[m]) * kInvSqrtPi;
  }
  return v;
}

namespace {

TangentVector eval_vector_impl(int L, const double* psi, const double* phi,
                               const Point& p, SphereWorkspace& ws,
                               SphereGradFrame* grad) {
  double z = std::clamp(p.a[2], -1.0, 1.0);
  double s = std::sqrt(std::max(0.0, p.a[0] * p.a[0] + p.a[1] * p.a[1]));
  ws.lad.compute(L, z, s, grad ? 3 : 2);
  if (int(ws.cm.size()) < L + 1) {
    ws.cm.resize(L + 1);
    ws.sm.resize(L + 1);
  }
  double c1 = s > 1e-290 ? p.a[0] / s : 1.0;
  double s1 = s > 1e-290 ? p.a[1] / s : 0.0;
  ws.cm[0] = 1.0;
  ws.sm[0] = 0.0;
  for (int m = 1; m <= L; ++m) {
    ws.cm[m] = ws.cm[m - 1] * c1 - ws.sm[m - 1] * s1;
    ws.sm[m] = ws.sm[m - 1] * c1 + ws.cm[m - 1] * s1;
  }

  double vth = 0, vph = 0;
  double Ttt = 0, Ttp = 0, dpvt = 0, dpvp = 0;
  double invs = 1.0 / std::max(s, 1e-12);  // gradient channel only
  for (int m = 0; m <= L; ++m) {
    double fP1c = 0, fP1s = 0, fQc = 0, fQs = 0;
    double gP1c = 0, gP1s = 0, gQc = 0, gQs = 0;
    double fP2c = 0, fP2s = 0, fQ1c = 0, fQ1s = 0;
    double gP2c = 0, gP2s = 0, gQ1c = 0, gQ1s = 0;
    for (int l = std::max(1, m); l <= L; ++l) {
      int kp = leg_pack(l, m);
      double p1 = ws.lad.P1[kp], q = ws.lad.Q[kp];
      double fc = phi[sh_index(l, m)];
      double gc = psi[sh_index(l, m)];
      fP1c += fc * p1;
      fQc += fc * q;
      gP1c += gc * p1;
      gQc += gc * q;
      if (m > 0) {
        double fs = phi[sh_index(l, -m)];
        double gs = psi[sh_index(l, -m)];
        fP1s += fs * p1;
        fQs += fs * q;
        gP1s += gs * p1;
        gQs += gs * q;
      }
      if (grad) {
        double p2 = ws.lad.P2[kp], q1 = ws.lad.Q1[kp];
        fP2c += fc * p2;
        fQ1c += fc * q1;
        gP2c += gc * p2;
        gQ1c += gc * q1;
        if (m > 0) {
          double fs = phi[sh_index(l, -m)];
          double gs = psi[sh_index(l, -m)];
          fP2s += fs * p2;
          fQ1s += fs * q1;
          gP2s += gs * p2;
          gQ1s += gs * q1;
        }
      }
    }
    double nrm = m == 0 ? kInvSqrt2Pi : kInvSqrtPi;
    double cms = m == 0 ? 1.0 : ws.cm[m];
    double sms = m == 0 ? 0.0 : ws.sm[m];
    // plain pairing: Sc cos + Ss sin ; swapped: -Sc sin + Ss cos.
    auto plain = [&](double sc, double ss) { return nrm * (sc * cms + ss * sms); };
    auto swap = [&](double sc, double ss) { return nrm * (-sc * sms + ss * cms); };

    vth += plain(fP1c, fP1s) - swap(gQc, gQs);
    vph += swap(fQc, fQs) + plain(gP1c, gP1s);
    if (grad) {
      Ttt += plain(fP2c, fP2s) - swap(gQ1c, gQ1s);
      Ttp += swap(fQ1c, fQ1s) + plain(gP2c, gP2s);
      double mi = m * invs;
      dpvt += mi * (swap(fP1c, fP1s) + plain(gQc, gQs));
      dpvp += mi * (-plain(fQc, fQs) + swap(gP1c, gP1s));
    }
  }

  // Frame at the evaluation point.
  TangentVector et, ep;
  et.base = p;
  ep.base = p;
  et.c = {z * c1, z * s1, -s};
  ep.c = {-s1, c1, 0.0};
  TangentVector out;
  out.base = p;
  for (int i = 0; i < 3; ++i) out.c[i] = vth * et.c[i] + vph * ep.c[i];
  if (grad) {
    double cot = z * invs;
    grad->basis = {et, ep};
    grad->t[0][0] = Ttt;
    grad->t[0][1] = Ttp;
    grad->t[1][0] = dpvt - cot * vph;
    grad->t[1][1] = dpvp + cot * vth;
  }
  return out;
}

}  // namespace

TangentVector sphere_eval_vector(const SphereVector& v, const Point& p,
                                 SphereWorkspace& ws, SphereGradFrame* grad) {
  return eval_vector_impl(v.res.L, v.psi.data(), v.phi.data(), p, ws, grad);
}

TangentVector sphere_eval_vector_ref(const SphereVectorEvalRef& v,
                                     const Point& p, SphereWorkspace& ws) {
  return eval_vector_impl(v.L, v.psi, v.phi, p, ws, nullptr);
}

}  // namespace bundleflow
