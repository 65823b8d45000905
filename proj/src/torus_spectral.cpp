#include "bundleflow/spectral_torus.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace bundleflow {

namespace {

int side(const TorusResolution& r) { return 2 * r.K + 1; }

int idx(const TorusResolution& r, int m, int n) {
  return (m + r.K) * side(r) + (n + r.K);
}

// One FFTW workspace per grid size. Plans and buffers are reused; transforms
// are orchestrator-side only (not called from worker threads).
class TorusTransform {
 public:
  explicit TorusTransform(int N) : N_(N) {
    buf_ = fftw_alloc_complex(size_t(N) * N);
    fwd_ = fftw_plan_dft_2d(N, N, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(N, N, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~TorusTransform() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }

  static TorusTransform& get(int N) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<TorusTransform>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[N];
    if (!slot) slot = std::make_unique<TorusTransform>(N);
    return *slot;
  }

  int N_;
  fftw_complex* buf_;
  fftw_plan fwd_, bwd_;
};

}  // namespace

void validate(const TorusResolution& r) {
  if (r.K < 1 || r.N < 3 * r.K + 1)
    throw std::invalid_argument("torus resolution requires N >= 3K+1");
}

TorusScalar TorusScalar::zero(const TorusResolution& r) {
  validate(r);
  TorusScalar f;
  f.res = r;
  f.c.assign(size_t(side(r)) * side(r), {0.0, 0.0});
  return f;
}

std::complex<double>& TorusScalar::at(int m, int n) { return c[idx(res, m, n)]; }
std::complex<double> TorusScalar::at(int m, int n) const { return c[idx(res, m, n)]; }

void TorusScalar::set_mode(int m, int n, std::complex<double> v) {
  c[idx(res, m, n)] = v;
  c[idx(res, -m, -n)] = std::conj(v);
  if (m == 0 && n == 0) c[idx(res, 0, 0)] = {v.real(), 0.0};
}

void TorusScalar::enforce_hermitian() {
  for (int m = -res.K; m <= res.K; ++m)
    for (int n = -res.K; n <= res.K; ++n) {
      if (m < 0 || (m == 0 && n < 0)) continue;
      auto v = 0.5 * (c[idx(res, m, n)] + std::conj(c[idx(res, -m, -n)]));
      if (m == 0 && n == 0) v = {v.real(), 0.0};
      c[idx(res, m, n)] = v;
      c[idx(res, -m, -n)] = std::conj(v);
    }
}

double TorusScalar::mean() const { return at(0, 0).real(); }

double TorusScalar::l2norm() const {
  double s = 0;
  for (const auto& v : c) s += std::norm(v);
  return std::sqrt(s * kTwoPi * kTwoPi);
}

double TorusScalar::eval(const Point& p) const {
  const int K = res.K;
  std::vector<double> cx(K + 1), sx(K + 1), cy(K + 1), sy(K + 1);
  torus_trig_table(p.a[0], K, cx.data(), sx.data());
  torus_trig_table(p.a[1], K, cy.data(), sy.data());
  double v = at(0, 0).real();
  for (int m = 0; m <= K; ++m)
    for (int n = -K; n <= K; ++n) {
      if (m == 0 && n <= 0) continue;
      auto cm = at(m, n);
      int na = std::abs(n);
      double cn = cy[na], sn = n < 0 ? -sy[na] : sy[na];
      double cosang = cx[m] * cn - sx[m] * sn;
      double sinang = sx[m] * cn + cx[m] * sn;
      v += 2.0 * (cm.real() * cosang - cm.imag() * sinang);
    }
  return v;
}

TorusScalar dx(const TorusScalar& f) {
  TorusScalar g = TorusScalar::zero(f.res);
  for (int m = -f.res.K; m <= f.res.K; ++m)
    for (int n = -f.res.K; n <= f.res.K; ++n)
      g.c[idx(f.res, m, n)] = std::complex<double>(0, m) * f.at(m, n);
  return g;
}

TorusScalar dy(const TorusScalar& f) {
  TorusScalar g = TorusScalar::zero(f.res);
  for (int m = -f.res.K; m <= f.res.K; ++m)
    for (int n = -f.res.K; n <= f.res.K; ++n)
      g.c[idx(f.res, m, n)] = std::complex<double>(0, n) * f.at(m, n);
  return g;
}

TorusScalar laplacian(const TorusScalar& f) {
  TorusScalar g = TorusScalar::zero(f.res);
  for (int m = -f.res.K; m <= f.res.K; ++m)
    for (int n = -f.res.K; n <= f.res.K; ++n)
      g.c[idx(f.res, m, n)] = -double(m * m + n * n) * f.at(m, n);
  return g;
}

TorusScalar laplacian_inverse(const TorusScalar& f, double* dropped_mean) {
  TorusScalar g = TorusScalar::zero(f.res);
  for (int m = -f.res.K; m <= f.res.K; ++m)
    for (int n = -f.res.K; n <= f.res.K; ++n) {
      if (m == 0 && n == 0) continue;
      g.c[idx(f.res, m, n)] = f.at(m, n) / double(-(m * m + n * n));
    }
  if (dropped_mean) *dropped_mean = f.mean();
  return g;
}

TorusScalar add(const TorusScalar& a, const TorusScalar& b, double sa,
                double sb) {
  if (!(a.res == b.res)) throw std::invalid_argument("torus add: resolution mismatch");
  TorusScalar g = a;
  for (size_t i = 0; i < g.c.size(); ++i) g.c[i] = sa * a.c[i] + sb * b.c[i];
  return g;
}

std::vector<double> torus_synth(const TorusScalar& f) {
  const int N = f.res.N;
  auto& tr = TorusTransform::get(N);
  std::memset(tr.buf_, 0, sizeof(fftw_complex) * size_t(N) * N);
  for (int m = -f.res.K; m <= f.res.K; ++m)
    for (int n = -f.res.K; n <= f.res.K; ++n) {
      int mm = (m % N + N) % N, nn = (n % N + N) % N;
      auto v = f.at(m, n);
      tr.buf_[size_t(mm) * N + nn][0] += v.real();
      tr.buf_[size_t(mm) * N + nn][1] += v.imag();
    }
  fftw_execute(tr.bwd_);
  std::vector<double> out(size_t(N) * N);
  for (size_t i = 0; i < out.size(); ++i) out[i] = tr.buf_[i][0];
  return out;
}

TorusAnalysis torus_analyze(const TorusResolution& r,
                            const std::vector<double>& grid) {
  validate(r);
  const int N = r.N;
  if (grid.size() != size_t(N) * N)
    throw std::invalid_argument("torus_analyze: grid size mismatch");
  auto& tr = TorusTransform::get(N);
  for (size_t i = 0; i < grid.size(); ++i) {
    tr.buf_[i][0] = grid[i];
    tr.buf_[i][1] = 0.0;
  }
  fftw_execute(tr.fwd_);
  TorusAnalysis out{TorusScalar::zero(r), 0.0};
  double norm = 1.0 / (double(N) * N);
  double lost = 0.0;
  for (int mm = 0; mm < N; ++mm)
    for (int nn = 0; nn < N; ++nn) {
      int m = mm <= N / 2 ? mm : mm - N;
      int n = nn <= N / 2 ? nn : nn - N;
      std::complex<double> v(tr.buf_[size_t(mm) * N + nn][0],
                             tr.buf_[size_t(mm) * N + nn][1]);
      v *= norm;
      if (std::abs(m) <= r.K && std::abs(n) <= r.K)
        out.field.c[idx(r, m, n)] = v;
      else
        lost += std::norm(v);
    }
  out.field.enforce_hermitian();
  out.residual_rms = std::sqrt(lost);
  return out;
}

TorusScalar product(const TorusScalar& a, const TorusScalar& b) {
  if (!(a.res == b.res)) throw std::invalid_argument("torus product: resolution mismatch");
  auto ga = torus_synth(a);
  auto gb = torus_synth(b);
  for (size_t i = 0; i < ga.size(); ++i) ga[i] *= gb[i];
  return torus_analyze(a.res, ga).field;
}

std::vector<Point> torus_grid_points(const TorusResolution& r) {
  std::vector<Point> pts;
  pts.reserve(size_t(r.N) * r.N);
  for (int i = 0; i < r.N; ++i)
    for (int j = 0; j < r.N; ++j)
      pts.push_back(Point::torus(kTwoPi * i / r.N, kTwoPi * j / r.N));
  return pts;
}

void torus_trig_table(double a, int K, double* c, double* s) {
  c[0] = 1.0;
  s[0] = 0.0;
  if (K == 0) return;
  double c1 = std::cos(a), s1 = std::sin(a);
  c[1] = c1;
  s[1] = s1;
  for (int m = 2; m <= K; ++m) {
    c[m] = c[m - 1] * c1 - s[m - 1] * s1;
    s[m] = s[m - 1] * c1 + c[m - 1] * s1;
  }
}

void TorusEvalTable::build(const TorusScalar& f0, const TorusScalar* f1) {
  K = f0.res.K;
  m.clear();
  n.clear();
  re0.clear();
  im0.clear();
  re1.clear();
  im1.clear();
  c000 = f0.at(0, 0).real();
  c001 = f1 ? f1->at(0, 0).real() : 0.0;
  for (int mm = 0; mm <= K; ++mm)
    for (int nn = -K; nn <= K; ++nn) {
      if (mm == 0 && nn <= 0) continue;
      auto v0 = f0.at(mm, nn);
      auto v1 = f1 ? f1->at(mm, nn) : std::complex<double>{};
      if (std::norm(v0) == 0.0 && std::norm(v1) == 0.0) continue;
      m.push_back(mm);
      n.push_back(nn);
      re0.push_back(2.0 * v0.real());
      im0.push_back(2.0 * v0.imag());
      re1.push_back(2.0 * v1.real());
      im1.push_back(2.0 * v1.imag());
    }
  n_entries = int(m.size());
}

void TorusEvalTable::eval(const double* cx, const double* sx, const double* cy,
                          const double* sy, double& v0, double& v1) const {
  double a0 = c000, a1 = c001;
  for (int e = 0; e < n_entries; ++e) {
    int mm = m[e], nn = n[e];
    int na = nn < 0 ? -nn : nn;
    double cn = cy[na], sn = nn < 0 ? -sy[na] : sy[na];
    double cosang = cx[mm] * cn - sx[mm] * sn;
    double sinang = sx[mm] * cn + cx[mm] * sn;
    a0 += re0[e] * cosang - im0[e] * sinang;
    a1 += re1[e] * cosang - im1[e] * sinang;
  }
  v0 = a0;
  v1 = a1;
}

}  // namespace bundleflow
