#pragma once

// Fourier representation of real scalar fields on the flat 2-torus.
// Coefficients c_{mn} for |m|, |n| <= K with Hermitian symmetry
// c_{-m,-n} = conj(c_{mn}); collocation on an N x N grid with N >= 3K + 1 so
// quadratic products projected back to the truncation are alias-free.

#include <complex>
#include <memory>
#include <vector>

#include "bundleflow/geometry.hpp"

namespace bundleflow {

struct TorusResolution {
  int K = 16;
  int N = 64;

  bool operator==(const TorusResolution&) const = default;
  static TorusResolution standard(int K) {
    int N = 3 * K + 2 + (3 * K) % 2;
    return {K, N};
  }
};

void validate(const TorusResolution& r);

struct TorusScalar {
  TorusResolution res;
  std::vector<std::complex<double>> c;  // (2K+1)^2, index (m+K)*(2K+1)+(n+K)

  static TorusScalar zero(const TorusResolution& r);

  std::complex<double>& at(int m, int n);
  std::complex<double> at(int m, int n) const;
  // Sets c_{mn} and the conjugate mirror coefficient.
  void set_mode(int m, int n, std::complex<double> v);
  void enforce_hermitian();

  double mean() const;
  double l2norm() const;  // sqrt(integral of f^2)
  double eval(const Point& p) const;
};

TorusScalar dx(const TorusScalar& f);
TorusScalar dy(const TorusScalar& f);
TorusScalar laplacian(const TorusScalar& f);
// Zero-mean inverse; the (0,0) mode of the output is zero. |mean| of the
// input is returned through `dropped_mean` when non-null.
TorusScalar laplacian_inverse(const TorusScalar& f, double* dropped_mean);

TorusScalar add(const TorusScalar& a, const TorusScalar& b, double sa = 1.0,
                double sb = 1.0);

// Grid transforms (single-threaded; see module concurrency contract).
std::vector<double> torus_synth(const TorusScalar& f);  // N*N values, row x
struct TorusAnalysis {
  TorusScalar field;
  double residual_rms;  // grid-rms of the part lost to truncation
};
TorusAnalysis torus_analyze(const TorusResolution& r,
                            const std::vector<double>& grid);

// Dealiased pointwise product projected back to the truncation.
TorusScalar product(const TorusScalar& a, const TorusScalar& b);

std::vector<Point> torus_grid_points(const TorusResolution& r);

// Flat table for fast repeated evaluation of one or two scalars sharing a
// resolution (the two components of a vector field).
struct TorusEvalTable {
  int K = 0;
  int n_entries = 0;             // half-plane modes, (0,0) excluded
  std::vector<int> m, n;         // n may be negative, m >= 0
  std::vector<double> re0, im0;  // component 0
  std::vector<double> re1, im1;  // component 1 (zeroed for scalars)
  double c000 = 0, c001 = 0;     // (0,0) coefficients

  void build(const TorusScalar& f0, const TorusScalar* f1);
  // cx/sx, cy/sy are cos/sin tables of m*x, n*y for 0..K.
  void eval(const double* cx, const double* sx, const double* cy,
            const double* sy, double& v0, double& v1) const;
};

// Fills cos/sin recurrence tables for angles m*a, m = 0..K.
void torus_trig_table(double a, int K, double* c, double* s);

}  // namespace bundleflow
