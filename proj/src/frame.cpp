#include "bundleflow/frame.hpp"

#include <cmath>
#include <stdexcept>

namespace bundleflow {

namespace {

void check_orthonormal(const Frame& u, double tol) {
  for (int i = 0; i < 2; ++i) {
    validate_tangent(u.e[i]);
    for (int j = i; j < 2; ++j) {
      double g = metric(u.base, u.e[i], u.e[j]);
      double want = i == j ? 1.0 : 0.0;
      if (std::fabs(g - want) > tol)
        throw std::invalid_argument("frame basis is not orthonormal");
    }
  }
}

}  // namespace

Frame make_frame(const Point& base, const TangentVector& e1,
                 const TangentVector& e2) {
  Frame u{base, {e1, e2}};
  check_orthonormal(u, 1e-12);
  return u;
}

Frame canonical_frame(const Point& p) {
  auto b = canonical_basis(p);
  return Frame{p, {b[0], b[1]}};
}

Frame orthonormalized(const Frame& u) {
  Frame out = u;
  double n1 = norm(out.e[0]);
  if (!(n1 > 1e-14)) throw std::invalid_argument("degenerate frame");
  for (auto& x : out.e[0].c) x /= n1;
  double g = metric(u.base, out.e[1], out.e[0]);
  for (int i = 0; i < 3; ++i) out.e[1].c[i] -= g * out.e[0].c[i];
  double n2 = norm(out.e[1]);
  if (!(n2 > 1e-14)) throw std::invalid_argument("degenerate frame");
  for (auto& x : out.e[1].c) x /= n2;
  return out;
}

Frame rotate_frame(const Frame& u, const Mat2& O) {
  double a = O[0] * O[0] + O[2] * O[2];
  double b = O[1] * O[1] + O[3] * O[3];
  double c = O[0] * O[1] + O[2] * O[3];
  if (std::fabs(a - 1.0) > 1e-12 || std::fabs(b - 1.0) > 1e-12 ||
      std::fabs(c) > 1e-12)
    throw std::invalid_argument("rotate_frame: matrix is not orthogonal");
  Frame out;
  out.base = u.base;
  for (int j = 0; j < 2; ++j) {
    out.e[j].base = u.base;
    for (int k = 0; k < 3; ++k)
      out.e[j].c[k] = O[0 * 2 + j] * u.e[0].c[k] + O[1 * 2 + j] * u.e[1].c[k];
  }
  return out;
}

Frame transport_frame(const Frame& u, const TangentVector& v) {
  Frame out;
  out.base = exp_map(u.base, v);
  for (int i = 0; i < 2; ++i) out.e[i] = parallel_transport(u.base, v, u.e[i]);
  return orthonormalized(out);
}

TensorCoords scalarize(const Frame& u, const TangentVector& v) {
  TensorCoords c;
  c.m = 1;
  c.n = 0;
  c.c = {metric(u.base, v, u.e[0]), metric(u.base, v, u.e[1])};
  return c;
}

TensorCoords scalarize(const Frame& u, int m, int n, const TensorEvaluator& t) {
  if (m < 0 || n < 0 || m + n > 8)
    throw std::invalid_argument("scalarize: unsupported rank");
  TensorCoords c;
  c.m = m;
  c.n = n;
  c.c.assign(size_t{1} << (m + n), 0.0);
  std::vector<TangentVector> contra(m), cov(n);
  for (size_t idx = 0; idx < c.c.size(); ++idx) {
    size_t rest = idx;
    for (int a = m + n - 1; a >= 0; --a) {
      int bit = int(rest & 1);
      rest >>= 1;
      if (a < m)
        contra[a] = u.e[bit];
      else
        cov[a - m] = u.e[bit];
    }
    c.c[idx] = t(contra, cov);
  }
  return c;
}

TangentVector realize_vector(const Frame& u, const TensorCoords& c) {
  if (c.m != 1 || c.n != 0 || c.c.size() != 2)
    throw std::invalid_argument("realize_vector: rank mismatch");
  TangentVector v;
  v.base = u.base;
  for (int i = 0; i < 3; ++i)
    v.c[i] = c.c[0] * u.e[0].c[i] + c.c[1] * u.e[1].c[i];
  return v;
}

TensorEvaluator realize(const Frame& u, const TensorCoords& c) {
  if (int(c.c.size()) != c.size())
    throw std::invalid_argument("realize: coefficient length mismatch");
  Frame uc = u;
  TensorCoords cc = c;
  return [uc, cc](std::span<const TangentVector> covector_sharps,
                  std::span<const TangentVector> vectors) -> double {
    if (int(covector_sharps.size()) != cc.m || int(vectors.size()) != cc.n)
      throw std::invalid_argument("realized tensor: slot count mismatch");
    double total = 0.0;
    for (size_t idx = 0; idx < cc.c.size(); ++idx) {
      double w = cc.c[idx];
      size_t rest = idx;
      for (int a = cc.m + cc.n - 1; a >= 0 && w != 0.0; --a) {
        int bit = int(rest & 1);
        rest >>= 1;
        if (a < cc.m)
          w *= metric(uc.base, uc.e[bit], covector_sharps[a]);
        else
          w *= metric(uc.base, uc.e[bit], vectors[a - cc.m]);
      }
      total += w;
    }
    return total;
  };
}

}  // namespace bundleflow
