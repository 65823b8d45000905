#pragma once

// Orthonormal frames and the scalarization/realization correspondence
// between tensors at a point and coefficient arrays in a frame basis.
// Tensors of rank (m, n) map to arrays of 2^(m+n) reals, multi-index ordered
// row-major over (i_1..i_m, j_1..j_n).

#include <functional>
#include <span>
#include <vector>

#include "bundleflow/geometry.hpp"

namespace bundleflow {

struct Frame {
  Point base;
  std::array<TangentVector, 2> e;
};

// 2x2 matrix, row-major.
using Mat2 = std::array<double, 4>;

// Coefficient array of a rank-(m, n) tensor in a frame basis.
struct TensorCoords {
  int m = 1;
  int n = 0;
  std::vector<double> c;

  int size() const { return 1 << (m + n); }
};

// Multilinear evaluator form of a tensor at a point: contravariant slots are
// fed covectors via their metric sharps, covariant slots plain vectors.
using TensorEvaluator = std::function<double(
    std::span<const TangentVector> covector_sharps,
    std::span<const TangentVector> vectors)>;

// Validates orthonormality (tolerance 1e-12) and tangency.
Frame make_frame(const Point& base, const TangentVector& e1,
                 const TangentVector& e2);

Frame canonical_frame(const Point& p);

// Gram-Schmidt in index order; throws if the basis is degenerate.
Frame orthonormalized(const Frame& u);

// New basis E'_j = sum_i O_ij E_i. O must be orthogonal to 1e-12.
Frame rotate_frame(const Frame& u, const Mat2& O);

// Base moves to exp(base, v); basis vectors are parallel-transported and
// re-orthonormalized.
Frame transport_frame(const Frame& u, const TangentVector& v);

TensorCoords scalarize(const Frame& u, const TangentVector& v);
TensorCoords scalarize(const Frame& u, int m, int n, const TensorEvaluator& t);

TangentVector realize_vector(const Frame& u, const TensorCoords& c);
TensorEvaluator realize(const Frame& u, const TensorCoords& c);

}  // namespace bundleflow
