#pragma once

// Forward Stratonovich SDEs on the orthonormal frame bundle driven by the
// embedding gradient fields:
//   dU = sqrt(2 nu) sum_i H_{A_i}(U) o dB^i + H_{drift}(U) ds,
// realized as exact geodesic steps with parallel frame transport. Ensembles
// carry Brownian increments and transported-source accumulators; the
// linearized (variational) base flow is driven by the stored increments.

#include <cstdint>
#include <functional>
#include <vector>

#include "bundleflow/fields.hpp"
#include "bundleflow/frame.hpp"

namespace bundleflow {

enum class Scheme { ExactGeodesicHeun, ProjectedEuler };

struct NoiseSpec {
  int k = 0;            // noise dimension (manifold noise_count)
  double dt = 0.0;
  int n_steps = 0;
  uint64_t seed = 0;
  Scheme scheme = Scheme::ExactGeodesicHeun;
  double sign = 1.0;    // -1 mirrors all increments (antithetic runs)

  double horizon() const { return dt * n_steps; }
};

void validate(const NoiseSpec& n, ManifoldKind kind);

// Time-dependent vector field; implementations must be safe for concurrent
// reads.
class FlowField {
 public:
  virtual ~FlowField() = default;
  virtual TangentVector eval(double t, const Point& p) const = 0;
};

class LambdaFlow : public FlowField {
 public:
  using Fn = std::function<TangentVector(double, const Point&)>;
  explicit LambdaFlow(Fn fn) : fn_(std::move(fn)) {}
  TangentVector eval(double t, const Point& p) const override {
    return fn_(t, p);
  }

 private:
  Fn fn_;
};

// Wraps a TimeField, optionally scaled and with a fixed time offset/reversal
// (evaluates the field at a + b * t).
class TimeFieldFlow : public FlowField {
 public:
  TimeFieldFlow(const TimeField* tf, double scale = 1.0, double a = 0.0,
                double b = 1.0)
      : tf_(tf), scale_(scale), a_(a), b_(b) {}
  TangentVector eval(double t, const Point& p) const override {
    TangentVector v = tf_->eval(a_ + b_ * t, p);
    for (auto& c : v.c) c *= scale_;
    return v;
  }

 private:
  const TimeField* tf_;
  double scale_, a_, b_;
};

struct FramePath {
  std::vector<Frame> frames;        // n_steps + 1 entries
  std::vector<double> db;           // n_steps * k raw increments
  std::array<double, 2> integral{}; // accumulated transported source
};

struct PathEnsemble {
  ManifoldKind kind;
  NoiseSpec noise;
  double t0 = 0.0;
  uint64_t path_base = 0;  // global index of paths[0] for RNG addressing
  std::vector<FramePath> paths;
};

// Simulates n_paths trajectories from the frame u0 over
// [t0, t0 + n_steps * dt]. Path p uses RNG stream path_base + p; identical
// inputs give bit-identical ensembles for any worker count.
PathEnsemble simulate_forward(const Frame& u0, const FlowField* drift,
                              double nu, const NoiseSpec& noise, int n_paths,
                              double t0 = 0.0, uint64_t path_base = 0,
                              int workers = 1);

// Left-rectangle accumulation of the scalarized source along each stored
// trajectory: integral = sum_j S(g(t_j, X_j))(U_j) dt.
void accumulate_transported_source(PathEnsemble& ens, const FlowField& g);

// Linearized base flow along the stored paths: for each path and each noise
// direction i, R solves
//   D R = sqrt(2 nu) sum_m grad_R A_m dB^m - nu Ric# R ds + grad_R drift ds,
// driven by the stored increments, transported along the stored base points.
struct VariationalState {
  int k = 0;
  // r[path * k + i] = R at the final time for direction A_i(x0).
  std::vector<TangentVector> r;
};
VariationalState simulate_variational(const PathEnsemble& ens, double nu,
                                      const FlowField* drift);

// Runs fn(i) for i in [0, n) on `workers` threads. Each task must write only
// to its own slot; used for grid-point and path parallelism.
void run_parallel(int n, int workers, const std::function<void(int)>& fn);

}  // namespace bundleflow
