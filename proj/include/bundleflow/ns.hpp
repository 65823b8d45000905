#pragma once

// Stochastic-representation Navier-Stokes solver.
//
// Public time is physical: initial data v0 at s = 0, solutions on [0, T].
// Internally one Picard sweep freezes the current iterate w, runs the linear
// backward solve with forward drift -w and source F_w (in the terminal-value
// clock t = T - s), and Leray-projects the result:
//   I(w)(s) = P(theta(T - s)).
// In Hodge-de Rham mode the backward source gains -nu Ric#(w), closing the
// equation for the alternative viscosity operator. The fixed point of I is
// the velocity field.

#include <string>

#include "bundleflow/fbsde.hpp"

namespace bundleflow {

struct NsConfig {
  ManifoldKind manifold = ManifoldKind::FlatTorus2;
  double nu = 0.1;
  double T = 0.1;
  VectorFieldSpec v0;  // divergence-free within 1e-8
  LaplacianMode laplacian = LaplacianMode::Bochner;
  int picard_max_iters = 12;
  double picard_tol = 1e-3;  // sup-t W^{1,p} distance
  double p = 4.0;            // Sobolev exponent, > 2
  int time_nodes = 4;
  FieldResolution fit_res;
  McParams mc;
};

void validate(const NsConfig& cfg);

std::vector<double> ns_time_nodes(const NsConfig& cfg);

struct PicardMapStats {
  std::vector<double> mc_std;        // per physical node
  std::vector<double> fit_residual;  // per physical node
  WarningSink warnings;
};

// One sweep of the fixed-point map. w carries physical time nodes; the
// output shares them. Inputs must be divergence-free within 1e-6; the
// pressure source is computed from the projected iterate.
TimeField picard_map(const TimeField& w, const NsConfig& cfg,
                     PicardMapStats* stats = nullptr);

struct PicardTrace {
  std::vector<double> distance;  // sup-t W^{1,p}(w_{n+1} - w_n)
  std::vector<double> norm2p;    // sup-t W^{2,p}(w_{n+1})
  std::vector<double> wall_ms;
  std::vector<double> mc_std;    // max over nodes
};

struct NsResult {
  TimeField v;
  PicardTrace trace;
  bool converged = false;
  std::string failure;
  WarningSink warnings;
};

// w_0 = v0 frozen in time, w_{n+1} = I(w_n), stop when the distance falls
// under picard_tol. Non-contraction within max_iters is reported as a
// structured failure carrying the trace.
NsResult solve_ns(const NsConfig& cfg);

struct ContractionReport {
  double ratio = 0.0;
  double num = 0.0, den = 0.0;
  std::vector<double> per_time_num;
};

// sup-t W^{1,p} contraction factor of I between two admissible fields under
// common noise. Throws on (near-)identical inputs.
ContractionReport contraction_probe(const TimeField& w1, const TimeField& w2,
                                    const NsConfig& cfg);

struct DivergenceReport {
  std::vector<double> per_time;  // ||div theta(s_i)||_2, unprojected solve
  double sup_div_l2 = 0.0;
  double mc_allowance = 0.0;     // 5 x spectral noise floor estimate
  double threshold = 0.0;        // max(1e-3, mc_allowance)
  bool pass = false;
};

// Diagnostic: runs the sweep with the Leray projection disabled and measures
// how far the raw backward solution drifts from divergence-free.
DivergenceReport divergence_decay_check(const TimeField& w,
                                        const NsConfig& cfg);

}  // namespace bundleflow
