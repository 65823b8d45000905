#pragma once

// Backward-equation solvers on top of the frame-bundle forward SDE.
//
// Terminal-value convention: data h lives at time T; solutions theta(t, x)
// are evaluated for t <= T. For each evaluation time and grid point an
// ensemble is simulated over [t, T]; the estimator averages the scalarized
// terminal value plus the transported source integral in the running frame
// and realizes the mean through the initial frame:
//   theta(t, x) = u0 E[ S(h)(U_T) + int_t^T S(G(s, X_s))(U_s) ds ].
// Grid values are fitted back to a spectral field.
//
// The general solver iterates the same sweep with the driver evaluated on
// the previous iterate: Y-channel from the field value, Z-channel from the
// spectral covariant derivatives along the embedding fields.

#include <functional>
#include <span>
#include <string>

#include "bundleflow/fields.hpp"
#include "bundleflow/sde.hpp"

namespace bundleflow {

struct McParams {
  int paths_per_point = 1000;
  double dt = 1e-2;
  uint64_t seed = 1;
  int workers = 1;
  Scheme scheme = Scheme::ExactGeodesicHeun;
};

struct BackwardProblem {
  ManifoldKind manifold = ManifoldKind::FlatTorus2;
  double horizon = 0.0;            // T
  std::vector<double> eval_times;  // ascending, within [0, T]
  VectorFieldSpec terminal;        // h
  const TimeField* drift = nullptr;   // forward drift, signed by the caller
  const TimeField* source = nullptr;  // (Y,Z)-independent driver G
  double nu = 0.0;
  FieldResolution fit_res;  // evaluation grid and output representation
  McParams mc;
  double lipschitz = 0.0;  // declared driver constant (general solver)
};

void validate(const BackwardProblem& prob);

struct BackwardSolution {
  TimeField theta;
  // Aggregate Monte-Carlo standard error per time node: quadrature L2 norm
  // of the per-point standard errors of the mean.
  std::vector<double> mc_std;
  std::vector<double> fit_residual;
  WarningSink warnings;
};

BackwardSolution evaluate_backward_linear(const BackwardProblem& prob);

// General driver F(s, x, Y, Z): Y is the realized field value at x, Z the
// k-tuple of covariant derivatives of the field along the embedding fields.
using DriverFn = std::function<TangentVector(
    double s, const Point& x, const TangentVector& y,
    std::span<const TangentVector> z)>;

struct PicardOptions {
  int max_iters = 20;
  double tol = 1e-4;  // sup-t W^{1,2} distance between iterates
};

struct GeneralSolveResult {
  BackwardSolution solution;
  std::vector<double> distance_history;
  bool converged = false;
  std::string failure;  // set when the iteration failed to contract
};

GeneralSolveResult solve_general_fbsde(const BackwardProblem& prob,
                                       const DriverFn& driver,
                                       const PicardOptions& opts = {});

// Residual of d theta/dt + nu lap_B theta + grad_{A0} theta + F on the grid,
// central differences in time at interior nodes.
struct ResidualReport {
  std::vector<double> time;
  std::vector<double> abs_l2;
  std::vector<double> rel_l2;
};

ResidualReport pde_residual_check(const TimeField& theta,
                                  const BackwardProblem& prob,
                                  const DriverFn* driver = nullptr);

}  // namespace bundleflow
