#pragma once

// Independent validation oracles: closed-form decaying solutions on both
// manifolds and a classical pseudo-spectral vorticity solver on the torus.
// This module must not depend on the stochastic solver stack.

#include "bundleflow/fields.hpp"

namespace bundleflow {

// e^{-2 nu s} (sin x cos y, -cos x sin y); physical (initial-value) time.
TangentVector taylor_green(double s, const Point& p, double nu);
VectorFieldSpec taylor_green_spec(const FieldResolution& r);

// Rotation field K = e3 x x decaying at rate nu (Bochner viscosity) or
// 2 nu (Hodge-de Rham viscosity).
TangentVector sphere_killing(double s, const Point& p, double nu,
                             LaplacianMode mode);
VectorFieldSpec sphere_killing_spec(const FieldResolution& r);

// Exact decaying heat mode on the torus: e^{-nu s} sin(x) d/dx.
TangentVector torus_heat_mode(double s, const Point& p, double nu);
VectorFieldSpec torus_heat_mode_spec(const FieldResolution& r);

// Classical vorticity-form pseudo-spectral solver (RK4, 2/3 dealiasing) on
// the flat torus, physical time, initial data v0 at s = 0. Returns snapshots
// on a uniform time grid with `snapshots` nodes (>= 2, includes s = 0 and
// s_end). Aborts if the advective CFL number exceeds 0.9.
TimeField torus_spectral_ns(const VectorFieldSpec& v0, double nu, double s_end,
                            double dt, int snapshots);

}  // namespace bundleflow
