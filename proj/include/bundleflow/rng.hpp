#pragma once

// Counter-based random numbers (Philox4x32-10). Every Gaussian increment is
// addressed by (seed, path, step, channel), so ensembles are reproducible
// under any scheduling of work.

#include <array>
#include <cstdint>

namespace bundleflow::rng {

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key);

// Two standard normals per (seed, path, step, block) via Box-Muller.
void normal_pair(uint64_t seed, uint64_t path, uint32_t step, uint32_t block,
                 double& z0, double& z1);

// Fills z[0..k-1] with the channel draws for (seed, path, step).
void fill_normals(uint64_t seed, uint64_t path, uint32_t step, int k,
                  double* z);

// Uniform in [0, 1) addressed by (seed, stream, index); used by sampling
// utilities that need reproducible points.
double uniform01(uint64_t seed, uint64_t stream, uint64_t index);

}  // namespace bundleflow::rng
