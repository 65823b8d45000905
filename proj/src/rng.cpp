#include "bundleflow/rng.hpp"

#include <cmath>

namespace bundleflow::rng {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void round_once(std::array<uint32_t, 4>& c,
                       const std::array<uint32_t, 2>& k) {
  uint64_t p0 = uint64_t(kMul0) * c[0];
  uint64_t p1 = uint64_t(kMul1) * c[2];
  uint32_t hi0 = uint32_t(p0 >> 32), lo0 = uint32_t(p0);
  uint32_t hi1 = uint32_t(p1 >> 32), lo1 = uint32_t(p1);
  c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

constexpr double kTwoPiD = 6.283185307179586476925286766559;

}  // namespace

std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                   std::array<uint32_t, 2> key) {
  for (int r = 0; r < 10; ++r) {
    round_once(ctr, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

void normal_pair(uint64_t seed, uint64_t path, uint32_t step, uint32_t block,
                 double& z0, double& z1) {
  std::array<uint32_t, 4> ctr{uint32_t(path), uint32_t(path >> 32), step,
                              block};
  std::array<uint32_t, 2> key{uint32_t(seed), uint32_t(seed >> 32)};
  auto w = philox4x32(ctr, key);
  // (w + 0.5) * 2^-32 lies strictly inside (0, 1).
  double u1 = (double(w[0]) + 0.5) * 0x1p-32;
  double u2 = (double(w[1]) + 0.5) * 0x1p-32;
  double r = std::sqrt(-2.0 * std::log(u1));
  z0 = r * std::cos(kTwoPiD * u2);
  z1 = r * std::sin(kTwoPiD * u2);
}

void fill_normals(uint64_t seed, uint64_t path, uint32_t step, int k,
                  double* z) {
  for (int b = 0; 2 * b < k; ++b) {
    double z0, z1;
    normal_pair(seed, path, step, uint32_t(b), z0, z1);
    z[2 * b] = z0;
    if (2 * b + 1 < k) z[2 * b + 1] = z1;
  }
}

double uniform01(uint64_t seed, uint64_t stream, uint64_t index) {
  std::array<uint32_t, 4> ctr{uint32_t(index), uint32_t(index >> 32),
                              uint32_t(stream), uint32_t(stream >> 32)};
  std::array<uint32_t, 2> key{uint32_t(seed), uint32_t(seed >> 32)};
  auto w = philox4x32(ctr, key);
  return double(w[0]) * 0x1p-32;
}

}  // namespace bundleflow::rng
