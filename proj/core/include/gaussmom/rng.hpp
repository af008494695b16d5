#pragma once

// Philox4x32-10 counter-based generator. Stream (seed, index) draws from the
// counter (draw_lo, draw_hi, index_lo, index_hi) under the key (seed_lo,
// seed_hi), so trials are replayable and independent of thread scheduling.
// Normals use the Box-Muller transform, both outputs consumed in order.

#include <array>
#include <complex>
#include <cstdint>

namespace gaussmom {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index);

  std::uint32_t next_u32();
  // Uniform on the open interval (0, 1), 53 bits.
  double uniform();
  double normal();
  // (g1 + i g2)/sqrt(2): E|z|^2 = 1.
  std::complex<double> complex_normal();

 private:
  void refill();

  PhiloxKey key_;
  std::uint64_t index_;
  std::uint64_t block_ = 0;
  PhiloxCounter buffer_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gaussmom
