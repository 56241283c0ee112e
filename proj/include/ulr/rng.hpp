#pragma once

#include <array>
#include <cstdint>

namespace ulr {

// Counter-based uniform generator (Philox-4x32, 10 rounds). A stream is
// fully determined by (seed, stream), so replications and components can
// draw from disjoint streams whose output does not depend on scheduling
// or call interleaving.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  // Strictly inside (0,1), 53-bit resolution.
  double uniform01();

  // Standard normal by inverse transform.
  double normal();

  // One raw 4x32 block (advances the counter). Exposed for tests.
  std::array<std::uint32_t, 4> next_block();

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 2;  // doubles consumed from buf_ (2 per block)

  void refill();
};

// Inverse standard normal CDF, absolute error below 1e-9.
// Throws std::domain_error unless p lies strictly inside (0,1).
double normal_quantile(double p);

}  // namespace ulr
