#pragma once

// Counter-based random numbers (Philox4x32-10). A draw is a pure function of
// (seed, stream, sample index, lane), so Monte Carlo sums do not depend on how
// the sample range is split across workers.

#include <array>
#include <cstdint>

namespace kpent {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxBlock philox4x32_10(PhiloxBlock counter, PhiloxKey key);

// splitmix64 finalizer; used to derive per-row seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

// Sequential draws for one sample index. Counter layout:
// (index low, index high, block number, stream).
class SampleStream {
 public:
  SampleStream(std::uint64_t seed, std::uint32_t stream, std::uint64_t index);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal by Box-Muller.
  double normal();

 private:
  PhiloxKey key_;
  PhiloxBlock counter_;
  PhiloxBlock buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace kpent
