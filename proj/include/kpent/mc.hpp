#pragma once

// Deterministic block-parallel Monte Carlo accumulation. The sample range is
// cut into fixed blocks; each block is summed independently and blocks are
// combined in index order, so the result is the same for any worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

namespace kpent {

struct MCParams {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t max_samples = 100'000'000;
  bool escalate = true;
};

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

// First and second moments of K per-sample channels.
struct ChannelMoments {
  std::uint64_t n = 0;
  std::vector<double> sum;    // K
  std::vector<double> cross;  // K x K, row-major

  explicit ChannelMoments(int channels = 0) : sum(channels, 0.0), cross(channels * channels, 0.0) {}
  int channels() const { return static_cast<int>(sum.size()); }
  double mean(int i) const { return sum[i] / static_cast<double>(n); }
  double covariance(int i, int j) const {
    const double nn = static_cast<double>(n);
    if (n < 2) return 0.0;
    return (cross[i * channels() + j] - sum[i] * sum[j] / nn) / (nn - 1.0);
  }
  double variance(int i) const { return std::max(0.0, covariance(i, i)); }
  // Standard error of the mean of channel i.
  double std_error(int i) const { return n < 2 ? 0.0 : std::sqrt(variance(i) / static_cast<double>(n)); }
  // Variance of channel i minus channel j.
  double difference_variance(int i, int j) const {
    return std::max(0.0, covariance(i, i) + covariance(j, j) - 2.0 * covariance(i, j));
  }
  void merge(const ChannelMoments& o) {
    n += o.n;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += o.sum[i];
    for (std::size_t i = 0; i < cross.size(); ++i) cross[i] += o.cross[i];
  }
};

inline constexpr std::uint64_t kMCBlock = 1 << 15;

unsigned mc_worker_count();

// Runs sample(index, out) for index in [begin, end); `out` has `channels`
// slots. `sample` must be a pure function of the index.
template <class Sample>
ChannelMoments mc_moments(std::uint64_t begin, std::uint64_t end, int channels, Sample&& sample) {
  const std::uint64_t total = end > begin ? end - begin : 0;
  const std::uint64_t blocks = (total + kMCBlock - 1) / kMCBlock;
  std::vector<ChannelMoments> partial(blocks, ChannelMoments(channels));
  auto run_block = [&](std::uint64_t b) {
    ChannelMoments& m = partial[b];
    std::vector<double> out(channels);
    const std::uint64_t lo = begin + b * kMCBlock;
    const std::uint64_t hi = std::min(end, lo + kMCBlock);
    for (std::uint64_t i = lo; i < hi; ++i) {
      sample(i, out.data());
      for (int c = 0; c < channels; ++c) {
        m.sum[c] += out[c];
        for (int e = 0; e < channels; ++e) m.cross[c * channels + e] += out[c] * out[e];
      }
    }
    m.n = hi - lo;
  };
  const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(mc_worker_count(), blocks));
  if (workers <= 1) {
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::uint64_t b = w; b < blocks; b += workers) run_block(b);
      });
    }
    for (auto& t : pool) t.join();
  }
  ChannelMoments all(channels);
  for (const auto& p : partial) all.merge(p);
  return all;
}

// Override the worker count (0 restores the hardware default).
void set_mc_workers(unsigned workers);

}  // namespace kpent
