#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qft {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the
/// output depends only on (counter, key), which is what lets every pulse of a
/// Monte Carlo run own an independent, reproducible stream.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

/// Uniform deviates addressed by (seed, index, tag). Two streams with any
/// differing coordinate never share a counter block.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t index, std::uint32_t tag) noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

 private:
  Philox4x32::Key key_;
  Philox4x32::Counter counter_;
  Philox4x32::Counter block_{};
  int next_ = 4;
};

/// Four uniforms on [0, 1) with 32-bit resolution from one Philox block.
/// Used for draws that happen at fixed positions in every pulse.
std::array<double, 4> block_uniforms(std::uint64_t seed, std::uint64_t index, std::uint32_t tag,
                                     std::uint32_t block) noexcept;

/// Inverse-CDF sampler over {0, 1, ..., n}. Portable across standard
/// libraries, unlike the std:: distributions.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;
  explicit DiscreteSampler(std::span<const double> pmf);

  /// Poisson(mean); the table stops once terms fall below 1e-17.
  static DiscreteSampler poisson(double mean);
  /// Number of failures before the K-th success, success probability p.
  static DiscreteSampler negative_binomial(int successes, double p);

  int operator()(double u) const noexcept;
  std::span<const double> cdf() const noexcept { return cdf_; }

 private:
  std::vector<double> cdf_;
};

/// Count of successes in n Bernoulli(p) trials, consuming n uniforms.
template <class Stream>
int binomial_thin(int n, double p, Stream& stream) {
  int k = 0;
  for (int i = 0; i < n; ++i) k += stream.uniform() < p ? 1 : 0;
  return k;
}

}  // namespace qft
