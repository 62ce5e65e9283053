#include "qft/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qft {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

constexpr double kTailCut = 1e-17;
constexpr int kMaxTable = 4096;

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

CounterStream::CounterStream(std::uint64_t seed, std::uint64_t index, std::uint32_t tag) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), tag, 0} {}

double CounterStream::uniform() noexcept {
  if (next_ >= 4) {
    block_ = Philox4x32::generate(counter_, key_);
    ++counter_[3];
    next_ = 0;
  }
  const std::uint64_t a = block_[next_] >> 5;
  const std::uint64_t b = block_[next_ + 1] >> 6;
  next_ += 2;
  return static_cast<double>(a * 67108864ULL + b) * 0x1.0p-53;
}

std::array<double, 4> block_uniforms(std::uint64_t seed, std::uint64_t index, std::uint32_t tag,
                                     std::uint32_t block) noexcept {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(index),
                                static_cast<std::uint32_t>(index >> 32), tag, block};
  const Philox4x32::Key key{static_cast<std::uint32_t>(seed),
                            static_cast<std::uint32_t>(seed >> 32)};
  const auto words = Philox4x32::generate(ctr, key);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[i] = static_cast<double>(words[i]) * 0x1.0p-32;
  return out;
}

DiscreteSampler::DiscreteSampler(std::span<const double> pmf) {
  if (pmf.empty()) throw std::invalid_argument("DiscreteSampler: empty pmf");
  cdf_.reserve(pmf.size());
  double acc = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw std::invalid_argument("DiscreteSampler: negative weight");
    acc += p;
    cdf_.push_back(acc);
  }
  if (!(acc > 0.0)) throw std::invalid_argument("DiscreteSampler: zero total weight");
  for (double& c : cdf_) c /= acc;
  cdf_.back() = 1.0;
}

DiscreteSampler DiscreteSampler::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("poisson: mean must be finite and >= 0");
  }
  std::vector<double> pmf{std::exp(-mean)};
  for (int n = 1; n < kMaxTable; ++n) {
    pmf.push_back(pmf.back() * mean / n);
    if (n > mean && pmf.back() < kTailCut) break;
  }
  return DiscreteSampler(pmf);
}

DiscreteSampler DiscreteSampler::negative_binomial(int successes, double p) {
  if (successes < 1) throw std::invalid_argument("negative_binomial: successes must be >= 1");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("negative_binomial: p must be in (0, 1]");
  const double q = 1.0 - p;
  const double mean = successes * q / p;
  std::vector<double> pmf{std::pow(p, successes)};
  for (int n = 0; n + 1 < kMaxTable; ++n) {
    pmf.push_back(pmf.back() * q * (n + successes) / (n + 1));
    if (n + 1 > mean && pmf.back() < kTailCut) break;
  }
  return DiscreteSampler(pmf);
}

int DiscreteSampler::operator()(double u) const noexcept {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return static_cast<int>(cdf_.size()) - 1;
  return static_cast<int>(it - cdf_.begin());
}

}  // namespace qft
