#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "qft/random.hpp"

using qft::CounterStream;
using qft::DiscreteSampler;
using qft::Philox4x32;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference outputs of the Random123 distribution (kat_vectors).
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
        Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             {0xffffffff, 0xffffffff}) ==
        Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             {0xa4093822, 0x299f31d0}) ==
        Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("counter streams are reproducible and distinct") {
  CounterStream a(42, 7, 3), b(42, 7, 3), c(42, 7, 4), d(43, 7, 3);
  std::set<double> seen;
  for (int i = 0; i < 16; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    seen.insert(x);
    seen.insert(c.uniform());
    seen.insert(d.uniform());
  }
  CHECK(seen.size() == 48);
}

TEST_CASE("uniform moments") {
  CounterStream s(1, 0, 0);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.uniform();
    sum += x;
    sum2 += x * x;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
  CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.005));
}

TEST_CASE("block uniforms use fixed slots") {
  const auto u = qft::block_uniforms(9, 100, 5, 0);
  CHECK(u == qft::block_uniforms(9, 100, 5, 0));
  CHECK(u != qft::block_uniforms(9, 100, 5, 1));
  for (double x : u) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("poisson sampler matches its pmf (chi-square)") {
  const double mean = 1.7;
  const auto sampler = DiscreteSampler::poisson(mean);
  const int n = 200000;
  std::vector<int> counts(12, 0);
  CounterStream s(5, 0, 0);
  for (int i = 0; i < n; ++i) {
    const int k = sampler(s.uniform());
    counts[static_cast<std::size_t>(std::min(k, 11))]++;
  }
  double chi2 = 0.0, p = std::exp(-mean), tail = 1.0;
  for (int k = 0; k < 11; ++k) {
    chi2 += std::pow(counts[static_cast<std::size_t>(k)] - n * p, 2) / (n * p);
    tail -= p;
    p *= mean / (k + 1);
  }
  chi2 += std::pow(counts[11] - n * tail, 2) / (n * tail);
  // 11 degrees of freedom; 31.3 is the 0.001 upper quantile.
  CHECK(chi2 < 31.3);
}

TEST_CASE("degenerate samplers") {
  CHECK(DiscreteSampler::poisson(0.0)(0.999999) == 0);
  CHECK(DiscreteSampler::negative_binomial(3, 1.0)(0.5) == 0);
  CHECK_THROWS_AS(DiscreteSampler::poisson(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteSampler::negative_binomial(0, 0.5), std::invalid_argument);
}

TEST_CASE("negative binomial mean") {
  const int k = 10;
  const double p = 0.8;
  const auto sampler = DiscreteSampler::negative_binomial(k, p);
  CounterStream s(11, 0, 0);
  const int n = 200000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += sampler(s.uniform());
  const double mean = k * (1 - p) / p;
  const double sd = std::sqrt(k * (1 - p) / (p * p) / n);
  CHECK(std::abs(sum / n - mean) < 4 * sd);
}
