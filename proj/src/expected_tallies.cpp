#include <array>
#include <bit>
#include <cmath>

#include "qft/counting.hpp"

namespace qft::counting {

namespace {

// Detector order used for the subset masks below.
enum Det { kC = 0, kA1, kB1, kA2, kB2, kDetectors };

struct DetectorTerms {
  double dark = 0.0;
  double noise = 0.0;   // detected background mean
  double signal = 0.0;  // probability that one pair's signal photon clicks here
};

class NoClickModel {
 public:
  NoClickModel(const Experiment& e, bool decorrelated) : decorrelated_(decorrelated) {
    const auto& s = e.source;
    e2_ = s.epsilon * s.epsilon;
    modes_ = s.schmidt_modes;
    herald_eff_ = s.herald.efficiency;
    terms_[kC].dark = s.herald.dark_prob;
    const double t = e.translation_probability;
    fill(kA1, kB1, e.detectors.untranslated, s.signal_delivery * (1.0 - t), e.noise.untranslated_mean);
    fill(kA2, kB2, e.detectors.translated, s.signal_delivery * t, e.noise.translated_mean);
  }

  /// Probability that no detector in `mask` clicks.
  double none(unsigned mask) const {
    double darks = 1.0;
    double noise = 0.0;
    double signal_miss = 1.0;
    for (int j = kA1; j < kDetectors; ++j) {
      if (!(mask & (1u << j))) continue;
      noise += terms_[j].noise;
      signal_miss -= terms_[j].signal;
    }
    for (int j = 0; j < kDetectors; ++j) {
      if (mask & (1u << j)) darks *= 1.0 - terms_[j].dark;
    }
    const double idler_miss = (mask & (1u << kC)) ? 1.0 - herald_eff_ : 1.0;
    const double pairs = decorrelated_ ? generating(signal_miss) * generating(idler_miss)
                                       : generating(signal_miss * idler_miss);
    return darks * std::exp(-noise) * pairs;
  }

  /// Probability that every detector in `mask` clicks (inclusion-exclusion).
  double all(unsigned mask) const {
    double sum = 0.0;
    for (unsigned sub = mask;; sub = (sub - 1) & mask) {
      const int sign = (std::popcount(sub) % 2) ? -1 : 1;
      sum += sign * none(sub);
      if (sub == 0) break;
    }
    return sum;
  }

 private:
  void fill(int a, int b, const ChannelDetectors& d, double reach, double noise_mean) {
    const double r = d.split_to_a;
    terms_[a] = {d.a.dark_prob, noise_mean * r * d.a.efficiency, reach * r * d.a.efficiency};
    terms_[b] = {d.b.dark_prob, noise_mean * (1.0 - r) * d.b.efficiency,
                 reach * (1.0 - r) * d.b.efficiency};
  }

  // E[z^n] for the negative-binomial pair number.
  double generating(double z) const {
    return std::pow((1.0 - e2_) / (1.0 - e2_ * z), modes_);
  }

  bool decorrelated_;
  double e2_ = 0.0;
  int modes_ = 1;
  double herald_eff_ = 0.0;
  std::array<DetectorTerms, kDetectors> terms_{};
};

constexpr unsigned bit(int d) { return 1u << d; }

ExpectedChannel channel(const NoClickModel& m, int a, int b) {
  ExpectedChannel out;
  const unsigned c = bit(kC);
  out.a = m.all(bit(a));
  out.b = m.all(bit(b));
  out.ab = m.all(bit(a) | bit(b));
  out.ac = m.all(bit(a) | c);
  out.bc = m.all(bit(b) | c);
  out.abc = m.all(bit(a) | bit(b) | c);
  const double none_ab = m.none(bit(a) | bit(b));
  out.any = 1.0 - none_ab;
  out.any_c = m.all(c) - (none_ab - m.none(bit(a) | bit(b) | c));
  return out;
}

}  // namespace

ExpectedTallies expected_tallies(const Experiment& experiment, bool decorrelated) {
  experiment.validate();
  const NoClickModel model(experiment, decorrelated);
  ExpectedTallies out;
  out.c = model.all(bit(kC));
  out.untranslated = channel(model, kA1, kB1);
  out.translated = channel(model, kA2, kB2);
  return out;
}

double ExpectedTallies::g2(Channel ch) const {
  const auto& t = channel(ch);
  return t.abc * c / (t.ac * t.bc);
}

double ExpectedTallies::car(Channel ch) const {
  const auto& t = channel(ch);
  return t.any_c / (c * t.any);
}

double ExpectedTallies::channel_rate(Channel ch) const {
  const auto& t = channel(ch);
  return t.a + t.b;
}

}  // namespace qft::counting
