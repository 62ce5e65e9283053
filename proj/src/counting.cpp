#include "qft/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

namespace qft::counting {

using source::Stage;
using source::stream_tag;

namespace {

std::uint32_t tag(std::uint32_t run, Stage stage) {
  return stream_tag(run, static_cast<std::uint32_t>(stage));
}

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(fmt::format("{} = {} not in [0, 1]", what, p));
  }
}

struct ChannelSamplers {
  DiscreteSampler noise;
  double split = 0.5;
  DetectorSpec a, b;
};

// Per-pulse kernel shared by run_pulse_train and record_events.
class PulseKernel {
 public:
  explicit PulseKernel(const Experiment& e)
      : source_(e.source),
        translation_(e.translation_probability),
        untranslated_{DiscreteSampler::poisson(e.noise.untranslated_mean),
                      e.detectors.untranslated.split_to_a, e.detectors.untranslated.a,
                      e.detectors.untranslated.b},
        translated_{DiscreteSampler::poisson(e.noise.translated_mean),
                    e.detectors.translated.split_to_a, e.detectors.translated.a,
                    e.detectors.translated.b} {}

  EventBits operator()(std::uint64_t seed, std::uint32_t run, std::uint64_t pulse) const {
    const std::uint32_t fixed = tag(run, Stage::fixed);
    const auto u = block_uniforms(seed, pulse, fixed, 0);
    const auto rec = source_.emit(u[0], u[1], seed, run, pulse);

    int s1 = rec.signal_photons;
    int s2 = 0;
    if (s1 > 0 && translation_ > 0.0) {
      CounterStream routing(seed, pulse, tag(run, Stage::routing));
      s2 = binomial_thin(s1, translation_, routing);
      s1 -= s2;
    }
    s1 += untranslated_.noise(u[2]);
    s2 += translated_.noise(u[3]);

    const auto d = block_uniforms(seed, pulse, fixed, 1);
    EventBits bits = rec.herald_click ? kEventC : 0;
    bits |= detect(untranslated_, s1, seed, pulse, tag(run, Stage::split_untranslated), d[0], d[1])
            << 1;
    bits |= detect(translated_, s2, seed, pulse, tag(run, Stage::split_translated), d[2], d[3])
            << 3;
    return bits;
  }

 private:
  // Two bits: A click, B click.
  static EventBits detect(const ChannelSamplers& ch, int photons, std::uint64_t seed,
                          std::uint64_t pulse, std::uint32_t split_tag, double ua, double ub) {
    int to_a = 0;
    if (photons > 0) {
      CounterStream split(seed, pulse, split_tag);
      to_a = binomial_thin(photons, ch.split, split);
    }
    const bool a = ua < ch.a.click_probability(to_a);
    const bool b = ub < ch.b.click_probability(photons - to_a);
    return static_cast<EventBits>((a ? 1 : 0) | (b ? 2 : 0));
  }

  source::PulseSampler source_;
  double translation_;
  ChannelSamplers untranslated_;
  ChannelSamplers translated_;
};

void tally_channel(ChannelTallies& t, bool a, bool b, bool c) {
  t.a += a;
  t.b += b;
  t.ab += a && b;
  t.ac += a && c;
  t.bc += b && c;
  t.abc += a && b && c;
  t.any += a || b;
  t.any_c += (a || b) && c;
}

void tally(PulseTrainResult& r, EventBits bits) {
  const bool c = bits & kEventC;
  ++r.n_pulses;
  r.c += c;
  tally_channel(r.untranslated, bits & kEventUntranslatedA, bits & kEventUntranslatedB, c);
  tally_channel(r.translated, bits & kEventTranslatedA, bits & kEventTranslatedB, c);
}

unsigned resolve_threads(unsigned requested, std::uint64_t n_pulses) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t min_block = 1 << 16;
  const std::uint64_t useful = std::max<std::uint64_t>(1, n_pulses / min_block);
  return static_cast<unsigned>(std::min<std::uint64_t>(t, useful));
}

}  // namespace

void NoiseSpec::validate() const {
  if (!(untranslated_mean >= 0.0 && translated_mean >= 0.0)) {
    throw std::invalid_argument("noise means must be >= 0");
  }
}

void ChannelDetectors::validate() const {
  a.validate();
  b.validate();
  require_probability(split_to_a, "split_to_a");
}

Experiment Experiment::with_coupler(const source::SourceSpec& source,
                                    const translator::BsCoupler& coupler,
                                    const DetectorSetup& detectors, const NoiseSpec& noise) {
  return {source, translator::conversion_efficiency(coupler), detectors, noise};
}

void Experiment::validate() const {
  source.validate();
  require_probability(translation_probability, "translation probability");
  detectors.untranslated.validate();
  detectors.translated.validate();
  noise.validate();
}

Experiment Experiment::pumps_off() const {
  Experiment e = *this;
  e.translation_probability = 0.0;
  e.noise = {};
  return e;
}

Experiment Experiment::noise_only() const {
  Experiment e = *this;
  e.source.epsilon = 0.0;
  return e;
}

ChannelTallies& ChannelTallies::operator+=(const ChannelTallies& o) {
  a += o.a;
  b += o.b;
  ab += o.ab;
  ac += o.ac;
  bc += o.bc;
  abc += o.abc;
  any += o.any;
  any_c += o.any_c;
  return *this;
}

PulseTrainResult& PulseTrainResult::operator+=(const PulseTrainResult& o) {
  n_pulses += o.n_pulses;
  c += o.c;
  untranslated += o.untranslated;
  translated += o.translated;
  return *this;
}

bool PulseTrainResult::invariants_hold() const {
  auto ok = [&](const ChannelTallies& t) {
    return t.abc <= std::min(t.ac, t.bc) && std::max(t.ac, t.bc) <= c && c <= n_pulses &&
           t.abc <= t.ab && t.ab <= std::min(t.a, t.b) && t.ac <= t.a && t.bc <= t.b &&
           t.any == t.a + t.b - t.ab && t.any_c == t.ac + t.bc - t.abc && t.any <= n_pulses;
  };
  return ok(untranslated) && ok(translated);
}

PulseTrainResult merge(std::span<const PulseTrainResult> runs) {
  PulseTrainResult total;
  for (const auto& r : runs) total += r;
  return total;
}

PulseTrainResult run_pulse_train(const Experiment& experiment, std::uint64_t n_pulses,
                                 std::uint64_t seed, const RunOptions& options) {
  if (n_pulses < 1) throw std::invalid_argument("n_pulses must be >= 1");
  experiment.validate();
  const PulseKernel kernel(experiment);

  const unsigned threads = resolve_threads(options.threads, n_pulses);
  std::vector<PulseTrainResult> parts(threads);
  auto work = [&](unsigned w) {
    const std::uint64_t begin = n_pulses * w / threads;
    const std::uint64_t end = n_pulses * (w + 1) / threads;
    PulseTrainResult r;
    for (std::uint64_t i = begin; i < end; ++i) tally(r, kernel(seed, options.run_id, i));
    parts[w] = r;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  return merge(parts);
}

PulseTrainResult run_pulse_train(const source::SourceSpec& source,
                                 const translator::BsCoupler& coupler,
                                 const DetectorSetup& detectors, const NoiseSpec& noise,
                                 std::uint64_t n_pulses, std::uint64_t seed) {
  return run_pulse_train(Experiment::with_coupler(source, coupler, detectors, noise), n_pulses,
                         seed);
}

std::vector<EventBits> record_events(const Experiment& experiment, std::uint64_t n_pulses,
                                     std::uint64_t seed, std::uint32_t run_id) {
  experiment.validate();
  const PulseKernel kernel(experiment);
  std::vector<EventBits> events(n_pulses);
  for (std::uint64_t i = 0; i < n_pulses; ++i) events[i] = kernel(seed, run_id, i);
  return events;
}

PulseTrainResult tally_events(std::span<const EventBits> events) {
  PulseTrainResult r;
  for (EventBits e : events) tally(r, e);
  return r;
}

void shuffle_herald(std::span<EventBits> events, std::uint64_t seed) {
  if (events.size() < 2) return;
  std::vector<EventBits> herald(events.size());
  std::transform(events.begin(), events.end(), herald.begin(),
                 [](EventBits e) { return static_cast<EventBits>(e & kEventC); });
  CounterStream stream(seed, 0, 0xFFFFFFFFu);
  for (std::size_t i = herald.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(stream.uniform() * static_cast<double>(i + 1));
    std::swap(herald[i], herald[std::min(j, i)]);
  }
  for (std::size_t i = 0; i < events.size(); ++i) {
    events[i] = static_cast<EventBits>((events[i] & ~kEventC) | herald[i]);
  }
}

// --- estimators ------------------------------------------------------------

double g2_value(const PulseTrainResult& result, Channel ch) {
  const auto& t = result.channel(ch);
  if (t.ac == 0 || t.bc == 0) {
    throw InsufficientStatistics(
        fmt::format("g2 undefined: N_AC = {}, N_BC = {}", t.ac, t.bc));
  }
  return static_cast<double>(t.abc) * static_cast<double>(result.c) /
         (static_cast<double>(t.ac) * static_cast<double>(t.bc));
}

G2Estimate g2_from_counts(std::span<const PulseTrainResult> runs, Channel ch) {
  G2Estimate est;
  est.value = g2_value(merge(runs), ch);
  est.n_runs = static_cast<int>(runs.size());
  std::vector<double> values;
  for (const auto& r : runs) {
    try {
      values.push_back(g2_value(r, ch));
    } catch (const InsufficientStatistics&) {
    }
  }
  if (values.size() >= 2) {
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                        static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    est.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    est.std_error = est.std_dev / std::sqrt(static_cast<double>(values.size()));
  }
  return est;
}

G2Estimate g2_from_counts(const PulseTrainResult& result, Channel ch) {
  return g2_from_counts(std::span<const PulseTrainResult>(&result, 1), ch);
}

double accidental_rate(double n_idler, double n_signal, double n_pulses) {
  if (!(n_pulses > 0.0)) throw std::invalid_argument("accidental_rate: N_p must be > 0");
  return n_idler * n_signal / n_pulses;
}

double car(const PulseTrainResult& result, Channel ch) {
  const auto& t = result.channel(ch);
  const double accidentals = accidental_rate(static_cast<double>(result.c),
                                             static_cast<double>(t.any),
                                             static_cast<double>(result.n_pulses));
  if (!(accidentals > 0.0)) throw InsufficientStatistics("CAR undefined: no accidentals expected");
  return static_cast<double>(t.any_c) / accidentals;
}

double channel_rate(const PulseTrainResult& result, Channel ch) {
  if (result.n_pulses == 0) throw InsufficientStatistics("no pulses");
  const auto& t = result.channel(ch);
  return static_cast<double>(t.a + t.b) / static_cast<double>(result.n_pulses);
}

double depletion_efficiency(const PulseTrainResult& on, const PulseTrainResult& off,
                            double noise_baseline_rate) {
  const double r_off = channel_rate(off, Channel::untranslated);
  if (!(r_off > 0.0)) throw InsufficientStatistics("depletion: pumps-off rate is zero");
  return 1.0 - (channel_rate(on, Channel::untranslated) - noise_baseline_rate) / r_off;
}

double creation_efficiency(const PulseTrainResult& on, const PulseTrainResult& off,
                           double noise_baseline_rate, double detector_ratio) {
  if (!(detector_ratio > 0.0)) throw std::invalid_argument("detector_ratio must be > 0");
  const double r_off = channel_rate(off, Channel::untranslated);
  if (!(r_off > 0.0)) throw InsufficientStatistics("creation: pumps-off rate is zero");
  return (channel_rate(on, Channel::translated) - noise_baseline_rate) / r_off / detector_ratio;
}

EfficiencyEstimate measure_efficiency(const Experiment& experiment, std::uint64_t pulses_per_run,
                                      int n_runs, std::uint64_t seed, double detector_ratio,
                                      unsigned threads) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  const Experiment off_config = experiment.pumps_off();
  const Experiment noise_config = experiment.noise_only();
  EfficiencyEstimate est;
  PulseTrainResult on_total, off_total, noise_total;
  std::vector<double> dep, cre;
  for (int r = 0; r < n_runs; ++r) {
    const RunOptions opt{static_cast<std::uint32_t>(r), threads};
    EfficiencyRun run;
    run.on = run_pulse_train(experiment, pulses_per_run, seed, opt);
    run.off = run_pulse_train(off_config, pulses_per_run, seed, opt);
    run.noise = run_pulse_train(noise_config, pulses_per_run, seed, opt);
    run.depletion =
        depletion_efficiency(run.on, run.off, channel_rate(run.noise, Channel::untranslated));
    run.creation = creation_efficiency(run.on, run.off,
                                       channel_rate(run.noise, Channel::translated), detector_ratio);
    dep.push_back(run.depletion);
    cre.push_back(run.creation);
    on_total += run.on;
    off_total += run.off;
    noise_total += run.noise;
    est.runs.push_back(run);
  }
  est.n_runs = n_runs;
  est.depletion = depletion_efficiency(on_total, off_total,
                                       channel_rate(noise_total, Channel::untranslated));
  est.creation = creation_efficiency(on_total, off_total,
                                     channel_rate(noise_total, Channel::translated),
                                     detector_ratio);
  auto std_error = [n_runs](const std::vector<double>& v) {
    if (n_runs < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n_runs;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n_runs - 1) / n_runs);
  };
  est.depletion_std_error = std_error(dep);
  est.creation_std_error = std_error(cre);
  return est;
}

}  // namespace qft::counting
