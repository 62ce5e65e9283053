#include "qft/scenario.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "qft/units.hpp"

namespace qft::scenario {

using config::ConfigError;
using config::ScenarioConfig;
using counting::Channel;

namespace {

constexpr std::array<std::pair<Command, const char*>, 6> kCommands{{
    {Command::phasematch, "phasematch"},
    {Command::translate, "translate"},
    {Command::acceptance, "acceptance"},
    {Command::g2, "g2"},
    {Command::efficiency, "efficiency"},
    {Command::sweep, "sweep"},
}};

std::string header(const ScenarioConfig& c) {
  return fmt::format("# config_sha256={}\n", config::config_hash(c));
}

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) v = 0.0;  // no "-0"
  return fmt::format("{:.10g}", v);
}

double linspace(double start, double stop, int steps, int i) {
  return steps == 1 ? start : start + (stop - start) * i / (steps - 1);
}

std::string indent(const std::string& text, const std::string& pad) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    const auto line = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    out += pad + line + "\n";
    if (end == std::string::npos) break;
    pos = end + 1;
  }
  return out;
}

Artifact summary(const ScenarioConfig& c, Command command, const std::string& results) {
  std::string body = header(c);
  body += fmt::format("command: {}\n", command_name(command));
  body += fmt::format("config_sha256: {}\n", config::config_hash(c));
  body += "results:\n" + indent(results, "  ");
  body += "config:\n" + indent(config::serialize(c), "  ");
  return {fmt::format("summary_{}.yaml", command_name(command)), body};
}

double g2_or_nan(const counting::PulseTrainResult& r, Channel ch) {
  try {
    return counting::g2_value(r, ch);
  } catch (const counting::InsufficientStatistics&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

double car_or_nan(const counting::PulseTrainResult& r, Channel ch) {
  try {
    return counting::car(r, ch);
  } catch (const counting::InsufficientStatistics&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

std::vector<counting::PulseTrainResult> run_counting(const ScenarioConfig& c,
                                                     const counting::Experiment& e) {
  std::vector<counting::PulseTrainResult> runs;
  for (int r = 0; r < c.counting.runs; ++r) {
    runs.push_back(counting::run_pulse_train(
        e, c.counting.pulses_per_run, *c.seed,
        {static_cast<std::uint32_t>(r), c.counting.threads}));
  }
  return runs;
}

std::string g2_row(const std::string& id, const counting::PulseTrainResult& r, Channel ch) {
  const auto& t = r.channel(ch);
  return fmt::format("{},{},{},{},{},{},{},{},{},{}\n", id, r.n_pulses, t.a, t.b, r.c, t.ac, t.bc,
                     t.abc, num(g2_or_nan(r, ch)), num(car_or_nan(r, ch)));
}

std::string experiment_yaml(const counting::Experiment& e) {
  return fmt::format(
      "epsilon: {}\nmean_pairs_per_pulse: {}\ntranslation_probability: {}\n"
      "noise_untranslated_mean_photons: {}\nnoise_translated_mean_photons: {}\n",
      num(e.source.epsilon), num(e.source.mean_pairs()), num(e.translation_probability),
      num(e.noise.untranslated_mean), num(e.noise.translated_mean));
}

// --- subcommands -----------------------------------------------------------

std::vector<Artifact> phasematch(const ScenarioConfig& c) {
  const auto& p = c.phasematch;
  const auto& fiber = c.fiber(p.fiber, "phasematch.fiber");
  const auto axes = dispersion::mi_axes(p.pump_axis, p.signal_axis, p.idler_axis);
  std::string csv = header(c) + "pump_nm,signal_nm,idler_nm,residual_per_m\n";
  int unmatched = 0;
  for (int i = 0; i < p.pump_steps; ++i) {
    const double pump_nm = linspace(p.pump_start_nm, p.pump_stop_nm, p.pump_steps, i);
    try {
      const auto sol = dispersion::solve_mi_sidebands(fiber, pump_nm, p.pump_power_mw * 1e-3, axes);
      csv += fmt::format("{:.3f},{:.4f},{:.4f},{:.6e}\n", pump_nm,
                         units::nm_from_omega(sol.quartet.signal()),
                         units::nm_from_omega(sol.quartet.idler()), sol.residual_mismatch_per_m);
    } catch (const dispersion::NoPhaseMatch&) {
      ++unmatched;
      csv += fmt::format("{:.3f},nan,nan,nan\n", pump_nm);
    }
  }
  const std::string results =
      fmt::format("fiber: {}\npump_points: {}\nunmatched_points: {}\n", fiber.name, p.pump_steps,
                  unmatched);
  return {{"phasematch.csv", csv}, summary(c, Command::phasematch, results)};
}

std::vector<Artifact> translate(const ScenarioConfig& c, const std::optional<KappaSweep>& sweep) {
  const auto coupler = build_coupler(c);
  const auto quartet = build_quartet(c);
  std::string csv = header(c);
  auto row = [](const quantum::TransferMatrix& m) {
    return fmt::format("{},{},{},{},{}", num(m.mu.real()), num(m.mu.imag()), num(m.nu.real()),
                       num(m.nu.imag()), num(m.efficiency()));
  };
  if (sweep) {
    csv += "kappa_l,z_m,mu_re,mu_im,nu_re,nu_im,efficiency\n";
    const double phase = std::arg(coupler.kappa_per_m);
    for (int i = 0; i < sweep->steps; ++i) {
      const double kl = linspace(sweep->start, sweep->stop, sweep->steps, i);
      const auto kappa = std::polar(kl / coupler.length_m, phase);
      const auto m = translator::transfer_functions(coupler.delta_per_m, kappa, coupler.length_m);
      csv += fmt::format("{},{},{}\n", num(kl), num(coupler.length_m), row(m));
    }
  } else {
    csv += "z_m,mu_re,mu_im,nu_re,nu_im,efficiency\n";
    const int n = c.translator.z_steps;
    for (int i = 0; i <= n; ++i) {
      const double z = i == n ? coupler.length_m : coupler.length_m * i / n;
      csv += fmt::format("{},{}\n", num(z), row(translator::transfer_at(coupler, z)));
    }
  }
  const auto residual = dispersion::solve_bs_residual(
      c.fiber(c.translator.fiber, "translator.fiber"), quartet,
      {c.translator.axis, c.translator.axis, c.translator.axis, c.translator.axis});
  const std::string results = fmt::format(
      "signal2_nm: {}\ndispersion_delta_per_m: {}\ndelta_per_m: {}\nkappa_per_m: {}\n"
      "kappa_length: {}\nlength_m: {}\nefficiency: {}\n",
      num(units::nm_from_omega(quartet.signal2())), num(0.5 * residual.residual_mismatch_per_m),
      num(coupler.delta_per_m), num(std::abs(coupler.kappa_per_m)), num(coupler.kappa_length()),
      num(coupler.length_m), num(translator::conversion_efficiency(coupler)));
  return {{"translate.csv", csv}, summary(c, Command::translate, results)};
}

std::vector<Artifact> acceptance(const ScenarioConfig& c) {
  const auto input = build_input_spectrum(c);
  const auto model = build_acceptance(c);
  const auto out = translator::acceptance_filter(model, input);

  struct Row {
    double wl, in, tr, rem;
  };
  std::vector<Row> rows;
  for (std::size_t i = 0; i < out.translated.wavelength_nm.size(); ++i) {
    rows.push_back({out.translated.wavelength_nm[i], 0.0, out.translated.density[i], 0.0});
  }
  for (std::size_t i = 0; i < input.wavelength_nm.size(); ++i) {
    rows.push_back({input.wavelength_nm[i], input.density[i], 0.0, out.remainder.density[i]});
  }
  std::string csv = header(c) + "wavelength_nm,input,translated,remainder\n";
  for (const auto& r : rows) {
    csv += fmt::format("{:.5f},{},{},{}\n", r.wl, num(r.in), num(r.tr), num(r.rem));
  }

  double balance = 0.0;
  for (std::size_t i = 0; i < input.density.size(); ++i) {
    balance = std::max(balance, std::abs(out.translated_input_grid[i] + out.remainder.density[i] -
                                         input.density[i]));
  }
  const double peak_eff = *std::max_element(out.efficiency.begin(), out.efficiency.end());
  const auto& t = c.translator;
  const double fiber_walkoff = translator::group_slowness_difference(
      c.fiber(t.fiber, "translator.fiber"), t.signal1_wavelength_nm,
      units::nm_from_omega(build_quartet(c).signal2()), t.axis);
  const std::string results = fmt::format(
      "fiber_walkoff_ps_per_m: {}\n", num(fiber_walkoff * 1e12)) + fmt::format(
      "walkoff_ps_per_m: {}\ninput_fwhm_nm: {}\ntranslated_fwhm_nm: {}\ninput_fwhm_thz: {}\n"
      "translated_fwhm_thz: {}\npeak_efficiency: {}\nmax_balance_error: {}\n",
      num(model.walkoff_s_per_m * 1e12), num(input.fwhm_nm()), num(out.translated.fwhm_nm()),
      num(input.fwhm_thz()), num(out.translated.fwhm_thz()), num(peak_eff), num(balance));
  return {{"acceptance.csv", csv}, summary(c, Command::acceptance, results)};
}

std::vector<Artifact> g2(const ScenarioConfig& c) {
  const auto e = build_experiment(c);
  const auto runs = run_counting(c, e);
  const auto merged = counting::merge(runs);
  const auto expected = counting::expected_tallies(e);

  std::vector<Artifact> files;
  std::string results = experiment_yaml(e);
  for (auto [ch, label] : {std::pair{Channel::untranslated, "683"},
                           std::pair{Channel::translated, "659"}}) {
    std::string csv = header(c) + "run_id,N_p,N_A,N_B,N_C,N_AC,N_BC,N_ABC,g2,car\n";
    for (std::size_t r = 0; r < runs.size(); ++r) csv += g2_row(std::to_string(r), runs[r], ch);
    csv += g2_row("all", merged, ch);
    files.push_back({fmt::format("g2_{}.csv", label), csv});

    std::string g2_text = "g2: nan\n";
    try {
      const auto est = counting::g2_from_counts(runs, ch);
      g2_text = fmt::format("g2: {}\ng2_std_error: {}\ng2_std_dev: {}\nruns: {}\n", num(est.value),
                            num(est.std_error), num(est.std_dev), est.n_runs);
    } catch (const counting::InsufficientStatistics&) {
    }
    results += fmt::format("channel_{}:\n", label);
    results += indent(g2_text + fmt::format("car: {}\nexpected_g2: {}\nexpected_car: {}\n",
                                            num(car_or_nan(merged, ch)), num(expected.g2(ch)),
                                            num(expected.car(ch))),
                      "  ");
  }
  files.push_back(summary(c, Command::g2, results));
  return files;
}

std::vector<Artifact> efficiency(const ScenarioConfig& c) {
  const auto e = build_experiment(c);
  const double ratio = detector_ratio(c);
  const auto est = counting::measure_efficiency(e, c.counting.pulses_per_run, c.counting.runs,
                                                *c.seed, ratio, c.counting.threads);
  std::string csv = header(c) +
                    "run_id,N_p,R683_on,R683_off,R683_noise,R659_on,R659_noise,depletion,creation\n";
  auto row = [&](const std::string& id, const counting::PulseTrainResult& on,
                 const counting::PulseTrainResult& off, const counting::PulseTrainResult& noise,
                 double dep, double cre) {
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", id, on.n_pulses,
                       num(counting::channel_rate(on, Channel::untranslated)),
                       num(counting::channel_rate(off, Channel::untranslated)),
                       num(counting::channel_rate(noise, Channel::untranslated)),
                       num(counting::channel_rate(on, Channel::translated)),
                       num(counting::channel_rate(noise, Channel::translated)), num(dep), num(cre));
  };
  counting::PulseTrainResult on, off, noise;
  for (std::size_t r = 0; r < est.runs.size(); ++r) {
    const auto& run = est.runs[r];
    row(std::to_string(r), run.on, run.off, run.noise, run.depletion, run.creation);
    on += run.on;
    off += run.off;
    noise += run.noise;
  }
  row("all", on, off, noise, est.depletion, est.creation);
  const std::string results = experiment_yaml(e) + fmt::format(
      "detector_ratio: {}\ndepletion: {}\ndepletion_std_error: {}\ncreation: {}\n"
      "creation_std_error: {}\nruns: {}\n",
      num(ratio), num(est.depletion), num(est.depletion_std_error), num(est.creation),
      num(est.creation_std_error), est.n_runs);
  return {{"efficiency.csv", csv}, summary(c, Command::efficiency, results)};
}

std::vector<Artifact> sweep(const ScenarioConfig& c) {
  if (!c.sweep) throw ConfigError("sweep", "the sweep subcommand needs a 'sweep' section");
  const auto& s = *c.sweep;
  std::string csv = header(c) +
                    "value,g2_683,g2_683_std_error,g2_659,g2_659_std_error,car_683,car_659,"
                    "expected_g2_683,expected_g2_659\n";
  for (int i = 0; i < s.steps; ++i) {
    const double value = linspace(s.start, s.stop, s.steps, i);
    auto point = config::with_parameter(c, s.parameter, value);
    point.sweep.reset();
    const auto e = build_experiment(point);
    const auto runs = run_counting(point, e);
    const auto merged = counting::merge(runs);
    const auto expected = counting::expected_tallies(e);
    auto est = [&](Channel ch) {
      try {
        return counting::g2_from_counts(runs, ch);
      } catch (const counting::InsufficientStatistics&) {
        return counting::G2Estimate{std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, 0};
      }
    };
    const auto g683 = est(Channel::untranslated);
    const auto g659 = est(Channel::translated);
    csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", num(value), num(g683.value),
                       num(g683.std_error), num(g659.value), num(g659.std_error),
                       num(car_or_nan(merged, Channel::untranslated)),
                       num(car_or_nan(merged, Channel::translated)),
                       num(expected.g2(Channel::untranslated)),
                       num(expected.g2(Channel::translated)));
  }
  const std::string results =
      fmt::format("parameter: {}\npoints: {}\n", s.parameter, s.steps);
  return {{"sweep.csv", csv}, summary(c, Command::sweep, results)};
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  for (const auto& [cmd, n] : kCommands) {
    if (name == n) return cmd;
  }
  return std::nullopt;
}

const char* command_name(Command command) {
  for (const auto& [cmd, n] : kCommands) {
    if (cmd == command) return n;
  }
  return "?";
}

KappaSweep parse_kappa_sweep(std::string_view text) {
  std::array<double, 3> parts{};
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    const auto end = i < 2 ? text.find(':', pos) : text.size();
    if (end == std::string_view::npos) {
      throw ConfigError("--sweep", "expected start:stop:steps");
    }
    const auto piece = text.substr(pos, end - pos);
    const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), parts[i]);
    if (ec != std::errc() || ptr != piece.data() + piece.size()) {
      throw ConfigError("--sweep", fmt::format("'{}' is not a number", piece));
    }
    pos = end + 1;
  }
  KappaSweep s{parts[0], parts[1], static_cast<int>(parts[2])};
  if (s.steps < 1 || static_cast<double>(s.steps) != parts[2]) {
    throw ConfigError("--sweep", "steps must be a positive integer");
  }
  if (s.start < 0.0 || s.stop < 0.0) throw ConfigError("--sweep", "kappa L must be >= 0");
  if (s.steps > 1 && s.start == s.stop) throw ConfigError("--sweep", "range is empty");
  return s;
}

dispersion::FrequencyQuartet build_quartet(const ScenarioConfig& c) {
  const auto& t = c.translator;
  return dispersion::FrequencyQuartet::bs_translated(t.pump1_wavelength_nm,
                                                     t.signal1_wavelength_nm,
                                                     t.pump2_wavelength_nm);
}

translator::BsCoupler build_coupler(const ScenarioConfig& c) {
  const auto& t = c.translator;
  const auto& fiber = c.fiber(t.fiber, "translator.fiber");
  if (t.target_efficiency) {
    return translator::BsCoupler::phase_matched(
        translator::kappa_length_for_efficiency(*t.target_efficiency), fiber.length_m);
  }
  return translator::make_coupler(fiber, {t.pump1_wavelength_nm, t.pump1_power_mw * 1e-3},
                                  {t.pump2_wavelength_nm, t.pump2_power_mw * 1e-3},
                                  build_quartet(c), t.overlap, {t.axis, t.axis, t.axis, t.axis});
}

translator::SpectralProfile build_input_spectrum(const ScenarioConfig& c) {
  const auto& a = c.acceptance;
  return translator::SpectralProfile::gaussian(a.input_center_nm, a.input_fwhm_nm,
                                               a.input_center_nm - 0.5 * a.span_nm,
                                               a.input_center_nm + 0.5 * a.span_nm, a.samples);
}

translator::AcceptanceModel build_acceptance(const ScenarioConfig& c) {
  const auto& t = c.translator;
  translator::AcceptanceModel model;
  model.coupler = build_coupler(c);
  model.signal1_nm = c.acceptance.input_center_nm;
  model.shift_omega =
      units::omega_from_nm(t.pump1_wavelength_nm) - units::omega_from_nm(t.pump2_wavelength_nm);
  if (c.acceptance.walkoff_ps_per_m) {
    model.walkoff_s_per_m = *c.acceptance.walkoff_ps_per_m * 1e-12;
  } else {
    model.walkoff_s_per_m = translator::walkoff_for_translated_fwhm(
        model, build_input_spectrum(c), *c.acceptance.target_translated_fwhm_nm);
  }
  return model;
}

counting::Experiment build_experiment(const ScenarioConfig& c) {
  counting::Experiment e{c.source, translator::conversion_efficiency(build_coupler(c)),
                         c.detectors, c.noise};
  if (c.calibration.enabled) e = counting::calibrate_experiment(e, c.calibration.targets);
  return e;
}

double detector_ratio(const ScenarioConfig& c) {
  if (c.counting.detector_ratio) return *c.counting.detector_ratio;
  auto mean_eff = [](const counting::ChannelDetectors& d) {
    return d.split_to_a * d.a.efficiency + (1.0 - d.split_to_a) * d.b.efficiency;
  };
  const double untranslated = mean_eff(c.detectors.untranslated);
  if (!(untranslated > 0.0)) {
    throw ConfigError("detectors.untranslated", "detector efficiency must be > 0");
  }
  return mean_eff(c.detectors.translated) / untranslated;
}

std::vector<Artifact> run_scenario(const ScenarioConfig& config, Command command,
                                   const std::optional<KappaSweep>& kappa_sweep) {
  config.validate();
  switch (command) {
    case Command::phasematch: return phasematch(config);
    case Command::translate: return translate(config, kappa_sweep);
    case Command::acceptance: return acceptance(config);
    case Command::g2: return g2(config);
    case Command::efficiency: return efficiency(config);
    case Command::sweep: return sweep(config);
  }
  return {};
}

void write_artifacts(const std::vector<Artifact>& artifacts, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& a : artifacts) {
    std::ofstream out(dir / a.filename, std::ios::binary);
    out << a.content;
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", (dir / a.filename).string()));
  }
}

}  // namespace qft::scenario

namespace qft::config {

namespace {

constexpr const char* kPaperCalibrated = R"(name: paper_calibrated
seed: 42
output_dir: out/paper_calibrated
phasematch:
  fiber: fiber1
  pump_start_nm: 800
  pump_stop_nm: 830
  pump_steps: 31
  pump_power_mw: 0
  pump_axis: slow
  signal_axis: fast
  idler_axis: fast
translator:
  fiber: fiber2
  pump1_wavelength_nm: 808
  pump1_power_mw: 20
  pump2_wavelength_nm: 845
  pump2_power_mw: 30
  signal1_wavelength_nm: 683
  overlap: 1
  axis: fast
  target_efficiency: 0.286
  z_steps: 64
acceptance:
  input_center_nm: 683
  input_fwhm_nm: 2.0
  span_nm: 16
  samples: 1601
  target_translated_fwhm_nm: 1.45
  walkoff_ps_per_m: null
source:
  epsilon: 0.11
  schmidt_modes: 10
  herald_efficiency: 0.12
  herald_dark_prob: 5.0e-6
  signal_delivery: 0.31
  rep_rate_mhz: 76
detectors:
  untranslated:
    a_efficiency: 0.6
    a_dark_prob: 5.0e-6
    b_efficiency: 0.6
    b_dark_prob: 5.0e-6
    split_to_a: 0.5
  translated:
    a_efficiency: 0.6
    a_dark_prob: 5.0e-6
    b_efficiency: 0.6
    b_dark_prob: 5.0e-6
    split_to_a: 0.5
noise:
  untranslated_mean_photons: 0
  translated_mean_photons: 0
calibration:
  enabled: true
  untranslated_noise_fraction: 0.11
  translated_noise_fraction: 0.24
  untranslated_car: 8.2
counting:
  runs: 30
  pulses_per_run: 1000000
  threads: 0
  detector_ratio: null
)";

constexpr const char* kIdealSource = R"(name: ideal_source
seed: 42
output_dir: out/ideal_source
translator:
  target_efficiency: 0.286
source:
  epsilon: 0.01
  schmidt_modes: 1
  herald_efficiency: 0.12
  herald_dark_prob: 0
  signal_delivery: 0.31
detectors:
  untranslated: {a_efficiency: 0.6, b_efficiency: 0.6}
  translated: {a_efficiency: 0.6, b_efficiency: 0.6}
counting:
  runs: 10
  pulses_per_run: 200000
sweep:
  parameter: source.epsilon
  start: 0.01
  stop: 0.2
  steps: 5
)";

}  // namespace

std::optional<ScenarioConfig> builtin_scenario(std::string_view name) {
  if (name == "paper_calibrated") return parse_config(kPaperCalibrated);
  if (name == "ideal_source") return parse_config(kIdealSource);
  return std::nullopt;
}

}  // namespace qft::config
