// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion.
//
//   acceptance        run all criteria
//   acceptance N      run criterion N only
//
// Exit status is 0 when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>
#include <fmt/format.h>

#include "qft/bs_translator.hpp"
#include "qft/config.hpp"
#include "qft/counting.hpp"
#include "qft/dispersion.hpp"
#include "qft/presets.hpp"
#include "qft/quantum_core.hpp"
#include "qft/scenario.hpp"
#include "qft/units.hpp"

namespace {

using namespace qft;
using counting::Channel;
using quantum::Complex;

// Tolerances and limits.
constexpr double kUnitarityTol = 1e-12;
constexpr double kUnitarityMaxSeconds = 1.0;
constexpr double kCompleteTranslationTol = 1e-12;
constexpr double kRk4Tol = 1e-8;
constexpr double kBlockExpTol = 1e-9;
constexpr double kOracleMaxSeconds = 10.0;
constexpr double kSidebandTolNm = 3.0;
constexpr double kEnergyResidualTol = 1e-9;
constexpr double kRoundedQuartetTol = 1e-4;
constexpr double kTargetEfficiency = 0.286;
constexpr double kSigmas = 3.0;
constexpr std::uint64_t kEfficiencyPulsesPerRun = 1'000'000;
constexpr int kEfficiencyRuns = 10;
constexpr double kEfficiencyMaxSeconds = 60.0;
constexpr double kG2Low = 0.10;
constexpr double kG2High = 0.35;
constexpr double kIdealG2Max = 0.01;
constexpr double kCarTolerance = 0.25;
constexpr double kCar683 = 8.2;
constexpr double kCar659 = 6.5;
constexpr double kMaxTranslatedFwhmNm = 1.5;
constexpr double kSpectralBalanceTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

config::ScenarioConfig calibrated() { return *config::builtin_scenario("paper_calibrated"); }

// --- 1 ----------------------------------------------------------------------

Outcome unitarity() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  int points = 0;
  for (int i = 0; i < 10; ++i) {
    const double delta = -5.0 + i * (10.0 / 9.0);
    for (int j = 0; j < 10; ++j) {
      const Complex kappa = std::polar(0.05 + j * 0.55, 0.3 * j);
      for (int k = 0; k < 100; ++k) {
        const double z = k * 0.2;
        const auto t = translator::transfer_functions(delta, kappa, z);
        worst = std::max({worst, t.unitarity_error(), t.operator_map().unitarity_error()});
        ++points;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {worst <= kUnitarityTol && elapsed < kUnitarityMaxSeconds && points == 10000,
          fmt::format("max | |mu|^2+|nu|^2-1 | = {:.2e} over {} (delta, kappa, z) points "
                      "(tol {:.0e}); {:.3f} s (limit {} s)",
                      worst, points, kUnitarityTol, elapsed, kUnitarityMaxSeconds)};
}

// --- 2 ----------------------------------------------------------------------

Outcome complete_translation() {
  const auto c = translator::BsCoupler::phase_matched(std::numbers::pi / 2, 20.0);
  const double eta = translator::conversion_efficiency(c);
  return {std::abs(eta - 1.0) <= kCompleteTranslationTol,
          fmt::format("delta = 0, |kappa|L = pi/2: efficiency = {:.16f} (tol {:.0e})", eta,
                      kCompleteTranslationTol)};
}

// --- 3 ----------------------------------------------------------------------

Eigen::Matrix2cd rk4_mode_matrix(double delta, Complex kappa, double z, int steps) {
  Eigen::Matrix2cd a;
  a << delta, kappa, std::conj(kappa), -delta;
  const Eigen::Matrix2cd ia = Complex(0, 1) * a;
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  const double h = z / steps;
  for (int i = 0; i < steps; ++i) {
    const Eigen::Matrix2cd k1 = ia * m;
    const Eigen::Matrix2cd k2 = ia * (m + 0.5 * h * k1);
    const Eigen::Matrix2cd k3 = ia * (m + 0.5 * h * k2);
    const Eigen::Matrix2cd k4 = ia * (m + h * k3);
    m += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return m;
}

Eigen::MatrixXcd number_block(int n, double delta, Complex kappa) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  for (int m = 0; m <= n; ++m) {
    h(m, m) = delta * (2 * m - n);
    if (m < n) h(m + 1, m) = kappa * std::sqrt(double((m + 1) * (n - m)));
    if (m > 0) h(m - 1, m) = std::conj(kappa) * std::sqrt(double(m * (n - m + 1)));
  }
  return h;
}

Outcome oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  const double length = 1.0;
  double rk4_worst = 0.0, exp_worst = 0.0;
  for (double kl : {0.1, 0.5, 1.0, std::numbers::pi / 2, 3.0, 6.0, 10.0}) {
    for (double dl : {-3.0, -0.4, 0.0, 0.7, 2.5}) {
      for (double phase : {0.0, 1.1, -2.3}) {
        const Complex kappa = std::polar(kl / length, phase);
        const auto t = translator::transfer_functions(dl / length, kappa, length);
        const auto m = rk4_mode_matrix(dl / length, kappa, length, 20000);
        rk4_worst = std::max({rk4_worst, std::abs(m(0, 0) - t.mu), std::abs(m(0, 1) - t.nu),
                              std::abs(m(1, 0) + std::conj(t.nu)),
                              std::abs(m(1, 1) - std::conj(t.mu))});
        for (int n = 0; n <= 4; ++n) {
          const Eigen::MatrixXcd u =
              (Complex(0, 1) * length * number_block(n, dl / length, kappa)).exp();
          for (int j = 0; j <= n; ++j) {
            const auto out = quantum::apply_mode_map(quantum::TwoModeFockState::fock(j, n - j, n), t);
            for (int k = 0; k <= n; ++k) {
              exp_worst = std::max(exp_worst, std::abs(out.amplitude(k, n - k) - u(k, j)));
            }
          }
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return {rk4_worst <= kRk4Tol && exp_worst <= kBlockExpTol && elapsed < kOracleMaxSeconds,
          fmt::format("closed form vs RK4 (|kappa|L <= 10): {:.2e} (tol {:.0e}); Fock map vs "
                      "n-block exp (n <= 4): {:.2e} (tol {:.0e}); {:.2f} s (limit {} s)",
                      rk4_worst, kRk4Tol, exp_worst, kBlockExpTol, elapsed, kOracleMaxSeconds)};
}

// --- 4 ----------------------------------------------------------------------

Outcome phase_matching() {
  const auto fiber1 = presets::fiber1();
  const auto mi = dispersion::solve_mi_sidebands(fiber1, 808.0, 0.0, presets::fiber1_axes());
  const double s_nm = units::nm_from_omega(mi.quartet.signal());
  const double i_nm = units::nm_from_omega(mi.quartet.idler());
  const double mi_energy = mi.quartet.energy_mismatch_relative();

  const auto bs = dispersion::FrequencyQuartet::bs_translated(808.0, 683.0, 845.0);
  const double bs_energy = bs.energy_mismatch_relative();

  const auto rounded = dispersion::FrequencyQuartet::bs_from_nm(808.0, 683.0, 659.0, 845.0);
  const double rounded_energy = rounded.energy_mismatch_relative();

  const bool sidebands = std::abs(s_nm - 683.0) <= kSidebandTolNm && std::abs(i_nm - 989.0) <= kSidebandTolNm;
  const bool residuals = mi_energy < kEnergyResidualTol && bs_energy < kEnergyResidualTol;
  const bool quartet = rounded_energy < kRoundedQuartetTol;
  return {sidebands && residuals && quartet,
          fmt::format("808 nm pump -> {:.3f} / {:.3f} nm (683/989 +- {}) [{}]; energy residual "
                      "MI {:.1e}, BS {:.1e} (tol {:.0e}) [{}]; (808, 683)->(845, 659) quartet "
                      "{:.2e} (tol {:.0e}) [{}]",
                      s_nm, i_nm, kSidebandTolNm, sidebands ? "ok" : "fail", mi_energy, bs_energy,
                      kEnergyResidualTol, residuals ? "ok" : "fail", rounded_energy,
                      kRoundedQuartetTol, quartet ? "ok" : "fail")};
}

// --- 5 ----------------------------------------------------------------------

Outcome efficiency_protocols() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = calibrated();
  const auto experiment = scenario::build_experiment(cfg);
  const double eta = experiment.translation_probability;
  const auto est = counting::measure_efficiency(experiment, kEfficiencyPulsesPerRun, kEfficiencyRuns,
                                                *cfg.seed, scenario::detector_ratio(cfg));
  const double elapsed = seconds_since(t0);
  const double combined = std::hypot(est.depletion_std_error, est.creation_std_error);
  const bool dep_ok = std::abs(est.depletion - kTargetEfficiency) <= kSigmas * est.depletion_std_error;
  const bool cre_ok = std::abs(est.creation - kTargetEfficiency) <= kSigmas * est.creation_std_error;
  const bool agree = std::abs(est.depletion - est.creation) <= kSigmas * combined;
  return {std::abs(eta - kTargetEfficiency) < 1e-12 && dep_ok && cre_ok && agree &&
              elapsed < kEfficiencyMaxSeconds,
          fmt::format("|nu(L)|^2 = {:.6f}; {} pulses: depletion {:.4f} +- {:.4f}, creation "
                      "{:.4f} +- {:.4f} (each within {}sigma of {}); |difference| {:.4f} vs "
                      "{}sigma combined {:.4f}; {:.1f} s (limit {} s)",
                      eta, kEfficiencyPulsesPerRun * kEfficiencyRuns, est.depletion,
                      est.depletion_std_error, est.creation, est.creation_std_error, kSigmas,
                      kTargetEfficiency, std::abs(est.depletion - est.creation), kSigmas,
                      kSigmas * combined, elapsed, kEfficiencyMaxSeconds)};
}

// --- 6 and 7 ---------------------------------------------------------------

std::vector<counting::PulseTrainResult> calibrated_runs(const counting::Experiment& e,
                                                        const config::ScenarioConfig& cfg) {
  std::vector<counting::PulseTrainResult> runs;
  for (int r = 0; r < cfg.counting.runs; ++r) {
    runs.push_back(counting::run_pulse_train(e, cfg.counting.pulses_per_run, *cfg.seed,
                                             {static_cast<std::uint32_t>(r), cfg.counting.threads}));
  }
  return runs;
}

Outcome g2_anchors() {
  const auto cfg = calibrated();
  const auto e = scenario::build_experiment(cfg);
  const auto runs = calibrated_runs(e, cfg);
  const auto g683 = counting::g2_from_counts(runs, Channel::untranslated);
  const auto g659 = counting::g2_from_counts(runs, Channel::translated);
  const bool calibrated_ok = g683.value >= kG2Low && g683.value <= kG2High &&
                             g659.value >= kG2Low && g659.value <= kG2High;

  // Weak source, no background, no darks.
  auto ideal_cfg = *config::builtin_scenario("ideal_source");
  const auto ideal = scenario::build_experiment(ideal_cfg);
  std::vector<counting::PulseTrainResult> ideal_runs;
  for (std::uint32_t r = 0; r < 20; ++r) {
    ideal_runs.push_back(counting::run_pulse_train(ideal, 1'000'000, *ideal_cfg.seed, {r, 0}));
  }
  const auto ideal_total = counting::merge(ideal_runs);
  const bool ideal_defined = ideal_total.untranslated.ac > 0 && ideal_total.untranslated.bc > 0;
  const double ideal_mc = ideal_defined ? counting::g2_value(ideal_total, Channel::untranslated) : NAN;
  const double ideal_exact = counting::expected_tallies(ideal).g2(Channel::untranslated);
  const bool ideal_ok = ideal_defined && ideal_mc < kIdealG2Max && ideal_exact < kIdealG2Max &&
                        ideal.noise == counting::NoiseSpec{} && ideal.source.herald.dark_prob == 0.0;

  // Independent streams: herald darks against Poisson light in the channel.
  counting::Experiment independent;
  independent.source.epsilon = 0.0;
  independent.source.herald = {0.12, 0.1, "C"};
  independent.detectors.untranslated = {{0.6, 0.0, "A1"}, {0.6, 0.0, "B1"}, 0.5};
  independent.noise = {0.2, 0.0};
  std::vector<counting::PulseTrainResult> control;
  for (std::uint32_t r = 0; r < 10; ++r) {
    control.push_back(counting::run_pulse_train(independent, 1'000'000, *cfg.seed + 1, {r, 0}));
  }
  const auto gi = counting::g2_from_counts(control, Channel::untranslated);
  const bool control_ok = std::abs(gi.value - 1.0) <= kSigmas * gi.std_error;

  return {calibrated_ok && ideal_ok && control_ok,
          fmt::format("calibrated (eps {:.4f}): g2_683 = {:.3f} +- {:.3f}, g2_659 = {:.3f} +- {:.3f} "
                      "(window [{}, {}]) [{}]; ideal source (eps {}): g2 = {:.4f} MC, {:.5f} exact "
                      "(< {}) [{}]; independent streams: g2 = {:.3f} +- {:.3f} (1 +- {}sigma) [{}]",
                      e.source.epsilon, g683.value, g683.std_error, g659.value, g659.std_error,
                      kG2Low, kG2High, calibrated_ok ? "ok" : "fail", ideal.source.epsilon, ideal_mc,
                      ideal_exact, kIdealG2Max, ideal_ok ? "ok" : "fail", gi.value, gi.std_error,
                      kSigmas, control_ok ? "ok" : "fail")};
}

struct ShuffledCar {
  double value = 0.0;
  double std_error = 0.0;
};

ShuffledCar shuffled_car(const counting::Experiment& e, const config::ScenarioConfig& cfg,
                         Channel ch, int n_runs) {
  counting::PulseTrainResult total;
  std::vector<double> per_run;
  for (int r = 0; r < n_runs; ++r) {
    auto events = counting::record_events(e, cfg.counting.pulses_per_run, *cfg.seed,
                                          static_cast<std::uint32_t>(r));
    counting::shuffle_herald(events, *cfg.seed + 1000 + static_cast<std::uint64_t>(r));
    const auto t = counting::tally_events(events);
    total += t;
    per_run.push_back(counting::car(t, ch));
  }
  double mean = 0.0;
  for (double v : per_run) mean += v;
  mean /= n_runs;
  double ss = 0.0;
  for (double v : per_run) ss += (v - mean) * (v - mean);
  return {counting::car(total, ch), std::sqrt(ss / (n_runs - 1)) / std::sqrt(double(n_runs))};
}

Outcome car_anchors() {
  const auto cfg = calibrated();
  const auto e = scenario::build_experiment(cfg);
  const auto total = counting::merge(calibrated_runs(e, cfg));
  const double car683 = counting::car(total, Channel::untranslated);
  const double car659 = counting::car(total, Channel::translated);
  const bool ok683 = std::abs(car683 - kCar683) <= kCarTolerance * kCar683;
  const bool ok659 = std::abs(car659 - kCar659) <= kCarTolerance * kCar659;

  const auto s683 = shuffled_car(e, cfg, Channel::untranslated, 10);
  const auto s659 = shuffled_car(e, cfg, Channel::translated, 10);
  const bool shuffled_ok = std::abs(s683.value - 1.0) <= kSigmas * s683.std_error &&
                           std::abs(s659.value - 1.0) <= kSigmas * s659.std_error;
  return {ok683 && ok659 && shuffled_ok,
          fmt::format("CAR_683 = {:.3f} ({} +- {:.0f}%) [{}]; CAR_659 = {:.3f} ({} +- {:.0f}%) [{}]; "
                      "shuffled herald: {:.3f} +- {:.3f}, {:.3f} +- {:.3f} (1 +- {}sigma) [{}]",
                      car683, kCar683, 100 * kCarTolerance, ok683 ? "ok" : "fail", car659, kCar659,
                      100 * kCarTolerance, ok659 ? "ok" : "fail", s683.value, s683.std_error,
                      s659.value, s659.std_error, kSigmas, shuffled_ok ? "ok" : "fail")};
}

// --- 8 ----------------------------------------------------------------------

Outcome spectral_narrowing() {
  const auto cfg = calibrated();
  const auto model = scenario::build_acceptance(cfg);
  const auto input = scenario::build_input_spectrum(cfg);
  const auto r = translator::acceptance_filter(model, input);
  double sample_worst = 0.0;
  double translated = 0.0, remainder = 0.0, total = 0.0;
  for (std::size_t i = 0; i < input.density.size(); ++i) {
    sample_worst = std::max(sample_worst, std::abs(r.translated_input_grid[i] + r.remainder.density[i] -
                                                   input.density[i]));
  }
  translator::SpectralProfile on_input_grid{input.wavelength_nm, r.translated_input_grid};
  translated = on_input_grid.integral();
  remainder = r.remainder.integral();
  total = input.integral();
  const double balance = std::abs(translated + remainder - total) / total;
  const double peak = *std::max_element(input.density.begin(), input.density.end());
  const double fwhm = r.translated.fwhm_nm();
  const bool ok = fwhm <= kMaxTranslatedFwhmNm && balance <= kSpectralBalanceTol &&
                  sample_worst / peak <= kSpectralBalanceTol;
  return {ok, fmt::format("walk-off {:.5f} ps/m: input FWHM {:.3f} nm -> translated {:.4f} nm "
                          "(<= {}); translated + remainder vs input: integral {:.1e}, "
                          "worst sample {:.1e} (tol {:.0e})",
                          model.walkoff_s_per_m * 1e12, input.fwhm_nm(), fwhm,
                          kMaxTranslatedFwhmNm, balance, sample_worst / peak, kSpectralBalanceTol)};
}

// --- 9 ----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "qft_acceptance_determinism";
  fs::remove_all(root);
  struct Job {
    std::string name;
    std::string args;
  };
  const std::vector<Job> jobs{
      {"phasematch", "phasematch --scenario paper_calibrated"},
      {"translate", "translate --scenario paper_calibrated"},
      {"translate_sweep", "translate --scenario paper_calibrated --sweep kappaL 0:3.1416:9"},
      {"acceptance", "acceptance --scenario paper_calibrated"},
      {"g2", "g2 --scenario paper_calibrated --seed 7"},
      {"efficiency", "efficiency --scenario paper_calibrated --seed 7"},
      {"sweep", "sweep --scenario ideal_source"},
  };
  int csv_files = 0;
  std::vector<std::string> problems;
  for (const auto& job : jobs) {
    for (const char* rep : {"a", "b"}) {
      const fs::path out = root / job.name / rep;
      const std::string cmd =
          fmt::format("\"{}\" {} --out \"{}\" > /dev/null", QFTSIM_PATH, job.args, out.string());
      if (std::system(cmd.c_str()) != 0) problems.push_back(job.name + ": exit status");
    }
    const fs::path a = root / job.name / "a";
    if (!fs::exists(a)) continue;
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++csv_files;
      const fs::path b = root / job.name / "b" / entry.path().filename();
      if (!fs::exists(b) || slurp(entry.path()) != slurp(b)) {
        problems.push_back(job.name + "/" + entry.path().filename().string());
      }
    }
  }
  std::string detail = fmt::format("{} CLI runs, {} CSV files compared byte for byte", 2 * jobs.size(), csv_files);
  for (const auto& p : problems) detail += "; differs: " + p;
  return {problems.empty() && csv_files >= static_cast<int>(jobs.size()), detail};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "unitarity", unitarity},
      {2, "complete translation", complete_translation},
      {3, "oracle equivalence", oracles},
      {4, "phase matching", phase_matching},
      {5, "efficiency protocols", efficiency_protocols},
      {6, "g2 anchors", g2_anchors},
      {7, "CAR anchors", car_anchors},
      {8, "spectral narrowing", spectral_narrowing},
      {9, "determinism", determinism},
  };
  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  if (only < 0 || only > static_cast<int>(criteria.size())) {
    fmt::print(stderr, "usage: acceptance [1-{}]\n", criteria.size());
    return 2;
  }

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    fmt::print("[{}] {} {}: {}\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
