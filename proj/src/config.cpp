#include "qft/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "qft/presets.hpp"

namespace qft::config {

using dispersion::Axis;
using dispersion::FiberSpec;

ConfigError::ConfigError(std::string key_path, const std::string& message)
    : std::runtime_error(key_path.empty() ? message : key_path + ": " + message),
      key_path_(std::move(key_path)) {}

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Reads the keys of one mapping and rejects anything it was not asked for.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(path_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }
  std::string path(const std::string& key) const { return join(path_, key); }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    out = convert<T>(node_[key], key);
  }

  template <class T>
  void read(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    const YAML::Node v = node_[key];
    if (v.IsNull()) {
      out.reset();
    } else {
      out = convert<T>(v, key);
    }
  }

  void read(const std::string& key, Axis& out) {
    std::string s = out == Axis::slow ? "slow" : "fast";
    read(key, s);
    if (s == "slow") {
      out = Axis::slow;
    } else if (s == "fast") {
      out = Axis::fast;
    } else {
      throw ConfigError(path(key), fmt::format("axis must be 'fast' or 'slow', got '{}'", s));
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(has(key) ? node_[key] : YAML::Node(), path(key));
  }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return has(key) ? node_[key] : YAML::Node();
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!seen_.count(key)) throw ConfigError(path(key), "unknown key");
    }
  }

 private:
  template <class T>
  T convert(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) throw ConfigError(path(key), "expected a scalar value");
    try {
      return v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path(key), fmt::format("cannot read '{}' as the expected type", v.Scalar()));
    }
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_fiber_fields(Section& s, FiberSpec& f) {
  bool beta2_given = s.has("beta2_ps2_per_km");
  s.read("name", f.name);
  s.read("reference_wavelength_nm", f.reference_wavelength_nm);
  s.read("zdw_wavelength_nm", f.zdw_wavelength_nm);
  s.read("beta2_ps2_per_km", f.beta2_ps2_per_km);
  s.read("beta3_ps3_per_km", f.beta3_ps3_per_km);
  s.read("beta4_ps4_per_km", f.beta4_ps4_per_km);
  s.read("birefringence_dn", f.birefringence_dn);
  s.read("gamma_per_w_km", f.gamma_per_w_km);
  s.read("length_m", f.length_m);
  s.read("min_wavelength_nm", f.min_wavelength_nm);
  s.read("max_wavelength_nm", f.max_wavelength_nm);
  if (f.zdw_wavelength_nm && !beta2_given) f = dispersion::pin_beta2_to_zdw(f);
}

void validate_fiber(const FiberSpec& f, const std::string& path) {
  try {
    f.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
}

FiberSpec parse_fiber_node(const YAML::Node& node, const std::string& path,
                           const std::filesystem::path& base_dir, const std::string& key) {
  Section s(node, path);
  FiberSpec f;
  f.name = key;
  std::string preset;
  std::string file;
  s.read("preset", preset);
  s.read("file", file);
  if (!preset.empty() && !file.empty()) {
    throw ConfigError(path, "give either 'preset' or 'file', not both");
  }
  if (!preset.empty()) {
    auto found = presets::find_fiber(preset);
    if (!found) throw ConfigError(s.path("preset"), fmt::format("no built-in fiber '{}'", preset));
    f = *found;
  } else if (!file.empty()) {
    f = parse_fiber_file(base_dir / file);
  }
  read_fiber_fields(s, f);
  s.finish();
  validate_fiber(f, path);
  return f;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

template <class T>
std::string fmt_optional(const std::optional<T>& v) {
  return v ? fmt::format("{}", *v) : std::string("null");
}

const char* axis_name(Axis a) { return a == Axis::slow ? "slow" : "fast"; }

std::string fiber_fields(const FiberSpec& f, const std::string& indent) {
  std::string out;
  auto line = [&](const char* key, const std::string& value) {
    out += fmt::format("{}{}: {}\n", indent, key, value);
  };
  line("name", f.name);
  line("reference_wavelength_nm", fmt_double(f.reference_wavelength_nm));
  line("zdw_wavelength_nm", fmt_optional(f.zdw_wavelength_nm));
  line("beta2_ps2_per_km", fmt_double(f.beta2_ps2_per_km));
  line("beta3_ps3_per_km", fmt_double(f.beta3_ps3_per_km));
  line("beta4_ps4_per_km", fmt_double(f.beta4_ps4_per_km));
  line("birefringence_dn", fmt_double(f.birefringence_dn));
  line("gamma_per_w_km", fmt_double(f.gamma_per_w_km));
  line("length_m", fmt_double(f.length_m));
  line("min_wavelength_nm", fmt_double(f.min_wavelength_nm));
  line("max_wavelength_nm", fmt_double(f.max_wavelength_nm));
  return out;
}

void read_channel(Section s, counting::ChannelDetectors& d) {
  s.read("a_efficiency", d.a.efficiency);
  s.read("a_dark_prob", d.a.dark_prob);
  s.read("b_efficiency", d.b.efficiency);
  s.read("b_dark_prob", d.b.dark_prob);
  s.read("split_to_a", d.split_to_a);
  s.finish();
}

std::string channel_yaml(const counting::ChannelDetectors& d) {
  return fmt::format(
      "    a_efficiency: {}\n    a_dark_prob: {}\n    b_efficiency: {}\n    b_dark_prob: {}\n"
      "    split_to_a: {}\n",
      d.a.efficiency, d.a.dark_prob, d.b.efficiency, d.b.dark_prob, d.split_to_a);
}

YAML::Node load_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("", fmt::format("YAML syntax error: {}", e.what()));
  }
}

}  // namespace

FiberSpec parse_fiber_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open fiber preset file");
  std::stringstream text;
  text << in.rdbuf();
  const YAML::Node root = load_yaml(text.str());
  Section top(root, path.string());
  const YAML::Node fiber = top.raw("fiber");
  top.finish();
  if (!fiber) throw ConfigError(path.string(), "missing 'fiber' mapping");
  Section s(fiber, path.string() + ":fiber");
  FiberSpec f;
  read_fiber_fields(s, f);
  s.finish();
  validate_fiber(f, path.string());
  return f;
}

std::string serialize_fiber(const FiberSpec& fiber) {
  return "fiber:\n" + fiber_fields(fiber, "  ");
}

const FiberSpec& ScenarioConfig::fiber(const std::string& key, const std::string& path) const {
  const auto it = fibers.find(key);
  if (it == fibers.end()) throw ConfigError(path, fmt::format("no fiber named '{}'", key));
  return it->second;
}

void ScenarioConfig::validate() const {
  auto check = [](bool ok, const std::string& path, const std::string& msg) {
    if (!ok) throw ConfigError(path, msg);
  };
  check(seed.has_value(), "seed", "a seed is required (config key or --seed)");
  for (const auto& [key, f] : fibers) validate_fiber(f, "fibers." + key);
  fiber(phasematch.fiber, "phasematch.fiber");
  fiber(translator.fiber, "translator.fiber");

  check(phasematch.pump_steps >= 1, "phasematch.pump_steps", "must be >= 1");
  check(phasematch.pump_stop_nm >= phasematch.pump_start_nm, "phasematch.pump_stop_nm",
        "must be >= pump_start_nm");
  check(phasematch.pump_power_mw >= 0.0, "phasematch.pump_power_mw", "must be >= 0");

  check(translator.pump1_power_mw >= 0.0, "translator.pump1_power_mw", "must be >= 0");
  check(translator.pump2_power_mw >= 0.0, "translator.pump2_power_mw", "must be >= 0");
  check(translator.overlap >= 0.0 && translator.overlap <= 1.0, "translator.overlap",
        "must be in [0, 1]");
  check(!translator.target_efficiency ||
            (*translator.target_efficiency >= 0.0 && *translator.target_efficiency <= 1.0),
        "translator.target_efficiency", "must be in [0, 1]");
  check(translator.z_steps >= 1, "translator.z_steps", "must be >= 1");

  check(acceptance.target_translated_fwhm_nm.has_value() != acceptance.walkoff_ps_per_m.has_value(),
        "acceptance", "set exactly one of target_translated_fwhm_nm and walkoff_ps_per_m");
  check(acceptance.input_fwhm_nm > 0.0, "acceptance.input_fwhm_nm", "must be > 0");
  check(acceptance.span_nm > 0.0, "acceptance.span_nm", "must be > 0");
  check(acceptance.samples >= 3, "acceptance.samples", "must be >= 3");

  auto wrap = [](const std::string& path, auto&& fn) {
    try {
      fn();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  };
  check(source.epsilon >= 0.0 && source.epsilon < 1.0, "source.epsilon", "must be in [0, 1)");
  check(source.schmidt_modes >= 1, "source.schmidt_modes", "must be >= 1");
  check(source.signal_delivery >= 0.0 && source.signal_delivery <= 1.0, "source.signal_delivery",
        "must be in [0, 1]");
  check(source.rep_rate_hz > 0.0, "source.rep_rate_mhz", "must be > 0");
  wrap("source", [&] { source.validate(); });
  wrap("detectors.untranslated", [&] { detectors.untranslated.validate(); });
  wrap("detectors.translated", [&] { detectors.translated.validate(); });
  wrap("noise", [&] { noise.validate(); });

  const auto& t = calibration.targets;
  check(t.untranslated_noise_fraction >= 0.0 && t.untranslated_noise_fraction < 1.0,
        "calibration.untranslated_noise_fraction", "must be in [0, 1)");
  check(t.translated_noise_fraction >= 0.0 && t.translated_noise_fraction < 1.0,
        "calibration.translated_noise_fraction", "must be in [0, 1)");
  check(t.untranslated_car > 1.0, "calibration.untranslated_car", "must be > 1");

  check(counting.runs >= 1, "counting.runs", "must be >= 1");
  check(counting.pulses_per_run >= 1, "counting.pulses_per_run", "must be >= 1");
  check(!counting.detector_ratio || *counting.detector_ratio > 0.0, "counting.detector_ratio",
        "must be > 0");

  if (sweep) {
    check(!sweep->parameter.empty(), "sweep.parameter", "must name a key path");
    check(sweep->steps >= 1, "sweep.steps", "must be >= 1");
    check(sweep->steps == 1 || sweep->stop != sweep->start, "sweep.stop",
          "range is empty: stop equals start");
  }
  check(!output_dir.empty(), "output_dir", "must not be empty");
}

ScenarioConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  const YAML::Node root = load_yaml(yaml_text);
  if (!root.IsMap()) throw ConfigError("", "config must be a YAML mapping");
  Section top(root, "");
  ScenarioConfig c;
  top.read("name", c.name);
  top.read("seed", c.seed);
  top.read("output_dir", c.output_dir);

  for (const auto& name : presets::fiber_names()) c.fibers[name] = *presets::find_fiber(name);
  const YAML::Node fibers = top.raw("fibers");
  if (fibers && !fibers.IsNull()) {
    if (!fibers.IsMap()) throw ConfigError("fibers", "expected a mapping");
    for (const auto& kv : fibers) {
      const auto key = kv.first.as<std::string>();
      c.fibers[key] = parse_fiber_node(kv.second, "fibers." + key, base_dir, key);
    }
  }

  {
    auto s = top.child("phasematch");
    auto& p = c.phasematch;
    s.read("fiber", p.fiber);
    s.read("pump_start_nm", p.pump_start_nm);
    s.read("pump_stop_nm", p.pump_stop_nm);
    s.read("pump_steps", p.pump_steps);
    s.read("pump_power_mw", p.pump_power_mw);
    s.read("pump_axis", p.pump_axis);
    s.read("signal_axis", p.signal_axis);
    s.read("idler_axis", p.idler_axis);
    s.finish();
  }
  {
    auto s = top.child("translator");
    auto& t = c.translator;
    s.read("fiber", t.fiber);
    s.read("pump1_wavelength_nm", t.pump1_wavelength_nm);
    s.read("pump1_power_mw", t.pump1_power_mw);
    s.read("pump2_wavelength_nm", t.pump2_wavelength_nm);
    s.read("pump2_power_mw", t.pump2_power_mw);
    s.read("signal1_wavelength_nm", t.signal1_wavelength_nm);
    s.read("overlap", t.overlap);
    s.read("axis", t.axis);
    s.read("target_efficiency", t.target_efficiency);
    s.read("z_steps", t.z_steps);
    s.finish();
  }
  {
    auto s = top.child("acceptance");
    auto& a = c.acceptance;
    s.read("input_center_nm", a.input_center_nm);
    s.read("input_fwhm_nm", a.input_fwhm_nm);
    s.read("span_nm", a.span_nm);
    s.read("samples", a.samples);
    s.read("target_translated_fwhm_nm", a.target_translated_fwhm_nm);
    s.read("walkoff_ps_per_m", a.walkoff_ps_per_m);
    s.finish();
  }
  {
    auto s = top.child("source");
    auto& src = c.source;
    double rep_rate_mhz = src.rep_rate_hz * 1e-6;
    s.read("epsilon", src.epsilon);
    s.read("schmidt_modes", src.schmidt_modes);
    s.read("herald_efficiency", src.herald.efficiency);
    s.read("herald_dark_prob", src.herald.dark_prob);
    s.read("signal_delivery", src.signal_delivery);
    s.read("rep_rate_mhz", rep_rate_mhz);
    src.rep_rate_hz = rep_rate_mhz * 1e6;
    s.finish();
  }
  {
    auto s = top.child("detectors");
    read_channel(s.child("untranslated"), c.detectors.untranslated);
    read_channel(s.child("translated"), c.detectors.translated);
    s.finish();
  }
  {
    auto s = top.child("noise");
    s.read("untranslated_mean_photons", c.noise.untranslated_mean);
    s.read("translated_mean_photons", c.noise.translated_mean);
    s.finish();
  }
  {
    auto s = top.child("calibration");
    auto& k = c.calibration;
    s.read("enabled", k.enabled);
    s.read("untranslated_noise_fraction", k.targets.untranslated_noise_fraction);
    s.read("translated_noise_fraction", k.targets.translated_noise_fraction);
    s.read("untranslated_car", k.targets.untranslated_car);
    s.finish();
  }
  {
    auto s = top.child("counting");
    auto& k = c.counting;
    s.read("runs", k.runs);
    s.read("pulses_per_run", k.pulses_per_run);
    s.read("threads", k.threads);
    s.read("detector_ratio", k.detector_ratio);
    s.finish();
  }
  {
    const YAML::Node sweep = top.raw("sweep");
    if (sweep && !sweep.IsNull()) {
      Section s(sweep, "sweep");
      SweepSettings w;
      s.read("parameter", w.parameter);
      s.read("start", w.start);
      s.read("stop", w.stop);
      s.read("steps", w.steps);
      s.finish();
      c.sweep = w;
    }
  }
  top.finish();

  // Detector labels are not part of the file format.
  c.source.herald.label = "C";
  c.detectors.untranslated.a.label = "A683";
  c.detectors.untranslated.b.label = "B683";
  c.detectors.translated.a.label = "A659";
  c.detectors.translated.b.label = "B659";

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", fmt::format("cannot open config file {}", path.string()));
  std::stringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string serialize(const ScenarioConfig& c) {
  std::string out;
  out += fmt::format("name: {}\n", c.name);
  out += fmt::format("seed: {}\n", fmt_optional(c.seed));
  out += fmt::format("output_dir: {}\n", c.output_dir);
  out += "fibers:\n";
  for (const auto& [key, f] : c.fibers) {
    out += fmt::format("  {}:\n", key);
    out += fiber_fields(f, "    ");
  }
  const auto& p = c.phasematch;
  out += fmt::format(
      "phasematch:\n  fiber: {}\n  pump_start_nm: {}\n  pump_stop_nm: {}\n  pump_steps: {}\n"
      "  pump_power_mw: {}\n  pump_axis: {}\n  signal_axis: {}\n  idler_axis: {}\n",
      p.fiber, p.pump_start_nm, p.pump_stop_nm, p.pump_steps, p.pump_power_mw,
      axis_name(p.pump_axis), axis_name(p.signal_axis), axis_name(p.idler_axis));
  const auto& t = c.translator;
  out += fmt::format(
      "translator:\n  fiber: {}\n  pump1_wavelength_nm: {}\n  pump1_power_mw: {}\n"
      "  pump2_wavelength_nm: {}\n  pump2_power_mw: {}\n  signal1_wavelength_nm: {}\n"
      "  overlap: {}\n  axis: {}\n  target_efficiency: {}\n  z_steps: {}\n",
      t.fiber, t.pump1_wavelength_nm, t.pump1_power_mw, t.pump2_wavelength_nm, t.pump2_power_mw,
      t.signal1_wavelength_nm, t.overlap, axis_name(t.axis), fmt_optional(t.target_efficiency),
      t.z_steps);
  const auto& a = c.acceptance;
  out += fmt::format(
      "acceptance:\n  input_center_nm: {}\n  input_fwhm_nm: {}\n  span_nm: {}\n  samples: {}\n"
      "  target_translated_fwhm_nm: {}\n  walkoff_ps_per_m: {}\n",
      a.input_center_nm, a.input_fwhm_nm, a.span_nm, a.samples,
      fmt_optional(a.target_translated_fwhm_nm), fmt_optional(a.walkoff_ps_per_m));
  const auto& s = c.source;
  out += fmt::format(
      "source:\n  epsilon: {}\n  schmidt_modes: {}\n  herald_efficiency: {}\n"
      "  herald_dark_prob: {}\n  signal_delivery: {}\n  rep_rate_mhz: {}\n",
      s.epsilon, s.schmidt_modes, s.herald.efficiency, s.herald.dark_prob, s.signal_delivery,
      s.rep_rate_hz * 1e-6);
  out += "detectors:\n  untranslated:\n" + channel_yaml(c.detectors.untranslated);
  out += "  translated:\n" + channel_yaml(c.detectors.translated);
  out += fmt::format("noise:\n  untranslated_mean_photons: {}\n  translated_mean_photons: {}\n",
                     c.noise.untranslated_mean, c.noise.translated_mean);
  const auto& k = c.calibration;
  out += fmt::format(
      "calibration:\n  enabled: {}\n  untranslated_noise_fraction: {}\n"
      "  translated_noise_fraction: {}\n  untranslated_car: {}\n",
      k.enabled, k.targets.untranslated_noise_fraction, k.targets.translated_noise_fraction,
      k.targets.untranslated_car);
  const auto& n = c.counting;
  out += fmt::format(
      "counting:\n  runs: {}\n  pulses_per_run: {}\n  threads: {}\n  detector_ratio: {}\n",
      n.runs, n.pulses_per_run, n.threads, fmt_optional(n.detector_ratio));
  if (c.sweep) {
    out += fmt::format("sweep:\n  parameter: {}\n  start: {}\n  stop: {}\n  steps: {}\n",
                       c.sweep->parameter, c.sweep->start, c.sweep->stop, c.sweep->steps);
  }
  return out;
}

std::string config_hash(const ScenarioConfig& config) {
  const std::string text = serialize(config);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

ScenarioConfig with_parameter(const ScenarioConfig& config, const std::string& key_path,
                              double value) {
  YAML::Node root = YAML::Load(serialize(config));
  YAML::Node node = root;
  YAML::Node parent;
  std::stringstream parts(key_path);
  std::string part;
  std::string walked;
  while (std::getline(parts, part, '.')) {
    walked = join(walked, part);
    if (!node.IsMap() || !node[part]) throw ConfigError(walked, "unknown key");
    parent.reset(node);
    YAML::Node next = node[part];
    node.reset(next);
  }
  // A changed fiber coefficient must re-pin beta2 to the ZDW.
  if (key_path.rfind("fibers.", 0) == 0 && part != "beta2_ps2_per_km") {
    parent.remove("beta2_ps2_per_km");
  }
  if (!node.IsScalar() && !node.IsNull()) throw ConfigError(key_path, "not a numeric setting");
  const bool integral = value == std::floor(value) && std::abs(value) < 1e15;
  node = integral ? fmt::format("{:.0f}", value) : fmt_double(value);
  return parse_config(YAML::Dump(root));
}

}  // namespace qft::config
