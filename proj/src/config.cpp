#include "tpqi/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "tpqi/csv.hpp"

namespace tpqi::config {

ConfigError::ConfigError(std::size_t line, std::string key, const std::string& message)
    : Error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
            (key.empty() ? std::string() : key + ": ") + message),
      line_(line),
      key_(std::move(key)) {}

namespace {

struct Unit {
  const char* suffix;
  int exponent;
  double factor;
};

const std::vector<Unit>& units_for(Dimension dim) {
  static const std::vector<Unit> time{{"ps", -12, 1.0}, {"ns", -9, 1.0}, {"us", -6, 1.0},
                                      {"ms", -3, 1.0},  {"min", 0, 60.0}, {"s", 0, 1.0}};
  static const std::vector<Unit> frequency{
      {"kHz", 3, 1.0}, {"MHz", 6, 1.0}, {"GHz", 9, 1.0}, {"Hz", 0, 1.0}, {"/s", 0, 1.0}};
  static const std::vector<Unit> voltage{{"mV", -3, 1.0}, {"V", 0, 1.0}};
  static const std::vector<Unit> fraction{{"%", -2, 1.0}};
  switch (dim) {
    case Dimension::time: return time;
    case Dimension::frequency: return frequency;
    case Dimension::voltage: return voltage;
    case Dimension::fraction: return fraction;
  }
  return fraction;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// A right-hand side after comment stripping.
struct Value {
  std::string text;
  bool quoted = false;
};

enum class Kind { quantity, integer, boolean, polarization, correlation, jitter_model };

struct KeySpec {
  Kind kind;
  Dimension dim = Dimension::time;
  std::function<void(ExperimentConfig&, double)> set_real;
  std::function<std::optional<std::string>(double)> check;
};

std::optional<std::string> positive(double v) {
  if (!(v > 0.0)) return "must be > 0";
  return std::nullopt;
}

std::optional<std::string> non_negative(double v) {
  if (!(v >= 0.0)) return "must be >= 0";
  return std::nullopt;
}

std::optional<std::string> unit_interval(double v) {
  if (!(v >= 0.0 && v <= 1.0)) return "must lie in [0, 1]";
  return std::nullopt;
}

std::optional<std::string> any_finite(double) { return std::nullopt; }

using Setter = std::function<void(ExperimentConfig&, double)>;

Setter emitter_field(std::size_t i, double EmitterParams::*field) {
  return [i, field](ExperimentConfig& c, double v) { c.emitters[i].*field = v; };
}

Setter detector_field(std::size_t i, double DetectorParams::*field) {
  return [i, field](ExperimentConfig& c, double v) { c.detectors[i].*field = v; };
}

Setter both_emitters(double EmitterParams::*field) {
  return [field](ExperimentConfig& c, double v) {
    c.emitters[0].*field = v;
    c.emitters[1].*field = v;
  };
}

Setter both_detectors(double DetectorParams::*field) {
  return [field](ExperimentConfig& c, double v) {
    c.detectors[0].*field = v;
    c.detectors[1].*field = v;
  };
}

const std::map<std::string, KeySpec>& canonical_keys() {
  static const std::map<std::string, KeySpec> keys = [] {
    std::map<std::string, KeySpec> k;
    const auto q = [](Dimension d, Setter s, auto check) {
      return KeySpec{Kind::quantity, d, std::move(s), check};
    };
    k["repetition_rate"] = q(Dimension::frequency,
                             [](ExperimentConfig& c, double v) { c.repetition_rate = v; }, positive);
    k["duration"] = q(Dimension::time, [](ExperimentConfig& c, double v) { c.duration = v; }, positive);
    k["window"] = q(Dimension::time, [](ExperimentConfig& c, double v) { c.window = v; }, positive);
    k["bin_width"] = q(Dimension::time, [](ExperimentConfig& c, double v) { c.bin_width = v; }, positive);
    k["counting_jitter"] =
        q(Dimension::time, [](ExperimentConfig& c, double v) { c.counting_jitter = v; }, non_negative);
    k["polarization"] = KeySpec{Kind::polarization, Dimension::time, {}, {}};
    k["correlation"] = KeySpec{Kind::correlation, Dimension::time, {}, {}};
    k["jitter_model"] = KeySpec{Kind::jitter_model, Dimension::time, {}, {}};
    k["frequency_hold_pulses"] = KeySpec{Kind::integer, Dimension::time, {}, {}};
    k["seed"] = KeySpec{Kind::integer, Dimension::time, {}, {}};
    k["comb"] = KeySpec{Kind::boolean, Dimension::time, {}, {}};
    for (std::size_t i = 0; i < 2; ++i) {
      const std::string e = i == 0 ? "a." : "b.";
      k[e + "lifetime"] = q(Dimension::time, emitter_field(i, &EmitterParams::lifetime), positive);
      k[e + "center_frequency"] =
          q(Dimension::frequency, emitter_field(i, &EmitterParams::center_frequency), any_finite);
      k[e + "inhom_fwhm"] =
          q(Dimension::frequency, emitter_field(i, &EmitterParams::inhom_fwhm), non_negative);
      k[e + "rate"] = q(Dimension::frequency, emitter_field(i, &EmitterParams::detected_rate), non_negative);
      k[e + "background"] =
          q(Dimension::fraction, emitter_field(i, &EmitterParams::background_fraction), unit_interval);
      const std::string d = i == 0 ? "d1." : "d2.";
      k[d + "jitter"] = q(Dimension::time, detector_field(i, &DetectorParams::jitter_rms), non_negative);
      k[d + "dark_rate"] =
          q(Dimension::frequency, detector_field(i, &DetectorParams::dark_rate), non_negative);
    }
    return k;
  }();
  return keys;
}

// Shorthands fill both members of a pair; a specific key given alongside wins.
const std::map<std::string, KeySpec>& shorthand_keys() {
  static const std::map<std::string, KeySpec> keys = [] {
    std::map<std::string, KeySpec> k;
    k["lifetime"] = {Kind::quantity, Dimension::time, both_emitters(&EmitterParams::lifetime), positive};
    k["background"] = {Kind::quantity, Dimension::fraction,
                       both_emitters(&EmitterParams::background_fraction), unit_interval};
    k["inhom_fwhm"] = {Kind::quantity, Dimension::frequency, both_emitters(&EmitterParams::inhom_fwhm),
                       non_negative};
    k["jitter"] = {Kind::quantity, Dimension::time, both_detectors(&DetectorParams::jitter_rms),
                   non_negative};
    k["dark_rate"] = {Kind::quantity, Dimension::frequency, both_detectors(&DetectorParams::dark_rate),
                      non_negative};
    k["detuning"] = {Kind::quantity, Dimension::frequency,
                     [](ExperimentConfig& c, double v) {
                       c.emitters[0].center_frequency = 0.0;
                       c.emitters[1].center_frequency = v;
                     },
                     any_finite};
    return k;
  }();
  return keys;
}

// Keys a shorthand may set; used so that specific keys override regardless of order.
const std::map<std::string, std::vector<std::string>>& shorthand_targets() {
  static const std::map<std::string, std::vector<std::string>> t{
      {"lifetime", {"a.lifetime", "b.lifetime"}},
      {"background", {"a.background", "b.background"}},
      {"inhom_fwhm", {"a.inhom_fwhm", "b.inhom_fwhm"}},
      {"jitter", {"d1.jitter", "d2.jitter"}},
      {"dark_rate", {"d1.dark_rate", "d2.dark_rate"}},
      {"detuning", {"a.center_frequency", "b.center_frequency"}}};
  return t;
}

Value parse_value(std::string_view raw, std::size_t line, const std::string& key) {
  std::string_view s = trim(raw);
  Value v;
  if (!s.empty() && s.front() == '"') {
    const auto close = s.find('"', 1);
    if (close == std::string_view::npos) throw ConfigError(line, key, "unterminated string");
    v.text = std::string(s.substr(1, close - 1));
    v.quoted = true;
    std::string_view rest = trim(s.substr(close + 1));
    if (!rest.empty() && rest.front() != '#') throw ConfigError(line, key, "unexpected text after string");
    return v;
  }
  const auto hash = s.find('#');
  if (hash != std::string_view::npos) s = trim(s.substr(0, hash));
  if (s.empty()) throw ConfigError(line, key, "missing value");
  v.text = std::string(s);
  return v;
}

double quantity_value(const Value& v, Dimension dim, std::size_t line, const std::string& key) {
  if (!v.quoted) {
    double out = 0.0;
    if (!io::parse_scaled(trim(v.text), 0, out)) {
      throw ConfigError(line, key, "expected a number; values with units must be quoted, e.g. \"12 ns\"");
    }
    return out;
  }
  try {
    return parse_quantity(v.text, dim);
  } catch (const ParameterError& e) {
    throw ConfigError(line, key, e.what());
  }
}

std::uint64_t integer_value(const Value& v, std::size_t line, const std::string& key) {
  std::uint64_t out = 0;
  const std::string_view s = trim(v.text);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (v.quoted || ec != std::errc() || p != s.data() + s.size()) {
    throw ConfigError(line, key, "expected a non-negative integer");
  }
  return out;
}

std::string render_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

const char* name(Polarization p) { return p == Polarization::parallel ? "parallel" : "orthogonal"; }
const char* name(CorrelationMode m) {
  return m == CorrelationMode::cross_correlation ? "cross" : "startstop";
}
const char* name(JitterModel m) { return m == JitterModel::combined ? "combined" : "per_detector"; }

}  // namespace

double parse_quantity(std::string_view text, Dimension dim) {
  const std::string_view s = trim(text);
  for (const Unit& u : units_for(dim)) {
    if (!ends_with(s, u.suffix)) continue;
    const std::string_view number = trim(s.substr(0, s.size() - std::string_view(u.suffix).size()));
    double out = 0.0;
    if (number.empty() || !io::parse_scaled(number, u.exponent, out)) {
      throw ParameterError("malformed quantity '" + std::string(text) + "'");
    }
    return out * u.factor;
  }
  double out = 0.0;
  if (io::parse_scaled(s, 0, out)) return out;
  throw ParameterError("unknown unit in '" + std::string(text) + "'");
}

ExperimentConfig parse_config(std::string_view text) {
  struct Entry {
    std::string key;
    Value value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') throw ConfigError(line_no, "", "tables are not supported; use dotted keys");
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(line_no, "", "empty key");
    if (!canonical_keys().count(key) && !shorthand_keys().count(key)) {
      throw ConfigError(line_no, key, "unknown key");
    }
    if (!seen.insert(key).second) throw ConfigError(line_no, key, "duplicate key");
    entries.push_back({key, parse_value(line.substr(eq + 1), line_no, key), line_no});
  }

  std::set<std::string> provided;
  for (const auto& e : entries) {
    provided.insert(e.key);
    if (auto it = shorthand_targets().find(e.key); it != shorthand_targets().end()) {
      provided.insert(it->second.begin(), it->second.end());
    }
  }
  for (const char* req : {"repetition_rate", "a.lifetime", "b.lifetime", "a.rate", "b.rate"}) {
    if (!provided.count(req)) {
      throw ConfigError(0, req, "required key is missing");
    }
  }

  ExperimentConfig cfg;
  const auto apply = [&cfg](const Entry& e, const KeySpec& spec) {
    switch (spec.kind) {
      case Kind::quantity: {
        const double v = quantity_value(e.value, spec.dim, e.line, e.key);
        if (!std::isfinite(v)) throw ConfigError(e.line, e.key, "must be finite");
        if (auto problem = spec.check(v)) throw ConfigError(e.line, e.key, *problem);
        spec.set_real(cfg, v);
        break;
      }
      case Kind::integer: {
        const auto v = integer_value(e.value, e.line, e.key);
        if (e.key == "seed") {
          cfg.seed = v;
        } else {
          if (v < 1) throw ConfigError(e.line, e.key, "must be >= 1");
          cfg.frequency_hold_pulses = v;
        }
        break;
      }
      case Kind::boolean:
        if (e.value.quoted || (e.value.text != "true" && e.value.text != "false")) {
          throw ConfigError(e.line, e.key, "expected true or false");
        }
        cfg.comb = e.value.text == "true";
        break;
      case Kind::polarization:
        if (e.value.text == "parallel") {
          cfg.polarization = Polarization::parallel;
        } else if (e.value.text == "orthogonal") {
          cfg.polarization = Polarization::orthogonal;
        } else {
          throw ConfigError(e.line, e.key, "expected \"parallel\" or \"orthogonal\"");
        }
        break;
      case Kind::correlation:
        if (e.value.text == "cross") {
          cfg.correlation = CorrelationMode::cross_correlation;
        } else if (e.value.text == "startstop") {
          cfg.correlation = CorrelationMode::start_stop;
        } else {
          throw ConfigError(e.line, e.key, "expected \"cross\" or \"startstop\"");
        }
        break;
      case Kind::jitter_model:
        if (e.value.text == "combined") {
          cfg.jitter_model = JitterModel::combined;
        } else if (e.value.text == "per_detector") {
          cfg.jitter_model = JitterModel::per_detector;
        } else {
          throw ConfigError(e.line, e.key, "expected \"combined\" or \"per_detector\"");
        }
        break;
    }
  };
  for (const auto& e : entries) {
    if (auto it = shorthand_keys().find(e.key); it != shorthand_keys().end()) apply(e, it->second);
  }
  for (const auto& e : entries) {
    if (auto it = canonical_keys().find(e.key); it != canonical_keys().end()) apply(e, it->second);
  }

  try {
    (void)BinGrid::make(cfg.window, cfg.bin_width);
  } catch (const GeometryError& e) {
    throw ConfigError(0, "window", e.what());
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (cfg.detection_probability(i) > 1.0) {
      throw ConfigError(0, i == 0 ? "a.rate" : "b.rate", "rate / repetition_rate must be <= 1");
    }
  }
  if (cfg.comb && cfg.window < 2.0 * cfg.period()) {
    throw ConfigError(0, "window", "must cover at least two pulse periods when comb = true");
  }
  cfg.validate();
  return cfg;
}

std::string render_config(const ExperimentConfig& cfg) {
  std::string out;
  const auto line = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  const auto quote = [](const char* s) { return std::string("\"") + s + "\""; };
  line("repetition_rate", render_real(cfg.repetition_rate));
  line("duration", render_real(cfg.duration));
  line("polarization", quote(name(cfg.polarization)));
  line("window", render_real(cfg.window));
  line("bin_width", render_real(cfg.bin_width));
  line("correlation", quote(name(cfg.correlation)));
  line("counting_jitter", render_real(cfg.counting_jitter));
  line("jitter_model", quote(name(cfg.jitter_model)));
  line("frequency_hold_pulses", std::to_string(cfg.frequency_hold_pulses));
  line("comb", cfg.comb ? "true" : "false");
  line("seed", std::to_string(cfg.seed));
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string e = i == 0 ? "a." : "b.";
    const auto& em = cfg.emitters[i];
    line(e + "lifetime", render_real(em.lifetime));
    line(e + "center_frequency", render_real(em.center_frequency));
    line(e + "inhom_fwhm", render_real(em.inhom_fwhm));
    line(e + "rate", render_real(em.detected_rate));
    line(e + "background", render_real(em.background_fraction));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const std::string d = i == 0 ? "d1." : "d2.";
    line(d + "jitter", render_real(cfg.detectors[i].jitter_rms));
    line(d + "dark_rate", render_real(cfg.detectors[i].dark_rate));
  }
  return out;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["repetition_rate_hz"] = cfg.repetition_rate;
  j["duration_s"] = cfg.duration;
  j["polarization"] = name(cfg.polarization);
  j["window_s"] = cfg.window;
  j["bin_width_s"] = cfg.bin_width;
  j["correlation"] = name(cfg.correlation);
  j["counting_jitter_s"] = cfg.counting_jitter;
  j["jitter_model"] = name(cfg.jitter_model);
  j["frequency_hold_pulses"] = cfg.frequency_hold_pulses;
  j["comb"] = cfg.comb;
  j["seed"] = cfg.seed;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& em = cfg.emitters[i];
    j["emitters"][i] = {{"lifetime_s", em.lifetime},
                        {"center_frequency_hz", em.center_frequency},
                        {"inhom_fwhm_hz", em.inhom_fwhm},
                        {"detected_rate_per_s", em.detected_rate},
                        {"background_fraction", em.background_fraction}};
    j["detectors"][i] = {{"jitter_rms_s", cfg.detectors[i].jitter_rms},
                         {"dark_rate_per_s", cfg.detectors[i].dark_rate}};
  }
  return j;
}

}  // namespace tpqi::config
