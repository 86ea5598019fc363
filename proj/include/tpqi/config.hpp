#pragma once

// Flat `key = value` experiment configuration (a TOML-compatible subset).
//
//   repetition_rate = "10 MHz"
//   lifetime = "12 ns"          # shorthand for a.lifetime and b.lifetime
//   a.rate = 2700               # bare numbers are SI
//   background = "15%"
//
// Quoted values may carry a unit suffix: ps ns us ms s min, Hz kHz MHz GHz /s,
// mV V, and % for fractions.

#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tpqi/core.hpp"
#include "tpqi/errors.hpp"

namespace tpqi::config {

/// Syntax or validation failure; `line` is 0 when the problem is not tied to one line.
class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& message);

  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::size_t line_;
  std::string key_;
};

enum class Dimension { time, frequency, voltage, fraction };

/// Parses "12 ns", "2.7 kHz", "15%", or a bare SI number.
double parse_quantity(std::string_view text, Dimension dim);

/// Parses a complete configuration. `repetition_rate`, the emitter lifetimes
/// and both emitter rates are required; everything else has a default.
ExperimentConfig parse_config(std::string_view text);

/// Canonical text form; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& cfg);

nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace tpqi::config
