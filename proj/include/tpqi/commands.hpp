#pragma once

// Subcommands behind the `tpqi` executable. Each writes its artifacts plus a
// manifest.json into the output directory.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tpqi/calibration.hpp"
#include "tpqi/core.hpp"

namespace tpqi::cli {

inline constexpr const char* kEngineVersion = "tpqi 1.0.0";

enum class ExitCode : int { ok = 0, invalid = 1, compare_failed = 2 };

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  std::optional<double> duration;  ///< [s]
  std::optional<Polarization> mode;
  std::optional<CorrelationMode> correlation;
  unsigned workers = 0;          ///< 0: one per hardware thread
  bool write_records = false;    ///< fig4: also write every synthetic record
  std::optional<std::filesystem::path> dump;  ///< mc: binary click dump
};

struct RunManifest {
  std::string command;
  std::optional<ExperimentConfig> config;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  double runtime_s = 0.0;
  nlohmann::json extra = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Emitter, detector and pulse parameters of the reference two-emitter measurement.
ExperimentConfig figure3_config();

/// Simulated duration used by `fig3` when --duration is absent [s].
inline constexpr double kFigure3Duration = 2e5;

/// Two linear Stark lines crossing at -13.6 V, used by `stark` and `fig4`.
std::pair<calibration::StarkLine, calibration::StarkLine> example_stark_lines();

struct SyntheticRecordSpec {
  std::size_t count = 255;
  double record_duration = 60.0;  ///< [s]
  double detuning_lo = 350e6;     ///< [Hz]
  double detuning_hi = 1200e6;    ///< [Hz]
  bool interfering = true;        ///< false: orthogonal polarization, no interference
};

/// Simulated fixed-detuning records; detunings are uniform in [lo, hi] and
/// every record has its own seed derived from cfg.seed.
std::vector<calibration::DetuningRecord> synthetic_records(const ExperimentConfig& base,
                                                           const SyntheticRecordSpec& spec,
                                                           unsigned workers = 1);

/// Runs `command`; human-readable output goes to `out`, diagnostics to `err`.
ExitCode run(const std::string& command, const Options& options, std::ostream& out, std::ostream& err);

}  // namespace tpqi::cli
