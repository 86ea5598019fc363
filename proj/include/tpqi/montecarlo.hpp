#pragma once

// Event-level simulation of the two-emitter interference experiment.
//
// Pulses are grouped into fixed blocks of kPulsesPerBlock. Every block draws
// from its own counter-based stream keyed by (seed, block index), so any
// partition of the run into shards reproduces the serial click streams
// exactly. Timestamps are integer picoseconds.

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "tpqi/core.hpp"

namespace tpqi::mc {

inline constexpr std::uint64_t kPulsesPerBlock = std::uint64_t{1} << 22;
/// Largest per-pulse detection probability the single-photon model accepts.
inline constexpr double kMaxPulseProbability = 0.1;

/// SplitMix64 stream: a 64-bit counter pushed through a mixing function.
/// Satisfies UniformRandomBitGenerator so it plugs into <random> distributions.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

enum class Detector : std::uint8_t { d1 = 0, d2 = 1 };

struct Click {
  Detector detector = Detector::d1;
  std::int64_t timestamp_ps = 0;

  double seconds() const { return static_cast<double>(timestamp_ps) * 1e-12; }
  bool operator==(const Click&) const = default;
};

/// Clicks of D1 and D2, each sorted by time.
using ClickStreams = std::array<std::vector<Click>, 2>;

enum class PairOutcome { same_port, opposite_ports };

struct PairDetection {
  double t1 = 0.0;  ///< emission delay of the photon from emitter A [s]
  double t2 = 0.0;  ///< emission delay of the photon from emitter B [s]
  PairOutcome outcome = PairOutcome::same_port;
};

/// Joint detection of one photon from each emitter with relative detuning
/// `delta` [Hz]. P(opposite) = (1 - cos(2 pi delta (t1 - t2))) / 2.
PairDetection sample_pair_detection(double delta, double gamma, StreamRng& rng);

/// Unequal decay rates. The outcome probability follows from the symmetrized
/// two-photon amplitude and reduces to the equal-rate form when they agree.
PairDetection sample_pair_detection(double delta, double gamma_a, double gamma_b, StreamRng& rng);

struct RunSummary {
  std::uint64_t pulses_simulated = 0;
  std::array<std::uint64_t, 2> clicks{};
  std::uint64_t interfering_pairs = 0;  ///< pulses resolved with sample_pair_detection
  Histogram histogram;
};

struct SimulationResult {
  ClickStreams clicks;
  RunSummary summary;
};

/// Full simulation keeping every click. Memory grows with duration; use
/// simulate_histogram for long runs.
SimulationResult simulate_run(const ExperimentConfig& cfg, const BlinkingParams& blinking = {});

/// Histogram-only simulation over `workers` contiguous shards of blocks.
/// Cross-correlation results are identical for every worker count; the
/// start-stop scheme is always processed serially.
RunSummary simulate_histogram(const ExperimentConfig& cfg, const BlinkingParams& blinking = {},
                              unsigned workers = 1);

/// Clicks of the blocks [first_block, last_block) only.
ClickStreams simulate_blocks(const ExperimentConfig& cfg, const BlinkingParams& blinking,
                             std::uint64_t first_block, std::uint64_t last_block);

/// Number of pulse blocks in the run.
std::uint64_t block_count(const ExperimentConfig& cfg);

/// Coincidence histogram of tau = t(D2) - t(D1) on the grid (window, bin_width).
/// Throws InputError if a stream is not time-sorted.
Histogram correlate(std::span<const Click> d1, std::span<const Click> d2, double window,
                    double bin_width, CorrelationMode mode);

/// Elementwise sum; throws GeometryError for different grids.
Histogram merge_histograms(const Histogram& a, const Histogram& b);

/// Binary click dump: magic "TPQI1", then packed little-endian records
/// (u8 detector, u64 picoseconds) in time order.
void write_click_dump(const std::filesystem::path& path, const ClickStreams& clicks);
ClickStreams read_click_dump(const std::filesystem::path& path);

}  // namespace tpqi::mc
