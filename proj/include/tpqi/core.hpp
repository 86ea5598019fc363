#pragma once

// Shared parameter types, bin geometry and single-photon wavepacket helpers.
//
// Units: every quantity handled by the library is SI. Times are seconds,
// frequencies and rates are hertz (s^-1), voltages are volts. The constants in
// `tpqi::units` exist only to make literals readable (12 * units::ns).

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace tpqi {

namespace units {
inline constexpr double s = 1.0;
inline constexpr double ms = 1e-3;
inline constexpr double us = 1e-6;
inline constexpr double ns = 1e-9;
inline constexpr double ps = 1e-12;
inline constexpr double Hz = 1.0;
inline constexpr double kHz = 1e3;
inline constexpr double MHz = 1e6;
inline constexpr double GHz = 1e9;
inline constexpr double V = 1.0;
}  // namespace units

inline constexpr double kPi = 3.14159265358979323846;
/// FWHM of a Gaussian in units of its standard deviation, 2*sqrt(2 ln 2).
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

enum class Polarization { parallel, orthogonal };
enum class CorrelationMode { cross_correlation, start_stop };

/// How the detector jitter values combine into the start-stop difference response.
///
/// `combined`: each DetectorParams::jitter_rms already describes the
/// difference response (counting-module jitter included), so the difference
/// rms is sqrt((j1^2 + j2^2) / 2). `per_detector`: each value is a single
/// detector's response, so the difference rms is sqrt(j1^2 + j2^2 + c^2).
enum class JitterModel { combined, per_detector };

/// One emitter's optical parameters.
struct EmitterParams {
  double lifetime = 12e-9;             ///< excited-state lifetime [s]
  double center_frequency = 0.0;       ///< line center relative to a common reference [Hz]
  double inhom_fwhm = 0.0;             ///< FWHM of the Gaussian line-center distribution [Hz]
  double detected_rate = 0.0;          ///< detected filtered photons, both detectors [s^-1]
  double background_fraction = 0.0;   ///< share of detected photons that never interfere

  /// Decay rate 1/lifetime [s^-1].
  double gamma() const { return 1.0 / lifetime; }
  void validate() const;

  bool operator==(const EmitterParams&) const = default;
};

/// Timing response and dark counts of one click detector.
struct DetectorParams {
  double jitter_rms = 0.0;  ///< Gaussian rms timing response [s]
  double dark_rate = 0.0;   ///< [s^-1]

  void validate() const;

  bool operator==(const DetectorParams&) const = default;
};

/// Two-state telegraph modulation of the emission (optional, off by default).
struct BlinkingParams {
  double off_switch_rate = 0.0;  ///< on -> off [s^-1]
  double on_switch_rate = 0.0;   ///< off -> on [s^-1]
  bool enabled = false;

  /// Stationary probability of the emitting state.
  double on_fraction() const;
  /// Same-emitter pair enhancement at lag `lag` seconds, g(lag) = 1 + (1-f)/f exp(-k|lag|).
  double correlation(double lag) const;
  void validate() const;
};

/// Uniform coincidence-time grid. Bin i covers
/// [center_offset - window + i*bin_width, center_offset - window + (i+1)*bin_width).
struct BinGrid {
  double window = 0.0;     ///< half-width [s]; an integer multiple of bin_width
  double bin_width = 0.0;  ///< [s]
  double center_offset = 0.0;

  /// Builds a grid and checks that the window holds a whole number of bins.
  static BinGrid make(double window, double bin_width, double center_offset = 0.0);

  std::size_t size() const;
  double lower_edge(std::size_t i) const;
  double center(std::size_t i) const;
  std::optional<std::size_t> locate(double tau) const;
  /// Same geometry within a relative tolerance of 1e-9 of the bin width.
  bool matches(const BinGrid& other) const;

  bool operator==(const BinGrid&) const = default;
};

/// Binned start-stop coincidence counts.
struct Histogram {
  BinGrid grid;
  std::vector<std::uint64_t> counts;

  Histogram() = default;
  explicit Histogram(const BinGrid& g) : grid(g), counts(g.size(), 0) {}

  std::uint64_t total() const;
  bool operator==(const Histogram&) const = default;
};

/// Expected counts per bin on a Histogram-compatible grid.
struct CoincidenceCurve {
  BinGrid grid;
  std::vector<double> values;

  CoincidenceCurve() = default;
  explicit CoincidenceCurve(const BinGrid& g) : grid(g), values(g.size(), 0.0) {}

  double total() const;
  CoincidenceCurve& operator+=(const CoincidenceCurve& other);
};

/// Full description of one simulated or modelled measurement.
struct ExperimentConfig {
  double repetition_rate = 10e6;  ///< [Hz]
  double duration = 6000.0;                    ///< [s]
  Polarization polarization = Polarization::parallel;
  double window = 2.56e-6;   ///< half-width of the correlation window [s]
  double bin_width = 256e-12;  ///< [s]
  CorrelationMode correlation = CorrelationMode::cross_correlation;
  std::array<EmitterParams, 2> emitters{};
  std::array<DetectorParams, 2> detectors{};
  double counting_jitter = 12e-12;  ///< [s]
  JitterModel jitter_model = JitterModel::combined;
  std::uint64_t frequency_hold_pulses = 1;  ///< pulses sharing one spectral-diffusion draw
  bool comb = true;                         ///< include side peaks at multiples of the period
  std::uint64_t seed = 1;

  void validate() const;

  double period() const { return 1.0 / repetition_rate; }
  /// Per-pulse detection probability of emitter i.
  double detection_probability(std::size_t i) const;
  /// Number of excitation pulses k with k*period < duration.
  std::uint64_t pulse_count() const;
  BinGrid grid() const { return BinGrid::make(window, bin_width); }

  /// |nu_A - nu_B| [Hz].
  double mean_detuning() const;
  /// rms of the Gaussian relative detuning [Hz].
  double detuning_sigma() const;
  /// (1 - b_A)(1 - b_B).
  double interference_factor() const;
  /// rms of the Gaussian start-stop difference response [s].
  double difference_jitter() const;
  /// rms timing jitter applied to every click on detector i [s].
  double click_jitter(std::size_t i) const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Exponential single-photon envelope Gamma*exp(-Gamma*t) for t >= 0 [s^-1].
double envelope_density(double t, double lifetime);

double fwhm_to_sigma(double fwhm);
double sigma_to_fwhm(double sigma);

/// Quadrature sum sqrt(a^2 + b^2) of two independent Gaussian FWHMs.
double combined_relative_fwhm(double fwhm_a, double fwhm_b);

}  // namespace tpqi
