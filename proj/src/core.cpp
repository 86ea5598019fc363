#include "tpqi/core.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tpqi/errors.hpp"

namespace tpqi {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void EmitterParams::validate() const {
  require(std::isfinite(lifetime) && lifetime > 0.0, "emitter lifetime must be > 0");
  require(std::isfinite(center_frequency), "emitter center_frequency must be finite");
  require(finite_nonneg(inhom_fwhm), "emitter inhom_fwhm must be >= 0");
  require(finite_nonneg(detected_rate), "emitter detected_rate must be >= 0");
  require(std::isfinite(background_fraction) && background_fraction >= 0.0 &&
              background_fraction <= 1.0,
          "emitter background_fraction must lie in [0, 1]");
}

void DetectorParams::validate() const {
  require(finite_nonneg(jitter_rms), "detector jitter_rms must be >= 0");
  require(finite_nonneg(dark_rate), "detector dark_rate must be >= 0");
}

double BlinkingParams::on_fraction() const {
  if (!enabled) return 1.0;
  const double total = on_switch_rate + off_switch_rate;
  if (total == 0.0) return 1.0;
  return on_switch_rate / total;
}

double BlinkingParams::correlation(double lag) const {
  const double f = on_fraction();
  if (!enabled || f >= 1.0) return 1.0;
  return 1.0 + (1.0 - f) / f * std::exp(-(on_switch_rate + off_switch_rate) * std::abs(lag));
}

void BlinkingParams::validate() const {
  require(finite_nonneg(off_switch_rate), "blinking off_switch_rate must be >= 0");
  require(finite_nonneg(on_switch_rate), "blinking on_switch_rate must be >= 0");
  if (enabled && off_switch_rate > 0.0) {
    require(on_switch_rate > 0.0, "blinking with off_switch_rate > 0 needs on_switch_rate > 0");
  }
}

BinGrid BinGrid::make(double window, double bin_width, double center_offset) {
  if (!(std::isfinite(bin_width) && bin_width > 0.0)) {
    throw GeometryError("bin_width must be > 0");
  }
  if (!(std::isfinite(window) && window >= bin_width)) {
    throw GeometryError("window must be >= bin_width");
  }
  if (!std::isfinite(center_offset)) throw GeometryError("center_offset must be finite");
  const double ratio = window / bin_width;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * std::max(1.0, ratio)) {
    throw GeometryError("window must be an integer multiple of bin_width");
  }
  return BinGrid{window, bin_width, center_offset};
}

std::size_t BinGrid::size() const {
  if (bin_width <= 0.0) return 0;
  return 2 * static_cast<std::size_t>(std::llround(window / bin_width));
}

double BinGrid::lower_edge(std::size_t i) const {
  return center_offset - window + static_cast<double>(i) * bin_width;
}

double BinGrid::center(std::size_t i) const { return lower_edge(i) + 0.5 * bin_width; }

std::optional<std::size_t> BinGrid::locate(double tau) const {
  const double x = (tau - center_offset + window) / bin_width;
  if (!(x >= 0.0)) return std::nullopt;
  const auto i = static_cast<std::size_t>(std::floor(x));
  if (i >= size()) return std::nullopt;
  return i;
}

bool BinGrid::matches(const BinGrid& other) const {
  const double tol = 1e-9 * std::max(bin_width, other.bin_width);
  return size() == other.size() && std::abs(bin_width - other.bin_width) <= tol &&
         std::abs(window - other.window) <= tol * static_cast<double>(std::max<std::size_t>(1, size())) &&
         std::abs(center_offset - other.center_offset) <= tol;
}

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

double CoincidenceCurve::total() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

CoincidenceCurve& CoincidenceCurve::operator+=(const CoincidenceCurve& other) {
  if (values.empty() && grid.size() == 0) {
    *this = other;
    return *this;
  }
  if (!grid.matches(other.grid)) throw GeometryError("cannot add curves on different grids");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

void ExperimentConfig::validate() const {
  require(std::isfinite(repetition_rate) && repetition_rate > 0.0,
          "repetition_rate must be > 0");
  require(std::isfinite(duration) && duration > 0.0, "duration must be > 0");
  require(finite_nonneg(counting_jitter), "counting_jitter must be >= 0");
  require(frequency_hold_pulses >= 1, "frequency_hold_pulses must be >= 1");
  for (const auto& e : emitters) e.validate();
  for (const auto& d : detectors) d.validate();
  for (std::size_t i = 0; i < 2; ++i) {
    require(detection_probability(i) <= 1.0,
            "detected_rate / repetition_rate must be <= 1 for every emitter");
  }
  (void)grid();
  if (comb && window < 2.0 * period()) {
    throw GeometryError("window must cover at least two pulse periods when the comb is enabled");
  }
}

double ExperimentConfig::detection_probability(std::size_t i) const {
  return emitters.at(i).detected_rate / repetition_rate;
}

std::uint64_t ExperimentConfig::pulse_count() const {
  const double n = duration * repetition_rate;
  const double whole = std::round(n);
  if (std::abs(n - whole) <= 1e-9 * std::max(1.0, n)) return static_cast<std::uint64_t>(whole);
  return static_cast<std::uint64_t>(std::ceil(n));
}

double ExperimentConfig::mean_detuning() const {
  return std::abs(emitters[0].center_frequency - emitters[1].center_frequency);
}

double ExperimentConfig::detuning_sigma() const {
  return fwhm_to_sigma(combined_relative_fwhm(emitters[0].inhom_fwhm, emitters[1].inhom_fwhm));
}

double ExperimentConfig::interference_factor() const {
  return (1.0 - emitters[0].background_fraction) * (1.0 - emitters[1].background_fraction);
}

double ExperimentConfig::difference_jitter() const {
  const double j1 = detectors[0].jitter_rms;
  const double j2 = detectors[1].jitter_rms;
  if (jitter_model == JitterModel::combined) return std::sqrt(0.5 * (j1 * j1 + j2 * j2));
  return std::sqrt(j1 * j1 + j2 * j2 + counting_jitter * counting_jitter);
}

double ExperimentConfig::click_jitter(std::size_t i) const {
  const double j = detectors.at(i).jitter_rms;
  if (jitter_model == JitterModel::combined) return j / std::sqrt(2.0);
  return std::sqrt(j * j + 0.5 * counting_jitter * counting_jitter);
}

double envelope_density(double t, double lifetime) {
  if (!(std::isfinite(lifetime) && lifetime > 0.0)) {
    throw ParameterError("lifetime must be > 0");
  }
  if (t < 0.0) return 0.0;
  const double gamma = 1.0 / lifetime;
  return gamma * std::exp(-gamma * t);
}

double fwhm_to_sigma(double fwhm) {
  if (!finite_nonneg(fwhm)) throw ParameterError("fwhm must be >= 0");
  return fwhm / kFwhmPerSigma;
}

double sigma_to_fwhm(double sigma) {
  if (!finite_nonneg(sigma)) throw ParameterError("sigma must be >= 0");
  return sigma * kFwhmPerSigma;
}

double combined_relative_fwhm(double fwhm_a, double fwhm_b) {
  if (!finite_nonneg(fwhm_a) || !finite_nonneg(fwhm_b)) {
    throw ParameterError("linewidths must be >= 0");
  }
  return std::hypot(fwhm_a, fwhm_b);
}

}  // namespace tpqi
