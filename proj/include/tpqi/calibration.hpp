#pragma once

// Spectral and electrical calibration: PLE lineshapes, linewidth extraction,
// linear Stark tuning and detuning-based record selection.

#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "tpqi/core.hpp"

namespace tpqi::calibration {

/// Linear dc Stark tuning of one transition: f(v) = reference_frequency + slope (v - reference_voltage).
struct StarkLine {
  double slope = 0.0;                ///< [Hz/V]
  double reference_frequency = 0.0;  ///< [Hz]
  double reference_voltage = 0.0;    ///< [V]
  double min_voltage = -std::numeric_limits<double>::infinity();
  double max_voltage = std::numeric_limits<double>::infinity();
};

struct StarkFrequency {
  double value = 0.0;         ///< [Hz]
  bool extrapolated = false;  ///< voltage outside [min_voltage, max_voltage]
};

/// One interleaved PLE scan + coincidence record.
struct DetuningRecord {
  std::string id;
  double detuning = 0.0;  ///< |nu_A - nu_B| [Hz]
  double duration = 0.0;  ///< [s]
  Histogram histogram;
};

/// A sampled curve, x strictly increasing.
struct SampledCurve {
  std::vector<double> x;
  std::vector<double> y;
};

/// Voigt profile (Lorentzian FWHM x Gaussian FWHM) at detuning `nu` from the
/// line center, unit area [Hz^-1]. Evaluated by numeric convolution.
double ple_lineshape(double nu, double lorentz_fwhm, double gauss_fwhm);

/// Samples ple_lineshape on `points` uniformly spaced values in [-half_span, half_span].
SampledCurve sample_lineshape(double lorentz_fwhm, double gauss_fwhm, double half_span,
                              std::size_t points);

/// Full width at half maximum by linear interpolation of the two half-maximum crossings.
double extract_fwhm(const SampledCurve& curve);

StarkFrequency stark_frequency(const StarkLine& line, double voltage);

/// Voltage at which two lines share one frequency.
double resonance_voltage(const StarkLine& a, const StarkLine& b);

/// Records with lo <= detuning <= hi, in input order.
std::vector<DetuningRecord> filter_by_detuning(const std::vector<DetuningRecord>& records, double lo,
                                               double hi);

/// Reads a record list with columns record_id,detuning_mhz,duration_s,histogram_file.
/// Histogram paths are resolved relative to the list's directory.
std::vector<DetuningRecord> load_detuning_records(const std::filesystem::path& csv);

}  // namespace tpqi::calibration
