#include "tpqi/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tpqi/csv.hpp"
#include "tpqi/errors.hpp"

namespace tpqi::calibration {

namespace {

double lorentzian(double x, double fwhm) {
  const double g = 0.5 * fwhm;
  return g / (kPi * (x * x + g * g));
}

double gaussian(double x, double fwhm) {
  const double s = fwhm / kFwhmPerSigma;
  return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * kPi));
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

}  // namespace

double ple_lineshape(double nu, double lorentz_fwhm, double gauss_fwhm) {
  if (!(lorentz_fwhm >= 0.0 && gauss_fwhm >= 0.0) || !std::isfinite(lorentz_fwhm) ||
      !std::isfinite(gauss_fwhm)) {
    throw ParameterError("linewidths must be finite and >= 0");
  }
  if (lorentz_fwhm == 0.0 && gauss_fwhm == 0.0) {
    throw DegenerateError("lineshape needs a nonzero Lorentzian or Gaussian width");
  }
  if (gauss_fwhm == 0.0) return lorentzian(nu, lorentz_fwhm);
  if (lorentz_fwhm == 0.0) return gaussian(nu, gauss_fwhm);

  // Integrate over the Gaussian variable; split at the Lorentzian peak.
  const double s = gauss_fwhm / kFwhmPerSigma;
  const double lo = -10.0 * s;
  const double hi = 10.0 * s;
  auto integrand = [&](double u) { return gaussian(u, gauss_fwhm) * lorentzian(nu - u, lorentz_fwhm); };
  using boost::math::quadrature::gauss_kronrod;
  const double tol = 1e-10;
  if (nu <= lo || nu >= hi) return gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 20, tol);
  return gauss_kronrod<double, 61>::integrate(integrand, lo, nu, 20, tol) +
         gauss_kronrod<double, 61>::integrate(integrand, nu, hi, 20, tol);
}

SampledCurve sample_lineshape(double lorentz_fwhm, double gauss_fwhm, double half_span,
                              std::size_t points) {
  if (points < 3 || !(half_span > 0.0)) throw ParameterError("need >= 3 points and a positive span");
  SampledCurve c;
  c.x.resize(points);
  c.y.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = -half_span + 2.0 * half_span * static_cast<double>(i) / static_cast<double>(points - 1);
    c.x[i] = x;
    c.y[i] = ple_lineshape(x, lorentz_fwhm, gauss_fwhm);
  }
  return c;
}

double extract_fwhm(const SampledCurve& curve) {
  const auto& x = curve.x;
  const auto& y = curve.y;
  if (x.size() != y.size() || x.size() < 3) throw ShapeError("curve needs >= 3 matching samples");
  const auto peak_it = std::max_element(y.begin(), y.end());
  const double peak = *peak_it;
  const double floor = *std::min_element(y.begin(), y.end());
  if (!(peak > floor) || !(peak > 0.0)) throw ShapeError("curve is flat");
  const double half = 0.5 * peak;

  // Exactly one upward and one downward half-maximum crossing.
  std::vector<double> rising, falling;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    const bool below_now = y[i] < half;
    const bool below_next = y[i + 1] < half;
    if (below_now == below_next) continue;
    const double t = (half - y[i]) / (y[i + 1] - y[i]);
    const double xc = x[i] + t * (x[i + 1] - x[i]);
    (below_now ? rising : falling).push_back(xc);
  }
  if (rising.size() > 1 || falling.size() > 1) throw ShapeError("curve is multi-peaked");
  if (rising.size() != 1 || falling.size() != 1) {
    throw ShapeError("curve does not fall below half maximum on both sides");
  }
  if (!(falling[0] > rising[0])) throw ShapeError("curve is not single-peaked");
  return falling[0] - rising[0];
}

StarkFrequency stark_frequency(const StarkLine& line, double voltage) {
  StarkFrequency r;
  r.value = line.reference_frequency + line.slope * (voltage - line.reference_voltage);
  r.extrapolated = voltage < line.min_voltage || voltage > line.max_voltage;
  return r;
}

double resonance_voltage(const StarkLine& a, const StarkLine& b) {
  // f_a(v) - f_b(v) = c0 + c1 v
  const double c1 = a.slope - b.slope;
  const double c0 = (a.reference_frequency - a.slope * a.reference_voltage) -
                    (b.reference_frequency - b.slope * b.reference_voltage);
  const double scale = std::max({std::abs(a.slope), std::abs(b.slope), 1e-300});
  if (std::abs(c1) <= 1e-12 * scale) {
    const double fscale = std::max({std::abs(a.reference_frequency), std::abs(b.reference_frequency), 1.0});
    if (std::abs(c0) <= 1e-12 * fscale) throw DegenerateError("identical Stark lines: every voltage is resonant");
    throw NoCrossingError("parallel Stark lines never cross");
  }
  return -c0 / c1;
}

std::vector<DetuningRecord> filter_by_detuning(const std::vector<DetuningRecord>& records, double lo,
                                               double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) throw ParameterError("detuning window needs lo <= hi");
  std::vector<DetuningRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const DetuningRecord& r) { return r.detuning >= lo && r.detuning <= hi; });
  return out;
}

std::vector<DetuningRecord> load_detuning_records(const std::filesystem::path& csv) {
  std::ifstream f(csv);
  if (!f) throw IoError("cannot open detuning record list: " + csv.string());
  std::string line;
  if (!std::getline(f, line) || trim(line) != "record_id,detuning_mhz,duration_s,histogram_file") {
    throw InputError(csv.string() + ": expected header record_id,detuning_mhz,duration_s,histogram_file");
  }
  std::vector<DetuningRecord> out;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(trim(cell));
    if (cols.size() != 4) {
      throw InputError(csv.string() + ":" + std::to_string(line_no) + ": expected 4 columns");
    }
    DetuningRecord r;
    r.id = cols[0];
    if (!io::parse_scaled(cols[1], 6, r.detuning) || !io::parse_scaled(cols[2], 0, r.duration)) {
      throw InputError(csv.string() + ":" + std::to_string(line_no) + ": bad number");
    }
    if (!(r.detuning >= 0.0) || !(r.duration > 0.0)) {
      throw InputError(csv.string() + ":" + std::to_string(line_no) +
                       ": detuning must be >= 0 and duration > 0");
    }
    r.histogram = io::read_histogram_csv(csv.parent_path() / cols[3]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tpqi::calibration
