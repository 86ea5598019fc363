#include "tpqi/analytic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "tpqi/errors.hpp"

namespace tpqi::analytic {

namespace {

// Laplace tails beyond this many lifetimes are below 1e-26 of the peak.
constexpr double kTailLifetimes = 60.0;
constexpr double kKernelSigmas = 6.0;
constexpr int kMaxOversample = 64;

// 4-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGlNodes = {-0.8611363115940526, -0.3399810435848563,
                                            0.3399810435848563, 0.8611363115940526};
constexpr std::array<double, 4> kGlWeights = {0.3478548451374538, 0.6521451548625461,
                                              0.6521451548625461, 0.3478548451374538};

double pair_density_unchecked(double tau, bool interfere, const PairDensityParams& p) {
  const double base = 0.25 * p.gamma * std::exp(-p.gamma * std::abs(tau));
  if (!interfere || p.interference_factor == 0.0) return base;
  const double ws = 2.0 * kPi * p.detuning_sigma;
  const double coherence =
      std::exp(-0.5 * ws * ws * tau * tau) * std::cos(2.0 * kPi * p.mean_detuning * tau);
  return base * (1.0 - p.interference_factor * coherence);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Bin-integrated Gaussian weights for offsets -K..K, normalized to 1.
std::vector<double> gaussian_kernel(double sigma, double step) {
  const auto half = static_cast<long>(std::ceil(kKernelSigmas * sigma / step));
  std::vector<double> w(static_cast<std::size_t>(2 * half + 1));
  double sum = 0.0;
  for (long k = -half; k <= half; ++k) {
    const double lo = (static_cast<double>(k) - 0.5) * step / sigma;
    const double hi = (static_cast<double>(k) + 0.5) * step / sigma;
    const double v = normal_cdf(hi) - normal_cdf(lo);
    w[static_cast<std::size_t>(k + half)] = v;
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

// out[i] = sum_k in[i + k - half] * w[k]; `in` is padded by `half` on each side
// relative to `out`.
void convolve_padded(const std::vector<double>& in, const std::vector<double>& w,
                     std::vector<double>& out) {
  const std::size_t len = w.size();
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    const double* src = in.data() + i;
    for (std::size_t k = 0; k < len; ++k) acc += src[k] * w[len - 1 - k];
    out[i] = acc;
  }
}

struct CentralComponent {
  double pulses = 0.0;
  PairDensityParams pair;
};

struct ModelInputs {
  const ExperimentConfig* cfg = nullptr;
  BlinkingParams blinking;
  std::vector<CentralComponent> central;
  double total_pulses = 0.0;
  double total_duration = 0.0;
  bool interfere = true;
};

class DensityModel {
 public:
  explicit DensityModel(const ModelInputs& in) : in_(in) {
    const auto& cfg = *in.cfg;
    gamma_ = cfg.emitters[0].gamma();
    period_ = cfg.period();
    pa_ = cfg.detection_probability(0);
    pb_ = cfg.detection_probability(1);
    interfere_ = in.interfere && cfg.polarization == Polarization::parallel;
    central_cut_ = kTailLifetimes / gamma_;
    reach_ = static_cast<long>(std::ceil(central_cut_ / period_)) + 1;
  }

  void prepare_comb(double max_abs_tau) {
    if (!in_.cfg->comb) return;
    n_max_ = static_cast<long>(std::ceil((max_abs_tau + central_cut_) / period_));
    side_weight_.assign(static_cast<std::size_t>(2 * n_max_ + 1), 0.0);
    const double p2 = pa_ * pb_;
    for (long n = -n_max_; n <= n_max_; ++n) {
      if (n == 0) continue;
      const double g = in_.blinking.correlation(static_cast<double>(n) * period_);
      side_weight_[static_cast<std::size_t>(n + n_max_)] =
          in_.total_pulses * (pa_ * pa_ * g + pb_ * pb_ * g + 2.0 * p2) / 4.0;
    }
  }

  double operator()(double tau) const {
    double sum = 0.0;
    if (std::abs(tau) < central_cut_) {
      const double p2 = pa_ * pb_;
      for (const auto& c : in_.central) {
        sum += c.pulses * p2 * pair_density_unchecked(tau, interfere_, c.pair);
      }
    }
    if (n_max_ > 0) {
      const long n0 = std::lround(tau / period_);
      const long lo = std::max(-n_max_, n0 - reach_);
      const long hi = std::min(n_max_, n0 + reach_);
      for (long n = lo; n <= hi; ++n) {
        if (n == 0) continue;
        const double w = side_weight_[static_cast<std::size_t>(n + n_max_)];
        const double u = tau - static_cast<double>(n) * period_;
        sum += w * 0.5 * gamma_ * std::exp(-gamma_ * std::abs(u));
      }
    }
    return sum;
  }

  // Integral over [a, b], split at the cusp of any peak that falls inside.
  double integrate(double a, double b) const {
    const double mid = 0.5 * (a + b);
    const double cusp = std::round(mid / period_) * period_;
    if (cusp > a && cusp < b) return gauss(a, cusp) + gauss(cusp, b);
    if (0.0 > a && 0.0 < b) return gauss(a, 0.0) + gauss(0.0, b);
    return gauss(a, b);
  }

  double period() const { return period_; }

 private:
  double gauss(double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k) s += kGlWeights[k] * (*this)(mid + half * kGlNodes[k]);
    return s * half;
  }

  const ModelInputs& in_;
  double gamma_ = 0.0;
  double period_ = 0.0;
  double pa_ = 0.0;
  double pb_ = 0.0;
  bool interfere_ = true;
  double central_cut_ = 0.0;
  long reach_ = 0;
  long n_max_ = 0;
  std::vector<double> side_weight_;
};

void require_equal_lifetimes(const ExperimentConfig& cfg) {
  const double a = cfg.emitters[0].lifetime;
  const double b = cfg.emitters[1].lifetime;
  if (std::abs(a - b) > 1e-12 * std::max(a, b)) {
    throw ParameterError("analytic engine requires equal emitter lifetimes");
  }
}

CoincidenceCurve assemble(const ModelInputs& in) {
  const auto& cfg = *in.cfg;
  const BinGrid grid = cfg.grid();
  const std::size_t n = grid.size();
  const double bw = grid.bin_width;
  const double jd = cfg.difference_jitter();
  const double lifetime = cfg.emitters[0].lifetime;

  double detuning_scale = std::numeric_limits<double>::infinity();
  for (const auto& c : in.central) {
    const double spread = std::hypot(c.pair.detuning_sigma, c.pair.mean_detuning);
    if (spread > 0.0) detuning_scale = std::min(detuning_scale, 1.0 / (2.0 * kPi * spread));
  }
  double step_target = std::min(lifetime / 50.0, detuning_scale / 8.0);
  if (jd > 0.0) step_target = std::min(step_target, jd / 12.0);
  const int oversample =
      std::clamp(static_cast<int>(std::ceil(bw / step_target)), 1, kMaxOversample);
  const double step = bw / oversample;
  const std::size_t pad =
      jd > 0.0 ? static_cast<std::size_t>(std::ceil(kKernelSigmas * jd / step)) : 0;

  DensityModel density(in);
  density.prepare_comb(grid.window + static_cast<double>(pad) * step);

  const std::size_t fine_n = n * static_cast<std::size_t>(oversample);
  const double origin = grid.lower_edge(0) - static_cast<double>(pad) * step;
  std::vector<double> mass(fine_n + 2 * pad);
  for (std::size_t j = 0; j < mass.size(); ++j) {
    const double a = origin + static_cast<double>(j) * step;
    mass[j] = density.integrate(a, a + step);
  }

  std::vector<double> smoothed(fine_n);
  if (pad > 0) {
    const auto kernel = gaussian_kernel(jd, step);
    // The kernel half-width equals the padding by construction.
    convolve_padded(mass, kernel, smoothed);
  } else {
    std::copy(mass.begin(), mass.end(), smoothed.begin());
  }

  CoincidenceCurve out(grid);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < oversample; ++k) s += smoothed[i * static_cast<std::size_t>(oversample) + static_cast<std::size_t>(k)];
    out.values[i] = s;
  }

  // Accidental coincidences involving at least one dark count.
  const double d1 = cfg.detectors[0].dark_rate;
  const double d2 = cfg.detectors[1].dark_rate;
  const double signal_rate = in.total_pulses *
                             (cfg.detection_probability(0) + cfg.detection_probability(1)) /
                             (2.0 * in.total_duration);
  const double floor_rate = d1 * signal_rate + d2 * signal_rate + d1 * d2;
  const double floor = floor_rate * bw * in.total_duration;
  for (auto& v : out.values) v = std::max(0.0, v + floor);
  return out;
}

ModelInputs single_run_inputs(const ExperimentConfig& cfg, const BlinkingParams& blinking,
                              bool interfere) {
  cfg.validate();
  blinking.validate();
  require_equal_lifetimes(cfg);
  ModelInputs in;
  in.cfg = &cfg;
  in.blinking = blinking;
  in.total_pulses = static_cast<double>(cfg.pulse_count());
  in.total_duration = cfg.duration;
  in.central.push_back({in.total_pulses, PairDensityParams::from_config(cfg)});
  in.interfere = interfere;
  return in;
}

}  // namespace

void PairDensityParams::validate() const {
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw ParameterError("gamma must be > 0");
  if (!std::isfinite(mean_detuning)) throw ParameterError("mean_detuning must be finite");
  if (!(std::isfinite(detuning_sigma) && detuning_sigma >= 0.0)) {
    throw ParameterError("detuning_sigma must be >= 0");
  }
  if (!(interference_factor >= 0.0 && interference_factor <= 1.0)) {
    throw ParameterError("interference_factor must lie in [0, 1]");
  }
}

PairDensityParams PairDensityParams::from_config(const ExperimentConfig& cfg) {
  require_equal_lifetimes(cfg);
  PairDensityParams p;
  p.gamma = cfg.emitters[0].gamma();
  p.mean_detuning = cfg.mean_detuning();
  p.detuning_sigma = cfg.detuning_sigma();
  p.interference_factor = cfg.interference_factor();
  p.validate();
  return p;
}

double pair_coincidence_density(double tau, Polarization mode, const PairDensityParams& p) {
  p.validate();
  return pair_density_unchecked(tau, mode == Polarization::parallel, p);
}

double visibility_at_zero(const PairDensityParams& p, double jitter_rms_diff) {
  p.validate();
  if (!(std::isfinite(jitter_rms_diff) && jitter_rms_diff >= 0.0)) {
    throw ParameterError("jitter_rms_diff must be >= 0");
  }
  if (jitter_rms_diff == 0.0) return p.interference_factor;

  const double s = jitter_rms_diff;
  auto kernel = [s](double u) { return std::exp(-0.5 * u * u / (s * s)); };
  auto par = [&](double u) { return kernel(u) * pair_density_unchecked(u, true, p); };
  auto ort = [&](double u) { return kernel(u) * pair_density_unchecked(u, false, p); };
  using boost::math::quadrature::gauss_kronrod;
  // Both integrands are even; integrate one side.
  const double upper = 12.0 * s;
  const double num = gauss_kronrod<double, 61>::integrate(par, 0.0, upper, 15, 1e-13);
  const double den = gauss_kronrod<double, 61>::integrate(ort, 0.0, upper, 15, 1e-13);
  return 1.0 - num / den;
}

CoincidenceCurve convolve_detector(const CoincidenceCurve& curve, double jitter_rms_diff) {
  if (!(std::isfinite(jitter_rms_diff) && jitter_rms_diff >= 0.0)) {
    throw ParameterError("jitter_rms_diff must be >= 0");
  }
  if (curve.values.size() != curve.grid.size()) {
    throw GeometryError("curve values do not match its grid");
  }
  if (jitter_rms_diff == 0.0 || curve.values.empty()) return curve;

  const auto kernel = gaussian_kernel(jitter_rms_diff, curve.grid.bin_width);
  const std::size_t half = kernel.size() / 2;
  std::vector<double> padded(curve.values.size() + 2 * half, 0.0);
  std::copy(curve.values.begin(), curve.values.end(), padded.begin() + static_cast<long>(half));
  CoincidenceCurve out(curve.grid);
  convolve_padded(padded, kernel, out.values);
  return out;
}

CoincidenceCurve expected_histogram(const ExperimentConfig& cfg, const BlinkingParams& blinking) {
  return assemble(single_run_inputs(cfg, blinking, true));
}

CoincidenceCurve no_interference_model(const ExperimentConfig& cfg, const BlinkingParams& blinking) {
  return assemble(single_run_inputs(cfg, blinking, false));
}

CoincidenceCurve postselected_sum(std::span<const double> detunings, std::span<const double> weights,
                                  const ExperimentConfig& cfg) {
  if (detunings.empty()) throw ParameterError("postselected_sum needs at least one record");
  if (detunings.size() != weights.size()) {
    throw ParameterError("detunings and weights must have the same length");
  }
  cfg.validate();
  require_equal_lifetimes(cfg);

  ModelInputs in;
  in.cfg = &cfg;
  const double gamma = cfg.emitters[0].gamma();
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    if (!(std::isfinite(weights[i]) && weights[i] > 0.0)) {
      throw ParameterError("record durations must be > 0");
    }
    ExperimentConfig record = cfg;
    record.duration = weights[i];
    const double pulses = static_cast<double>(record.pulse_count());
    PairDensityParams pair;
    pair.gamma = gamma;
    pair.mean_detuning = std::abs(detunings[i]);
    pair.detuning_sigma = 0.0;
    pair.interference_factor = cfg.interference_factor();
    pair.validate();
    in.central.push_back({pulses, pair});
    in.total_pulses += pulses;
    in.total_duration += weights[i];
  }
  return assemble(in);
}

}  // namespace tpqi::analytic
