// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "tpqi/analytic.hpp"
#include "tpqi/calibration.hpp"
#include "tpqi/commands.hpp"
#include "tpqi/core.hpp"
#include "tpqi/csv.hpp"
#include "tpqi/errors.hpp"
#include "tpqi/montecarlo.hpp"
#include "tpqi/stats.hpp"

using namespace tpqi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

double sum_bins(const Histogram& h, const std::vector<std::size_t>& bins) {
  double s = 0.0;
  for (auto i : bins) s += static_cast<double>(h.counts[i]);
  return s;
}

double sum_bins(const CoincidenceCurve& c, const std::vector<std::size_t>& bins) {
  double s = 0.0;
  for (auto i : bins) s += c.values[i];
  return s;
}

double count_where(const Histogram& h, double lo, double hi) {
  double s = 0.0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    const double t = h.grid.center(i);
    if (t >= lo && t < hi) s += static_cast<double>(h.counts[i]);
  }
  return s;
}

bool in_band(double c) { return c >= 0.56 && c <= 0.76; }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Two-sample chi-square for histograms with free totals; bins pooled to >= 10 combined counts.
stats::ChiSquareResult two_sample_chi_square(const Histogram& a, const Histogram& b) {
  const double ta = static_cast<double>(a.total()), tb = static_cast<double>(b.total());
  const double ka = std::sqrt(tb / ta), kb = std::sqrt(ta / tb);
  std::vector<std::array<double, 2>> groups;
  double ga = 0.0, gb = 0.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    ga += static_cast<double>(a.counts[i]);
    gb += static_cast<double>(b.counts[i]);
    if (ga + gb >= 10.0) {
      groups.push_back({ga, gb});
      ga = gb = 0.0;
    }
  }
  if (!groups.empty()) {
    groups.back()[0] += ga;
    groups.back()[1] += gb;
  }
  stats::ChiSquareResult r;
  for (const auto& g : groups) r.statistic += std::pow(ka * g[0] - kb * g[1], 2) / (g[0] + g[1]);
  r.dof = groups.size() - 1;
  r.p_value = boost::math::gamma_q(0.5 * static_cast<double>(r.dof), 0.5 * r.statistic);
  return r;
}

Outcome visibility_bound() {
  const auto cfg = cli::figure3_config();
  const auto p = analytic::PairDensityParams::from_config(cfg);
  const double v = analytic::visibility_at_zero(p, 0.0);
  return {std::abs(v - 0.7225) <= 1e-9, fmt("visibility_at_zero = %.12f (target 0.7225)", v)};
}

Outcome figure3_contrast() {
  auto cfg = cli::figure3_config();
  cfg.duration = cli::kFigure3Duration;
  const double half = cfg.difference_jitter();
  const auto model = analytic::expected_histogram(cfg);
  const auto reference = analytic::no_interference_model(cfg);
  const auto pair = analytic::PairDensityParams::from_config(cfg);
  const double v_jit = analytic::visibility_at_zero(pair, half);
  const double c_model = stats::expected_contrast_at_zero(model, reference, half);
  const auto run = mc::simulate_histogram(cfg, {}, workers());
  const auto windowed = stats::contrast_at_zero(run.histogram, reference, half);
  const auto fitted = stats::fitted_contrast_at_zero(run.histogram, reference, model, 3e-9, v_jit);
  return {in_band(c_model) && in_band(fitted.contrast),
          fmt("%.0f min simulated; analytic %.4f, mc fitted %.4f +- %.4f, mc windowed %.4f +- %.4f "
              "(band [0.56, 0.76])",
              cfg.duration / 60.0, c_model, fitted.contrast, fitted.std_error, windowed.contrast,
              windowed.std_error)};
}

Outcome quadrature_linewidth() {
  const double f = combined_relative_fwhm(263e6, 483e6);
  return {std::abs(f - 550e6) <= 1e6, fmt("combined fwhm = %.4f MHz", f * 1e-6)};
}

Outcome oracle_agreement() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double reps[] = {5e6, 10e6, 20e6};
  std::vector<ExperimentConfig> sets;
  for (int i = 0; i < 44; ++i) {
    ExperimentConfig cfg;
    cfg.repetition_rate = reps[rng() % 3];
    cfg.duration = 4.0;
    cfg.window = 512e-9;
    cfg.polarization = i % 2 ? Polarization::orthogonal : Polarization::parallel;
    cfg.seed = 1000 + i;
    const double lifetime = 6e-9 + 14e-9 * u(rng);
    for (auto& e : cfg.emitters) {
      e.lifetime = lifetime;
      e.detected_rate = (0.01 + 0.03 * u(rng)) * cfg.repetition_rate;
      e.background_fraction = 0.3 * u(rng);
      e.inhom_fwhm = 500e6 * u(rng);
    }
    cfg.emitters[1].center_frequency = 800e6 * u(rng);
    for (auto& d : cfg.detectors) d = {50e-12 + 550e-12 * u(rng), 300.0 * u(rng)};
    if (i < 2) {
      // Zero-detuning null: identical, background-free emitters.
      for (auto& e : cfg.emitters) {
        e.center_frequency = 0.0;
        e.inhom_fwhm = 0.0;
        e.background_fraction = 0.0;
      }
    }
    sets.push_back(cfg);
  }
  const double threshold = 0.01 / static_cast<double>(sets.size());
  double min_p = 1.0;
  std::size_t failures = 0;
  double null_z = 0.0, null_ratio = 0.0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const auto& cfg = sets[i];
    const auto run = mc::simulate_histogram(cfg, {}, workers());
    const auto model = analytic::expected_histogram(cfg);
    const auto chi = stats::chi_square(run.histogram, model);
    min_p = std::min(min_p, chi.p_value);
    if (chi.p_value <= threshold) ++failures;
    if (i == 0) {
      const auto bins = stats::central_bins(run.histogram.grid, cfg.difference_jitter());
      const double obs = sum_bins(run.histogram, bins), exp = sum_bins(model, bins);
      null_z = (obs - exp) / std::sqrt(exp);
      null_ratio = obs / sum_bins(analytic::no_interference_model(cfg), bins);
      if (std::abs(null_z) >= 3.0) ++failures;
    }
  }
  return {failures == 0,
          fmt("%zu sets (both modes), min p = %.4g vs Bonferroni %.2g; HOM null central bins z = %.2f, "
              "floor/no-interference = %.3g",
              sets.size(), min_p, threshold, null_z, null_ratio)};
}

// Expected D1 x D2 click products for the same and adjacent pulses, by enumerating
// every per-pulse outcome: each emitter gives no click, a D1 click or a D2 click.
std::pair<double, double> enumerate_peaks(double pa, double pb) {
  struct State {
    double prob;
    int n1, n2;
  };
  std::vector<State> pulse;
  const double pe[2] = {pa, pb};
  const std::array<std::pair<int, int>, 3> clicks = {{{0, 0}, {1, 0}, {0, 1}}};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      auto weight = [&](int k, int which) { return k == 0 ? 1.0 - pe[which] : 0.5 * pe[which]; };
      pulse.push_back({weight(a, 0) * weight(b, 1), clicks[a].first + clicks[b].first,
                       clicks[a].second + clicks[b].second});
    }
  }
  double central = 0.0, side = 0.0;
  for (const auto& s : pulse) {
    central += s.prob * s.n1 * s.n2;
    for (const auto& t : pulse) side += s.prob * t.prob * s.n1 * t.n2;
  }
  return {central, side};
}

Outcome peak_ratio_law() {
  ExperimentConfig cfg;
  cfg.repetition_rate = 1e6;
  cfg.window = 2.56e-6;
  cfg.duration = 60.0;
  cfg.polarization = Polarization::orthogonal;
  for (auto& d : cfg.detectors) d = {300e-12, 0.0};
  std::string detail;
  bool pass = true;
  for (auto [ra, rb] : {std::pair{4e4, 4e4}, std::pair{4e4, 1e4}}) {
    cfg.emitters[0] = {12e-9, 0.0, 0.0, ra, 0.0};
    cfg.emitters[1] = {12e-9, 0.0, 0.0, rb, 0.0};
    cfg.seed = static_cast<std::uint64_t>(ra + rb);
    const double pa = cfg.detection_probability(0), pb = cfg.detection_probability(1);
    const auto [central_e, side_e] = enumerate_peaks(pa, pb);
    const double law = 2.0 * pa * pb / ((pa + pb) * (pa + pb));
    const bool algebra = std::abs(central_e / side_e - law) <= 1e-12 * law;
    const auto run = mc::simulate_histogram(cfg, {}, workers());
    const double central = count_where(run.histogram, -0.5e-6, 0.5e-6);
    const double side = 0.5 * (count_where(run.histogram, 0.5e-6, 1.5e-6) + count_where(run.histogram, -1.5e-6, -0.5e-6));
    const double ratio = central / side;
    // The averaged side area has half the variance of one peak.
    const double sigma = ratio * std::sqrt(1.0 / central + 1.0 / (2.0 * side));
    const bool ok = algebra && std::abs(ratio - law) <= 3.0 * sigma;
    pass = pass && ok;
    detail += fmt("%srates %.0f/%.0f: ratio %.4f +- %.4f vs law %.4f (enumeration %s)", detail.empty() ? "" : "; ",
                  ra, rb, ratio, sigma, law, algebra ? "agrees" : "DISAGREES");
  }
  return {pass, detail};
}

Outcome postselected_dip() {
  constexpr double kRateScale = 6.0;
  auto base = cli::figure3_config();
  for (auto& e : base.emitters) e.detected_rate *= kRateScale;
  cli::SyntheticRecordSpec spec;
  const auto records = cli::synthetic_records(base, spec, workers());
  std::vector<double> detunings, durations;
  for (const auto& r : records) {
    detunings.push_back(r.detuning);
    durations.push_back(r.duration);
  }

  // Pre-jitter: the summed zero-delay density sits at exactly 1 - V0 of the reference.
  auto flat = base;
  for (auto& e : flat.emitters) e.inhom_fwhm = 0.0;
  const double v0 = flat.interference_factor();
  double par0 = 0.0, ort0 = 0.0;
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    auto p = analytic::PairDensityParams::from_config(flat);
    p.mean_detuning = detunings[i];
    par0 += durations[i] * analytic::pair_coincidence_density(0.0, Polarization::parallel, p);
    ort0 += durations[i] * analytic::pair_coincidence_density(0.0, Polarization::orthogonal, p);
  }
  const bool exact = std::abs(par0 / ort0 - (1.0 - v0)) <= 1e-12;

  auto sharp = flat;
  sharp.comb = false;
  sharp.window = 10.24e-9;
  sharp.bin_width = 1e-12;
  for (auto& d : sharp.detectors) d = {0.0, 0.0};
  const auto sharp_sum = analytic::postselected_sum(detunings, durations, sharp);
  auto sharp_total = sharp;
  sharp_total.duration = spec.record_duration * static_cast<double>(spec.count);
  const auto sharp_ref = analytic::no_interference_model(sharp_total);
  const auto zero = stats::central_bins(sharp_sum.grid, 1e-12);
  const double binned = sum_bins(sharp_sum, zero) / sum_bins(sharp_ref, zero);
  const bool binned_ok = std::abs(binned - (1.0 - v0)) <= 1e-3;

  // After jitter: MC post-selected sum against the no-interference band.
  Histogram sum;
  for (const auto& r : records) sum = sum.counts.empty() ? r.histogram : mc::merge_histograms(sum, r.histogram);
  auto total = flat;
  total.duration = spec.record_duration * static_cast<double>(spec.count);
  const auto band = analytic::no_interference_model(total);
  const auto bins = stats::central_bins(sum.grid, base.difference_jitter());
  const double expected = sum_bins(band, bins);
  const double z = (sum_bins(sum, bins) - expected) / std::sqrt(expected);
  const auto model = analytic::postselected_sum(detunings, durations, flat);
  const double z_model = (sum_bins(model, bins) - expected) / std::sqrt(expected);

  spec.interfering = false;
  const auto control = cli::synthetic_records(base, spec, workers());
  Histogram control_sum;
  for (const auto& r : control) {
    control_sum = control_sum.counts.empty() ? r.histogram : mc::merge_histograms(control_sum, r.histogram);
  }
  const double z_control = (sum_bins(control_sum, bins) - expected) / std::sqrt(expected);

  return {exact && binned_ok && z < -3.0 && std::abs(z_control) < 2.0,
          fmt("synthetic: %zu records, rates x%.0f; zero-delay ratio %.12f vs 1-V0 %.12f, 1 ps bins %.5f; "
              "dip z = %.2f (model %.2f); no-interference control z = %.2f",
              records.size(), kRateScale, par0 / ort0, 1.0 - v0, binned, z, z_model, z_control)};
}

Outcome stark_resonance() {
  const auto [a, b] = cli::example_stark_lines();
  const double v = calibration::resonance_voltage(a, b);
  return {std::abs(v + 13.6) <= 1e-6, fmt("resonance voltage = %.9f V", v)};
}

Outcome determinism() {
  const auto dir = fs::temp_directory_path() / "tpqi_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto config = dir / "run.toml";
  {
    std::ofstream f(config);
    f << "repetition_rate = \"10 MHz\"\nduration = \"5 s\"\nwindow = \"256 ns\"\nlifetime = \"12 ns\"\n"
         "background = 0.15\njitter = \"410 ps\"\ndark_rate = 60\ndetuning = \"130 MHz\"\n"
         "a.inhom_fwhm = \"263 MHz\"\nb.inhom_fwhm = \"483 MHz\"\na.rate = 3e5\nb.rate = 2e5\n";
  }
  std::ostringstream sink;
  auto run = [&](const char* name, std::uint64_t seed, unsigned w) {
    cli::Options o;
    o.config = config;
    o.seed = seed;
    o.workers = w;
    o.out = dir / name;
    if (cli::run("mc", o, sink, sink) != cli::ExitCode::ok) throw Error("mc run failed");
    return slurp(dir / name / "mc_parallel.csv");
  };
  const auto a = run("a", 1, 1);
  const auto b = run("b", 1, 1);
  const auto sharded = run("c", 1, 5);
  const auto other = run("d", 2, 5);
  const bool bytes = a == b && std::hash<std::string>{}(a) == std::hash<std::string>{}(b);
  const auto read = [&](const char* name) { return io::read_histogram_csv(dir / name / "mc_parallel.csv"); };
  const auto same_seed = two_sample_chi_square(read("a"), read("c"));
  const auto other_seed = two_sample_chi_square(read("a"), read("d"));
  fs::remove_all(dir);
  return {bytes && same_seed.p_value > 0.01 && other_seed.p_value > 0.01,
          fmt("repeat run bytes %s; 5-shard vs serial bytes %s, chi-square p = %.3g; 5-shard seed 2 vs serial "
              "seed 1 p = %.3g",
              bytes ? "identical" : "DIFFER", a == sharded ? "identical" : "differ", same_seed.p_value,
              other_seed.p_value)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double limit_s;
    std::function<Outcome()> check;
  };
  const Criterion criteria[] = {
      {"visibility bound", 1.0, visibility_bound},
      {"reference contrast", 180.0, figure3_contrast},
      {"quadrature linewidth", 1.0, quadrature_linewidth},
      {"mc vs analytic oracle", 600.0, oracle_agreement},
      {"peak ratio law", 120.0, peak_ratio_law},
      {"post-selected dip", 300.0, postselected_dip},
      {"stark resonance", 1.0, stark_resonance},
      {"determinism and sharding", 300.0, determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("%s %d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), elapsed,
                in_time ? "" : ", over time limit");
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
