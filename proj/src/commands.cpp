#include "tpqi/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "tpqi/analytic.hpp"
#include "tpqi/config.hpp"
#include "tpqi/csv.hpp"
#include "tpqi/errors.hpp"
#include "tpqi/montecarlo.hpp"
#include "tpqi/stats.hpp"

namespace tpqi::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kFitHalfWindow = 3e-9;
constexpr std::uint64_t kRecordStream = 0x6669673472656373ULL;

const char* mode_name(Polarization p) { return p == Polarization::parallel ? "parallel" : "orthogonal"; }

unsigned worker_count(const Options& o) {
  if (o.workers > 0) return o.workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

class Session {
 public:
  Session(std::string command, const Options& options, std::ostream& out)
      : options_(options), out_(out), start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    fs::create_directories(options.out);
  }

  const Options& options() const { return options_; }
  std::ostream& out() { return out_; }
  RunManifest& manifest() { return manifest_; }

  void write(const std::string& name, const std::string& text) {
    io::write_text(text, options_.out / name);
    manifest_.outputs.push_back(name);
  }

  void finish() {
    manifest_.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    io::write_text(manifest_.to_json().dump(2) + "\n", options_.out / "manifest.json");
  }

 private:
  const Options& options_;
  std::ostream& out_;
  std::chrono::steady_clock::time_point start_;
  RunManifest manifest_;
};

ExperimentConfig load_config(const Options& o, ExperimentConfig fallback) {
  ExperimentConfig cfg = std::move(fallback);
  if (o.config) {
    std::ifstream f(*o.config, std::ios::binary);
    if (!f) throw IoError("cannot open config " + o.config->string());
    std::stringstream ss;
    ss << f.rdbuf();
    cfg = config::parse_config(ss.str());
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.duration) cfg.duration = *o.duration;
  if (o.mode) cfg.polarization = *o.mode;
  if (o.correlation) cfg.correlation = *o.correlation;
  cfg.validate();
  return cfg;
}

void record_config(Session& s, const ExperimentConfig& cfg) {
  s.manifest().config = cfg;
  s.manifest().seed = cfg.seed;
}

std::string render_sampled(const calibration::SampledCurve& c, const char* x_header, double x_scale) {
  std::string text = std::string(x_header) + ",value\n";
  for (std::size_t i = 0; i < c.x.size(); ++i) {
    text += io::format_real(c.x[i] * x_scale) + "," + io::format_real(c.y[i]) + "\n";
  }
  return text;
}

std::vector<double> sqrt_values(const CoincidenceCurve& c) {
  std::vector<double> out(c.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(c.values[i]);
  return out;
}

ExperimentConfig with_mode(ExperimentConfig cfg, Polarization p) {
  cfg.polarization = p;
  return cfg;
}

ExitCode cmd_analytic(Session& s) {
  const auto cfg = load_config(s.options(), figure3_config());
  record_config(s, cfg);
  const auto curve = analytic::expected_histogram(cfg);
  const auto name = std::string("analytic_") + mode_name(cfg.polarization) + ".csv";
  s.write(name, io::render_csv(curve));
  s.out() << "expected coincidences: " << io::format_real(curve.total()) << "\n";
  if (cfg.polarization == Polarization::parallel) {
    const auto pair = analytic::PairDensityParams::from_config(cfg);
    const double v_raw = analytic::visibility_at_zero(pair, 0.0);
    const double v_jit = analytic::visibility_at_zero(pair, cfg.difference_jitter());
    const double c = stats::expected_contrast_at_zero(curve, analytic::no_interference_model(cfg),
                                                      cfg.difference_jitter());
    s.out() << "visibility at zero (no jitter): " << io::format_real(v_raw) << "\n"
            << "visibility at zero (with jitter): " << io::format_real(v_jit) << "\n"
            << "expected windowed contrast: " << io::format_real(c) << "\n";
    s.manifest().extra["visibility_no_jitter"] = v_raw;
    s.manifest().extra["visibility_with_jitter"] = v_jit;
    s.manifest().extra["expected_windowed_contrast"] = c;
  }
  return ExitCode::ok;
}

ExitCode cmd_mc(Session& s) {
  const auto cfg = load_config(s.options(), figure3_config());
  record_config(s, cfg);
  mc::RunSummary summary;
  if (s.options().dump) {
    auto result = mc::simulate_run(cfg);
    mc::write_click_dump(*s.options().dump, result.clicks);
    summary = std::move(result.summary);
  } else {
    summary = mc::simulate_histogram(cfg, {}, worker_count(s.options()));
  }
  s.write(std::string("mc_") + mode_name(cfg.polarization) + ".csv", io::render_csv(summary.histogram));
  s.out() << "pulses: " << summary.pulses_simulated << "\n"
          << "clicks d1: " << summary.clicks[0] << "\n"
          << "clicks d2: " << summary.clicks[1] << "\n"
          << "interfering pairs: " << summary.interfering_pairs << "\n"
          << "coincidences: " << summary.histogram.total() << "\n";
  s.manifest().extra["clicks"] = {summary.clicks[0], summary.clicks[1]};
  s.manifest().extra["interfering_pairs"] = summary.interfering_pairs;
  return ExitCode::ok;
}

ExitCode cmd_compare(Session& s) {
  const auto cfg = load_config(s.options(), figure3_config());
  record_config(s, cfg);
  const auto summary = mc::simulate_histogram(cfg, {}, worker_count(s.options()));
  const auto model = analytic::expected_histogram(cfg);
  const auto chi = stats::chi_square(summary.histogram, model);
  s.write("compare_mc.csv", io::render_csv(summary.histogram));
  s.write("compare_model.csv", io::render_csv(model));
  s.out() << "chi-square: " << io::format_real(chi.statistic) << " dof " << chi.dof << " p "
          << io::format_real(chi.p_value) << "\n";
  s.manifest().extra["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
  if (chi.p_value <= 0.01) {
    s.out() << "compare: FAIL (p <= 0.01)\n";
    return ExitCode::compare_failed;
  }
  s.out() << "compare: ok\n";
  return ExitCode::ok;
}

ExitCode cmd_fig3(Session& s) {
  ExperimentConfig base = figure3_config();
  base.duration = kFigure3Duration;
  Options o = s.options();
  o.mode.reset();
  const auto cfg = load_config(o, base);
  record_config(s, cfg);
  const auto par = with_mode(cfg, Polarization::parallel);
  const auto ort = with_mode(cfg, Polarization::orthogonal);

  const auto model_par = analytic::expected_histogram(par);
  const auto model_ort = analytic::expected_histogram(ort);
  const auto reference = analytic::no_interference_model(par);
  const unsigned workers = worker_count(s.options());
  const auto mc_par = mc::simulate_histogram(par, {}, workers);
  const auto mc_ort = mc::simulate_histogram(ort, {}, workers);
  s.write("fig3_analytic_parallel.csv", io::render_csv(model_par));
  s.write("fig3_analytic_orthogonal.csv", io::render_csv(model_ort));
  s.write("fig3_mc_parallel.csv", io::render_csv(mc_par.histogram));
  s.write("fig3_mc_orthogonal.csv", io::render_csv(mc_ort.histogram));

  const double half = cfg.difference_jitter();
  const auto pair = analytic::PairDensityParams::from_config(par);
  const double v_bound = analytic::visibility_at_zero(pair, 0.0);
  const double v_jit = analytic::visibility_at_zero(pair, half);
  const double c_model = stats::expected_contrast_at_zero(model_par, reference, half);
  const auto c_window = stats::contrast_at_zero(mc_par.histogram, reference, half);
  const auto c_fit = stats::fitted_contrast_at_zero(mc_par.histogram, reference, model_par, kFitHalfWindow, v_jit);

  s.out() << "visibility bound (background only): " << io::format_real(v_bound) << "\n"
          << "visibility at zero after jitter: " << io::format_real(v_jit) << "\n"
          << "analytic contrast (+-" << io::format_real(c_window.window_used * 1e12)
          << " ps): " << io::format_real(c_model) << "\n"
          << "mc contrast, windowed: " << io::format_real(c_window.contrast) << " +- "
          << io::format_real(c_window.std_error) << "\n"
          << "mc contrast, fitted: " << io::format_real(c_fit.contrast) << " +- "
          << io::format_real(c_fit.std_error) << "\n";
  auto& x = s.manifest().extra;
  x["visibility_bound"] = v_bound;
  x["visibility_with_jitter"] = v_jit;
  x["analytic_contrast"] = c_model;
  x["contrast_window_s"] = c_window.window_used;
  x["mc_contrast_windowed"] = {{"value", c_window.contrast}, {"std_error", c_window.std_error}};
  x["mc_contrast_fitted"] = {{"value", c_fit.contrast}, {"std_error", c_fit.std_error},
                             {"fit_half_window_s", kFitHalfWindow}};
  return ExitCode::ok;
}

ExitCode cmd_fig4(Session& s) {
  Options o = s.options();
  o.mode.reset();
  const auto cfg = load_config(o, figure3_config());
  record_config(s, cfg);

  const auto [line_a, line_b] = example_stark_lines();
  const double v_res = calibration::resonance_voltage(line_a, line_b);
  std::string stark = "voltage_v,nu_a_ghz,nu_b_ghz\n";
  for (int i = 0; i <= 60; ++i) {
    const double v = -30.0 + 0.5 * i;
    stark += io::format_real(v) + "," +
             io::format_real(calibration::stark_frequency(line_a, v).value * 1e-9) + "," +
             io::format_real(calibration::stark_frequency(line_b, v).value * 1e-9) + "\n";
  }
  s.write("fig4_stark.csv", stark);

  SyntheticRecordSpec spec;
  const auto records = synthetic_records(cfg, spec, worker_count(s.options()));
  Histogram sum;
  std::vector<double> detunings;
  std::vector<double> durations;
  for (const auto& r : records) {
    sum = sum.counts.empty() ? r.histogram : mc::merge_histograms(sum, r.histogram);
    detunings.push_back(r.detuning);
    durations.push_back(r.duration);
  }
  ExperimentConfig flat = cfg;
  flat.polarization = Polarization::parallel;
  for (auto& e : flat.emitters) e.inhom_fwhm = 0.0;
  const auto model = analytic::postselected_sum(detunings, durations, flat);
  ExperimentConfig total = flat;
  total.duration = spec.record_duration * static_cast<double>(spec.count);
  const auto band = analytic::no_interference_model(total);
  s.write("fig4_sum.csv", io::render_csv(sum));
  s.write("fig4_model.csv", io::render_csv(model));
  s.write("fig4_no_interference.csv", io::render_csv(band, sqrt_values(band)));

  const double half = cfg.difference_jitter();
  double observed = 0.0, expected = 0.0;
  for (auto i : stats::central_bins(sum.grid, half)) {
    observed += static_cast<double>(sum.counts[i]);
    expected += band.values[i];
  }
  const double z = (observed - expected) / std::sqrt(expected);
  s.out() << "resonance voltage: " << io::format_real(v_res) << " V\n"
          << "records: " << records.size() << " (synthetic)\n"
          << "central counts: " << observed << " vs no-interference " << io::format_real(expected) << "\n"
          << "dip significance z: " << io::format_real(z) << "\n";
  auto& x = s.manifest().extra;
  x["synthetic"] = true;
  x["resonance_voltage_v"] = v_res;
  x["records"] = records.size();
  x["central_observed"] = observed;
  x["central_no_interference"] = expected;
  x["z"] = z;

  if (s.options().write_records) {
    fs::create_directories(s.options().out / "records");
    std::string list = "record_id,detuning_mhz,duration_s,histogram_file\n";
    for (const auto& r : records) {
      const std::string file = "records/" + r.id + ".csv";
      s.write(file, io::render_csv(r.histogram));
      list += r.id + "," + io::format_real(r.detuning * 1e-6) + "," + io::format_real(r.duration) + "," + file + "\n";
    }
    s.write("records.csv", list);
  }
  return ExitCode::ok;
}

ExitCode cmd_ple(Session& s) {
  struct Line {
    const char* name;
    double lorentz;
    double gauss;
  };
  const Line lines[] = {{"a", 38e6, 263e6}, {"b", 36e6, 483e6}};
  for (const auto& l : lines) {
    const auto curve = calibration::sample_lineshape(l.lorentz, l.gauss, 2e9, 4001);
    s.write(std::string("ple_") + l.name + ".csv", render_sampled(curve, "nu_mhz", 1e-6));
    const double fwhm = calibration::extract_fwhm(curve);
    s.out() << "emitter " << l.name << ": lorentzian " << io::format_real(l.lorentz * 1e-6)
            << " MHz, gaussian " << io::format_real(l.gauss * 1e-6) << " MHz, profile fwhm "
            << io::format_real(fwhm * 1e-6) << " MHz\n";
    s.manifest().extra[std::string("fwhm_") + l.name + "_hz"] = fwhm;
  }
  const double rel = combined_relative_fwhm(lines[0].gauss, lines[1].gauss);
  s.out() << "relative detuning fwhm: " << io::format_real(rel * 1e-6) << " MHz\n";
  s.manifest().extra["relative_fwhm_hz"] = rel;
  return ExitCode::ok;
}

ExitCode cmd_stark(Session& s) {
  const auto [a, b] = example_stark_lines();
  const double v = calibration::resonance_voltage(a, b);
  std::string text = "voltage_v,nu_a_ghz,nu_b_ghz\n";
  for (int i = 0; i <= 60; ++i) {
    const double u = -30.0 + 0.5 * i;
    text += io::format_real(u) + "," + io::format_real(calibration::stark_frequency(a, u).value * 1e-9) +
            "," + io::format_real(calibration::stark_frequency(b, u).value * 1e-9) + "\n";
  }
  s.write("stark.csv", text);
  s.out() << "resonance voltage: " << io::format_real(v) << " V\n";
  s.manifest().extra["resonance_voltage_v"] = v;
  return ExitCode::ok;
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  json j;
  j["command"] = command;
  j["engine_version"] = kEngineVersion;
  j["seed"] = seed;
  if (config) {
    j["config"] = config::to_json(*config);
    j["config_text"] = config::render_config(*config);
  } else {
    j["config"] = nullptr;
  }
  j["outputs"] = outputs;
  j["runtime_s"] = runtime_s;
  j["results"] = extra;
  return j;
}

ExperimentConfig figure3_config() {
  ExperimentConfig cfg;
  cfg.duration = 6000.0;
  cfg.emitters[0] = EmitterParams{12e-9, 0.0, 263e6, 2700.0, 0.15};
  cfg.emitters[1] = EmitterParams{12e-9, 130e6, 483e6, 1470.0, 0.15};
  cfg.detectors[0] = DetectorParams{410e-12, 60.0};
  cfg.detectors[1] = DetectorParams{410e-12, 60.0};
  return cfg;
}

std::pair<calibration::StarkLine, calibration::StarkLine> example_stark_lines() {
  calibration::StarkLine a;
  a.slope = 0.1e9;
  a.reference_frequency = 0.0;
  a.min_voltage = -30.0;
  a.max_voltage = 0.0;
  calibration::StarkLine b;
  b.slope = -0.1e9;
  b.reference_frequency = -2.72e9;
  b.min_voltage = -30.0;
  b.max_voltage = 0.0;
  return {a, b};
}

std::vector<calibration::DetuningRecord> synthetic_records(const ExperimentConfig& base,
                                                           const SyntheticRecordSpec& spec,
                                                           unsigned workers) {
  if (!(spec.detuning_hi >= spec.detuning_lo) || !(spec.record_duration > 0.0)) {
    throw ParameterError("synthetic records need lo <= hi and a positive duration");
  }
  mc::StreamRng rng(base.seed, kRecordStream);
  std::vector<calibration::DetuningRecord> out;
  out.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    ExperimentConfig rec = base;
    const double detuning = spec.detuning_lo + (spec.detuning_hi - spec.detuning_lo) * rng.uniform();
    rec.seed = rng();
    rec.duration = spec.record_duration;
    rec.polarization = spec.interfering ? Polarization::parallel : Polarization::orthogonal;
    rec.emitters[0].center_frequency = 0.0;
    rec.emitters[1].center_frequency = detuning;
    for (auto& e : rec.emitters) e.inhom_fwhm = 0.0;
    char id[16];
    std::snprintf(id, sizeof id, "r%03zu", i);
    out.push_back({id, detuning, rec.duration, mc::simulate_histogram(rec, {}, workers).histogram});
  }
  return out;
}

ExitCode run(const std::string& command, const Options& options, std::ostream& out, std::ostream& err) {
  static const std::map<std::string, std::function<ExitCode(Session&)>> commands{
      {"analytic", cmd_analytic}, {"mc", cmd_mc},   {"compare", cmd_compare}, {"fig3", cmd_fig3},
      {"fig4", cmd_fig4},         {"ple", cmd_ple}, {"stark", cmd_stark}};
  const auto it = commands.find(command);
  if (it == commands.end()) {
    err << "unknown command: " << command << "\n";
    return ExitCode::invalid;
  }
  try {
    Session session(command, options, out);
    const ExitCode code = it->second(session);
    session.finish();
    return code;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::invalid;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCode::invalid;
  }
}

}  // namespace tpqi::cli
