#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "tpqi/commands.hpp"
#include "tpqi/config.hpp"

int main(int argc, char** argv) {
  using namespace tpqi;
  CLI::App app{"Two-photon interference simulator for spectrally diffusing emitters"};
  app.require_subcommand(1);
  app.fallthrough();
  cli::Options opts;
  std::string config_path, out_dir = ".", duration_text, dump_path;
  std::uint64_t seed = 0;
  std::optional<Polarization> mode;
  std::optional<CorrelationMode> correlation;

  const std::map<std::string, Polarization> modes{{"parallel", Polarization::parallel},
                                                   {"orthogonal", Polarization::orthogonal}};
  const std::map<std::string, CorrelationMode> correlations{
      {"cross", CorrelationMode::cross_correlation}, {"startstop", CorrelationMode::start_stop}};

  auto* seed_opt = app.add_option("--seed", seed, "RNG seed (overrides the config)");
  auto* config_opt = app.add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "Output directory");
  auto* duration_opt = app.add_option("--duration", duration_text, "Simulated duration, e.g. \"100 min\"");
  app.add_option("--mode", mode, "Polarization mode")->transform(CLI::CheckedTransformer(modes));
  app.add_option("--correlation", correlation, "Correlation mode")
      ->transform(CLI::CheckedTransformer(correlations));
  app.add_option("--workers", opts.workers, "Worker threads (0: all hardware threads)");

  const char* descriptions[][2] = {
      {"analytic", "Expected coincidence curve for the configured polarization"},
      {"mc", "Monte Carlo run correlated into a histogram"},
      {"compare", "Monte Carlo histogram against the analytic model (exit 2 when p <= 0.01)"},
      {"fig3", "Both polarizations, analytic and simulated, with the zero-delay contrast"},
      {"fig4", "Stark tuning curves and post-selected synthetic detuning records"},
      {"ple", "Spectral lineshapes and their widths"},
      {"stark", "Resonance voltage of the example Stark lines"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& d : descriptions) subs[d[0]] = app.add_subcommand(d[0], d[1]);
  subs["mc"]->add_option("--dump", dump_path, "Write the click streams to a binary dump");
  subs["fig4"]->add_flag("--write-records", opts.write_records, "Write every synthetic record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : static_cast<int>(cli::ExitCode::invalid);
  }

  if (*config_opt) opts.config = config_path;
  if (*seed_opt) opts.seed = seed;
  opts.out = out_dir;
  opts.mode = mode;
  opts.correlation = correlation;
  if (!dump_path.empty()) opts.dump = dump_path;
  if (*duration_opt) {
    try {
      opts.duration = config::parse_quantity(duration_text, config::Dimension::time);
    } catch (const Error& e) {
      std::cerr << "error: --duration: " << e.what() << "\n";
      return static_cast<int>(cli::ExitCode::invalid);
    }
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return static_cast<int>(cli::run(command, opts, std::cout, std::cerr));
}
