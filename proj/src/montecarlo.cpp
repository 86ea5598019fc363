#include "tpqi/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <thread>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

#include "tpqi/errors.hpp"

namespace tpqi::mc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::int64_t kNoHorizon = std::numeric_limits<std::int64_t>::max();
// Click delays are capped at this many lifetimes and jitter at this many
// sigmas so every click stays within a known reach of its pulse.
constexpr double kDelayCapLifetimes = 60.0;
constexpr double kJitterCapSigmas = 8.0;
constexpr char kDumpMagic[5] = {'T', 'P', 'Q', 'I', '1'};

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag + kGolden));
}

// Streams used by one run, kept apart so they never overlap.
enum : std::uint64_t { kTagBlock = 1, kTagFrequencyA = 2, kTagFrequencyB = 3 };

std::int64_t to_ps_exact(double seconds, const char* what) {
  const double ps = seconds * 1e12;
  const double r = std::round(ps);
  if (std::abs(ps - r) > 1e-3) {
    throw GeometryError(std::string(what) + " must be a whole number of picoseconds");
  }
  return static_cast<std::int64_t>(r);
}

struct PsGrid {
  std::int64_t window = 0;
  std::int64_t bin_width = 0;
  std::int64_t offset = 0;
  std::size_t bins = 0;

  explicit PsGrid(const BinGrid& g)
      : window(to_ps_exact(g.window, "window")),
        bin_width(to_ps_exact(g.bin_width, "bin_width")),
        offset(to_ps_exact(g.center_offset, "center_offset")),
        bins(g.size()) {
    if (bin_width <= 0) throw GeometryError("bin_width must be at least 1 ps");
  }
};

// Streaming correlator. Clicks arrive in batches together with a horizon that
// bounds every later click from below.
class RollingCorrelator {
 public:
  RollingCorrelator(const BinGrid& grid, CorrelationMode mode)
      : grid_(grid), mode_(mode), hist_(grid) {}

  void push(const std::vector<std::int64_t>& d1, const std::vector<std::int64_t>& d2,
            std::int64_t horizon) {
    append_sorted(d1_, d1_start_, d1);
    append_sorted(d2_, d2_start_, d2);
    process(horizon);
  }

  void finish() { process(kNoHorizon); }

  Histogram take() { return std::move(hist_); }

 private:
  static void append_sorted(std::vector<std::int64_t>& buf, std::size_t& start,
                            const std::vector<std::int64_t>& fresh) {
    if (start > 4096 && start * 2 > buf.size()) {
      buf.erase(buf.begin(), buf.begin() + static_cast<long>(start));
      start = 0;
    }
    const auto old_size = static_cast<long>(buf.size());
    buf.insert(buf.end(), fresh.begin(), fresh.end());
    std::inplace_merge(buf.begin() + static_cast<long>(start), buf.begin() + old_size, buf.end());
  }

  void process(std::int64_t horizon) {
    const std::int64_t reach_hi = grid_.offset + grid_.window;
    const std::int64_t limit =
        horizon == kNoHorizon ? kNoHorizon : horizon - std::max<std::int64_t>(reach_hi, 0);
    while (d1_start_ < d1_.size() && d1_[d1_start_] <= limit) {
      const std::int64_t t1 = d1_[d1_start_++];
      const std::int64_t lo = t1 + grid_.offset - grid_.window;
      const std::int64_t hi = t1 + reach_hi;
      while (d2_start_ < d2_.size() && d2_[d2_start_] < lo) ++d2_start_;
      for (std::size_t j = d2_start_; j < d2_.size() && d2_[j] < hi; ++j) {
        const auto bin = static_cast<std::size_t>((d2_[j] - lo) / grid_.bin_width);
        ++hist_.counts[bin];
        if (mode_ == CorrelationMode::start_stop) break;
      }
    }
  }

  PsGrid grid_;
  CorrelationMode mode_;
  Histogram hist_;
  std::vector<std::int64_t> d1_, d2_;
  std::size_t d1_start_ = 0, d2_start_ = 0;
};

struct BlockOutput {
  std::array<std::vector<std::int64_t>, 2> clicks;
  std::uint64_t interfering_pairs = 0;
};

class BlockSimulator {
 public:
  BlockSimulator(const ExperimentConfig& cfg, const BlinkingParams& blinking)
      : cfg_(cfg), blinking_(blinking) {
    cfg.validate();
    blinking.validate();
    pulses_ = cfg.pulse_count();
    period_ps_ = 1e12L / static_cast<long double>(cfg.repetition_rate);
    duration_ps_ = static_cast<std::int64_t>(std::floor(static_cast<long double>(cfg.duration) * 1e12L));
    const double on_fraction = blinking.on_fraction();
    double max_lifetime = 0.0;
    double max_jitter = 0.0;
    for (std::size_t e = 0; e < 2; ++e) {
      const auto& em = cfg.emitters[e];
      gamma_[e] = em.gamma();
      freq_sigma_[e] = fwhm_to_sigma(em.inhom_fwhm);
      const double p = cfg.detection_probability(e);
      if (p > 0.0 && on_fraction <= 0.0) {
        throw ModelValidityError("blinking emitter is never in the emitting state");
      }
      prob_[e] = p > 0.0 ? p / on_fraction : 0.0;
      if (prob_[e] >= kMaxPulseProbability) {
        throw ModelValidityError(
            "per-pulse detection probability must stay below 0.1 (one photon per emitter per "
            "pulse)");
      }
      delay_cap_[e] = kDelayCapLifetimes * em.lifetime;
      max_lifetime = std::max(max_lifetime, em.lifetime);
      jitter_[e] = cfg.click_jitter(e);
      max_jitter = std::max(max_jitter, jitter_[e]);
    }
    early_reach_ps_ = static_cast<std::int64_t>(std::ceil(kJitterCapSigmas * max_jitter * 1e12)) + 1;
    late_reach_ps_ = static_cast<std::int64_t>(
                         std::ceil((kDelayCapLifetimes * max_lifetime + kJitterCapSigmas * max_jitter) * 1e12)) +
                     1;
    const long double block_ps = period_ps_ * static_cast<long double>(kPulsesPerBlock);
    const long double window_ps = static_cast<long double>(cfg.window) * 1e12L;
    if (block_count() > 1 &&
        block_ps <= 2.0L * (window_ps + early_reach_ps_ + late_reach_ps_)) {
      throw ModelValidityError("pulse blocks are too short for the correlation window");
    }
  }

  std::uint64_t pulses() const { return pulses_; }
  std::uint64_t block_count() const { return (pulses_ + kPulsesPerBlock - 1) / kPulsesPerBlock; }
  std::int64_t early_reach() const { return early_reach_ps_; }
  std::int64_t late_reach() const { return late_reach_ps_; }

  std::int64_t block_start_ps(std::uint64_t block) const {
    return static_cast<std::int64_t>(std::ceil(pulse_time_ps(block * kPulsesPerBlock)));
  }

  /// Lower bound on every click produced by blocks >= `block`.
  std::int64_t horizon_before(std::uint64_t block) const {
    if (block >= block_count()) return kNoHorizon;
    return block_start_ps(block) - early_reach_ps_;
  }

  BlockOutput run_block(std::uint64_t block) const {
    BlockOutput out;
    StreamRng rng(derive_seed(cfg_.seed, kTagBlock), block);
    boost::random::normal_distribution<double> normal(0.0, 1.0);

    const std::uint64_t k0 = block * kPulsesPerBlock;
    const std::uint64_t k1 = std::min(pulses_, k0 + kPulsesPerBlock);
    std::array<std::vector<std::uint64_t>, 2> emissions;
    for (std::size_t e = 0; e < 2; ++e) emissions[e] = emission_pulses(e, k0, k1, rng);

    auto emit = [&](std::size_t det, std::uint64_t k, double delay) {
      double jit = jitter_[det] > 0.0 ? normal(rng) : 0.0;
      jit = std::clamp(jit, -kJitterCapSigmas, kJitterCapSigmas) * jitter_[det];
      const long double t = pulse_time_ps(k) + static_cast<long double>(delay + jit) * 1e12L;
      const std::int64_t ts = t < 0.0L ? -1 : static_cast<std::int64_t>(t + 0.5L);
      if (ts >= 0 && ts < duration_ps_) out.clicks[det].push_back(ts);
    };
    auto delay_of = [&](std::size_t e) {
      boost::random::exponential_distribution<double> exp_dist(gamma_[e]);
      return std::min(exp_dist(rng), delay_cap_[e]);
    };
    auto route = [&]() -> std::size_t { return rng.uniform() < 0.5 ? 0 : 1; };

    const auto& ea = emissions[0];
    const auto& eb = emissions[1];
    std::size_t ia = 0, ib = 0;
    while (ia < ea.size() || ib < eb.size()) {
      const std::uint64_t ka = ia < ea.size() ? ea[ia] : std::numeric_limits<std::uint64_t>::max();
      const std::uint64_t kb = ib < eb.size() ? eb[ib] : std::numeric_limits<std::uint64_t>::max();
      const std::uint64_t k = std::min(ka, kb);
      const bool from_a = ka == k;
      const bool from_b = kb == k;
      if (from_a) ++ia;
      if (from_b) ++ib;

      if (from_a && from_b) {
        const bool bg_a = rng.uniform() < cfg_.emitters[0].background_fraction;
        const bool bg_b = rng.uniform() < cfg_.emitters[1].background_fraction;
        if (cfg_.polarization == Polarization::parallel && !bg_a && !bg_b) {
          const double delta = frequency(0, k, rng, normal) - frequency(1, k, rng, normal);
          const auto pair = sample_pair_detection(delta, gamma_[0], gamma_[1], rng);
          const std::size_t det_a = route();
          const std::size_t det_b = pair.outcome == PairOutcome::opposite_ports ? 1 - det_a : det_a;
          emit(det_a, k, std::min(pair.t1, delay_cap_[0]));
          emit(det_b, k, std::min(pair.t2, delay_cap_[1]));
          ++out.interfering_pairs;
          continue;
        }
      }
      if (from_a) {
        const double d = delay_of(0);
        emit(route(), k, d);
      }
      if (from_b) {
        const double d = delay_of(1);
        emit(route(), k, d);
      }
    }

    // Photon clicks are nearly in order already; darks are sorted and merged in.
    for (auto& c : out.clicks) {
      if (!std::is_sorted(c.begin(), c.end())) std::sort(c.begin(), c.end());
    }
    std::array<std::size_t, 2> photon_clicks{out.clicks[0].size(), out.clicks[1].size()};

    // Dark counts: homogeneous Poisson process over the block's time span.
    const std::int64_t t_lo = block_start_ps(block);
    const std::int64_t t_hi =
        std::min(duration_ps_, block + 1 < block_count() ? block_start_ps(block + 1) : duration_ps_);
    if (t_hi > t_lo) {
      const double span_s = static_cast<double>(t_hi - t_lo) * 1e-12;
      for (std::size_t det = 0; det < 2; ++det) {
        const double rate = cfg_.detectors[det].dark_rate;
        if (rate <= 0.0) continue;
        std::poisson_distribution<std::uint64_t> count_dist(rate * span_s);
        const std::uint64_t n = count_dist(rng);
        for (std::uint64_t i = 0; i < n; ++i) {
          const auto offset = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(t_hi - t_lo));
          out.clicks[det].push_back(t_lo + std::min(offset, t_hi - t_lo - 1));
        }
      }
    }
    for (std::size_t det = 0; det < 2; ++det) {
      auto& c = out.clicks[det];
      const auto mid = c.begin() + static_cast<std::ptrdiff_t>(photon_clicks[det]);
      std::sort(mid, c.end());
      std::inplace_merge(c.begin(), mid, c.end());
    }
    return out;
  }

 private:
  long double pulse_time_ps(std::uint64_t k) const {
    return static_cast<long double>(k) * period_ps_;
  }

  std::vector<std::uint64_t> emission_pulses(std::size_t e, std::uint64_t k0, std::uint64_t k1,
                                             StreamRng& rng) const {
    std::vector<std::uint64_t> out;
    const double p = prob_[e];
    if (p <= 0.0 || k1 <= k0) return out;
    // Failures before the next success: floor(E / -ln(1 - p)) with E ~ Exp(1).
    boost::random::exponential_distribution<double> unit_exp(1.0);
    const double scale = -1.0 / std::log1p(-p);
    auto gap = [&]() -> std::uint64_t {
      return static_cast<std::uint64_t>(std::min(unit_exp(rng) * scale, 0x1.0p62));
    };
    auto fill = [&](std::uint64_t lo, std::uint64_t hi) {
      for (std::uint64_t k = lo + gap(); k < hi; k += 1 + gap()) out.push_back(k);
    };
    const double on_fraction = blinking_.on_fraction();
    if (!blinking_.enabled || on_fraction >= 1.0) {
      fill(k0, k1);
      return out;
    }
    // Telegraph process; the state at the block start is drawn from the
    // stationary distribution.
    const double period = cfg_.period();
    bool on = rng.uniform() < on_fraction;
    double t = static_cast<double>(k0) * period;
    const double t_end = static_cast<double>(k1) * period;
    boost::random::exponential_distribution<double> on_dwell(blinking_.off_switch_rate);
    boost::random::exponential_distribution<double> off_dwell(blinking_.on_switch_rate);
    while (t < t_end) {
      const double dwell = on ? on_dwell(rng) : off_dwell(rng);
      const double next = t + dwell;
      if (on) {
        const auto lo = std::max(k0, static_cast<std::uint64_t>(std::ceil(t / period)));
        const auto hi = std::min(k1, static_cast<std::uint64_t>(std::ceil(std::min(next, t_end) / period)));
        if (hi > lo) fill(lo, hi);
      }
      t = next;
      on = !on;
    }
    return out;
  }

  double frequency(std::size_t e, std::uint64_t k, StreamRng& rng,
                   boost::random::normal_distribution<double>& normal) const {
    const auto& em = cfg_.emitters[e];
    if (freq_sigma_[e] == 0.0) return em.center_frequency;
    if (cfg_.frequency_hold_pulses <= 1) return em.center_frequency + freq_sigma_[e] * normal(rng);
    const std::uint64_t group = k / cfg_.frequency_hold_pulses;
    StreamRng held(derive_seed(cfg_.seed, e == 0 ? kTagFrequencyA : kTagFrequencyB), group);
    boost::random::normal_distribution<double> fresh(0.0, 1.0);
    return em.center_frequency + freq_sigma_[e] * fresh(held);
  }

  const ExperimentConfig& cfg_;
  BlinkingParams blinking_;
  std::uint64_t pulses_ = 0;
  long double period_ps_ = 0.0L;
  std::int64_t duration_ps_ = 0;
  std::array<double, 2> gamma_{};
  std::array<double, 2> freq_sigma_{};
  std::array<double, 2> prob_{};
  std::array<double, 2> delay_cap_{};
  std::array<double, 2> jitter_{};
  std::int64_t early_reach_ps_ = 0;
  std::int64_t late_reach_ps_ = 0;
};

struct ShardResult {
  RunSummary summary;
  std::array<std::vector<std::int64_t>, 2> head;
  std::array<std::vector<std::int64_t>, 2> tail;
};

ShardResult run_shard(const BlockSimulator& sim, const ExperimentConfig& cfg, std::uint64_t b0,
                      std::uint64_t b1) {
  ShardResult r;
  RollingCorrelator corr(cfg.grid(), cfg.correlation);
  const std::int64_t window_ps = to_ps_exact(cfg.window, "window") + std::abs(to_ps_exact(cfg.grid().center_offset, "center_offset"));
  const std::int64_t head_limit = sim.block_start_ps(b0) + sim.late_reach() + window_ps;
  const std::int64_t tail_limit =
      (b1 < sim.block_count() ? sim.block_start_ps(b1) : kNoHorizon) - sim.early_reach() - window_ps;
  for (std::uint64_t b = b0; b < b1; ++b) {
    auto out = sim.run_block(b);
    r.summary.interfering_pairs += out.interfering_pairs;
    for (std::size_t d = 0; d < 2; ++d) {
      r.summary.clicks[d] += out.clicks[d].size();
      for (auto t : out.clicks[d]) {
        if (t <= head_limit) r.head[d].push_back(t);
        if (t >= tail_limit) r.tail[d].push_back(t);
      }
    }
    corr.push(out.clicks[0], out.clicks[1], b + 1 < b1 ? sim.horizon_before(b + 1) : kNoHorizon);
  }
  corr.finish();
  for (auto* side : {&r.head, &r.tail}) {
    for (auto& v : *side) std::sort(v.begin(), v.end());
  }
  r.summary.histogram = corr.take();
  return r;
}

// Cross-correlation counts of pairs with one click on each side of a shard boundary.
void add_boundary_pairs(Histogram& h, const ShardResult& left, const ShardResult& right) {
  PsGrid grid(h.grid);
  auto count = [&](const std::vector<std::int64_t>& d1, const std::vector<std::int64_t>& d2) {
    std::size_t start = 0;
    for (const auto t1 : d1) {
      const std::int64_t lo = t1 + grid.offset - grid.window;
      const std::int64_t hi = t1 + grid.offset + grid.window;
      while (start < d2.size() && d2[start] < lo) ++start;
      for (std::size_t j = start; j < d2.size() && d2[j] < hi; ++j) {
        ++h.counts[static_cast<std::size_t>((d2[j] - lo) / grid.bin_width)];
      }
    }
  };
  count(left.tail[0], right.head[1]);
  count(right.head[0], left.tail[1]);
}

std::vector<std::int64_t> timestamps(std::span<const Click> clicks, const char* name) {
  std::vector<std::int64_t> out;
  out.reserve(clicks.size());
  for (const auto& c : clicks) {
    if (!out.empty() && c.timestamp_ps < out.back()) {
      throw InputError(std::string("click stream ") + name + " is not sorted by time");
    }
    out.push_back(c.timestamp_ps);
  }
  return out;
}

std::vector<Click> to_clicks(const std::vector<std::int64_t>& ts, Detector det) {
  std::vector<Click> out;
  out.reserve(ts.size());
  for (auto t : ts) out.push_back({det, t});
  return out;
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter)
    : state_(mix64(seed + kGolden) ^ mix64(stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL)) {
  state_ += counter * kGolden;
}

StreamRng::result_type StreamRng::operator()() {
  state_ += kGolden;
  return mix64(state_);
}

double StreamRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

PairDetection sample_pair_detection(double delta, double gamma, StreamRng& rng) {
  return sample_pair_detection(delta, gamma, gamma, rng);
}

PairDetection sample_pair_detection(double delta, double gamma_a, double gamma_b, StreamRng& rng) {
  boost::random::exponential_distribution<double> da(gamma_a);
  boost::random::exponential_distribution<double> db(gamma_b);
  PairDetection r;
  r.t1 = da(rng);
  r.t2 = db(rng);
  const double dt = r.t1 - r.t2;
  // |<x, y>| / ((|x|^2 + |y|^2) / 2) for the two time-ordered amplitudes.
  const double overlap = gamma_a == gamma_b ? 1.0 : 1.0 / std::cosh(0.5 * (gamma_a - gamma_b) * dt);
  const double p_opposite = 0.5 * (1.0 - overlap * std::cos(2.0 * kPi * delta * dt));
  r.outcome = rng.uniform() < p_opposite ? PairOutcome::opposite_ports : PairOutcome::same_port;
  return r;
}

std::uint64_t block_count(const ExperimentConfig& cfg) {
  cfg.validate();
  return (cfg.pulse_count() + kPulsesPerBlock - 1) / kPulsesPerBlock;
}

ClickStreams simulate_blocks(const ExperimentConfig& cfg, const BlinkingParams& blinking,
                             std::uint64_t first_block, std::uint64_t last_block) {
  BlockSimulator sim(cfg, blinking);
  last_block = std::min(last_block, sim.block_count());
  std::array<std::vector<std::int64_t>, 2> all;
  for (std::uint64_t b = first_block; b < last_block; ++b) {
    auto out = sim.run_block(b);
    for (std::size_t d = 0; d < 2; ++d) {
      const auto mid = static_cast<long>(all[d].size());
      all[d].insert(all[d].end(), out.clicks[d].begin(), out.clicks[d].end());
      std::inplace_merge(all[d].begin(), all[d].begin() + mid, all[d].end());
    }
  }
  return {to_clicks(all[0], Detector::d1), to_clicks(all[1], Detector::d2)};
}

SimulationResult simulate_run(const ExperimentConfig& cfg, const BlinkingParams& blinking) {
  BlockSimulator sim(cfg, blinking);
  SimulationResult result;
  result.summary.pulses_simulated = sim.pulses();
  RollingCorrelator corr(cfg.grid(), cfg.correlation);
  std::array<std::vector<std::int64_t>, 2> all;
  for (std::uint64_t b = 0; b < sim.block_count(); ++b) {
    auto out = sim.run_block(b);
    result.summary.interfering_pairs += out.interfering_pairs;
    for (std::size_t d = 0; d < 2; ++d) {
      const auto mid = static_cast<long>(all[d].size());
      all[d].insert(all[d].end(), out.clicks[d].begin(), out.clicks[d].end());
      std::inplace_merge(all[d].begin(), all[d].begin() + mid, all[d].end());
    }
    corr.push(out.clicks[0], out.clicks[1], sim.horizon_before(b + 1));
  }
  corr.finish();
  result.summary.histogram = corr.take();
  result.summary.clicks = {all[0].size(), all[1].size()};
  result.clicks = {to_clicks(all[0], Detector::d1), to_clicks(all[1], Detector::d2)};
  return result;
}

RunSummary simulate_histogram(const ExperimentConfig& cfg, const BlinkingParams& blinking,
                              unsigned workers) {
  BlockSimulator sim(cfg, blinking);
  const std::uint64_t blocks = sim.block_count();
  std::uint64_t shards = std::max<std::uint64_t>(1, std::min<std::uint64_t>(workers, blocks));
  if (cfg.correlation == CorrelationMode::start_stop) shards = 1;

  std::vector<ShardResult> results(shards);
  auto bounds = [&](std::uint64_t s) { return s * blocks / shards; };
  if (shards == 1) {
    results[0] = run_shard(sim, cfg, 0, blocks);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(shards);
    for (std::uint64_t s = 0; s < shards; ++s) {
      threads.emplace_back([&, s] { results[s] = run_shard(sim, cfg, bounds(s), bounds(s + 1)); });
    }
  }

  RunSummary total;
  total.pulses_simulated = sim.pulses();
  total.histogram = Histogram(cfg.grid());
  for (std::uint64_t s = 0; s < shards; ++s) {
    const auto& r = results[s].summary;
    total.clicks[0] += r.clicks[0];
    total.clicks[1] += r.clicks[1];
    total.interfering_pairs += r.interfering_pairs;
    total.histogram = merge_histograms(total.histogram, r.histogram);
    if (s + 1 < shards) add_boundary_pairs(total.histogram, results[s], results[s + 1]);
  }
  return total;
}

Histogram correlate(std::span<const Click> d1, std::span<const Click> d2, double window,
                    double bin_width, CorrelationMode mode) {
  const BinGrid grid = BinGrid::make(window, bin_width);
  RollingCorrelator corr(grid, mode);
  corr.push(timestamps(d1, "D1"), timestamps(d2, "D2"), kNoHorizon);
  return corr.take();
}

Histogram merge_histograms(const Histogram& a, const Histogram& b) {
  if (!a.grid.matches(b.grid) || a.counts.size() != b.counts.size()) {
    throw GeometryError("cannot merge histograms on different grids");
  }
  Histogram out = a;
  for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += b.counts[i];
  return out;
}

void write_click_dump(const std::filesystem::path& path, const ClickStreams& clicks) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open click dump for writing: " + path.string());
  f.write(kDumpMagic, sizeof kDumpMagic);
  std::size_t i = 0, j = 0;
  const auto& a = clicks[0];
  const auto& b = clicks[1];
  while (i < a.size() || j < b.size()) {
    const bool take_a = j >= b.size() || (i < a.size() && a[i].timestamp_ps <= b[j].timestamp_ps);
    const Click& c = take_a ? a[i++] : b[j++];
    if (c.timestamp_ps < 0) throw InputError("click dump cannot store negative timestamps");
    unsigned char rec[9];
    rec[0] = static_cast<unsigned char>(c.detector);
    auto v = static_cast<std::uint64_t>(c.timestamp_ps);
    for (int k = 0; k < 8; ++k) rec[1 + k] = static_cast<unsigned char>((v >> (8 * k)) & 0xFF);
    f.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
  if (!f) throw IoError("failed writing click dump: " + path.string());
}

ClickStreams read_click_dump(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open click dump: " + path.string());
  char magic[sizeof kDumpMagic];
  if (!f.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kDumpMagic)) {
    throw InputError("not a TPQI1 click dump: " + path.string());
  }
  ClickStreams out;
  unsigned char rec[9];
  while (true) {
    f.read(reinterpret_cast<char*>(rec), sizeof rec);
    const auto got = f.gcount();
    if (got == 0) break;
    if (got != static_cast<std::streamsize>(sizeof rec)) {
      throw InputError("truncated record in click dump: " + path.string());
    }
    if (rec[0] > 1) throw InputError("invalid detector id in click dump: " + path.string());
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(rec[1 + k]) << (8 * k);
    if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw InputError("timestamp out of range in click dump: " + path.string());
    }
    auto& stream = out[rec[0]];
    const auto ts = static_cast<std::int64_t>(v);
    if (!stream.empty() && ts < stream.back().timestamp_ps) {
      throw InputError("click dump is not time-ordered: " + path.string());
    }
    stream.push_back({static_cast<Detector>(rec[0]), ts});
  }
  return out;
}

}  // namespace tpqi::mc
