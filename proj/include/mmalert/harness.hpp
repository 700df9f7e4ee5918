#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "mmalert/common.hpp"
#include "mmalert/detector.hpp"
#include "mmalert/estimator.hpp"
#include "mmalert/scenario.hpp"
#include "mmalert/waveform.hpp"

namespace mmalert {

// ---------------------------------------------------------------------------
// Scenario presets
// ---------------------------------------------------------------------------

// Operating point with clear Doppler tracks and occasional misses: echo
// +10 dB over the noise floor at boresight, strongest static path +30 dB,
// leakage +20 dB.
inline ScenarioConfig moderate_snr_preset() {
  ScenarioConfig cfg;
  cfg.noise_power_db = -30.0;
  cfg.blocker.scatter_gain_db = 10.0;
  cfg.static_clutter = {{0, 0.0}, {3, -6.0}};
  cfg.los_leakage_db = -10.0;
  return cfg;
}

// Effectively noiseless operating point. The echo level is defined relative
// to the noise floor, so instead of a literal zero floor this preset drops
// the floor to -100 dB and raises the scatter gain to keep the echo at
// -10 dB absolute.
inline ScenarioConfig noiseless_preset() {
  ScenarioConfig cfg = moderate_snr_preset();
  cfg.noise_power_db = -100.0;
  cfg.blocker.scatter_gain_db = 90.0;
  return cfg;
}

// ---------------------------------------------------------------------------
// Experiment specification
// ---------------------------------------------------------------------------

struct ValueRange {
  double lo = 0;
  double hi = 0;
};

// Trajectory sampler: uniform draws over the configured ranges, rejected
// until the trial's target label and the observability predicates hold. The
// predicates restrict samples to the corridor the beams actually sweep —
// fully out-of-sector trajectories carry no AoA information and are
// unanswerable by construction.
struct SamplerConfig {
  ValueRange x1{0.3, 3.2};
  ValueRange y1{0.8, 2.2};
  ValueRange v{0.8, 1.25};
  ValueRange theta{0.0, kTwoPi};
  double sector_lo_deg = 135.0;  // AoA window swept by the default beams
  double sector_hi_deg = 176.0;
  double min_sector_fraction = 0.6;  // of period midpoints inside the window
  int min_beams_traversed = 2;       // distinct best beams along the path
  // Blocking samples only:
  double min_descent_m_s = 0.35;     // v |sin theta|
  ValueRange crossing_x{0.5, 3.0};   // crossing abscissa inside the segment
  ValueRange crossing_time_s{1.6, 3.0};  // absolute crossing-time window
  int max_attempts = 200000;
};

struct ExperimentSpec {
  ScenarioConfig base;
  int trial_count = 100;
  double blocking_fraction = 0.8;
  SamplerConfig sampler;
  dvec sensing_durations_s = {0.6, 1.0, 1.4};
  double decision_threshold = 0.9;
  std::uint64_t rng_seed = 1;

  DetectorConfig detector;
  SmoothingConfig smoothing;
  MatchWeights weights;
  IndicatorKind indicator = IndicatorKind::Geometric;
  // Search grid defaults to default_search_grid(base.radio.tx_rx_distance_m).
  std::optional<SearchGrid> grid;

  void validate() const {
    base.validate();
    if (trial_count < 1) throw config_error("trial_count must be >= 1");
    if (blocking_fraction < 0 || blocking_fraction > 1)
      throw config_error("blocking_fraction must lie in [0, 1]");
    if (sensing_durations_s.empty())
      throw config_error("need at least one sensing duration");
    const double T_d = base.radio.sweep_period_s();
    double prev = 0;
    for (double dur : sensing_durations_s) {
      const long k = std::lround(dur / T_d);
      if (k < 1 || std::fabs(static_cast<double>(k) * T_d - dur) > 1e-6)
        throw config_error("sensing durations must be positive multiples of the sweep period");
      if (dur <= prev) throw config_error("sensing durations must be strictly ascending");
      prev = dur;
    }
  }

  int periods_for(double duration_s) const {
    return static_cast<int>(std::lround(duration_s / base.radio.sweep_period_s()));
  }
  int max_periods() const { return periods_for(sensing_durations_s.back()); }
};

// ---------------------------------------------------------------------------
// Trial execution
// ---------------------------------------------------------------------------

struct TrialOutcome {
  double duration_s = 0;
  bool no_detection = false;  // too few detections to smooth/estimate
  PredictionResult prediction;
  bool correct = false;
};

struct TrialRecord {
  int trial_id = 0;
  BlockerTruth truth;
  bool truth_blocks = false;
  std::optional<double> truth_crossing_s;
  std::vector<TrialOutcome> outcomes;  // one per requested sensing duration
};

namespace detail {

inline constexpr std::uint64_t kTagSampler = 11;
inline constexpr std::uint64_t kTagScenario = 12;

inline bool in_range(double v, const ValueRange& r) { return v >= r.lo && v <= r.hi; }

// Observability predicates shared by both label classes.
inline bool corridor_ok(const BlockerTruth& cand, const ScenarioConfig& base,
                        const SamplerConfig& s, int periods) {
  const double T_d = base.radio.sweep_period_s();
  const double d = base.radio.tx_rx_distance_m;
  const double lo = deg_to_rad(s.sector_lo_deg), hi = deg_to_rad(s.sector_hi_deg);
  int in_sector = 0;
  std::vector<char> beam_seen(base.beams.surveillance_boresights_deg.size(), 0);
  const double floor_power = db_to_power(base.beams.sidelobe_floor_db);
  for (int k = 1; k <= periods; ++k) {
    const Point p = blocker_position_at(cand, (static_cast<double>(k) - 0.5) * T_d);
    if (p.y <= 0) return false;  // must stay in the sensed half-plane
    const double aoa = angles_at(p, d).phi_r;
    if (aoa >= lo && aoa <= hi) ++in_sector;
    double best_gain = 0;
    std::size_t best_beam = 0;
    for (std::size_t b = 0; b < beam_seen.size(); ++b) {
      const double g = beam_gain(make_beam_model(base.beams, static_cast<int>(b) + 1), aoa);
      if (g > best_gain) {
        best_gain = g;
        best_beam = b;
      }
    }
    if (best_gain > floor_power) beam_seen[best_beam] = 1;
  }
  if (in_sector < static_cast<int>(std::ceil(s.min_sector_fraction * periods)))
    return false;
  int beams = 0;
  for (char b : beam_seen) beams += b;
  return beams >= s.min_beams_traversed;
}

inline BlockerTruth sample_trajectory(const ExperimentSpec& spec, int trial_id,
                                      bool target_blocks) {
  auto rng = make_rng(derive_seed(spec.rng_seed,
                                  {kTagSampler, static_cast<std::uint64_t>(trial_id)}));
  const SamplerConfig& s = spec.sampler;
  const double d = spec.base.radio.tx_rx_distance_m;
  const int periods = spec.max_periods();
  for (int attempt = 0; attempt < s.max_attempts; ++attempt) {
    BlockerTruth cand = spec.base.blocker;
    cand.present = true;
    cand.x1_m = s.x1.lo + uniform01(rng) * (s.x1.hi - s.x1.lo);
    cand.y1_m = s.y1.lo + uniform01(rng) * (s.y1.hi - s.y1.lo);
    cand.speed_m_s = s.v.lo + uniform01(rng) * (s.v.hi - s.v.lo);
    cand.heading_rad = wrap_two_pi(s.theta.lo + uniform01(rng) * (s.theta.hi - s.theta.lo));

    const BlockageLabel label = ground_truth_blockage(cand, d);
    if (label.blocks != target_blocks) continue;
    if (target_blocks) {
      if (cand.speed_m_s * std::fabs(std::sin(cand.heading_rad)) < s.min_descent_m_s)
        continue;
      if (!in_range(*label.crossing_time_s, s.crossing_time_s)) continue;
      const double x_cross = cand.x1_m + cand.speed_m_s * *label.crossing_time_s *
                                             std::cos(cand.heading_rad);
      if (!in_range(x_cross, s.crossing_x)) continue;
    }
    if (!corridor_ok(cand, spec.base, s, periods)) continue;
    return cand;
  }
  throw pipeline_error("trajectory sampling failed: ranges inconsistent with the requested quota");
}

}  // namespace detail

// Number of trials with a blocking target label (the leading ones).
inline int blocking_quota(const ExperimentSpec& spec) {
  return static_cast<int>(std::lround(spec.blocking_fraction * spec.trial_count));
}

// Runs one trial end to end: sample a trajectory matching the trial's target
// label, synthesize every dwell, run cancellation + CAF + extraction once,
// then smooth/estimate/predict on the leading periods of each requested
// sensing duration. A trial whose detections are too sparse to smooth is a
// valid "no detection" outcome predicting no blockage.
inline TrialRecord run_trial(const ExperimentSpec& spec, int trial_id,
                             const CafProcessor& processor) {
  const bool target_blocks = trial_id < blocking_quota(spec);
  TrialRecord rec;
  rec.trial_id = trial_id;
  rec.truth = detail::sample_trajectory(spec, trial_id, target_blocks);

  const double d = spec.base.radio.tx_rx_distance_m;
  const BlockageLabel label = ground_truth_blockage(rec.truth, d);
  rec.truth_blocks = label.blocks;
  rec.truth_crossing_s = label.crossing_time_s;

  ScenarioConfig scen = spec.base;
  scen.blocker = rec.truth;
  scen.num_sweep_periods = spec.max_periods();
  scen.rng_seed = derive_seed(spec.rng_seed,
                              {detail::kTagScenario, static_cast<std::uint64_t>(trial_id)});

  const double T_d = scen.radio.sweep_period_s();
  FeatureMatrix all_features;
  all_features.sweep_period_s = T_d;
  for (int i = 1; i <= scen.num_sweep_periods; ++i) {
    std::vector<CafSurface> surfaces;
    surfaces.reserve(static_cast<std::size_t>(scen.radio.num_beams));
    for (int m = 1; m <= scen.radio.num_beams; ++m)
      surfaces.push_back(processor.process_dwell(synth_dwell(scen, i, m)));
    all_features.features.push_back(extract_feature(surfaces, spec.detector));
  }

  const SearchGrid grid = spec.grid ? *spec.grid : default_search_grid(d);
  for (double duration : spec.sensing_durations_s) {
    const int k_dur = spec.periods_for(duration);
    FeatureMatrix prefix;
    prefix.sweep_period_s = T_d;
    prefix.features.assign(all_features.features.begin(),
                           all_features.features.begin() + k_dur);
    TrialOutcome outcome;
    outcome.duration_s = duration;
    try {
      const SmoothedTraces traces = smooth_traces(prefix, scen.beams, spec.smoothing);
      const EstimateResult est = estimate_trajectory(
          traces, grid, spec.weights, T_d, d, scen.radio.carrier_frequency_hz);
      outcome.prediction = predict(est, d, k_dur * T_d, spec.indicator,
                                   spec.decision_threshold);
    } catch (const pipeline_error&) {
      outcome.no_detection = true;  // predicts "no blockage"
    }
    outcome.correct = (outcome.prediction.blocks == rec.truth_blocks);
    rec.outcomes.push_back(std::move(outcome));
  }
  return rec;
}

// Runs all trials, optionally across threads. Trial outputs land in a
// trial-indexed vector, so the result is identical for any thread count.
inline std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec,
                                               int threads = 1) {
  spec.validate();
  const std::size_t n_samples = spec.base.radio.samples_per_dwell();
  const CafProcessor processor(n_samples, 1.0 / spec.base.radio.sample_rate_hz,
                               spec.detector);
  std::vector<TrialRecord> records(static_cast<std::size_t>(spec.trial_count));
  const int n_threads = std::max(1, threads);
  if (n_threads == 1) {
    for (int t = 0; t < spec.trial_count; ++t)
      records[static_cast<std::size_t>(t)] = run_trial(spec, t, processor);
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= spec.trial_count) return;
        records[static_cast<std::size_t>(t)] = run_trial(spec, t, processor);
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return records;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct DurationAccuracyRow {
  double duration_s = 0;
  int correct = 0;
  int total = 0;
  double accuracy = 0;
};

struct WarningAccuracyRow {
  double bin_center_s = 0;
  int predicted_blocking = 0;
  int total = 0;
  double accuracy = 0;
};

inline std::vector<DurationAccuracyRow> accuracy_vs_duration(
    const std::vector<TrialRecord>& trials) {
  if (trials.empty()) return {};
  std::vector<DurationAccuracyRow> table;
  for (std::size_t di = 0; di < trials.front().outcomes.size(); ++di) {
    DurationAccuracyRow row;
    row.duration_s = trials.front().outcomes[di].duration_s;
    for (const TrialRecord& t : trials) {
      ++row.total;
      row.correct += t.outcomes[di].correct ? 1 : 0;
    }
    row.accuracy = static_cast<double>(row.correct) / static_cast<double>(row.total);
    table.push_back(row);
  }
  return table;
}

// Bins the truly blocking trials by the time between the prediction instant
// (end of the last sensing duration) and the true crossing; per-bin accuracy
// is the fraction predicted blocking. Empty bins are absent from the table.
inline std::vector<WarningAccuracyRow> accuracy_vs_warning_time(
    const std::vector<TrialRecord>& trials, double bin_width_s = 0.6) {
  if (bin_width_s <= 0) throw config_error("bin width must be positive");
  std::vector<WarningAccuracyRow> table;
  auto row_for = [&](double center) -> WarningAccuracyRow& {
    for (auto& r : table)
      if (std::fabs(r.bin_center_s - center) < 1e-9) return r;
    table.push_back({center, 0, 0, 0});
    return table.back();
  };
  for (const TrialRecord& t : trials) {
    if (!t.truth_blocks || !t.truth_crossing_s || t.outcomes.empty()) continue;
    const TrialOutcome& out = t.outcomes.back();
    const double warning = *t.truth_crossing_s - out.duration_s;
    const double center = std::round(warning / bin_width_s) * bin_width_s;
    WarningAccuracyRow& row = row_for(center);
    ++row.total;
    row.predicted_blocking += out.prediction.blocks ? 1 : 0;
  }
  std::sort(table.begin(), table.end(),
            [](const WarningAccuracyRow& a, const WarningAccuracyRow& b) {
              return a.bin_center_s < b.bin_center_s;
            });
  for (auto& r : table)
    r.accuracy = static_cast<double>(r.predicted_blocking) / static_cast<double>(r.total);
  return table;
}

inline std::vector<DurationAccuracyRow> accuracy_vs_duration(
    const ExperimentSpec& spec, int threads = 1) {
  return accuracy_vs_duration(run_experiment(spec, threads));
}

inline std::vector<WarningAccuracyRow> accuracy_vs_warning_time(
    const ExperimentSpec& spec, int threads = 1, double bin_width_s = 0.6) {
  return accuracy_vs_warning_time(run_experiment(spec, threads), bin_width_s);
}

}  // namespace mmalert
