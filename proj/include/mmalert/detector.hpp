#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mmalert/clutter.hpp"
#include "mmalert/common.hpp"
#include "mmalert/dsp.hpp"
#include "mmalert/waveform.hpp"

namespace mmalert {

struct DopplerGrid {
  // The spacing matches the dwell-length resolution 1/T_b by default and the
  // span covers the bistatic Doppler of walking-speed blockers at 60 GHz.
  // Bounds are multiples of the step so the grid contains 0 and stays
  // symmetric about it.
  double min_hz = -520.0;
  double max_hz = 520.0;
  double step_hz = 40.0;

  std::size_t size() const {
    if (step_hz <= 0 || max_hz < min_hz) throw config_error("bad Doppler grid");
    return static_cast<std::size_t>(
               std::floor((max_hz - min_hz) / step_hz + 1e-9)) + 1;
  }
  double value(std::size_t i) const {
    return min_hz + static_cast<double>(i) * step_hz;
  }
  dvec values() const {
    dvec v(size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = value(i);
    return v;
  }
};

struct CafSurface {
  int period_index = 1;
  int beam_index = 1;
  dvec frequencies_hz;          // the grid realized as values
  dvec magnitudes;              // |R(f)| after maximizing over delay bins
  std::vector<int> best_delay_bin;  // arg-max delay per frequency
};

struct FeatureVector {
  int period_index = 1;
  bool detected = false;
  double doppler_hz = 0;           // meaningful only when detected
  int beam_index = -1;             // meaningful only when detected
  double caf_peak_magnitude = 0;   // meaningful only when detected
};

struct FeatureMatrix {
  std::vector<FeatureVector> features;  // period indices contiguous from 1
  double sweep_period_s = 0;
};

// Cell-averaging threshold: beta(f) = mean of R over the 2W+1 cells centered
// on f (the cell under test included), shrinking the window at the grid
// edges to the available cells. Optionally the test cell plus guard cells on
// each side are excluded from the average (conventional CA-CFAR).
inline dvec cfar_threshold(const CafSurface& surface, int half_window,
                           bool exclude_cut_and_guards = false,
                           int num_guard = 2) {
  const std::size_t n = surface.magnitudes.size();
  if (half_window < 1) throw pipeline_error("CFAR half window must be >= 1");
  if (n < 2 * static_cast<std::size_t>(half_window) + 1)
    throw pipeline_error("CFAR window larger than the grid");
  dvec beta(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(
        0, static_cast<std::ptrdiff_t>(i) - half_window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(n) - 1,
        static_cast<std::ptrdiff_t>(i) + half_window);
    double acc = 0;
    int cnt = 0;
    for (std::ptrdiff_t p = lo; p <= hi; ++p) {
      if (exclude_cut_and_guards &&
          std::abs(p - static_cast<std::ptrdiff_t>(i)) <= num_guard)
        continue;
      acc += surface.magnitudes[static_cast<std::size_t>(p)];
      ++cnt;
    }
    beta[i] = cnt > 0 ? acc / cnt : 0.0;
  }
  return beta;
}

struct DetectorConfig {
  DopplerGrid grid;
  ClutterConfig clutter;
  int max_delay_bins = 5;
  int cfar_half_window = 8;         // W
  double min_abs_doppler_hz = 80.0; // zero-Doppler exclusion band, 2 * step
  // Threshold multiplier applied by extract_feature: a cell detects when
  // R > detection_scale * beta. At 1.0 the comparison is the bare local
  // mean, which fires on nearly every noise-only surface; the default is
  // calibrated so noise-only periods stay below a 5% false-alarm rate.
  double detection_scale = 2.5;
  bool cfar_exclude_cut = false;
  int cfar_num_guard = 2;
};

// Per-period feature extraction: among all (frequency, beam) cells outside
// the zero-Doppler exclusion band with R above the scaled CFAR threshold,
// pick the cell with the largest CAF magnitude. No qualifying cell is a
// valid no-detection result. Beams are scanned in index order and the
// comparison is strict, so exact ties resolve to the lower beam index.
inline FeatureVector extract_feature(const std::vector<CafSurface>& surfaces,
                                     const DetectorConfig& cfg) {
  if (surfaces.empty()) throw pipeline_error("no surfaces for the period");
  FeatureVector out;
  out.period_index = surfaces.front().period_index;
  double best = 0;
  for (const CafSurface& s : surfaces) {
    if (s.period_index != out.period_index)
      throw pipeline_error("surfaces from mixed periods");
    const dvec beta = cfar_threshold(s, cfg.cfar_half_window,
                                     cfg.cfar_exclude_cut, cfg.cfar_num_guard);
    for (std::size_t i = 0; i < s.magnitudes.size(); ++i) {
      if (std::fabs(s.frequencies_hz[i]) < cfg.min_abs_doppler_hz) continue;
      if (s.magnitudes[i] <= cfg.detection_scale * beta[i]) continue;
      if (s.magnitudes[i] > best) {
        best = s.magnitudes[i];
        out.detected = true;
        out.doppler_hz = s.frequencies_hz[i];
        out.beam_index = s.beam_index;
        out.caf_peak_magnitude = s.magnitudes[i];
      }
    }
  }
  return out;
}

// Cross-ambiguity computation with a cached chirp-z plan, plus the per-dwell
// clutter-cancellation front end. For every grid frequency f,
//   R(f) = max_{k in [0, max_delay_bins)}
//          | sum_n y_s[n] conj(y_r[n-k]) exp(+j 2 pi f n T_s) |,
// with out-of-range reference samples treated as zero. The correlation
// kernel conjugates the echo's Doppler phasor, so an echo synthesized with
// exp(-j 2 pi f0 n T_s) peaks at +f0. Each delay's frequency sweep is one
// chirp-z transform over the grid; exp(+j 2 pi f n Ts) equals
// exp(-j 2 pi (-f) n Ts), so the plan evaluates the negated grid, which
// keeps ascending output order in f.
class CafProcessor {
 public:
  CafProcessor(std::size_t n_samples, double sample_period_s,
               const DetectorConfig& cfg)
      : cfg_(cfg),
        sample_period_s_(sample_period_s),
        plan_(n_samples, cfg.grid.size(), -cfg.grid.min_hz, -cfg.grid.step_hz,
              sample_period_s) {}

  const DetectorConfig& config() const { return cfg_; }

  CafSurface surface(const cvec& surveillance_residual, const cvec& reference,
                     int period_index, int beam_index) const {
    if (surveillance_residual.size() != plan_.input_size() ||
        reference.size() != plan_.input_size())
      throw pipeline_error("dwell length does not match the processor plan");
    CafSurface out;
    out.period_index = period_index;
    out.beam_index = beam_index;
    out.frequencies_hz = cfg_.grid.values();
    const std::size_t j = out.frequencies_hz.size();
    out.magnitudes.assign(j, 0.0);
    out.best_delay_bin.assign(j, 0);
    cvec product(plan_.input_size());
    for (int k = 0; k < cfg_.max_delay_bins; ++k) {
      const std::size_t kk = static_cast<std::size_t>(k);
      for (std::size_t i = 0; i < product.size(); ++i)
        product[i] = (i >= kk)
                         ? surveillance_residual[i] * std::conj(reference[i - kk])
                         : cplx{};
      const cvec spectrum = plan_.run(product);
      for (std::size_t fi = 0; fi < j; ++fi) {
        const double mag = std::abs(spectrum[fi]);
        if (mag > out.magnitudes[fi]) {
          out.magnitudes[fi] = mag;
          out.best_delay_bin[fi] = k;
        }
      }
    }
    return out;
  }

  CafSurface process_dwell(const DwellPair& dwell) const {
    const cvec residual = cancel_clutter(dwell.surveillance_samples,
                                         dwell.reference_samples, cfg_.clutter);
    return surface(residual, dwell.reference_samples, dwell.period_index,
                   dwell.beam_index);
  }

 private:
  DetectorConfig cfg_;
  double sample_period_s_;
  detail::CztPlan plan_;
};

// One-shot CAF surface (plan built on the fly; use CafProcessor for streams).
inline CafSurface compute_caf(const cvec& surveillance_residual,
                              const cvec& reference, double sample_period_s,
                              const DopplerGrid& grid, int max_delay_bins) {
  if (surveillance_residual.size() != reference.size())
    throw pipeline_error("surveillance/reference length mismatch");
  if (surveillance_residual.empty()) throw pipeline_error("empty input");
  if (max_delay_bins < 1) throw pipeline_error("need at least one delay bin");
  DetectorConfig cfg;
  cfg.grid = grid;
  cfg.max_delay_bins = max_delay_bins;
  return CafProcessor(surveillance_residual.size(), sample_period_s, cfg)
      .surface(surveillance_residual, reference, 1, 1);
}

}  // namespace mmalert
