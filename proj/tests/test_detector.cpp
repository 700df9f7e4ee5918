#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "mmalert/detector.hpp"
#include "mmalert/harness.hpp"

using namespace mmalert;
using Catch::Approx;

namespace {

constexpr double kTs = 1e-6;
constexpr std::size_t kN = 25000;

cvec doppler_copy(const cvec& s, double f_hz, int delay) {
  cvec out(s.size(), cplx{});
  for (std::size_t n = static_cast<std::size_t>(delay); n < s.size(); ++n)
    out[n] = s[n - static_cast<std::size_t>(delay)] *
             std::polar(1.0, -kTwoPi * f_hz * static_cast<double>(n) * kTs);
  return out;
}

CafSurface make_surface(int period, int beam, const dvec& mags) {
  CafSurface s;
  s.period_index = period;
  s.beam_index = beam;
  s.frequencies_hz = DopplerGrid{}.values();
  s.magnitudes = mags;
  s.best_delay_bin.assign(mags.size(), 0);
  return s;
}

}  // namespace

TEST_CASE("Doppler grid realizes symmetric multiples of the step") {
  DopplerGrid grid;
  REQUIRE(grid.size() == 27);
  REQUIRE(grid.value(0) == Approx(-520.0));
  REQUIRE(grid.value(13) == Approx(0.0).margin(1e-9));
  REQUIRE(grid.value(26) == Approx(520.0));
  grid.step_hz = 0;
  REQUIRE_THROWS_AS(grid.size(), config_error);
}

TEST_CASE("a synthetic echo peaks at its own Doppler with full coherent gain") {
  const cvec ref = gen_tx_baseband(21, kN);
  const cvec srv = doppler_copy(ref, 200.0, 0);
  const CafSurface s = compute_caf(srv, ref, kTs, DopplerGrid{}, 1);

  std::size_t best = 0;
  for (std::size_t i = 1; i < s.magnitudes.size(); ++i)
    if (s.magnitudes[i] > s.magnitudes[best]) best = i;
  REQUIRE(s.frequencies_hz[best] == Approx(200.0));
  REQUIRE(s.magnitudes[best] == Approx(static_cast<double>(kN)).epsilon(1e-9));
  REQUIRE(s.best_delay_bin[best] == 0);
  // Neighbouring grid cells sit on Dirichlet zeros of the 25 ms window.
  REQUIRE(s.magnitudes[best + 1] < 1e-6 * static_cast<double>(kN));
  REQUIRE(s.magnitudes[best - 1] < 1e-6 * static_cast<double>(kN));
}

TEST_CASE("delay search recovers a delayed negative-Doppler echo") {
  const cvec ref = gen_tx_baseband(22, kN);
  const cvec srv = doppler_copy(ref, -120.0, 3);
  const CafSurface s = compute_caf(srv, ref, kTs, DopplerGrid{}, 5);

  std::size_t best = 0;
  for (std::size_t i = 1; i < s.magnitudes.size(); ++i)
    if (s.magnitudes[i] > s.magnitudes[best]) best = i;
  REQUIRE(s.frequencies_hz[best] == Approx(-120.0));
  REQUIRE(s.best_delay_bin[best] == 3);
  // First three products vanish (zero-padded reference), the rest are unit.
  REQUIRE(s.magnitudes[best] == Approx(static_cast<double>(kN - 3)).epsilon(1e-9));
}

TEST_CASE("noise-only surfaces stay near the incoherent level") {
  auto rng = make_rng(23);
  const cvec ref = gen_tx_baseband(24, kN);
  cvec srv(kN);
  for (auto& v : srv) v = mmalert::detail::gaussian_cplx(rng);
  const CafSurface s = compute_caf(srv, ref, kTs, DopplerGrid{}, 1);
  for (double m : s.magnitudes) REQUIRE(m < 5.0 * std::sqrt(static_cast<double>(kN)));
}

TEST_CASE("cell-averaging threshold against a brute-force oracle") {
  auto rng = make_rng(25);
  dvec mags(27);
  for (auto& m : mags) m = 1.0 + mmalert::detail::uniform01(rng);
  const CafSurface s = make_surface(1, 1, mags);

  const int w = 3;
  const dvec beta = cfar_threshold(s, w);
  for (int i = 0; i < 27; ++i) {
    double acc = 0;
    int cnt = 0;
    for (int p = std::max(0, i - w); p <= std::min(26, i + w); ++p) {
      acc += mags[static_cast<std::size_t>(p)];
      ++cnt;
    }
    REQUIRE(beta[static_cast<std::size_t>(i)] == Approx(acc / cnt).margin(1e-12));
  }

  // Excluding the cell under test plus two guards on each side.
  const dvec beta_x = cfar_threshold(s, w, true, 2);
  for (int i = 0; i < 27; ++i) {
    double acc = 0;
    int cnt = 0;
    for (int p = std::max(0, i - w); p <= std::min(26, i + w); ++p) {
      if (std::abs(p - i) <= 2) continue;
      acc += mags[static_cast<std::size_t>(p)];
      ++cnt;
    }
    const double want = cnt > 0 ? acc / cnt : 0.0;
    REQUIRE(beta_x[static_cast<std::size_t>(i)] == Approx(want).margin(1e-12));
  }

  REQUIRE_THROWS_AS(cfar_threshold(s, 0), pipeline_error);
  REQUIRE_THROWS_AS(cfar_threshold(s, 14), pipeline_error);
}

TEST_CASE("feature extraction picks the strongest qualifying cell") {
  DetectorConfig cfg;
  cfg.detection_scale = 2.0;

  dvec b1(27, 1.0), b2(27, 1.0);
  b1[18] = 10.0;  // +200 Hz
  b2[9] = 12.0;   // -160 Hz, stronger
  // +40 Hz: above every threshold yet inside the exclusion band, so it must
  // be ignored. Kept moderate so it does not inflate its neighbors' local
  // averages past the real candidates.
  b2[14] = 20.0;
  const std::vector<CafSurface> surfaces = {make_surface(4, 1, b1),
                                            make_surface(4, 2, b2)};

  const FeatureVector g = extract_feature(surfaces, cfg);
  REQUIRE(g.period_index == 4);
  REQUIRE(g.detected);
  REQUIRE(g.doppler_hz == Approx(-160.0));
  REQUIRE(g.beam_index == 2);
  REQUIRE(g.caf_peak_magnitude == Approx(12.0));
}

TEST_CASE("sub-threshold surfaces yield a clean no-detection") {
  DetectorConfig cfg;
  cfg.detection_scale = 50.0;  // nothing can pass
  dvec b1(27, 1.0);
  b1[18] = 10.0;
  const FeatureVector g = extract_feature({make_surface(1, 1, b1)}, cfg);
  REQUIRE_FALSE(g.detected);
  REQUIRE(g.beam_index == -1);
}

TEST_CASE("exact cross-beam ties resolve to the lower beam index") {
  DetectorConfig cfg;
  cfg.detection_scale = 2.0;
  dvec b1(27, 1.0), b2(27, 1.0);
  b1[20] = 12.0;
  b2[9] = 12.0;
  const FeatureVector g =
      extract_feature({make_surface(1, 1, b1), make_surface(1, 2, b2)}, cfg);
  REQUIRE(g.detected);
  REQUIRE(g.beam_index == 1);
  REQUIRE(g.doppler_hz == Approx(280.0));
}

TEST_CASE("the zero-Doppler exclusion band is configurable") {
  DetectorConfig cfg;
  cfg.detection_scale = 2.0;
  dvec b(27, 1.0);
  b[14] = 50.0;  // +40 Hz
  b[16] = 9.0;   // +120 Hz
  FeatureVector g = extract_feature({make_surface(1, 1, b)}, cfg);
  REQUIRE(g.detected);
  REQUIRE(g.doppler_hz == Approx(120.0));

  cfg.min_abs_doppler_hz = 0.0;  // allow the near-DC cell
  g = extract_feature({make_surface(1, 1, b)}, cfg);
  REQUIRE(g.doppler_hz == Approx(40.0));
}

TEST_CASE("detection decisions are invariant to a global magnitude scale") {
  DetectorConfig cfg;
  cfg.detection_scale = 2.0;
  dvec b(27, 1.0);
  b[18] = 8.0;
  const FeatureVector g1 = extract_feature({make_surface(1, 1, b)}, cfg);
  for (auto& m : b) m *= 1234.5;
  const FeatureVector g2 = extract_feature({make_surface(1, 1, b)}, cfg);
  REQUIRE(g1.detected == g2.detected);
  REQUIRE(g1.doppler_hz == Approx(g2.doppler_hz));
  REQUIRE(g2.caf_peak_magnitude == Approx(1234.5 * g1.caf_peak_magnitude));
}

TEST_CASE("mixed-period surfaces are rejected") {
  dvec b(27, 1.0);
  REQUIRE_THROWS_AS(
      extract_feature({make_surface(1, 1, b), make_surface(2, 2, b)},
                      DetectorConfig{}),
      pipeline_error);
  REQUIRE_THROWS_AS(extract_feature({}, DetectorConfig{}), pipeline_error);
}

TEST_CASE("the full front end detects the default blocker's first period") {
  const ScenarioConfig cfg = moderate_snr_preset();
  const CafProcessor processor(cfg.radio.samples_per_dwell(),
                               1.0 / cfg.radio.sample_rate_hz, DetectorConfig{});
  std::vector<CafSurface> surfaces;
  for (int m = 1; m <= cfg.radio.num_beams; ++m)
    surfaces.push_back(processor.process_dwell(synth_dwell(cfg, 1, m)));

  const FeatureVector g = extract_feature(surfaces, DetectorConfig{});
  REQUIRE(g.detected);
  // True Doppler ~198.6 Hz at the canonical start rounds to the 200 Hz cell;
  // the early AoA (~150 deg) lands in the 153-degree beam.
  REQUIRE(g.doppler_hz == Approx(200.0));
  REQUIRE(g.beam_index == 2);
  REQUIRE(g.caf_peak_magnitude > 1500.0);
  REQUIRE(g.caf_peak_magnitude < 3000.0);
}

TEST_CASE("noise-only periods rarely fire at the default threshold") {
  ScenarioConfig cfg = moderate_snr_preset();
  cfg.blocker.present = false;
  cfg.rng_seed = 77;
  const CafProcessor processor(cfg.radio.samples_per_dwell(),
                               1.0 / cfg.radio.sample_rate_hz, DetectorConfig{});
  int alarms = 0;
  const int periods = 12;
  cfg.num_sweep_periods = periods;
  for (int i = 1; i <= periods; ++i) {
    std::vector<CafSurface> surfaces;
    for (int m = 1; m <= cfg.radio.num_beams; ++m)
      surfaces.push_back(processor.process_dwell(synth_dwell(cfg, i, m)));
    alarms += extract_feature(surfaces, DetectorConfig{}).detected ? 1 : 0;
  }
  REQUIRE(alarms <= 1);
}

TEST_CASE("one-shot and planned computations agree") {
  const cvec ref = gen_tx_baseband(26, 2000);
  const cvec srv = doppler_copy(ref, 160.0, 1);
  DetectorConfig cfg;
  cfg.max_delay_bins = 3;
  const CafProcessor processor(2000, kTs, cfg);
  const CafSurface a = processor.surface(srv, ref, 5, 2);
  const CafSurface b = compute_caf(srv, ref, kTs, cfg.grid, 3);
  REQUIRE(a.period_index == 5);
  REQUIRE(a.beam_index == 2);
  for (std::size_t i = 0; i < a.magnitudes.size(); ++i) {
    REQUIRE(a.magnitudes[i] == Approx(b.magnitudes[i]).margin(1e-12));
    REQUIRE(a.best_delay_bin[i] == b.best_delay_bin[i]);
  }
}
