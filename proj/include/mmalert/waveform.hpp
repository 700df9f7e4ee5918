#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "mmalert/common.hpp"
#include "mmalert/motion_model.hpp"
#include "mmalert/scenario.hpp"

namespace mmalert {

struct DwellPair {
  int period_index = 1;  // i, 1-based
  int beam_index = 1;    // m, 1-based
  cvec reference_samples;
  cvec surveillance_samples;
  double sample_period_s = 0;  // T_s
};

struct BeamPatternModel {
  double boresight_rad = 0;
  double beamwidth_rad = 0;
  double sidelobe_floor_linear = 0;  // power-gain floor
};

namespace detail {

// Uniform double in [0, 1) built from the top 53 bits of the generator
// output; avoids std::uniform_real_distribution, whose consumption pattern
// is implementation-defined.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// One circularly-symmetric complex Gaussian sample of unit variance
// (0.5 per quadrature), Box–Muller; consumes exactly two uniforms.
inline cplx gaussian_cplx(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  const double r = std::sqrt(-std::log(u1));  // Rayleigh with E[r^2] = 1
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

}  // namespace detail

// Unit-average-power white pseudo-random complex sequence (constant modulus,
// uniform phase), reproducible from the seed alone.
inline cvec gen_tx_baseband(std::uint64_t seed, std::size_t n_samples) {
  if (n_samples < 1) throw pipeline_error("empty transmit sequence");
  auto rng = make_rng(seed);
  cvec s(n_samples);
  for (auto& v : s) {
    const double phase = kTwoPi * detail::uniform01(rng);
    v = {std::cos(phase), std::sin(phase)};
  }
  return s;
}

// Gaussian mainlobe over a hard sidelobe floor, in power:
//   g(angle) = max(exp(-4 ln2 ((angle - boresight)/beamwidth)^2), floor),
// so g(boresight) = 1 and g(boresight +- beamwidth/2) = 0.5. Synthesis
// applies sqrt(g) as the amplitude scale.
inline double beam_gain(const BeamPatternModel& model, double angle_rad) {
  const double u = (angle_rad - model.boresight_rad) / model.beamwidth_rad;
  const double g = std::exp(-4.0 * std::numbers::ln2_v<double> * u * u);
  return std::max(g, model.sidelobe_floor_linear);
}

inline BeamPatternModel make_beam_model(const BeamSet& beams, int beam_index) {
  return {beams.boresight_aoa_rad(beam_index), deg_to_rad(beams.beamwidth_deg),
          db_to_power(beams.sidelobe_floor_db)};
}

namespace detail {

// Seed-stream tags so the transmit sequence and the two noise processes of a
// dwell are independent of each other and of every other dwell.
inline constexpr std::uint64_t kTagTx = 1;
inline constexpr std::uint64_t kTagRefNoise = 2;
inline constexpr std::uint64_t kTagSrvNoise = 3;

// out[n] += amp * s[n - delay] with s[n < 0] = 0.
inline void add_delayed(cvec& out, const cvec& s, int delay, double amp) {
  for (std::size_t n = static_cast<std::size_t>(delay); n < out.size(); ++n)
    out[n] += amp * s[n - static_cast<std::size_t>(delay)];
}

}  // namespace detail

// Midpoint of dwell (i, m) on the absolute time axis.
inline double dwell_midpoint_s(const RadioParams& radio, int period_index,
                               int beam_index) {
  return (period_index - 1) * radio.sweep_period_s() +
         (beam_index - 0.5) * radio.dwell_duration_s;
}

// Synthesizes one dwell:
//   reference     = s[n - tau_r] + n_r[n]
//   surveillance  = echo + static paths + LoS leakage + n_s[n]
// with echo = alpha_tar * s[n - tau_tar] * exp(-j 2 pi f_d n T_s), the
// Doppler frozen at the blocker's dwell-midpoint state and the echo
// amplitude weighted by sqrt(beam power gain) at the blocker's AoA. All
// delays are rounded to integer sample bins. Echo power is
// scatter_gain_db above the configured noise floor at boresight, so a
// literal -inf noise floor also silences the echo; "noiseless" studies use
// a very low finite floor instead.
inline DwellPair synth_dwell(const ScenarioConfig& cfg, int period_index,
                             int beam_index) {
  cfg.validate();
  if (period_index < 1 || period_index > cfg.num_sweep_periods)
    throw pipeline_error("period index out of range");
  if (beam_index < 1 || beam_index > cfg.radio.num_beams)
    throw pipeline_error("beam index out of range");

  const RadioParams& radio = cfg.radio;
  const std::size_t N = radio.samples_per_dwell();
  const double Ts = 1.0 / radio.sample_rate_hz;
  const std::uint64_t i = static_cast<std::uint64_t>(period_index);
  const std::uint64_t m = static_cast<std::uint64_t>(beam_index);

  const cvec s = gen_tx_baseband(
      derive_seed(cfg.rng_seed, {detail::kTagTx, i, m}), N);
  const double noise_power = db_to_power(cfg.noise_power_db);
  const int tau_r = static_cast<int>(
      std::lround(radio.tx_rx_distance_m / kLightSpeedMS * radio.sample_rate_hz));

  DwellPair dwell;
  dwell.period_index = period_index;
  dwell.beam_index = beam_index;
  dwell.sample_period_s = Ts;

  dwell.reference_samples.assign(N, cplx{});
  detail::add_delayed(dwell.reference_samples, s, tau_r, 1.0);

  dwell.surveillance_samples.assign(N, cplx{});
  for (const StaticPath& path : cfg.static_clutter)
    detail::add_delayed(dwell.surveillance_samples, s, path.delay_bins,
                        db_to_amplitude(path.gain_db));
  detail::add_delayed(dwell.surveillance_samples, s, tau_r,
                      db_to_amplitude(cfg.los_leakage_db));

  if (cfg.blocker.present && cfg.blocker.speed_m_s >= 0) {
    const double t_mid = dwell_midpoint_s(radio, period_index, beam_index);
    const Point p = blocker_position_at(cfg.blocker, t_mid);
    if (p.y > 0 && noise_power > 0) {
      const Angles ang = angles_at(p, radio.tx_rx_distance_m);
      const double f_d =
          doppler_at(p, cfg.blocker.speed_m_s, cfg.blocker.heading_rad,
                     radio.tx_rx_distance_m, radio.carrier_frequency_hz);
      const double gain = beam_gain(make_beam_model(cfg.beams, beam_index), ang.phi_r);
      const double r_t = std::hypot(p.x, p.y);
      const double r_r = std::hypot(p.x - radio.tx_rx_distance_m, p.y);
      const int tau_tar = static_cast<int>(
          std::lround((r_t + r_r) / kLightSpeedMS * radio.sample_rate_hz));
      const double amp = std::sqrt(noise_power * db_to_power(cfg.blocker.scatter_gain_db)) *
                         std::sqrt(gain);
      for (std::size_t n = static_cast<std::size_t>(tau_tar); n < N; ++n)
        dwell.surveillance_samples[n] +=
            amp * s[n - static_cast<std::size_t>(tau_tar)] *
            std::polar(1.0, -kTwoPi * f_d * static_cast<double>(n) * Ts);
    }
  }

  if (noise_power > 0) {
    // gaussian_cplx has unit mean-square magnitude, so scale by sqrt(power).
    const double sigma = std::sqrt(noise_power);
    auto rng_r = make_rng(derive_seed(cfg.rng_seed, {detail::kTagRefNoise, i, m}));
    for (auto& v : dwell.reference_samples) v += sigma * detail::gaussian_cplx(rng_r);
    auto rng_s = make_rng(derive_seed(cfg.rng_seed, {detail::kTagSrvNoise, i, m}));
    for (auto& v : dwell.surveillance_samples) v += sigma * detail::gaussian_cplx(rng_s);
  }
  return dwell;
}

}  // namespace mmalert
