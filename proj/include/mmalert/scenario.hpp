#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mmalert/common.hpp"

namespace mmalert {

// Coordinate frame used everywhere: transmitter at the origin, receiver at
// (d, 0), blocker moving in the half-plane y > 0. Heading theta is measured
// counterclockwise from +x.

struct RadioParams {
  double carrier_frequency_hz = 60e9;
  double light_speed_m_s = kLightSpeedMS;  // fixed physical constant
  double sample_rate_hz = 1e6;
  double dwell_duration_s = 25e-3;  // T_b
  int num_beams = 4;                // M
  double tx_rx_distance_m = 3.5;    // d

  // T_d: one full sweep over all beams.
  double sweep_period_s() const { return num_beams * dwell_duration_s; }
  // N: samples in one dwell.
  std::size_t samples_per_dwell() const {
    return static_cast<std::size_t>(std::floor(dwell_duration_s * sample_rate_hz));
  }

  void validate() const {
    if (carrier_frequency_hz <= 0 || sample_rate_hz <= 0 ||
        dwell_duration_s <= 0 || num_beams < 1 || tx_rx_distance_m <= 0)
      throw config_error("radio parameters must be strictly positive");
    if (light_speed_m_s != kLightSpeedMS)
      throw config_error("light_speed_m_s is a fixed constant");
    if (samples_per_dwell() < 1)
      throw config_error("dwell shorter than one sample");
  }
};

struct BeamSet {
  // Surveillance boresights psi_m, degrees, measured from the receiver->
  // transmitter direction, positive toward the sensed half-plane y > 0.
  std::vector<double> surveillance_boresights_deg = {40.0, 27.0, 18.0, 10.0};
  double beamwidth_deg = 10.0;       // 3 dB width
  double sidelobe_floor_db = -15.0;  // power floor outside the mainlobe

  // A beam pointed psi degrees off the receiver->transmitter axis receives
  // echoes arriving at AoA phi_R = pi - psi in the model frame.
  double boresight_aoa_rad(int beam_index) const {
    return kPi - deg_to_rad(surveillance_boresights_deg.at(
                     static_cast<std::size_t>(beam_index - 1)));
  }

  void validate(int num_beams) const {
    if (static_cast<int>(surveillance_boresights_deg.size()) != num_beams)
      throw config_error("beam set must list exactly one boresight per beam");
    auto sorted = surveillance_boresights_deg;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw config_error("beam boresights must be distinct");
    if (beamwidth_deg <= 0) throw config_error("beamwidth must be positive");
    if (sidelobe_floor_db >= 0) throw config_error("sidelobe floor must be negative dB");
  }
};

struct BlockerTruth {
  double x1_m = 1.75;
  double y1_m = 1.0;
  double speed_m_s = 1.0;
  double heading_rad = 1.5 * kPi;
  double scatter_gain_db = 10.0;  // scattered-path power over the noise floor
  bool present = true;

  void validate() const {
    if (present && y1_m <= 0) throw config_error("blocker must start at y > 0");
    if (speed_m_s < 0) throw config_error("speed must be non-negative");
  }
};

struct StaticPath {
  int delay_bins = 0;
  double gain_db = 0.0;  // amplitude gain 10^(gain_db/20), absolute
};

struct ScenarioConfig {
  RadioParams radio;
  BeamSet beams;
  BlockerTruth blocker;
  std::vector<StaticPath> static_clutter = {{0, -6.0}, {3, -12.0}};
  double noise_power_db = -30.0;    // relative to unit transmit power
  double los_leakage_db = -10.0;    // leakage into surveillance, rel. LoS
  int num_sweep_periods = 20;       // K_total
  std::uint64_t rng_seed = 1;

  void validate() const {
    radio.validate();
    beams.validate(radio.num_beams);
    blocker.validate();
    if (num_sweep_periods < 1) throw config_error("need at least one sweep period");
    for (const auto& p : static_clutter)
      if (p.delay_bins < 0) throw config_error("clutter delays must be non-negative");
  }
};

struct Point {
  double x = 0;
  double y = 0;
};

// Closed-form position after elapsed_s of constant-velocity motion; no
// per-step accumulation.
inline Point blocker_position_at(const BlockerTruth& truth, double elapsed_s) {
  return {truth.x1_m + truth.speed_m_s * elapsed_s * std::cos(truth.heading_rad),
          truth.y1_m + truth.speed_m_s * elapsed_s * std::sin(truth.heading_rad)};
}

struct BlockageLabel {
  bool blocks = false;
  std::optional<double> crossing_time_s;
};

// Labeling oracle: does the ray from (x1, y1) with heading theta meet the
// open segment {(x, 0) : 0 < x < d}? Purely geometric, independent of any
// angle convention used elsewhere.
inline BlockageLabel ground_truth_blockage(const BlockerTruth& truth, double d) {
  if (d <= 0) throw config_error("tx-rx distance must be positive");
  const double vy = truth.speed_m_s * std::sin(truth.heading_rad);
  if (truth.speed_m_s <= 0 || vy >= 0) return {};  // never descends to y = 0
  const double t = -truth.y1_m / vy;
  const double x_cross =
      truth.x1_m + truth.speed_m_s * t * std::cos(truth.heading_rad);
  if (x_cross > 0 && x_cross < d) return {true, t};
  return {};
}

}  // namespace mmalert
