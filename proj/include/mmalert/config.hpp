#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmalert/common.hpp"
#include "mmalert/detector.hpp"
#include "mmalert/estimator.hpp"
#include "mmalert/harness.hpp"
#include "mmalert/scenario.hpp"

namespace mmalert {

// Everything a CLI run needs, loadable from one JSON config file. Angles in
// the file are degrees; internal representation is radians.
struct RunConfig {
  ScenarioConfig scenario = moderate_snr_preset();
  DetectorConfig detector;
  SmoothingConfig smoothing;
  MatchWeights weights;
  std::optional<SearchGrid> grid;  // defaults to the scenario's geometry
  IndicatorKind indicator = IndicatorKind::Geometric;
  double decision_threshold = 0.9;

  int trial_count = 100;
  double blocking_fraction = 0.8;
  dvec sensing_durations_s = {0.6, 1.0, 1.4};
  SamplerConfig sampler;

  ExperimentSpec experiment() const {
    ExperimentSpec spec;
    spec.base = scenario;
    spec.trial_count = trial_count;
    spec.blocking_fraction = blocking_fraction;
    spec.sampler = sampler;
    spec.sensing_durations_s = sensing_durations_s;
    spec.decision_threshold = decision_threshold;
    spec.rng_seed = scenario.rng_seed;
    spec.detector = detector;
    spec.smoothing = smoothing;
    spec.weights = weights;
    spec.indicator = indicator;
    spec.grid = grid;
    return spec;
  }
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw config_error("unknown config key: " + where + "." + key);
  }
}

template <typename T>
inline void get_to(const json& obj, const char* key, T& out) {
  if (const auto it = obj.find(key); it != obj.end()) {
    try {
      it->get_to(out);
    } catch (const json::exception&) {
      throw config_error(std::string("bad value type for config key: ") + key);
    }
  }
}

inline void get_range(const json& obj, const char* key, ValueRange& out) {
  if (const auto it = obj.find(key); it != obj.end()) {
    if (!it->is_array() || it->size() != 2)
      throw config_error(std::string(key) + " must be a [lo, hi] pair");
    out.lo = (*it)[0].get<double>();
    out.hi = (*it)[1].get<double>();
    if (out.hi < out.lo) throw config_error(std::string(key) + " range reversed");
  }
}

inline void parse_radio(const json& j, RadioParams& radio) {
  require_keys(j, "radio",
               {"carrier_frequency_hz", "sample_rate_hz", "dwell_duration_s",
                "num_beams", "tx_rx_distance_m"});
  get_to(j, "carrier_frequency_hz", radio.carrier_frequency_hz);
  get_to(j, "sample_rate_hz", radio.sample_rate_hz);
  get_to(j, "dwell_duration_s", radio.dwell_duration_s);
  get_to(j, "num_beams", radio.num_beams);
  get_to(j, "tx_rx_distance_m", radio.tx_rx_distance_m);
}

inline void parse_beams(const json& j, BeamSet& beams) {
  require_keys(j, "beams",
               {"surveillance_boresights_deg", "beamwidth_deg", "sidelobe_floor_db"});
  get_to(j, "surveillance_boresights_deg", beams.surveillance_boresights_deg);
  get_to(j, "beamwidth_deg", beams.beamwidth_deg);
  get_to(j, "sidelobe_floor_db", beams.sidelobe_floor_db);
}

inline void parse_blocker(const json& j, BlockerTruth& blocker) {
  require_keys(j, "blocker",
               {"present", "x1_m", "y1_m", "speed_m_s", "heading_deg",
                "scatter_gain_db"});
  get_to(j, "present", blocker.present);
  get_to(j, "x1_m", blocker.x1_m);
  get_to(j, "y1_m", blocker.y1_m);
  get_to(j, "speed_m_s", blocker.speed_m_s);
  if (j.contains("heading_deg"))
    blocker.heading_rad = wrap_two_pi(deg_to_rad(j.at("heading_deg").get<double>()));
  get_to(j, "scatter_gain_db", blocker.scatter_gain_db);
}

inline void parse_detector(const json& j, DetectorConfig& det) {
  require_keys(j, "detector",
               {"grid_min_hz", "grid_max_hz", "grid_step_hz", "max_delay_bins",
                "cfar_half_window", "min_abs_doppler_hz", "detection_scale",
                "cfar_exclude_cut", "cfar_num_guard", "clutter_bins",
                "clutter_eps"});
  get_to(j, "grid_min_hz", det.grid.min_hz);
  get_to(j, "grid_max_hz", det.grid.max_hz);
  get_to(j, "grid_step_hz", det.grid.step_hz);
  get_to(j, "max_delay_bins", det.max_delay_bins);
  get_to(j, "cfar_half_window", det.cfar_half_window);
  get_to(j, "min_abs_doppler_hz", det.min_abs_doppler_hz);
  get_to(j, "detection_scale", det.detection_scale);
  get_to(j, "cfar_exclude_cut", det.cfar_exclude_cut);
  get_to(j, "cfar_num_guard", det.cfar_num_guard);
  get_to(j, "clutter_bins", det.clutter.num_delay_bins);
  get_to(j, "clutter_eps", det.clutter.regularization_epsilon);
}

inline void parse_smoothing(const json& j, SmoothingConfig& sm) {
  require_keys(j, "smoothing",
               {"poly_degree", "outlier_sigma", "doppler_quantum_hz",
                "aoa_quantum_deg"});
  get_to(j, "poly_degree", sm.poly_degree);
  get_to(j, "outlier_sigma", sm.outlier_sigma);
  get_to(j, "doppler_quantum_hz", sm.doppler_quantum_hz);
  if (j.contains("aoa_quantum_deg"))
    sm.aoa_quantum_rad = deg_to_rad(j.at("aoa_quantum_deg").get<double>());
}

inline void parse_search(const json& j, SearchGrid& grid) {
  require_keys(j, "search",
               {"x1_min", "x1_max", "x1_step", "y1_min", "y1_max", "y1_step",
                "v_min", "v_max", "v_step", "theta_step_deg", "tie_tolerance",
                "tie_abs_floor"});
  get_to(j, "x1_min", grid.x1.lo);
  get_to(j, "x1_max", grid.x1.hi);
  get_to(j, "x1_step", grid.x1.step);
  get_to(j, "y1_min", grid.y1.lo);
  get_to(j, "y1_max", grid.y1.hi);
  get_to(j, "y1_step", grid.y1.step);
  get_to(j, "v_min", grid.v.lo);
  get_to(j, "v_max", grid.v.hi);
  get_to(j, "v_step", grid.v.step);
  if (j.contains("theta_step_deg"))
    grid.theta.step = deg_to_rad(j.at("theta_step_deg").get<double>());
  get_to(j, "tie_tolerance", grid.tie_tolerance);
  get_to(j, "tie_abs_floor", grid.tie_abs_floor);
}

inline void parse_sampler(const json& j, SamplerConfig& s) {
  require_keys(j, "sampler",
               {"x1", "y1", "v", "theta_deg", "sector_deg",
                "min_sector_fraction", "min_beams_traversed", "min_descent_m_s",
                "crossing_x", "crossing_time_s", "max_attempts"});
  get_range(j, "x1", s.x1);
  get_range(j, "y1", s.y1);
  get_range(j, "v", s.v);
  if (j.contains("theta_deg")) {
    ValueRange deg;
    get_range(j, "theta_deg", deg);
    s.theta = {deg_to_rad(deg.lo), deg_to_rad(deg.hi)};
  }
  if (j.contains("sector_deg")) {
    ValueRange deg;
    get_range(j, "sector_deg", deg);
    s.sector_lo_deg = deg.lo;
    s.sector_hi_deg = deg.hi;
  }
  get_to(j, "min_sector_fraction", s.min_sector_fraction);
  get_to(j, "min_beams_traversed", s.min_beams_traversed);
  get_to(j, "min_descent_m_s", s.min_descent_m_s);
  get_range(j, "crossing_x", s.crossing_x);
  get_range(j, "crossing_time_s", s.crossing_time_s);
  get_to(j, "max_attempts", s.max_attempts);
}

inline void parse_experiment(const json& j, RunConfig& cfg) {
  require_keys(j, "experiment",
               {"trial_count", "blocking_fraction", "sensing_durations_s",
                "sampler"});
  get_to(j, "trial_count", cfg.trial_count);
  get_to(j, "blocking_fraction", cfg.blocking_fraction);
  get_to(j, "sensing_durations_s", cfg.sensing_durations_s);
  if (j.contains("sampler")) parse_sampler(j.at("sampler"), cfg.sampler);
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  RunConfig cfg;
  detail::require_keys(j, "<root>",
                       {"preset", "radio", "beams", "blocker", "static_clutter",
                        "noise_power_db", "los_leakage_db", "num_sweep_periods",
                        "rng_seed", "detector", "smoothing", "search", "weights",
                        "indicator", "decision_threshold", "experiment"});
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "moderate_snr")
      cfg.scenario = moderate_snr_preset();
    else if (preset == "noiseless")
      cfg.scenario = noiseless_preset();
    else
      throw config_error("unknown preset: " + preset +
                         " (expected moderate_snr or noiseless)");
  }
  if (j.contains("radio")) detail::parse_radio(j.at("radio"), cfg.scenario.radio);
  if (j.contains("beams")) detail::parse_beams(j.at("beams"), cfg.scenario.beams);
  if (j.contains("blocker"))
    detail::parse_blocker(j.at("blocker"), cfg.scenario.blocker);
  if (j.contains("static_clutter")) {
    cfg.scenario.static_clutter.clear();
    for (const auto& p : j.at("static_clutter")) {
      detail::require_keys(p, "static_clutter[]", {"delay_bins", "gain_db"});
      StaticPath path;
      path.delay_bins = p.at("delay_bins").get<int>();
      path.gain_db = p.at("gain_db").get<double>();
      cfg.scenario.static_clutter.push_back(path);
    }
  }
  detail::get_to(j, "noise_power_db", cfg.scenario.noise_power_db);
  detail::get_to(j, "los_leakage_db", cfg.scenario.los_leakage_db);
  detail::get_to(j, "num_sweep_periods", cfg.scenario.num_sweep_periods);
  detail::get_to(j, "rng_seed", cfg.scenario.rng_seed);
  if (j.contains("detector")) detail::parse_detector(j.at("detector"), cfg.detector);
  if (j.contains("smoothing"))
    detail::parse_smoothing(j.at("smoothing"), cfg.smoothing);
  if (j.contains("search")) {
    SearchGrid grid = default_search_grid(cfg.scenario.radio.tx_rx_distance_m);
    detail::parse_search(j.at("search"), grid);
    cfg.grid = grid;
  }
  if (j.contains("weights")) {
    detail::require_keys(j.at("weights"), "weights", {"doppler_per_hz", "aoa_per_rad"});
    detail::get_to(j.at("weights"), "doppler_per_hz", cfg.weights.w_doppler);
    detail::get_to(j.at("weights"), "aoa_per_rad", cfg.weights.w_aoa);
  }
  if (j.contains("indicator")) {
    const std::string kind = j.at("indicator").get<std::string>();
    if (kind == "geometric")
      cfg.indicator = IndicatorKind::Geometric;
    else if (kind == "arctan")
      cfg.indicator = IndicatorKind::ArctanChain;
    else
      throw config_error("unknown indicator: " + kind +
                         " (expected geometric or arctan)");
  }
  detail::get_to(j, "decision_threshold", cfg.decision_threshold);
  if (j.contains("experiment")) detail::parse_experiment(j.at("experiment"), cfg);
  cfg.scenario.validate();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config parse failure: ") + e.what());
  }
  return parse_run_config(j);
}

}  // namespace mmalert
