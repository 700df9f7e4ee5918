// Command-line front end for the passive blockage-sensing pipeline:
//   simulate    synthesize per-dwell baseband dumps for a scenario
//   detect      clutter-cancel + CAF + CFAR feature extraction on dumps
//   estimate    trajectory fit + blockage prediction from a feature CSV
//   experiment  seeded Monte Carlo accuracy study
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmalert/mmalert.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out_dir = "mmalert_out";
};

mmalert::RunConfig load_config_or_default(const GlobalArgs& g) {
  mmalert::RunConfig cfg;
  if (!g.config_path.empty()) cfg = mmalert::load_run_config(g.config_path);
  if (g.seed) cfg.scenario.rng_seed = *g.seed;
  return cfg;
}

json read_manifest(const fs::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is)
    throw mmalert::config_error("no manifest.json in " + dir.string() +
                                " (expected output of `simulate`)");
  json j;
  is >> j;
  return j;
}

int run_simulate(const GlobalArgs& g, int periods_override) {
  mmalert::RunConfig cfg = load_config_or_default(g);
  if (periods_override > 0) cfg.scenario.num_sweep_periods = periods_override;
  cfg.scenario.validate();
  fs::create_directories(g.out_dir);

  const mmalert::ScenarioConfig& scen = cfg.scenario;
  for (int i = 1; i <= scen.num_sweep_periods; ++i)
    for (int m = 1; m <= scen.radio.num_beams; ++m)
      mmalert::io::write_dwell(g.out_dir, mmalert::synth_dwell(scen, i, m));

  json manifest;
  manifest["num_sweep_periods"] = scen.num_sweep_periods;
  manifest["num_beams"] = scen.radio.num_beams;
  manifest["n_samples"] = scen.radio.samples_per_dwell();
  manifest["sample_rate_hz"] = scen.radio.sample_rate_hz;
  manifest["sweep_period_s"] = scen.radio.sweep_period_s();
  manifest["carrier_frequency_hz"] = scen.radio.carrier_frequency_hz;
  manifest["tx_rx_distance_m"] = scen.radio.tx_rx_distance_m;
  manifest["beam_boresights_deg"] = scen.beams.surveillance_boresights_deg;
  manifest["beamwidth_deg"] = scen.beams.beamwidth_deg;
  manifest["sidelobe_floor_db"] = scen.beams.sidelobe_floor_db;
  std::ofstream os(fs::path(g.out_dir) / "manifest.json");
  os << manifest.dump(2) << '\n';

  std::cout << "wrote " << scen.num_sweep_periods * scen.radio.num_beams
            << " dwells to " << g.out_dir << '\n';
  return 0;
}

int run_detect(const GlobalArgs& g, const std::string& in_dir,
               std::optional<int> clutter_bins, std::optional<double> clutter_eps,
               bool plot) {
  mmalert::RunConfig cfg = load_config_or_default(g);
  if (clutter_bins) cfg.detector.clutter.num_delay_bins = *clutter_bins;
  if (clutter_eps) cfg.detector.clutter.regularization_epsilon = *clutter_eps;
  const fs::path src = in_dir.empty() ? fs::path(g.out_dir) : fs::path(in_dir);
  const json manifest = read_manifest(src);

  const int periods = manifest.at("num_sweep_periods").get<int>();
  const int beams = manifest.at("num_beams").get<int>();
  const std::size_t n_samples = manifest.at("n_samples").get<std::size_t>();
  const double fs_hz = manifest.at("sample_rate_hz").get<double>();
  const double sweep_period_s = manifest.at("sweep_period_s").get<double>();

  mmalert::BeamSet beam_set;
  beam_set.surveillance_boresights_deg =
      manifest.at("beam_boresights_deg").get<std::vector<double>>();
  beam_set.beamwidth_deg = manifest.at("beamwidth_deg").get<double>();
  beam_set.sidelobe_floor_db = manifest.at("sidelobe_floor_db").get<double>();

  mmalert::RadioParams radio = cfg.scenario.radio;
  radio.carrier_frequency_hz = manifest.at("carrier_frequency_hz").get<double>();
  radio.tx_rx_distance_m = manifest.at("tx_rx_distance_m").get<double>();
  radio.sample_rate_hz = fs_hz;
  radio.num_beams = beams;

  fs::create_directories(g.out_dir);
  const mmalert::CafProcessor processor(n_samples, 1.0 / fs_hz, cfg.detector);

  std::vector<std::vector<mmalert::CafSurface>> per_beam(
      static_cast<std::size_t>(beams));
  mmalert::FeatureMatrix gk;
  gk.sweep_period_s = sweep_period_s;
  for (int i = 1; i <= periods; ++i) {
    std::vector<mmalert::CafSurface> period_surfaces;
    for (int m = 1; m <= beams; ++m) {
      const mmalert::DwellPair dwell = mmalert::io::read_dwell(src, i, m);
      mmalert::CafSurface s = processor.process_dwell(dwell);
      per_beam[static_cast<std::size_t>(m - 1)].push_back(s);
      period_surfaces.push_back(std::move(s));
    }
    gk.features.push_back(mmalert::extract_feature(period_surfaces, cfg.detector));
  }

  for (int m = 1; m <= beams; ++m) {
    const auto& surfaces = per_beam[static_cast<std::size_t>(m - 1)];
    const double boresight =
        beam_set.surveillance_boresights_deg[static_cast<std::size_t>(m - 1)];
    mmalert::io::write_spectrogram_csv(
        fs::path(g.out_dir) / ("spectrogram_b" + std::to_string(m) + ".csv"),
        surfaces, sweep_period_s, boresight);
    if (plot)
      mmalert::io::write_spectrogram_svg(
          fs::path(g.out_dir) / ("spectrogram_b" + std::to_string(m) + ".svg"),
          surfaces, "CAF magnitude, beam " + std::to_string(m));
  }
  mmalert::io::write_feature_csv(fs::path(g.out_dir) / "features.csv", gk,
                                 beam_set, radio);
  int detections = 0;
  for (const auto& f : gk.features) detections += f.detected ? 1 : 0;
  std::cout << "detections in " << detections << "/" << periods
            << " periods; wrote spectrograms and features.csv to " << g.out_dir
            << '\n';
  return 0;
}

int run_estimate(const GlobalArgs& g, const std::string& features_path,
                 const std::string& indicator, double threshold) {
  mmalert::RunConfig cfg = load_config_or_default(g);
  if (!indicator.empty()) {
    if (indicator == "geometric")
      cfg.indicator = mmalert::IndicatorKind::Geometric;
    else if (indicator == "arctan")
      cfg.indicator = mmalert::IndicatorKind::ArctanChain;
    else
      throw mmalert::config_error("unknown indicator: " + indicator);
  }
  if (threshold >= 0) cfg.decision_threshold = threshold;

  const fs::path src = features_path.empty()
                           ? fs::path(g.out_dir) / "features.csv"
                           : fs::path(features_path);
  const mmalert::io::FeatureFile file = mmalert::io::read_feature_csv(src);
  const double T_d = file.features.sweep_period_s;
  const double d = file.tx_rx_distance_m;
  const double f_c = file.carrier_frequency_hz;
  const int K = static_cast<int>(file.features.features.size());

  const mmalert::SmoothedTraces traces =
      mmalert::smooth_traces(file.features, file.beams, cfg.smoothing);
  const mmalert::SearchGrid grid =
      cfg.grid ? *cfg.grid : mmalert::default_search_grid(d);
  const mmalert::EstimateResult est = mmalert::estimate_trajectory(
      traces, grid, cfg.weights, T_d, d, f_c, g.threads);
  const mmalert::PredictionResult pred = mmalert::predict(
      est, d, K * T_d, cfg.indicator, cfg.decision_threshold);

  const json out = mmalert::io::prediction_to_json(pred);
  fs::create_directories(g.out_dir);
  std::ofstream os(fs::path(g.out_dir) / "prediction.json");
  os << out.dump(2) << '\n';
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_experiment(const GlobalArgs& g, int trials_override,
                   const std::string& preset, bool plot) {
  mmalert::RunConfig cfg = load_config_or_default(g);
  if (!preset.empty()) {
    const std::uint64_t keep_seed = cfg.scenario.rng_seed;
    if (preset == "moderate_snr")
      cfg.scenario = mmalert::moderate_snr_preset();
    else if (preset == "noiseless")
      cfg.scenario = mmalert::noiseless_preset();
    else
      throw mmalert::config_error("unknown preset: " + preset);
    cfg.scenario.rng_seed = keep_seed;
  }
  if (trials_override > 0) cfg.trial_count = trials_override;

  mmalert::ExperimentSpec spec = cfg.experiment();
  spec.validate();
  const std::vector<mmalert::TrialRecord> trials =
      mmalert::run_experiment(spec, g.threads);
  const auto duration_table = mmalert::accuracy_vs_duration(trials);
  const auto warning_table = mmalert::accuracy_vs_warning_time(trials);

  fs::create_directories(g.out_dir);
  mmalert::io::write_duration_table_csv(
      fs::path(g.out_dir) / "accuracy_vs_duration.csv", duration_table);
  mmalert::io::write_warning_table_csv(
      fs::path(g.out_dir) / "accuracy_vs_warning_time.csv", warning_table);
  std::ofstream os(fs::path(g.out_dir) / "trials.json");
  os << mmalert::io::trials_to_json(trials).dump(2) << '\n';

  if (plot) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : duration_table) pts.push_back({r.duration_s, r.accuracy});
    mmalert::io::write_curve_svg(fs::path(g.out_dir) / "accuracy_vs_duration.svg",
                                 pts, "Prediction accuracy vs sensing duration",
                                 "sensing duration [s]");
    if (!warning_table.empty()) {
      pts.clear();
      for (const auto& r : warning_table) pts.push_back({r.bin_center_s, r.accuracy});
      mmalert::io::write_curve_svg(
          fs::path(g.out_dir) / "accuracy_vs_warning_time.svg", pts,
          "Blockage prediction accuracy vs warning time", "warning time [s]");
    }
  }

  for (const auto& r : duration_table)
    std::cout << "duration " << r.duration_s << " s: accuracy " << r.correct
              << "/" << r.total << " = " << r.accuracy << '\n';
  for (const auto& r : warning_table)
    std::cout << "warning bin " << r.bin_center_s << " s: " << r.predicted_blocking
              << "/" << r.total << " predicted blocking = " << r.accuracy << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mmAlert passive-sensing pipeline: simulate two-beam baseband dwells, "
      "detect a mobile blocker's Doppler/AoA signature, estimate its "
      "trajectory, and predict line-of-sight blockage."};
  app.require_subcommand(1);
  // Accept the global flags on either side of the subcommand
  // (`mmalert --config c.json experiment` == `mmalert experiment --config c.json`).
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path,
                 "JSON config file (see README for the full key reference)");
  std::uint64_t seed_value = 0;
  auto* seed_opt =
      app.add_option("--seed", seed_value, "override the scenario RNG seed");
  app.add_option("--threads", g.threads, "worker threads (default 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "output directory (default mmalert_out)");

  auto* sim = app.add_subcommand("simulate", "synthesize per-dwell I/Q dumps");
  int sim_periods = 0;
  sim->add_option("--periods", sim_periods, "override the number of sweep periods");

  auto* det = app.add_subcommand(
      "detect", "run clutter cancellation + CAF + CFAR on dwell dumps");
  std::string det_in;
  std::optional<int> det_clutter_bins;
  std::optional<double> det_clutter_eps;
  bool det_plot = false;
  det->add_option("--in-dir", det_in, "directory with `simulate` output "
                                      "(default: --out-dir)");
  det->add_option("--clutter-bins", det_clutter_bins,
                  "cancellation basis delay bins");
  det->add_option("--clutter-eps", det_clutter_eps,
                  "cancellation diagonal loading");
  det->add_flag("--plot", det_plot, "also write spectrogram SVGs");

  auto* est = app.add_subcommand(
      "estimate", "fit a trajectory to a feature CSV and predict blockage");
  std::string est_features, est_indicator;
  double est_threshold = -1;
  est->add_option("--features", est_features,
                  "feature CSV (default: <out-dir>/features.csv)");
  est->add_option("--indicator", est_indicator,
                  "blockage indicator: geometric|arctan");
  est->add_option("--threshold", est_threshold,
                  "blockage decision threshold on the probability");

  auto* exp = app.add_subcommand("experiment",
                                 "seeded Monte Carlo accuracy study");
  int exp_trials = 0;
  std::string exp_preset;
  bool exp_plot = false;
  exp->add_option("--trials", exp_trials, "override the trial count");
  exp->add_option("--preset", exp_preset, "scenario preset: moderate_snr|noiseless");
  exp->add_flag("--plot", exp_plot, "also write accuracy-curve SVGs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (sim->parsed()) return run_simulate(g, sim_periods);
    if (det->parsed())
      return run_detect(g, det_in, det_clutter_bins, det_clutter_eps, det_plot);
    if (est->parsed()) return run_estimate(g, est_features, est_indicator,
                                           est_threshold);
    if (exp->parsed()) return run_experiment(g, exp_trials, exp_preset, exp_plot);
  } catch (const mmalert::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
