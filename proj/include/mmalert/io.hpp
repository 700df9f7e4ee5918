#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmalert/common.hpp"
#include "mmalert/detector.hpp"
#include "mmalert/estimator.hpp"
#include "mmalert/harness.hpp"
#include "mmalert/scenario.hpp"
#include "mmalert/waveform.hpp"

namespace mmalert {

namespace io {

// Shortest round-trip decimal form; identical bytes for identical doubles.
inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt(int v) { return std::to_string(v); }

namespace detail {

inline void write_f32_le(std::ofstream& os, float v) {
  const std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  const char bytes[4] = {static_cast<char>(bits & 0xff),
                         static_cast<char>((bits >> 8) & 0xff),
                         static_cast<char>((bits >> 16) & 0xff),
                         static_cast<char>((bits >> 24) & 0xff)};
  os.write(bytes, 4);
}

inline float read_f32_le(std::ifstream& is) {
  unsigned char bytes[4];
  is.read(reinterpret_cast<char*>(bytes), 4);
  if (!is) throw pipeline_error("truncated sample file");
  const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) |
                             (static_cast<std::uint32_t>(bytes[1]) << 8) |
                             (static_cast<std::uint32_t>(bytes[2]) << 16) |
                             (static_cast<std::uint32_t>(bytes[3]) << 24);
  return std::bit_cast<float>(bits);
}

inline std::string dwell_stem(int period_index, int beam_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "dwell_p%03d_b%d", period_index, beam_index);
  return buf;
}

inline void write_iq(const std::filesystem::path& path, const cvec& samples) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw pipeline_error("cannot open for writing: " + path.string());
  for (const cplx& s : samples) {
    write_f32_le(os, static_cast<float>(s.real()));
    write_f32_le(os, static_cast<float>(s.imag()));
  }
}

inline cvec read_iq(const std::filesystem::path& path, std::size_t n) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw pipeline_error("cannot open: " + path.string());
  cvec samples(n);
  for (cplx& s : samples) {
    const float re = read_f32_le(is);
    const float im = read_f32_le(is);
    s = {static_cast<double>(re), static_cast<double>(im)};
  }
  return samples;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Dwell dumps: <stem>_ref.iq / <stem>_srv.iq (interleaved little-endian
// float32 I/Q) plus a JSON sidecar with the sample count, the sample period
// and the (period, beam) indices.
// ---------------------------------------------------------------------------

inline void write_dwell(const std::filesystem::path& dir, const DwellPair& dwell) {
  const std::string stem = detail::dwell_stem(dwell.period_index, dwell.beam_index);
  detail::write_iq(dir / (stem + "_ref.iq"), dwell.reference_samples);
  detail::write_iq(dir / (stem + "_srv.iq"), dwell.surveillance_samples);
  nlohmann::json sidecar;
  sidecar["n_samples"] = dwell.reference_samples.size();
  sidecar["sample_period_s"] = dwell.sample_period_s;
  sidecar["period_index"] = dwell.period_index;
  sidecar["beam_index"] = dwell.beam_index;
  std::ofstream os(dir / (stem + ".json"));
  if (!os) throw pipeline_error("cannot open sidecar for writing");
  os << sidecar.dump(2) << '\n';
}

inline DwellPair read_dwell(const std::filesystem::path& dir, int period_index,
                            int beam_index) {
  const std::string stem = detail::dwell_stem(period_index, beam_index);
  std::ifstream is(dir / (stem + ".json"));
  if (!is) throw pipeline_error("missing dwell sidecar: " + stem);
  nlohmann::json sidecar;
  is >> sidecar;
  DwellPair dwell;
  dwell.period_index = sidecar.at("period_index").get<int>();
  dwell.beam_index = sidecar.at("beam_index").get<int>();
  dwell.sample_period_s = sidecar.at("sample_period_s").get<double>();
  const std::size_t n = sidecar.at("n_samples").get<std::size_t>();
  dwell.reference_samples = detail::read_iq(dir / (stem + "_ref.iq"), n);
  dwell.surveillance_samples = detail::read_iq(dir / (stem + "_srv.iq"), n);
  return dwell;
}

// ---------------------------------------------------------------------------
// Spectrogram CSV: one file per beam, rows = periods, columns = grid
// frequencies, values = CAF magnitude.
// ---------------------------------------------------------------------------

inline void write_spectrogram_csv(const std::filesystem::path& path,
                                  const std::vector<CafSurface>& periods,
                                  double sweep_period_s, double boresight_deg) {
  std::ofstream os(path);
  if (!os) throw pipeline_error("cannot open for writing: " + path.string());
  if (periods.empty()) throw pipeline_error("no surfaces to write");
  os << "# sweep_period_s=" << fmt(sweep_period_s) << '\n';
  os << "# beam_index=" << periods.front().beam_index << '\n';
  os << "# boresight_deg=" << fmt(boresight_deg) << '\n';
  os << "period";
  for (double f : periods.front().frequencies_hz) os << ",f_" << fmt(f);
  os << '\n';
  for (const CafSurface& s : periods) {
    os << s.period_index;
    for (double m : s.magnitudes) os << ',' << fmt(m);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Feature-matrix CSV. The comment header carries the scenario constants the
// downstream trajectory fit needs (geometry, carrier, beam table), so the
// file is self-contained.
// ---------------------------------------------------------------------------

inline void write_feature_csv(const std::filesystem::path& path,
                              const FeatureMatrix& gk, const BeamSet& beams,
                              const RadioParams& radio) {
  std::ofstream os(path);
  if (!os) throw pipeline_error("cannot open for writing: " + path.string());
  os << "# sweep_period_s=" << fmt(gk.sweep_period_s) << '\n';
  os << "# tx_rx_distance_m=" << fmt(radio.tx_rx_distance_m) << '\n';
  os << "# carrier_frequency_hz=" << fmt(radio.carrier_frequency_hz) << '\n';
  os << "# beamwidth_deg=" << fmt(beams.beamwidth_deg) << '\n';
  os << "# sidelobe_floor_db=" << fmt(beams.sidelobe_floor_db) << '\n';
  os << "# boresights_deg=";
  for (std::size_t b = 0; b < beams.surveillance_boresights_deg.size(); ++b)
    os << (b ? ";" : "") << fmt(beams.surveillance_boresights_deg[b]);
  os << '\n';
  os << "period,detected,doppler_hz,beam_index,beam_boresight_deg,peak\n";
  for (const FeatureVector& g : gk.features) {
    os << g.period_index << ',' << (g.detected ? 1 : 0) << ',';
    if (g.detected) {
      os << fmt(g.doppler_hz) << ',' << g.beam_index << ','
         << fmt(beams.surveillance_boresights_deg[static_cast<std::size_t>(
                g.beam_index - 1)])
         << ',' << fmt(g.caf_peak_magnitude);
    } else {
      os << ",,,";
    }
    os << '\n';
  }
}

struct FeatureFile {
  FeatureMatrix features;
  BeamSet beams;
  double tx_rx_distance_m = 0;
  double carrier_frequency_hz = 0;
};

inline FeatureFile read_feature_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw pipeline_error("cannot open: " + path.string());
  FeatureFile out;
  std::map<std::string, std::string> meta;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(' '));
        key.erase(key.find_last_not_of(' ') + 1);
        meta[key] = line.substr(eq + 1);
      }
      continue;
    }
    if (!header_seen) {  // column header row
      header_seen = true;
      continue;
    }
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(6);
    FeatureVector g;
    g.period_index = std::stoi(cells[0]);
    g.detected = std::stoi(cells[1]) != 0;
    if (g.detected) {
      g.doppler_hz = std::stod(cells[2]);
      g.beam_index = std::stoi(cells[3]);
      g.caf_peak_magnitude = std::stod(cells[5]);
    }
    out.features.features.push_back(g);
  }
  auto require = [&](const std::string& key) -> std::string {
    const auto it = meta.find(key);
    if (it == meta.end())
      throw pipeline_error("feature file lacks metadata key: " + key);
    return it->second;
  };
  out.features.sweep_period_s = std::stod(require("sweep_period_s"));
  out.tx_rx_distance_m = std::stod(require("tx_rx_distance_m"));
  out.carrier_frequency_hz = std::stod(require("carrier_frequency_hz"));
  out.beams.beamwidth_deg = std::stod(require("beamwidth_deg"));
  out.beams.sidelobe_floor_db = std::stod(require("sidelobe_floor_db"));
  out.beams.surveillance_boresights_deg.clear();
  std::stringstream bs(require("boresights_deg"));
  std::string tok;
  while (std::getline(bs, tok, ';'))
    out.beams.surveillance_boresights_deg.push_back(std::stod(tok));
  return out;
}

// ---------------------------------------------------------------------------
// Prediction and trial-record JSON
// ---------------------------------------------------------------------------

inline nlohmann::json prediction_to_json(const PredictionResult& p) {
  nlohmann::json j;
  j["best_hypothesis"] = {{"x1", p.best_hypothesis.x1_m},
                          {"y1", p.best_hypothesis.y1_m},
                          {"v", p.best_hypothesis.v_m_s},
                          {"theta_deg", rad_to_deg(p.best_hypothesis.theta_rad)}};
  j["set_size"] = p.near_optimal_set.size();
  j["blockage_probability"] = p.blockage_probability;
  j["blocks"] = p.blocks;
  j["predicted_crossing_time_s"] =
      p.predicted_crossing_time_s ? nlohmann::json(*p.predicted_crossing_time_s)
                                  : nlohmann::json(nullptr);
  j["warning_time_s"] = p.warning_time_s ? nlohmann::json(*p.warning_time_s)
                                         : nlohmann::json(nullptr);
  return j;
}

inline nlohmann::json trials_to_json(const std::vector<TrialRecord>& trials) {
  nlohmann::json arr = nlohmann::json::array();
  for (const TrialRecord& t : trials) {
    nlohmann::json jt;
    jt["trial_id"] = t.trial_id;
    jt["truth"] = {{"x1", t.truth.x1_m},
                   {"y1", t.truth.y1_m},
                   {"v", t.truth.speed_m_s},
                   {"theta_deg", rad_to_deg(t.truth.heading_rad)},
                   {"blocks", t.truth_blocks},
                   {"crossing_time_s",
                    t.truth_crossing_s ? nlohmann::json(*t.truth_crossing_s)
                                       : nlohmann::json(nullptr)}};
    nlohmann::json outs = nlohmann::json::array();
    for (const TrialOutcome& o : t.outcomes) {
      nlohmann::json jo = prediction_to_json(o.prediction);
      jo.erase("best_hypothesis");
      jo["duration_s"] = o.duration_s;
      jo["no_detection"] = o.no_detection;
      jo["correct"] = o.correct;
      outs.push_back(jo);
    }
    jt["outcomes"] = outs;
    arr.push_back(jt);
  }
  return arr;
}

// ---------------------------------------------------------------------------
// Accuracy tables (counts included so means can be re-aggregated exactly)
// ---------------------------------------------------------------------------

inline void write_duration_table_csv(const std::filesystem::path& path,
                                     const std::vector<DurationAccuracyRow>& table) {
  std::ofstream os(path);
  if (!os) throw pipeline_error("cannot open for writing: " + path.string());
  os << "duration_s,correct,total,accuracy\n";
  for (const auto& r : table)
    os << fmt(r.duration_s) << ',' << r.correct << ',' << r.total << ','
       << fmt(r.accuracy) << '\n';
}

inline void write_warning_table_csv(const std::filesystem::path& path,
                                    const std::vector<WarningAccuracyRow>& table) {
  std::ofstream os(path);
  if (!os) throw pipeline_error("cannot open for writing: " + path.string());
  os << "warning_bin_center_s,predicted_blocking,total,accuracy\n";
  for (const auto& r : table)
    os << fmt(r.bin_center_s) << ',' << r.predicted_blocking << ',' << r.total
       << ',' << fmt(r.accuracy) << '\n';
}

// ---------------------------------------------------------------------------
// Minimal static SVG plots
// ---------------------------------------------------------------------------

inline void write_curve_svg(const std::filesystem::path& path,
                            const std::vector<std::pair<double, double>>& points,
                            const std::string& title, const std::string& x_label) {
  if (points.empty()) throw pipeline_error("nothing to plot");
  const double w = 640, h = 420, ml = 70, mr = 20, mt = 40, mb = 50;
  double x_lo = points.front().first, x_hi = points.front().first;
  for (const auto& p : points) {
    x_lo = std::min(x_lo, p.first);
    x_hi = std::max(x_hi, p.first);
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - y * (h - mt - mb); };

  std::ofstream os(path);
  if (!os) throw pipeline_error("cannot open for writing: " + path.string());
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
     << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>"
     << title << "</text>\n";
  // Axes and a light accuracy grid every 0.2.
  for (int g = 0; g <= 5; ++g) {
    const double y = py(g * 0.2);
    os << "<line x1='" << ml << "' y1='" << y << "' x2='" << w - mr << "' y2='"
       << y << "' stroke='#ddd'/>\n";
    os << "<text x='" << ml - 8 << "' y='" << y + 4
       << "' text-anchor='end' font-size='11'>" << fmt(g * 0.2) << "</text>\n";
  }
  os << "<line x1='" << ml << "' y1='" << py(0) << "' x2='" << w - mr
     << "' y2='" << py(0) << "' stroke='black'/>\n";
  os << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
     << h - mb << "' stroke='black'/>\n";
  os << "<polyline fill='none' stroke='#1f77b4' stroke-width='2' points='";
  for (const auto& p : points) os << px(p.first) << ',' << py(p.second) << ' ';
  os << "'/>\n";
  for (const auto& p : points) {
    os << "<circle cx='" << px(p.first) << "' cy='" << py(p.second)
       << "' r='3.5' fill='#1f77b4'/>\n";
    os << "<text x='" << px(p.first) << "' y='" << h - mb + 18
       << "' text-anchor='middle' font-size='11'>" << fmt(p.first) << "</text>\n";
  }
  os << "<text x='" << (ml + w - mr) / 2 << "' y='" << h - 12
     << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
  os << "</svg>\n";
}

// Grayscale heat map of CAF magnitude in dB over (period, frequency).
inline void write_spectrogram_svg(const std::filesystem::path& path,
                                  const std::vector<CafSurface>& periods,
                                  const std::string& title) {
  if (periods.empty()) throw pipeline_error("nothing to plot");
  const std::size_t rows = periods.size();
  const std::size_t cols = periods.front().frequencies_hz.size();
  double peak = 0;
  for (const auto& s : periods)
    for (double m : s.magnitudes) peak = std::max(peak, m);
  if (peak <= 0) peak = 1;
  const double cell = 14, ml = 60, mt = 40;
  const double w = ml + cell * static_cast<double>(cols) + 20;
  const double h = mt + cell * static_cast<double>(rows) + 40;
  std::ofstream os(path);
  if (!os) throw pipeline_error("cannot open for writing: " + path.string());
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
     << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  os << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='15'>"
     << title << "</text>\n";
  const double span_db = 40.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double rel_db = power_to_db(
          std::max(periods[r].magnitudes[c], peak * 1e-9) / peak) * 2.0;
      const double unit = std::clamp(1.0 + rel_db / span_db, 0.0, 1.0);
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - unit)));
      os << "<rect x='" << ml + cell * static_cast<double>(c) << "' y='"
         << mt + cell * static_cast<double>(r) << "' width='" << cell
         << "' height='" << cell << "' fill='rgb(" << shade << ',' << shade
         << ',' << shade << ")'/>\n";
    }
    os << "<text x='" << ml - 6 << "' y='"
       << mt + cell * (static_cast<double>(r) + 0.7)
       << "' text-anchor='end' font-size='10'>" << periods[r].period_index
       << "</text>\n";
  }
  for (std::size_t c = 0; c < cols; c += 4)
    os << "<text x='" << ml + cell * (static_cast<double>(c) + 0.5) << "' y='"
       << h - 18 << "' text-anchor='middle' font-size='10'>"
       << fmt(periods.front().frequencies_hz[c]) << "</text>\n";
  os << "</svg>\n";
}

}  // namespace io

}  // namespace mmalert
