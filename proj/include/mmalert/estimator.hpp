#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "mmalert/common.hpp"
#include "mmalert/detector.hpp"
#include "mmalert/motion_model.hpp"
#include "mmalert/scenario.hpp"

namespace mmalert {

// ---------------------------------------------------------------------------
// Trace smoothing
// ---------------------------------------------------------------------------

struct SmoothingConfig {
  int poly_degree = 2;
  double outlier_sigma = 3.0;
  // Floors for the robust residual scale. Measured traces are quantized (the
  // Doppler to the grid step, the AoA to the beam boresights), so the MAD of
  // the residuals can collapse to ~0 on staircase data; without a floor the
  // outlier pass would reject genuine quantization steps.
  double doppler_quantum_hz = 20.0;            // half the default grid step
  double aoa_quantum_rad = deg_to_rad(6.5);    // half the largest boresight gap
};

struct SmoothedTraces {
  dvec time_s;      // period midpoints on the absolute clock, length K
  dvec doppler_hz;  // fitted Doppler at each period midpoint
  dvec aoa_rad;     // fitted AoA at each period midpoint
  std::vector<char> valid;  // 1 between the first and last detected period
  std::size_t num_detected = 0;
};

namespace detail {

struct FittedPoly {
  double t_center = 0;
  double t_scale = 1;
  dvec coeffs;  // ascending powers of (t - t_center) / t_scale

  double eval(double t) const {
    const double u = (t - t_center) / t_scale;
    double acc = 0;
    for (std::size_t p = coeffs.size(); p-- > 0;) acc = acc * u + coeffs[p];
    return acc;
  }
};

// Dense solve with partial pivoting; systems here are (degree+1)^2 <= 4x4.
inline dvec solve_linear(std::vector<dvec> a, dvec b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    if (a[col][col] == 0) throw pipeline_error("singular fit system");
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  dvec x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = b[ii];
    for (std::size_t c = ii + 1; c < n; ++c) acc -= a[ii][c] * x[c];
    x[ii] = acc / a[ii][ii];
  }
  return x;
}

inline FittedPoly fit_weighted_poly(const dvec& t, const dvec& y,
                                    const dvec& w, int degree) {
  const std::size_t n = t.size();
  if (n < static_cast<std::size_t>(degree) + 1)
    throw pipeline_error("too few points for the requested fit degree");
  FittedPoly fit;
  const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
  fit.t_center = 0.5 * (*lo + *hi);
  fit.t_scale = std::max(0.5 * (*hi - *lo), 1e-9);

  const std::size_t m = static_cast<std::size_t>(degree) + 1;
  std::vector<dvec> normal(m, dvec(m, 0.0));
  dvec rhs(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (t[i] - fit.t_center) / fit.t_scale;
    dvec pow(m, 1.0);
    for (std::size_t p = 1; p < m; ++p) pow[p] = pow[p - 1] * u;
    for (std::size_t r = 0; r < m; ++r) {
      rhs[r] += w[i] * pow[r] * y[i];
      for (std::size_t c = 0; c <= r; ++c) normal[r][c] += w[i] * pow[r] * pow[c];
    }
  }
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = r + 1; c < m; ++c) normal[r][c] = normal[c][r];
  fit.coeffs = solve_linear(std::move(normal), std::move(rhs));
  return fit;
}

inline double median_of(dvec v) {
  if (v.empty()) throw pipeline_error("median of empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid) - 1,
                   v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (v[mid - 1] + hi);
}

// One weighted fit plus a single robust re-fit: points whose residual sits
// more than outlier_sigma robust scales from the residual median are dropped
// and the fit recomputed once. The scale is 1.4826*MAD floored at the
// measurement quantum.
inline FittedPoly robust_poly_fit(const dvec& t, const dvec& y, const dvec& w,
                                  int degree, double outlier_sigma,
                                  double quantum) {
  FittedPoly fit = fit_weighted_poly(t, y, w, degree);
  dvec resid(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) resid[i] = y[i] - fit.eval(t[i]);
  const double med = median_of(resid);
  dvec dev(resid.size());
  for (std::size_t i = 0; i < resid.size(); ++i) dev[i] = std::fabs(resid[i] - med);
  const double scale = std::max(1.4826 * median_of(dev), quantum);

  dvec t2, y2, w2;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::fabs(resid[i] - med) <= outlier_sigma * scale) {
      t2.push_back(t[i]);
      y2.push_back(y[i]);
      w2.push_back(w[i]);
    }
  }
  if (t2.size() == t.size()) return fit;
  if (t2.size() < static_cast<std::size_t>(degree) + 1) return fit;
  return fit_weighted_poly(t2, y2, w2, degree);
}

}  // namespace detail

// Weighted robust polynomial smoothing of the detected feature trace.
// Measured points sit at their winning dwell's midpoint time and are
// weighted by squared CAF peak magnitude; the fitted curves are then
// evaluated at every period midpoint, filling missed periods. The validity
// mask brackets the detected span (no extrapolation beyond it).
inline SmoothedTraces smooth_traces(const FeatureMatrix& gk, const BeamSet& beams,
                                    const SmoothingConfig& cfg = {}) {
  const std::size_t K = gk.features.size();
  if (K == 0) throw pipeline_error("empty feature matrix");
  const double T_d = gk.sweep_period_s;
  const double T_b = T_d / static_cast<double>(beams.surveillance_boresights_deg.size());

  dvec t, f, phi, w;
  double peak_max = 0;
  std::size_t first_det = K, last_det = 0;
  for (std::size_t k = 0; k < K; ++k) {
    const FeatureVector& g = gk.features[k];
    if (!g.detected) continue;
    t.push_back((static_cast<double>(k)) * T_d + (g.beam_index - 0.5) * T_b);
    f.push_back(g.doppler_hz);
    phi.push_back(beams.boresight_aoa_rad(g.beam_index));
    w.push_back(g.caf_peak_magnitude);
    peak_max = std::max(peak_max, g.caf_peak_magnitude);
    first_det = std::min(first_det, k);
    last_det = std::max(last_det, k);
  }
  if (t.size() < static_cast<std::size_t>(cfg.poly_degree) + 1)
    throw pipeline_error("too few detections to fit the requested degree");
  for (auto& wi : w) {
    wi = peak_max > 0 ? (wi / peak_max) : 1.0;
    wi *= wi;
  }

  const detail::FittedPoly fit_f = detail::robust_poly_fit(
      t, f, w, cfg.poly_degree, cfg.outlier_sigma, cfg.doppler_quantum_hz);
  const detail::FittedPoly fit_phi = detail::robust_poly_fit(
      t, phi, w, cfg.poly_degree, cfg.outlier_sigma, cfg.aoa_quantum_rad);

  SmoothedTraces out;
  out.num_detected = t.size();
  out.time_s.resize(K);
  out.doppler_hz.resize(K);
  out.aoa_rad.resize(K);
  out.valid.assign(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    const double tk = (static_cast<double>(k) + 0.5) * T_d;
    out.time_s[k] = tk;
    out.doppler_hz[k] = fit_f.eval(tk);
    out.aoa_rad[k] = fit_phi.eval(tk);
    out.valid[k] = (k >= first_det && k <= last_det) ? 1 : 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exhaustive grid search
// ---------------------------------------------------------------------------

struct AxisSpec {
  double lo = 0;
  double hi = 0;
  double step = 1;
  bool half_open = false;  // true: values in [lo, hi), e.g. angles

  std::size_t count() const {
    if (step <= 0 || hi < lo) throw config_error("bad axis specification");
    if (half_open)
      return static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9));
    return static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  }
  double value(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

struct SearchGrid {
  AxisSpec x1;
  AxisSpec y1{0.2, 3.0, 0.1};
  AxisSpec v{0.2, 2.0, 0.1};
  AxisSpec theta{0.0, kTwoPi, deg_to_rad(5.0), true};
  double tie_tolerance = 0.05;  // relative slack defining the near-optimal set
  double tie_abs_floor = 1e-9;

  std::size_t total() const {
    return x1.count() * y1.count() * v.count() * theta.count();
  }
};

inline SearchGrid default_search_grid(double d) {
  SearchGrid g;
  g.x1 = {0.2, d - 0.2, 0.1};
  return g;
}

struct MatchWeights {
  double w_doppler = 1.0 / 400.0;     // 1/Hz
  double w_aoa = 1.0 / (kPi / 6.0);   // 1/rad
};

struct EstimateResult {
  MotionHypothesis best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<MotionHypothesis> tie_set;  // near-optimal set, ascending grid order
  dvec tie_costs;
};

namespace detail {

struct GridCandidate {
  std::uint64_t index;
  double cost;
};

inline void atomic_min(std::atomic<double>& target, double value) {
  double cur = target.load(std::memory_order_relaxed);
  while (value < cur &&
         !target.compare_exchange_weak(cur, value, std::memory_order_relaxed)) {
  }
}

}  // namespace detail

// Exhaustive search over the hypothesis grid for the weighted least-squares
// match between predicted and smoothed features:
//   cost(h) = mean over the trace-valid periods of
//             (w1 (f_k - f_k(h)))^2 + (w2 (phi_k - phi_k(h)))^2.
// A hypothesis must stay in the y > 0 half-plane through the last valid
// period; otherwise it cannot explain the detections and is discarded.
// Returns the arg-min plus every hypothesis within the relative tie band.
// The scan prunes on a running lower bound against a shared (possibly stale,
// hence conservative) minimum; the returned set depends only on final costs,
// so the result is identical for any thread count.
inline EstimateResult estimate_trajectory(const SmoothedTraces& traces,
                                          const SearchGrid& grid,
                                          const MatchWeights& weights,
                                          double T_d, double d, double f_c,
                                          int threads = 1) {
  const std::size_t K = traces.doppler_hz.size();
  std::size_t n_valid = 0;
  for (std::size_t k = 0; k < K; ++k) n_valid += traces.valid[k] ? 1 : 0;
  if (K == 0 || n_valid == 0) throw pipeline_error("no valid trace periods");

  // remaining_valid[k]: valid periods strictly after k, for the prune bound.
  std::vector<std::size_t> remaining_valid(K + 1, 0);
  for (std::size_t k = K; k-- > 0;)
    remaining_valid[k] = remaining_valid[k + 1] + (traces.valid[k] ? 1 : 0);

  const std::size_t nx = grid.x1.count(), ny = grid.y1.count(),
                    nv = grid.v.count(), nt = grid.theta.count();
  const std::uint64_t total = static_cast<std::uint64_t>(nx) * ny * nv * nt;
  if (total == 0) throw pipeline_error("empty search grid");

  dvec cos_t(nt), sin_t(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    cos_t[i] = std::cos(grid.theta.value(i));
    sin_t[i] = std::sin(grid.theta.value(i));
  }
  std::size_t last_valid = 0;
  for (std::size_t k = 0; k < K; ++k)
    if (traces.valid[k]) last_valid = k;

  dvec t_k(K);  // period midpoints, where the traces are anchored
  for (std::size_t k = 0; k < K; ++k)
    t_k[k] = (static_cast<double>(k) + 0.5) * T_d;

  const double kappa = f_c / kLightSpeedMS;
  const double w1 = weights.w_doppler, w2 = weights.w_aoa;
  if (w1 < 0 || w2 < 0 || (w1 == 0 && w2 == 0))
    throw config_error("match weights must be non-negative and not both zero");

  std::atomic<double> shared_min{std::numeric_limits<double>::infinity()};
  const int n_threads = std::max(1, threads);
  std::vector<std::vector<detail::GridCandidate>> found(
      static_cast<std::size_t>(n_threads));

  auto worker = [&](std::uint64_t begin, std::uint64_t end,
                    std::vector<detail::GridCandidate>& out) {
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      std::uint64_t rem = idx;
      const std::size_t it = static_cast<std::size_t>(rem % nt); rem /= nt;
      const std::size_t iv = static_cast<std::size_t>(rem % nv); rem /= nv;
      const std::size_t iy = static_cast<std::size_t>(rem % ny); rem /= ny;
      const std::size_t ix = static_cast<std::size_t>(rem);
      const double x1 = grid.x1.value(ix), y1 = grid.y1.value(iy);
      const double v = grid.v.value(iv);
      const double vc = v * cos_t[it], vs = v * sin_t[it];

      const double min_now = shared_min.load(std::memory_order_relaxed);
      const double band = min_now * (1.0 + grid.tie_tolerance) + grid.tie_abs_floor;

      double sum = 0;
      std::size_t cnt = 0;
      bool pruned = false;
      for (std::size_t k = 0; k <= last_valid; ++k) {
        const double py = y1 + vs * t_k[k];
        if (py <= 0) break;
        if (!traces.valid[k]) continue;
        const double px = x1 + vc * t_k[k];
        const double dxr = px - d;
        const double r_t = std::sqrt(px * px + py * py);
        const double r_r = std::sqrt(dxr * dxr + py * py);
        const double f = -kappa * ((vc * px + vs * py) / r_t +
                                   (vc * dxr + vs * py) / r_r);
        const double phi = std::atan2(py, dxr);
        const double e1 = w1 * (traces.doppler_hz[k] - f);
        const double e2 = w2 * (traces.aoa_rad[k] - phi);
        sum += e1 * e1 + e2 * e2;
        ++cnt;
        // Lower bound on the final per-period cost: the sum can only grow
        // and at most remaining_valid periods can still join the mean.
        if (sum > band * static_cast<double>(cnt + remaining_valid[k + 1])) {
          pruned = true;
          break;
        }
      }
      // A hypothesis that exits the sensed half-plane before the last
      // detected period contradicts the measurements outright; dropping it
      // also keeps every cost a mean over the same period set, so short
      // prefixes cannot win on a handful of lucky matches.
      if (pruned || cnt != n_valid) continue;
      const double cost = sum / static_cast<double>(cnt);
      if (cost <= band) {
        out.push_back({idx, cost});
        detail::atomic_min(shared_min, cost);
      }
    }
  };

  if (n_threads == 1) {
    worker(0, total, found[0]);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (total + n_threads - 1) / n_threads;
    for (int ti = 0; ti < n_threads; ++ti) {
      const std::uint64_t b = chunk * static_cast<std::uint64_t>(ti);
      const std::uint64_t e = std::min(total, b + chunk);
      if (b >= e) break;
      pool.emplace_back(worker, b, e, std::ref(found[static_cast<std::size_t>(ti)]));
    }
    for (auto& th : pool) th.join();
  }

  double min_cost = std::numeric_limits<double>::infinity();
  for (const auto& chunk : found)
    for (const auto& c : chunk) min_cost = std::min(min_cost, c.cost);
  if (!std::isfinite(min_cost))
    throw pipeline_error("no hypothesis with a finite cost");

  const double band = min_cost * (1.0 + grid.tie_tolerance) + grid.tie_abs_floor;
  std::vector<detail::GridCandidate> keep;
  for (const auto& chunk : found)
    for (const auto& c : chunk)
      if (c.cost <= band) keep.push_back(c);
  std::sort(keep.begin(), keep.end(),
            [](const detail::GridCandidate& a, const detail::GridCandidate& b) {
              return a.index < b.index;
            });
  keep.erase(std::unique(keep.begin(), keep.end(),
                         [](const detail::GridCandidate& a,
                            const detail::GridCandidate& b) {
                           return a.index == b.index;
                         }),
             keep.end());

  auto hypothesis_of = [&](std::uint64_t idx) {
    std::uint64_t rem = idx;
    const std::size_t it = static_cast<std::size_t>(rem % nt); rem /= nt;
    const std::size_t iv = static_cast<std::size_t>(rem % nv); rem /= nv;
    const std::size_t iy = static_cast<std::size_t>(rem % ny); rem /= ny;
    const std::size_t ix = static_cast<std::size_t>(rem);
    return MotionHypothesis{grid.x1.value(ix), grid.y1.value(iy),
                            grid.v.value(iv), wrap_two_pi(grid.theta.value(it))};
  };

  EstimateResult result;
  result.best_cost = min_cost;
  bool have_best = false;
  for (const auto& c : keep) {
    result.tie_set.push_back(hypothesis_of(c.index));
    result.tie_costs.push_back(c.cost);
    if (!have_best && c.cost == min_cost) {
      result.best = result.tie_set.back();
      have_best = true;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Blockage indicators and prediction
// ---------------------------------------------------------------------------

enum class IndicatorKind {
  Geometric,    // ray-segment crossing test (default)
  ArctanChain,  // chained inequality on principal-value arctangent angles
};

// Ray-segment test: does the hypothesis trajectory meet the open segment
// between transmitter and receiver? Returns the crossing time on the
// hypothesis clock when it does.
inline BlockageLabel blockage_indicator_geometric(const MotionHypothesis& h,
                                                  double d) {
  BlockerTruth t;
  t.x1_m = h.x1_m;
  t.y1_m = h.y1_m;
  t.speed_m_s = h.v_m_s;
  t.heading_rad = h.theta_rad;
  return ground_truth_blockage(t, d);
}

namespace detail {

// Principal-value arctangent of y/x mapped into (-pi/2, pi/2], with the
// x = 0 column resolved toward +pi/2 for y > 0.
inline double principal_arctan(double y, double x) {
  if (x == 0) return (y >= 0 ? 0.5 : -0.5) * kPi;
  return std::atan(y / x);
}

}  // namespace detail

// Angle-chain indicator: 1 iff phi_T1 <= 2 pi - theta <= pi - phi_R1, with
// both angles taken as principal-value arctangents of the starting position.
// Kept as an optional alternative; it is velocity-independent and admits
// some non-crossing headings, hence not the default.
inline int blockage_indicator_arctan(const MotionHypothesis& h, double d) {
  const double phi_t = detail::principal_arctan(h.y1_m, h.x1_m);
  const double phi_r = detail::principal_arctan(h.y1_m, h.x1_m - d);
  const double heading_term = kTwoPi - h.theta_rad;
  return (phi_t <= heading_term && heading_term <= kPi - phi_r) ? 1 : 0;
}

struct PredictionResult {
  MotionHypothesis best_hypothesis;
  std::vector<MotionHypothesis> near_optimal_set;
  std::size_t blockage_set_size = 0;     // |g_b|
  double blockage_probability = 0;       // |g_b| / |set|
  bool blocks = false;
  std::optional<double> predicted_crossing_time_s;
  std::optional<double> warning_time_s;
};

// Applies the configured indicator to every near-optimal hypothesis. The
// blockage probability is the blocking fraction; the crossing time is the
// median over blocking members (the arctan indicator can flag hypotheses
// with no geometric crossing — those contribute to the probability but not
// to the time). Warning time is referenced to the end of the sensing window.
inline PredictionResult predict(const EstimateResult& est, double d,
                                double sensing_end_s,
                                IndicatorKind kind = IndicatorKind::Geometric,
                                double decision_threshold = 0.9) {
  if (est.tie_set.empty()) throw pipeline_error("empty hypothesis set");
  PredictionResult out;
  out.best_hypothesis = est.best;
  out.near_optimal_set = est.tie_set;

  dvec crossings;
  std::size_t blocking = 0;
  for (const MotionHypothesis& h : est.tie_set) {
    const BlockageLabel geo = blockage_indicator_geometric(h, d);
    const bool hit = (kind == IndicatorKind::Geometric)
                         ? geo.blocks
                         : blockage_indicator_arctan(h, d) == 1;
    if (!hit) continue;
    ++blocking;
    if (geo.crossing_time_s) crossings.push_back(*geo.crossing_time_s);
  }
  out.blockage_set_size = blocking;
  out.blockage_probability =
      static_cast<double>(blocking) / static_cast<double>(est.tie_set.size());
  out.blocks = out.blockage_probability >= decision_threshold;
  if (!crossings.empty()) {
    out.predicted_crossing_time_s = detail::median_of(crossings);
    out.warning_time_s = *out.predicted_crossing_time_s - sensing_end_s;
  }
  return out;
}

}  // namespace mmalert
