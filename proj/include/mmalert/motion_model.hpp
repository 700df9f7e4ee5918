#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mmalert/common.hpp"
#include "mmalert/scenario.hpp"

namespace mmalert {

struct MotionHypothesis {
  double x1_m = 0;
  double y1_m = 0;
  double v_m_s = 0;
  double theta_rad = 0;
};

struct Angles {
  double phi_t = 0;  // angle of departure at the transmitter
  double phi_r = 0;  // angle of arrival at the receiver
};

// Both angles use the two-argument arctangent, which maps the sensed
// half-plane y > 0 into (0, pi) for phi_T and phi_R alike. This keeps the
// Doppler expression below continuous as the blocker passes x = d and makes
// it vanish exactly at the baseline crossing (half-angle difference -> pi/2).
inline Angles angles_at(Point p, double d) {
  if (p.y <= 0) throw pipeline_error("geometry degenerate: blocker not in y > 0");
  return {std::atan2(p.y, p.x), std::atan2(p.y, p.x - d)};
}

// Bistatic Doppler of a point moving with speed v along heading theta:
//   f_d = -2 (f_c/c) v cos(theta - (phi_T+phi_R)/2) cos((phi_T-phi_R)/2).
inline double doppler_at(Point p, double v, double theta, double d, double f_c) {
  const Angles a = angles_at(p, d);
  const double mean = 0.5 * (a.phi_t + a.phi_r);
  const double half_diff = 0.5 * (a.phi_t - a.phi_r);
  return -2.0 * (f_c / kLightSpeedMS) * v * std::cos(theta - mean) *
         std::cos(half_diff);
}

struct DopplerGradient {
  double df_dx = 0;
  double df_dy = 0;
  double df_dv = 0;
  double df_dtheta = 0;
};

// Analytic partials of the Doppler expression. Uses the equivalent sum form
//   f_d = -(f_c/c) v [cos(theta - phi_T) + cos(theta - phi_R)]
// and the atan2 partials d(phi_T)/dx = -y/r_T^2 etc.
inline DopplerGradient doppler_gradient(Point p, double v, double theta,
                                        double d, double f_c) {
  const Angles a = angles_at(p, d);
  const double kappa = f_c / kLightSpeedMS;
  const double st = std::sin(theta - a.phi_t);
  const double sr = std::sin(theta - a.phi_r);
  const double rt2 = p.x * p.x + p.y * p.y;
  const double rr2 = (p.x - d) * (p.x - d) + p.y * p.y;

  DopplerGradient g;
  g.df_dv = -kappa * (std::cos(theta - a.phi_t) + std::cos(theta - a.phi_r));
  g.df_dtheta = kappa * v * (st + sr);
  g.df_dx = kappa * v * p.y * (st / rt2 + sr / rr2);
  g.df_dy = -kappa * v * (st * p.x / rt2 + sr * (p.x - d) / rr2);
  return g;
}

struct PredictedFeatures {
  dvec doppler_hz;  // f_d,k, length K
  dvec aoa_rad;     // phi_R,k, length K
  dvec aod_rad;     // phi_T,k, length K
  // Periods 1..valid_count stay in y > 0; entries past that are zero-filled.
  std::size_t valid_count = 0;
};

// Forward model: per-period features of a constant-velocity hypothesis.
// Period k (1-based) is evaluated at the period midpoint (k - 1/2) T_d —
// matching where measured features are anchored in time — at position
//   (x1 + v (k-1/2) T_d cos theta, y1 + v (k-1/2) T_d sin theta),
// with (x1, y1) the position at the start of sensing. Hypotheses that exit
// y > 0 inside the window are truncated to their valid prefix.
inline PredictedFeatures predict_features(const MotionHypothesis& h, int K,
                                          double T_d, double d, double f_c) {
  if (K < 1) throw pipeline_error("need at least one sweep period");
  PredictedFeatures out;
  out.doppler_hz.assign(static_cast<std::size_t>(K), 0.0);
  out.aoa_rad.assign(static_cast<std::size_t>(K), 0.0);
  out.aod_rad.assign(static_cast<std::size_t>(K), 0.0);
  const double cx = h.v_m_s * std::cos(h.theta_rad);
  const double cy = h.v_m_s * std::sin(h.theta_rad);
  for (int k = 1; k <= K; ++k) {
    const double t = (static_cast<double>(k) - 0.5) * T_d;
    const Point p{h.x1_m + cx * t, h.y1_m + cy * t};
    if (p.y <= 0) break;
    const Angles a = angles_at(p, d);
    const std::size_t idx = static_cast<std::size_t>(k - 1);
    out.aod_rad[idx] = a.phi_t;
    out.aoa_rad[idx] = a.phi_r;
    out.doppler_hz[idx] = doppler_at(p, h.v_m_s, h.theta_rad, d, f_c);
    out.valid_count = static_cast<std::size_t>(k);
  }
  return out;
}

}  // namespace mmalert
