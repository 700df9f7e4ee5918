#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "mmalert/clutter.hpp"
#include "mmalert/waveform.hpp"

using namespace mmalert;
using Catch::Approx;

namespace {

double energy(const cvec& v) {
  double acc = 0;
  for (const cplx& x : v) acc += std::norm(x);
  return acc;
}

cvec delayed_scaled(const cvec& s, int delay, cplx amp) {
  cvec out(s.size(), cplx{});
  for (std::size_t n = static_cast<std::size_t>(delay); n < s.size(); ++n)
    out[n] = amp * s[n - static_cast<std::size_t>(delay)];
  return out;
}

cvec add(const cvec& a, const cvec& b) {
  cvec out(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = a[n] + b[n];
  return out;
}

}  // namespace

TEST_CASE("in-span components are annihilated") {
  const cvec ref = gen_tx_baseband(11, 8192);
  cvec y = delayed_scaled(ref, 0, {0.9, -0.2});
  y = add(y, delayed_scaled(ref, 2, {0.0, 0.45}));
  y = add(y, delayed_scaled(ref, 5, {-0.3, 0.1}));

  const cvec residual = cancel_clutter(y, ref);  // basis spans delays 0..7
  REQUIRE(energy(residual) / energy(y) < 1e-10);
}

TEST_CASE("cancellation is idempotent") {
  const cvec ref = gen_tx_baseband(12, 8192);
  auto rng = make_rng(99);
  cvec y = delayed_scaled(ref, 1, {0.7, 0.1});
  for (auto& v : y) v += 0.05 * mmalert::detail::gaussian_cplx(rng);

  const cvec r1 = cancel_clutter(y, ref);
  const cvec r2 = cancel_clutter(r1, ref);
  double diff = 0;
  for (std::size_t n = 0; n < r1.size(); ++n) diff += std::norm(r1[n] - r2[n]);
  REQUIRE(diff / energy(r1) < 1e-8);
}

TEST_CASE("cancellation is linear in the surveillance input") {
  const cvec ref = gen_tx_baseband(13, 4096);
  auto rng = make_rng(5);
  cvec y1(ref.size()), y2(ref.size());
  for (std::size_t n = 0; n < ref.size(); ++n) {
    y1[n] = mmalert::detail::gaussian_cplx(rng);
    y2[n] = mmalert::detail::gaussian_cplx(rng);
  }
  const cplx a{0.6, -1.1}, b{-0.4, 0.2};
  cvec combo(ref.size());
  for (std::size_t n = 0; n < ref.size(); ++n) combo[n] = a * y1[n] + b * y2[n];

  const cvec r1 = cancel_clutter(y1, ref);
  const cvec r2 = cancel_clutter(y2, ref);
  const cvec rc = cancel_clutter(combo, ref);
  double worst = 0;
  for (std::size_t n = 0; n < ref.size(); ++n)
    worst = std::max(worst, std::abs(rc[n] - (a * r1[n] + b * r2[n])));
  REQUIRE(worst < 1e-9);
}

TEST_CASE("the residual is orthogonal to the cancellation basis") {
  const cvec ref = gen_tx_baseband(14, 4096);
  auto rng = make_rng(6);
  cvec y = delayed_scaled(ref, 0, {0.5, 0.3});
  for (auto& v : y) v += 0.2 * mmalert::detail::gaussian_cplx(rng);

  ClutterConfig cfg;
  cfg.regularization_epsilon = 0.0;  // exact projection
  const cvec residual = cancel_clutter(y, ref, cfg);
  for (int p = 0; p < cfg.num_delay_bins; ++p) {
    cplx ip{};
    for (std::size_t n = static_cast<std::size_t>(p); n < ref.size(); ++n)
      ip += residual[n] * std::conj(ref[n - static_cast<std::size_t>(p)]);
    REQUIRE(std::abs(ip) / static_cast<double>(ref.size()) < 1e-10);
  }
}

TEST_CASE("a Doppler-shifted echo survives cancellation") {
  // 200 Hz over a 25 ms window is an integer number of cycles, so the shifted
  // copy is nearly orthogonal to the zero-Doppler basis.
  const std::size_t n_samples = 25000;
  const double Ts = 1e-6;
  const cvec ref = gen_tx_baseband(15, n_samples);
  cvec y = delayed_scaled(ref, 0, {0.8, 0.0});
  for (std::size_t n = 0; n < n_samples; ++n)
    y[n] += 0.3 * ref[n] *
            std::polar(1.0, -kTwoPi * 200.0 * static_cast<double>(n) * Ts);

  const cvec residual = cancel_clutter(y, ref);
  const double echo_energy = 0.3 * 0.3 * static_cast<double>(n_samples);
  REQUIRE(energy(residual) == Approx(echo_energy).epsilon(0.02));

  // And the surviving component correlates coherently with the echo model.
  cplx ip{};
  for (std::size_t n = 0; n < n_samples; ++n)
    ip += residual[n] * std::conj(ref[n]) *
          std::polar(1.0, kTwoPi * 200.0 * static_cast<double>(n) * Ts);
  REQUIRE(std::abs(ip) / (0.3 * static_cast<double>(n_samples)) ==
          Approx(1.0).epsilon(0.02));
}

TEST_CASE("configuration and input validation") {
  const cvec ref = gen_tx_baseband(16, 256);
  cvec y = ref;

  ClutterConfig cfg;
  cfg.num_delay_bins = 0;
  REQUIRE_THROWS_AS(cancel_clutter(y, ref, cfg), config_error);

  cfg.num_delay_bins = 300;  // basis as large as the signal
  REQUIRE_THROWS_AS(cancel_clutter(y, ref, cfg), config_error);

  cfg = ClutterConfig{};
  cfg.regularization_epsilon = -1.0;
  REQUIRE_THROWS_AS(cancel_clutter(y, ref, cfg), config_error);

  y.pop_back();
  REQUIRE_THROWS_AS(cancel_clutter(y, ref), pipeline_error);
}
