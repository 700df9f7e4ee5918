#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mmalert/common.hpp"

// Minimal deterministic transform machinery: an iterative radix-2 FFT and a
// Bluestein chirp-z transform used to evaluate correlation sums over an
// arbitrary arithmetic frequency grid in O(L log L). Kept self-contained so
// results are bit-identical across runs, threads and evaluation order.

namespace mmalert::detail {

class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n), bitrev_(n), tw_(n / 2) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw pipeline_error("FFT size must be a power of two");
    const int bits = std::countr_zero(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k)
      tw_[k] = std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  }

  std::size_t size() const { return n_; }

  void forward(cvec& a) const {
    if (a.size() != n_) throw pipeline_error("FFT input size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j = bitrev_[i];
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t stride = n_ / len;
      for (std::size_t base = 0; base < n_; base += len) {
        for (std::size_t k = 0; k < len / 2; ++k) {
          const cplx w = tw_[k * stride];
          const cplx u = a[base + k];
          const cplx t = w * a[base + k + len / 2];
          a[base + k] = u + t;
          a[base + k + len / 2] = u - t;
        }
      }
    }
  }

  // Inverse transform including the 1/n scale.
  void inverse(cvec& a) const {
    for (auto& v : a) v = std::conj(v);
    forward(a);
    const double s = 1.0 / static_cast<double>(n_);
    for (auto& v : a) v = std::conj(v) * s;
  }

 private:
  std::size_t n_;
  std::vector<std::size_t> bitrev_;
  cvec tw_;
};

// Evaluates X_j = sum_{n=0}^{N-1} x[n] exp(-i 2 pi (f0 + j step) n Ts) for
// j = 0..J-1 via Bluestein's identity nj = (n^2 + j^2 - (n-j)^2) / 2, i.e. a
// single linear convolution against a quadratic chirp. Valid for any N, J
// and any real f0/step (either sign).
class CztPlan {
 public:
  CztPlan(std::size_t n_in, std::size_t n_out, double f0_hz, double step_hz,
          double sample_period_s)
      : n_(n_in),
        j_(n_out),
        l_(std::bit_ceil(n_in + n_out - 1)),
        fft_(l_),
        chirp_in_(n_in),
        kernel_fft_(l_, cplx{}),
        chirp_out_(n_out) {
    if (n_in < 1 || n_out < 1) throw pipeline_error("empty transform");
    const double alpha = step_hz * sample_period_s;   // cycles per sample^2, x2
    const double beta = f0_hz * sample_period_s;      // cycles per sample
    // Quadratic phase arguments grow like alpha n^2; reduce modulo a full
    // turn before calling polar to keep precision at large N.
    auto quad = [alpha](double idx) {
      return kPi * std::fmod(alpha * idx * idx, 2.0);
    };
    for (std::size_t n = 0; n < n_in; ++n) {
      const double lin = kTwoPi * std::fmod(beta * static_cast<double>(n), 1.0);
      chirp_in_[n] = std::polar(1.0, -lin - quad(static_cast<double>(n)));
    }
    for (std::size_t j = 0; j < n_out; ++j)
      chirp_out_[j] = std::polar(1.0, -quad(static_cast<double>(j)));
    for (std::size_t m = 0; m < n_out; ++m)
      kernel_fft_[m] = std::polar(1.0, quad(static_cast<double>(m)));
    for (std::size_t m = 1; m < n_in; ++m)
      kernel_fft_[l_ - m] = std::polar(1.0, quad(static_cast<double>(m)));
    fft_.forward(kernel_fft_);
  }

  std::size_t input_size() const { return n_; }
  std::size_t output_size() const { return j_; }

  cvec run(const cvec& x) const {
    if (x.size() != n_) throw pipeline_error("transform input size mismatch");
    cvec work(l_, cplx{});
    for (std::size_t n = 0; n < n_; ++n) work[n] = x[n] * chirp_in_[n];
    fft_.forward(work);
    for (std::size_t i = 0; i < l_; ++i) work[i] *= kernel_fft_[i];
    fft_.inverse(work);
    cvec out(j_);
    for (std::size_t j = 0; j < j_; ++j) out[j] = chirp_out_[j] * work[j];
    return out;
  }

 private:
  std::size_t n_, j_, l_;
  FftPlan fft_;
  cvec chirp_in_;
  cvec kernel_fft_;
  cvec chirp_out_;
};

}  // namespace mmalert::detail
