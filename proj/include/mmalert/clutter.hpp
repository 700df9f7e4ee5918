#pragma once

#include <cmath>
#include <vector>

#include "mmalert/common.hpp"

namespace mmalert {

struct ClutterConfig {
  int num_delay_bins = 8;             // K_c: cancellation basis delays 0..K_c-1
  double regularization_epsilon = 1e-6;  // diagonal loading, trace-normalized

  void validate(std::size_t n_samples) const {
    if (num_delay_bins < 1) throw config_error("need at least one delay bin");
    if (static_cast<std::size_t>(num_delay_bins) >= n_samples)
      throw config_error("cancellation basis as large as the signal");
    if (regularization_epsilon < 0) throw config_error("negative regularization");
  }
};

namespace detail {

// In-place Cholesky solve of the Hermitian positive-definite system A x = b.
inline std::vector<cplx> cholesky_solve(std::vector<std::vector<cplx>> a,
                                        std::vector<cplx> b) {
  const std::size_t n = a.size();
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j][j].real();
    for (std::size_t k = 0; k < j; ++k) diag -= std::norm(a[j][k]);
    if (diag <= 0) throw pipeline_error("cancellation basis numerically singular");
    const double ljj = std::sqrt(diag);
    a[j][j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      cplx v = a[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i][k] * std::conj(a[j][k]);
      a[i][j] = v / ljj;
    }
  }
  // Forward then backward substitution: L y = b, L^H x = y.
  for (std::size_t i = 0; i < n; ++i) {
    cplx v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i][k] * b[k];
    b[i] = v / a[i][i].real();
  }
  for (std::size_t ii = n; ii-- > 0;) {
    cplx v = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= std::conj(a[k][ii]) * b[k];
    b[ii] = v / a[ii][ii].real();
  }
  return b;
}

}  // namespace detail

// Least-squares cancellation of everything correlated with delayed copies of
// the reference: residual = y - B a*, where B's columns are the reference
// delayed by 0..K_c-1 samples (zero-padded) and a* minimizes |y - B a|^2,
// solved via the K_c x K_c normal equations with light diagonal loading
// (epsilon scaled by the mean column energy). With epsilon = 0 the residual
// is the exact orthogonal projection complement.
inline cvec cancel_clutter(const cvec& surveillance, const cvec& reference,
                           const ClutterConfig& cfg = {}) {
  if (surveillance.size() != reference.size())
    throw pipeline_error("surveillance/reference length mismatch");
  const std::size_t n = surveillance.size();
  cfg.validate(n);
  const std::size_t kc = static_cast<std::size_t>(cfg.num_delay_bins);

  // Gram matrix G[p][q] = <B_p, B_q> = sum_n conj(ref[n-p]) ref[n-q].
  std::vector<std::vector<cplx>> gram(kc, std::vector<cplx>(kc));
  std::vector<cplx> rhs(kc);
  for (std::size_t p = 0; p < kc; ++p) {
    for (std::size_t q = 0; q <= p; ++q) {
      cplx acc{};
      for (std::size_t i = p; i < n; ++i) acc += std::conj(reference[i - p]) * reference[i - q];
      gram[p][q] = acc;
      gram[q][p] = std::conj(acc);
    }
    cplx acc{};
    for (std::size_t i = p; i < n; ++i) acc += std::conj(reference[i - p]) * surveillance[i];
    rhs[p] = acc;
  }

  double trace = 0;
  for (std::size_t p = 0; p < kc; ++p) trace += gram[p][p].real();
  const double loading = cfg.regularization_epsilon * trace / static_cast<double>(kc);
  for (std::size_t p = 0; p < kc; ++p) gram[p][p] += loading;

  const std::vector<cplx> coef = detail::cholesky_solve(std::move(gram), std::move(rhs));

  cvec residual = surveillance;
  for (std::size_t p = 0; p < kc; ++p) {
    const cplx a = coef[p];
    for (std::size_t i = p; i < n; ++i) residual[i] -= a * reference[i - p];
  }
  return residual;
}

}  // namespace mmalert
