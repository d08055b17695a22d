#pragma once

/**
 * @file
 * Segment periodograms at the global Fourier frequencies lambda_j = 2 pi j / n.
 *
 * Because the frequencies do not depend on the segment, the DFT of any
 * contiguous segment {a+1, ..., b} is a difference of two prefix sums
 *   P_j(t) = sum_{k=1..t} X_k exp(-i k lambda_j),
 * so one O(n m) pass serves every window.
 */

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "lrdseg/defaults.hpp"
#include "lrdseg/error.hpp"

namespace lrdseg {

/// lambda_j = 2 pi j / n for j = 1..m.
class FrequencyGrid {
 public:
  FrequencyGrid(std::size_t n, std::size_t m) : n_(n), m_(m) {
    if (m < 1 || 2 * m >= n)
      throw InvalidArgument("bandwidth m must satisfy 1 <= m < n/2 (n=" +
                            std::to_string(n) + ", m=" + std::to_string(m) + ")");
  }

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }

  double lambda(std::size_t j) const noexcept {
    return 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
  }

 private:
  std::size_t n_;
  std::size_t m_;
};

/// T = {a+1, ..., b} in one-based sample indices.
struct SegmentWindow {
  std::size_t a = 0;
  std::size_t b = 0;

  std::size_t length() const noexcept { return b - a; }
};

/// ell(m) = (1/m) sum_{k=1..m} log(k/m); lies in [-1, 0].
inline double log_mean_ell(std::size_t m) {
  if (m == 0) return 0.0;
  const auto md = static_cast<double>(m);
  double acc = 0.0;
  for (std::size_t k = 1; k <= m; ++k) acc += std::log(static_cast<double>(k) / md);
  return acc / md;
}

class SpectralPrefix {
 public:
  SpectralPrefix(std::span<const double> x, std::size_t m)
      : grid_(x.size(), m), sums_((x.size() + 1) * m), ell_(log_mean_ell(m)) {
    const std::size_t n = x.size();
    // Exact unit roots exp(-2 pi i r / n), indexed by r = (k j) mod n.
    std::vector<std::complex<double>> roots(n);
    for (std::size_t r = 0; r < n; ++r) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(r) /
                           static_cast<double>(n);
      roots[r] = {std::cos(angle), std::sin(angle)};
    }
    std::vector<std::size_t> phase(m, 0);
    for (std::size_t t = 1; t <= n; ++t) {
      const double xt = x[t - 1];
      const std::complex<double>* prev = &sums_[(t - 1) * m];
      std::complex<double>* cur = &sums_[t * m];
      for (std::size_t j = 0; j < m; ++j) {
        phase[j] += j + 1;
        if (phase[j] >= n) phase[j] -= n;
        cur[j] = prev[j] + xt * roots[phase[j]];
      }
    }

    log_ratio_.resize(m);
    for (std::size_t j = 1; j <= m; ++j)
      log_ratio_[j - 1] = std::log(static_cast<double>(j) / static_cast<double>(m));
  }

  const FrequencyGrid& grid() const noexcept { return grid_; }
  std::size_t n() const noexcept { return grid_.n(); }
  std::size_t m() const noexcept { return grid_.m(); }

  /// P_j(t) for 1 <= j <= m, 0 <= t <= n.
  std::complex<double> cumsum(std::size_t j, std::size_t t) const {
    check_frequency(j);
    if (t > n()) throw InvalidArgument("prefix index beyond series length");
    return sums_[t * m() + (j - 1)];
  }

  /// log(j/m) for j = 1..m, zero-based.
  std::span<const double> log_ratios() const noexcept { return log_ratio_; }
  /// ell(m) for this prefix's bandwidth.
  double ell() const noexcept { return ell_; }

  void check_window(const SegmentWindow& w) const {
    if (!(w.a < w.b && w.b <= n()))
      throw InvalidArgument("segment window must satisfy 0 <= a < b <= n");
  }

  void check_frequency(std::size_t j) const {
    if (j < 1 || j > m()) throw InvalidArgument("frequency index outside 1..m");
  }

  /// I_T(lambda_j) = |P_j(b) - P_j(a)|^2 / (2 pi |T|).
  double periodogram(const SegmentWindow& w, std::size_t j) const {
    check_window(w);
    check_frequency(j);
    const auto diff = sums_[w.b * m() + (j - 1)] - sums_[w.a * m() + (j - 1)];
    return std::norm(diff) / (2.0 * std::numbers::pi * static_cast<double>(w.length()));
  }

  /// All m ordinates of one window, written into `out` (size m).
  void periodograms(const SegmentWindow& w, std::span<double> out) const {
    check_window(w);
    const std::size_t mm = m();
    const std::complex<double>* hi = &sums_[w.b * mm];
    const std::complex<double>* lo = &sums_[w.a * mm];
    const double scale =
        1.0 / (2.0 * std::numbers::pi * static_cast<double>(w.length()));
    for (std::size_t j = 0; j < mm; ++j) out[j] = std::norm(hi[j] - lo[j]) * scale;
  }

  std::vector<double> periodograms(const SegmentWindow& w) const {
    std::vector<double> out(m());
    periodograms(w, out);
    return out;
  }

 private:
  FrequencyGrid grid_;
  std::vector<std::complex<double>> sums_;  // row t holds P_1(t)..P_m(t)
  std::vector<double> log_ratio_;
  double ell_;
};

inline SpectralPrefix build_prefix(std::span<const double> x, std::size_t m) {
  return SpectralPrefix(x, m);
}

inline double periodogram_segment(const SpectralPrefix& prefix, const SegmentWindow& w,
                                  std::size_t j) {
  return prefix.periodogram(w, j);
}

/// S(d) = (1/m) sum_j exp(2 d log(j/m)) I_j from precomputed ordinates.
inline double weighted_mean(std::span<const double> ordinates,
                            std::span<const double> log_ratios, double d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < ordinates.size(); ++j)
    acc += std::exp(2.0 * d * log_ratios[j]) * ordinates[j];
  return acc / static_cast<double>(ordinates.size());
}

namespace detail {

inline void check_search_d(double d) {
  if (!(d >= 0.0 && d < 0.5))
    throw InvalidArgument("memory parameter d must lie in [0, 0.5)");
}

inline void check_not_degenerate(std::span<const double> ordinates) {
  for (double v : ordinates)
    if (v > 0.0) return;
  throw DegenerateSegment("all periodogram ordinates vanish on this segment");
}

}  // namespace detail

/// S_n(T, d, m) = (1/m) sum_{j=1..m} (j/m)^{2d} I_T(lambda_j).
inline double s_n(const SpectralPrefix& prefix, const SegmentWindow& w, double d) {
  detail::check_search_d(d);
  const auto ord = prefix.periodograms(w);
  detail::check_not_degenerate(ord);
  return weighted_mean(ord, prefix.log_ratios(), d);
}

/// W_n(T, d, m) = log S_n(T, d, m) - 2 d ell(m).
inline double w_n(const SpectralPrefix& prefix, const SegmentWindow& w, double d) {
  return std::log(s_n(prefix, w, d)) - 2.0 * d * prefix.ell();
}

}  // namespace lrdseg
