#pragma once

// Slow reference implementations used only by the tests. They share no code
// with the library's prefix sums, Taylor refinement, or dynamic program.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

/// I_T(2 pi j / n) by a direct sum over t in {a+1..b}; samples are 1-based.
inline double windowed_periodogram(std::span<const double> x, std::size_t a, std::size_t b,
                                   std::size_t j) {
  const double n = static_cast<double>(x.size());
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t t = a + 1; t <= b; ++t) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) * static_cast<double>(t) / n;
    acc += x[t - 1] * std::polar(1.0, angle);
  }
  return std::norm(acc) / (2.0 * std::numbers::pi * static_cast<double>(b - a));
}

inline std::vector<double> windowed_periodograms(std::span<const double> x, std::size_t a,
                                                 std::size_t b, std::size_t m) {
  std::vector<double> out(m);
  for (std::size_t j = 1; j <= m; ++j) out[j - 1] = windowed_periodogram(x, a, b, j);
  return out;
}

/// ell(m) through the log-Gamma function.
inline double ell(std::size_t m) {
  const double md = static_cast<double>(m);
  return (std::lgamma(md + 1.0) - md * std::log(md)) / md;
}

inline double contrast(std::span<const double> ord, double d) {
  const std::size_t m = ord.size();
  double s = 0.0;
  for (std::size_t j = 1; j <= m; ++j)
    s += std::pow(static_cast<double>(j) / static_cast<double>(m), 2.0 * d) * ord[j - 1];
  return std::log(s / static_cast<double>(m)) - 2.0 * d * ell(m);
}

struct Fit {
  double d = 0.0;
  double w = 0.0;
};

/// Dense scan followed by ternary search on the exact (convex) contrast.
inline Fit minimize_contrast(std::span<const double> ord, double d_max = 0.4999) {
  const int points = 250;
  int best = 0;
  double best_w = std::numeric_limits<double>::infinity();
  for (int g = 0; g <= points; ++g) {
    const double w = contrast(ord, d_max * g / points);
    if (w < best_w) {
      best_w = w;
      best = g;
    }
  }
  double lo = d_max * std::max(0, best - 1) / points;
  double hi = d_max * std::min(points, best + 1) / points;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double u = lo + (hi - lo) / 3.0;
    const double v = hi - (hi - lo) / 3.0;
    if (contrast(ord, u) <= contrast(ord, v)) hi = v; else lo = u;
  }
  const double d = 0.5 * (lo + hi);
  const double w = contrast(ord, d);
  return w < best_w ? Fit{d, w} : Fit{d_max * best / points, best_w};
}

struct Segmentation {
  std::vector<std::size_t> breaks;
  double cost = std::numeric_limits<double>::infinity();
};

/// Minimum of sum cost(segment) over every K-subset of `candidates` whose
/// segments are at least min_seg long. Subsets are visited in lexicographic
/// order and only a strictly smaller total replaces the incumbent.
inline Segmentation exhaustive(std::size_t n, std::span<const std::size_t> candidates,
                               std::size_t k, std::size_t min_seg,
                               const std::function<double(std::size_t, std::size_t)>& cost) {
  Segmentation best;
  std::vector<std::size_t> pick;
  std::function<void(std::size_t)> rec = [&](std::size_t from) {
    if (pick.size() == k) {
      std::size_t prev = 0;
      double total = 0.0;
      for (std::size_t idx : pick) {
        const std::size_t t = candidates[idx];
        if (t - prev < min_seg) return;
        total += cost(prev, t);
        prev = t;
      }
      if (n - prev < min_seg) return;
      total += cost(prev, n);
      if (total < best.cost) {
        best.cost = total;
        best.breaks.clear();
        for (std::size_t idx : pick) best.breaks.push_back(candidates[idx]);
      }
      return;
    }
    for (std::size_t i = from; i < candidates.size(); ++i) {
      pick.push_back(i);
      rec(i + 1);
      pick.pop_back();
    }
  };
  rec(0);
  return best;
}

}  // namespace oracle
