#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lrdseg/defaults.hpp"
#include "lrdseg/spectral.hpp"

namespace lrdseg {

template <class Real>
struct ScalarMinimum {
  Real x;
  Real fx;
};

/// Golden-section search for a minimum of f on [lo, hi]; stops once the
/// bracket is narrower than tol.
template <class Real, class F>
ScalarMinimum<Real> golden_section_minimize(F&& f, Real lo, Real hi, Real tol) {
  const Real ratio = (std::sqrt(Real(5)) - Real(1)) / Real(2);
  Real u = hi - ratio * (hi - lo);
  Real v = lo + ratio * (hi - lo);
  Real fu = f(u);
  Real fv = f(v);
  while (hi - lo > tol) {
    if (fu <= fv) {
      hi = v;
      v = u;
      fv = fu;
      u = hi - ratio * (hi - lo);
      fu = f(u);
    } else {
      lo = u;
      u = v;
      fu = fv;
      v = lo + ratio * (hi - lo);
      fv = f(v);
    }
  }
  return fu <= fv ? ScalarMinimum<Real>{u, fu} : ScalarMinimum<Real>{v, fv};
}

struct WhittleFit {
  double d_hat = 0.0;
  double w_min = 0.0;
  bool at_boundary = false;
};

/// Minimizer of d -> W_n(T, d, m) over [0, d_max] for a fixed bandwidth.
///
/// A coarse grid locates the bracketing cell, golden section refines it. The
/// grid weights (j/m)^{2d} are tabulated once per instance and reused for every
/// segment, so one LocalWhittle should serve a whole cost table.
class LocalWhittle {
 public:
  explicit LocalWhittle(std::size_t m, double d_max = defaults::kDMax,
                        std::size_t grid_points = defaults::kCoarseGridPoints,
                        double tol = defaults::kGoldenTolerance)
      : m_(m), d_max_(d_max), tol_(tol), ell_(log_mean_ell(m)) {
    if (m < 1) throw InvalidArgument("bandwidth m must be positive");
    if (grid_points < 2) throw InvalidArgument("coarse grid needs two points");
    if (!(d_max > 0.0 && d_max < 0.5)) throw InvalidArgument("d_max must lie in (0, 0.5)");
    log_ratio_.resize(m);
    for (std::size_t j = 1; j <= m; ++j)
      log_ratio_[j - 1] = std::log(static_cast<double>(j) / static_cast<double>(m));
    grid_.resize(grid_points);
    weights_.resize(grid_points * m);
    for (std::size_t g = 0; g < grid_points; ++g)
      grid_[g] = d_max * static_cast<double>(g) / static_cast<double>(grid_points - 1);
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t g = 0; g < grid_points; ++g)
        weights_[j * grid_points + g] = std::exp(2.0 * grid_[g] * log_ratio_[j]);
  }

  std::size_t m() const noexcept { return m_; }
  double d_max() const noexcept { return d_max_; }
  std::span<const double> grid() const noexcept { return grid_; }

  /// W(d) from the m periodogram ordinates of one segment.
  double contrast(std::span<const double> ordinates, double d) const {
    return std::log(weighted_mean(ordinates, log_ratio_, d)) - 2.0 * d * ell_;
  }

  /// Throws DegenerateSegment when every ordinate is zero.
  WhittleFit fit(std::span<const double> ordinates) const {
    if (ordinates.size() != m_) throw InvalidArgument("ordinate count differs from m");
    detail::check_not_degenerate(ordinates);

    const std::size_t G = grid_.size();
    std::vector<double> sums(G, 0.0);
    for (std::size_t j = 0; j < m_; ++j) {
      const double* wrow = &weights_[j * G];
      const double v = ordinates[j];
      for (std::size_t g = 0; g < G; ++g) sums[g] += wrow[g] * v;
    }
    const double inv_m = 1.0 / static_cast<double>(m_);
    std::size_t best = 0;
    double best_w = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
      const double w = std::log(sums[g] * inv_m) - 2.0 * grid_[g] * ell_;
      if (g == 0 || w < best_w) {
        best = g;
        best_w = w;
      }
    }

    // Inside the bracket, expand (j/m)^{2d} around the best grid point d0:
    //   S(d) = (1/m) sum_k (2 (d - d0))^k / k! * mu_k,
    //   mu_k = sum_j (j/m)^{2 d0} log(j/m)^k I_j.
    // With |2 (d - d0) log(j/m)| <= 2 * cell * log m the truncation error is far
    // below double rounding for any practical m.
    const double d0 = grid_[best];
    std::array<double, kTaylorOrder + 1> mu{};
    for (std::size_t j = 0; j < m_; ++j) {
      double term = weights_[j * G + best] * ordinates[j];
      const double l = log_ratio_[j];
      for (std::size_t k = 0; k <= kTaylorOrder; ++k) {
        mu[k] += term;
        term *= l;
      }
    }
    const auto contrast_near = [&](double d) {
      const double h = 2.0 * (d - d0);
      double acc = 0.0;
      for (std::size_t k = kTaylorOrder + 1; k-- > 0;) acc = acc * h / static_cast<double>(k + 1) + mu[k];
      return std::log(acc * inv_m) - 2.0 * d * ell_;
    };

    const double lo = grid_[best == 0 ? 0 : best - 1];
    const double hi = grid_[best + 1 == G ? G - 1 : best + 1];
    const auto refined = golden_section_minimize<double>(contrast_near, lo, hi, tol_);

    WhittleFit fit;
    if (refined.fx < best_w) {
      fit.d_hat = refined.x;
      fit.w_min = refined.fx;
    } else {
      fit.d_hat = grid_[best];
      fit.w_min = best_w;
    }
    fit.at_boundary = fit.d_hat < defaults::kBoundaryTolerance ||
                      d_max_ - fit.d_hat < defaults::kBoundaryTolerance;
    return fit;
  }

  WhittleFit fit(const SpectralPrefix& prefix, const SegmentWindow& w) const {
    if (prefix.m() != m_) throw InvalidArgument("prefix bandwidth differs from estimator's");
    return fit(prefix.periodograms(w));
  }

 private:
  static constexpr std::size_t kTaylorOrder = 12;

  std::size_t m_;
  double d_max_;
  double tol_;
  double ell_;
  std::vector<double> log_ratio_;
  std::vector<double> grid_;
  std::vector<double> weights_;  // row j holds (j/m)^{2 grid[g]} for every g
};

/// Local Whittle estimate of d on one segment.
inline WhittleFit estimate_d(const SpectralPrefix& prefix, const SegmentWindow& w) {
  return LocalWhittle(prefix.m()).fit(prefix, w);
}

}  // namespace lrdseg
