#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "lrdseg/error.hpp"

namespace lrdseg::defaults {

/// m = floor(n^kBandwidthExponent).
inline constexpr double kBandwidthExponent = 0.65;
/// Truncation of the MA(inf) filter: M = kTruncationFactor * n.
inline constexpr std::size_t kTruncationFactor = 10;
/// Approximate number of candidate breakpoints on the default grid.
inline constexpr std::size_t kTargetCandidates = 1000;
/// min_seg = max(kMinSegmentFloor, kMinSegmentSteps * step).
inline constexpr std::size_t kMinSegmentFloor = 10;
inline constexpr std::size_t kMinSegmentSteps = 2;
/// Largest n for which the exact (step = 1) candidate grid is allowed.
inline constexpr std::size_t kExactModeMaxLength = 1000;
/// Fixed penalty z_n = kPenaltyScale / sqrt(n).
inline constexpr double kPenaltyScale = 2.0;
inline constexpr std::size_t kReplications = 500;

/// Search interval upper bound for d; [0, 0.5) cannot be searched to its
/// supremum.
inline constexpr double kDMax = 0.4999;
inline constexpr std::size_t kCoarseGridPoints = 101;
inline constexpr double kGoldenTolerance = 1e-6;
inline constexpr double kBoundaryTolerance = 1e-4;

inline std::size_t bandwidth(std::size_t n) {
  if (n < 5) throw InvalidArgument("series too short for any bandwidth");
  auto m = static_cast<std::size_t>(
      std::floor(std::pow(static_cast<double>(n), kBandwidthExponent)));
  // m < n/2 must hold; only bites for tiny n.
  while (m > 1 && 2 * m >= n) --m;
  return std::max<std::size_t>(m, 1);
}

/// K_max = 2 * (floor(ln n) - 1), never negative.
inline std::size_t max_changes(std::size_t n) {
  const auto lg = static_cast<long>(std::floor(std::log(static_cast<double>(n))));
  return static_cast<std::size_t>(std::max(0L, 2 * (lg - 1)));
}

inline double fixed_penalty(std::size_t n) {
  return kPenaltyScale / std::sqrt(static_cast<double>(n));
}

inline double bic_penalty(std::size_t n) {
  const auto nd = static_cast<double>(n);
  return 2.0 * std::log(nd) / nd;
}

inline std::size_t grid_step(std::size_t n) {
  return std::max<std::size_t>(1, n / kTargetCandidates);
}

/// Short segments are kept on purpose: the slope heuristic reads the penalty
/// off the over-segmented end of the contrast curve, which a large minimum
/// length flattens.
inline std::size_t min_segment(std::size_t n) {
  return std::max(kMinSegmentFloor, kMinSegmentSteps * grid_step(n));
}

inline std::size_t truncation(std::size_t n) { return kTruncationFactor * n; }

}  // namespace lrdseg::defaults
