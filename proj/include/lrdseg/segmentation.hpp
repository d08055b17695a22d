#pragma once

/**
 * @file
 * Multiple change-point estimation by minimizing the sum of per-segment local
 * Whittle contrasts
 *   C(K) = (1/n) sum_{k=1..K+1} n_k W_n(T_k, d_k, m)
 * over breakpoints restricted to a candidate grid, for every K <= K_max, then
 * selecting K by a linear penalty K z_n.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lrdseg/defaults.hpp"
#include "lrdseg/error.hpp"
#include "lrdseg/parallel.hpp"
#include "lrdseg/spectral.hpp"
#include "lrdseg/whittle.hpp"

namespace lrdseg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct CandidateGrid {
  std::size_t n = 0;
  std::size_t step = 1;
  std::size_t min_seg = 1;
  std::vector<std::size_t> candidates;

  /// 0, the candidates, then n.
  std::vector<std::size_t> nodes() const {
    std::vector<std::size_t> v;
    v.reserve(candidates.size() + 2);
    v.push_back(0);
    v.insert(v.end(), candidates.begin(), candidates.end());
    v.push_back(n);
    return v;
  }

  /// Largest number of breaks the grid can host with every segment at least
  /// min_seg long. Greedy earliest placement is optimal for this packing.
  std::size_t max_breaks() const {
    std::size_t count = 0;
    std::size_t cur = 0;
    for (std::size_t c : candidates) {
      if (c >= cur + min_seg && n - c >= min_seg) {
        ++count;
        cur = c;
      }
    }
    return count;
  }
};

/// Multiples of `step` in [min_seg, n - min_seg].
inline CandidateGrid build_candidate_grid(std::size_t n, std::size_t step,
                                          std::size_t min_seg) {
  if (step < 1) throw InvalidArgument("grid step must be at least 1");
  if (min_seg < 1) throw InvalidArgument("minimum segment length must be at least 1");
  if (n < 2 * min_seg)
    throw InvalidArgument("candidate grid is empty: n < 2 * min_seg");
  CandidateGrid g{n, step, min_seg, {}};
  const std::size_t first = ((min_seg + step - 1) / step) * step;
  for (std::size_t c = first; c + min_seg <= n; c += step) g.candidates.push_back(c);
  if (g.candidates.empty())
    throw InvalidArgument("candidate grid is empty: no multiple of step fits");
  return g;
}

/// Which cells build_cost_table evaluates.
enum class CellSelection {
  all,
  /// Only cells starting at 0 or ending at n; enough for K_max <= 1.
  boundary,
};

/// Segment costs n_k W_n(T_k, d_hat_k, m) on pairs of grid nodes.
class CostTable {
 public:
  CostTable() = default;
  CostTable(std::vector<std::size_t> nodes, std::size_t min_seg, CellSelection selection)
      : nodes_(std::move(nodes)),
        min_seg_(min_seg),
        selection_(selection),
        cost_(nodes_.size() * nodes_.size(), kInf),
        dhat_(nodes_.size() * nodes_.size(), std::numeric_limits<double>::quiet_NaN()) {}

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::size_t>& nodes() const noexcept { return nodes_; }
  std::size_t n() const noexcept { return nodes_.back(); }
  std::size_t min_seg() const noexcept { return min_seg_; }
  CellSelection selection() const noexcept { return selection_; }
  std::size_t degenerate_count() const noexcept { return degenerate_; }

  bool admissible(std::size_t i, std::size_t j) const noexcept {
    return i < j && nodes_[j] - nodes_[i] >= min_seg_;
  }

  bool evaluated(std::size_t i, std::size_t j) const noexcept {
    return selection_ == CellSelection::all || i == 0 || j + 1 == nodes_.size();
  }

  /// +inf for inadmissible or degenerate cells.
  double cost(std::size_t i, std::size_t j) const {
    if (!evaluated(i, j))
      throw std::logic_error("cost table cell was not evaluated in boundary mode");
    return cost_[i * size() + j];
  }

  double dhat(std::size_t i, std::size_t j) const { return dhat_[i * size() + j]; }

  /// Node index of sample position t, or size() if t is not a node.
  std::size_t index_of(std::size_t t) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    return (it != nodes_.end() && *it == t) ? static_cast<std::size_t>(it - nodes_.begin())
                                            : size();
  }

 private:
  friend CostTable build_cost_table(const SpectralPrefix&, const CandidateGrid&,
                                    std::size_t, CellSelection);

  std::vector<std::size_t> nodes_;
  std::size_t min_seg_ = 1;
  CellSelection selection_ = CellSelection::all;
  std::vector<double> cost_;
  std::vector<double> dhat_;
  std::size_t degenerate_ = 0;
};

/// Evaluates every admissible cell, rows in parallel on `threads` workers.
/// Degenerate segments cost +inf and are counted.
inline CostTable build_cost_table(const SpectralPrefix& prefix, const CandidateGrid& grid,
                                  std::size_t threads = 1,
                                  CellSelection selection = CellSelection::all) {
  if (grid.n != prefix.n())
    throw InvalidArgument("candidate grid and series lengths differ");
  CostTable table(grid.nodes(), grid.min_seg, selection);
  const LocalWhittle whittle(prefix.m());
  const std::size_t N = table.size();
  std::atomic<std::size_t> degenerate{0};

  parallel_for(N, threads, [&](std::size_t i) {
    std::vector<double> ord(prefix.m());
    for (std::size_t j = i + 1; j < N; ++j) {
      if (!table.admissible(i, j) || !table.evaluated(i, j)) continue;
      const SegmentWindow w{table.nodes_[i], table.nodes_[j]};
      prefix.periodograms(w, ord);
      try {
        const auto fit = whittle.fit(ord);
        table.cost_[i * N + j] = static_cast<double>(w.length()) * fit.w_min;
        table.dhat_[i * N + j] = fit.d_hat;
      } catch (const DegenerateSegment&) {
        degenerate.fetch_add(1, std::memory_order_relaxed);
      }
    }
  });
  table.degenerate_ = degenerate.load();
  return table;
}

/// Optimal segmentation with exactly K breaks.
struct SegmentationFit {
  std::vector<std::size_t> breakpoints;  // t_1 < ... < t_K
  std::vector<double> dhats;             // K + 1 values
  double contrast = kInf;                // C(K)
};

enum class SelectionRule { fixed, bic, slope };

inline std::string_view to_string(SelectionRule r) {
  switch (r) {
    case SelectionRule::fixed:
      return "fixed";
    case SelectionRule::bic:
      return "bic";
    case SelectionRule::slope:
      return "slope";
  }
  return "unknown";
}

inline SelectionRule parse_rule(std::string_view s) {
  if (s == "fixed") return SelectionRule::fixed;
  if (s == "bic") return SelectionRule::bic;
  if (s == "slope") return SelectionRule::slope;
  throw InvalidArgument("unknown selection rule '" + std::string(s) + "'");
}

struct Selection {
  SelectionRule rule = SelectionRule::fixed;
  std::size_t k_hat = 0;
  double penalty = 0.0;           // per-break penalty actually applied
  std::optional<double> slope;    // |s_hat|, slope rule only
  bool degenerate_fit = false;    // slope rule: C constant over the fit range
  bool at_boundary = false;       // slope rule: K_hat is 0 or K_max
};

struct SegmentationResult {
  std::size_t n = 0;
  std::size_t k_max = 0;
  std::vector<SegmentationFit> fits;  // index K = 0..k_max
  std::optional<Selection> selection;

  const SegmentationFit& fit(std::size_t k) const { return fits.at(k); }

  std::vector<double> contrasts() const {
    std::vector<double> c;
    c.reserve(fits.size());
    for (const auto& f : fits) c.push_back(f.contrast);
    return c;
  }
};

/// Exact optimum over the candidate grid for every K = 0..k_max.
///
/// Suffix recursion G_k(i) = min_{j > i} cost(i, j) + G_{k-1}(j) with G_0(i) =
/// cost(i, n). Scanning j upward with strict comparison and reconstructing from
/// the front yields the lexicographically smallest optimal breakpoint vector.
inline SegmentationResult dp_segment(const CostTable& costs, std::size_t k_max) {
  const std::size_t N = costs.size();
  if (N < 2) throw InvalidArgument("cost table has no segments");
  if (costs.selection() == CellSelection::boundary && k_max > 1)
    throw InvalidArgument("boundary-only cost tables support at most one break");

  {
    CandidateGrid g{costs.n(), 1, costs.min_seg(), {}};
    const auto& nodes = costs.nodes();
    g.candidates.assign(nodes.begin() + 1, nodes.end() - 1);
    if (g.max_breaks() < k_max)
      throw InfeasibleSegmentation("candidate grid cannot host " + std::to_string(k_max) +
                                   " breaks (max " + std::to_string(g.max_breaks()) + ")");
  }

  const std::size_t last = N - 1;
  std::vector<std::vector<double>> G(k_max + 1, std::vector<double>(N, kInf));
  std::vector<std::vector<std::size_t>> arg(k_max + 1, std::vector<std::size_t>(N, N));

  for (std::size_t i = 0; i < last; ++i)
    if (costs.admissible(i, last)) G[0][i] = costs.cost(i, last);

  for (std::size_t k = 1; k <= k_max; ++k) {
    // The final row is only needed at the origin.
    const std::size_t i_end = (k == k_max) ? 1 : last;
    for (std::size_t i = 0; i < i_end; ++i) {
      double best = kInf;
      std::size_t best_j = N;
      for (std::size_t j = i + 1; j < last; ++j) {
        if (!costs.admissible(i, j) || G[k - 1][j] == kInf) continue;
        const double c = costs.cost(i, j) + G[k - 1][j];
        if (c < best) {
          best = c;
          best_j = j;
        }
      }
      G[k][i] = best;
      arg[k][i] = best_j;
    }
  }

  SegmentationResult res;
  res.n = costs.n();
  res.k_max = k_max;
  res.fits.resize(k_max + 1);
  const auto& nodes = costs.nodes();
  const double nd = static_cast<double>(costs.n());
  for (std::size_t K = 0; K <= k_max; ++K) {
    if (!std::isfinite(G[K][0]))
      throw InfeasibleSegmentation("no finite-cost segmentation with " + std::to_string(K) +
                                   " breaks (degenerate segments)");
    auto& fit = res.fits[K];
    fit.contrast = G[K][0] / nd;
    std::size_t i = 0;
    for (std::size_t k = K; k >= 1; --k) {
      const std::size_t j = arg[k][i];
      fit.breakpoints.push_back(nodes[j]);
      fit.dhats.push_back(costs.dhat(i, j));
      i = j;
    }
    fit.dhats.push_back(costs.dhat(i, last));
  }
  return res;
}

/// Known number of changes: the row K of dp_segment.
inline SegmentationFit known_k_segment(const CostTable& costs, std::size_t k) {
  return dp_segment(costs, k).fits.back();
}

/// K_hat = argmin_K C(K) + K z_n, ties to the smallest K.
inline Selection select_fixed_penalty(const SegmentationResult& result, double z_n,
                                      SelectionRule tag = SelectionRule::fixed) {
  if (!(z_n >= 0.0)) throw InvalidArgument("penalty z_n must be non-negative");
  Selection sel;
  sel.rule = tag;
  sel.penalty = z_n;
  double best = kInf;
  for (std::size_t K = 0; K < result.fits.size(); ++K) {
    const double v = result.fits[K].contrast + static_cast<double>(K) * z_n;
    if (v < best) {
      best = v;
      sel.k_hat = K;
    }
  }
  return sel;
}

inline Selection select_bic(const SegmentationResult& result, std::size_t n) {
  return select_fixed_penalty(result, defaults::bic_penalty(n), SelectionRule::bic);
}

struct KRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// {ceil(K_max / 2), ..., K_max}.
inline KRange default_slope_range(std::size_t k_max) { return {(k_max + 1) / 2, k_max}; }

/// Least-squares slope of C(K) on the over-segmented range, then penalty
/// 2 |s_hat| per break. A positive fitted slope is treated as zero.
inline Selection slope_heuristic_select(const SegmentationResult& result, KRange range) {
  std::vector<double> ks, cs;
  for (std::size_t K = range.lo; K <= range.hi && K < result.fits.size(); ++K) {
    const double c = result.fits[K].contrast;
    if (std::isfinite(c)) {
      ks.push_back(static_cast<double>(K));
      cs.push_back(c);
    }
  }
  if (ks.size() < 2)
    throw InvalidArgument("slope heuristic needs at least two finite contrasts in range");

  Selection sel;
  sel.rule = SelectionRule::slope;
  const bool flat = std::all_of(cs.begin(), cs.end(), [&](double c) { return c == cs.front(); });
  double s_hat = 0.0;
  if (flat) {
    sel.degenerate_fit = true;
  } else {
    const double cnt = static_cast<double>(ks.size());
    double mk = 0.0, mc = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      mk += ks[i];
      mc += cs[i];
    }
    mk /= cnt;
    mc /= cnt;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      sxy += (ks[i] - mk) * (cs[i] - mc);
      sxx += (ks[i] - mk) * (ks[i] - mk);
    }
    s_hat = std::min(sxy / sxx, 0.0);
  }
  const double magnitude = std::abs(s_hat);
  const auto penalized = select_fixed_penalty(result, 2.0 * magnitude, SelectionRule::slope);
  sel.k_hat = flat ? 0 : penalized.k_hat;
  sel.penalty = 2.0 * magnitude;
  sel.slope = magnitude;
  sel.at_boundary = sel.k_hat == 0 || sel.k_hat == result.k_max;
  return sel;
}

inline Selection slope_heuristic_select(const SegmentationResult& result) {
  return slope_heuristic_select(result, default_slope_range(result.k_max));
}

/// Knobs for the end-to-end detector; zero means "use the default for n".
struct DetectorOptions {
  std::size_t m = 0;
  std::size_t k_max = 0;
  bool k_max_given = false;
  std::size_t step = 0;
  std::size_t min_seg = 0;
  double z_n = -1.0;  // negative: default
  std::size_t threads = 1;
};

struct ResolvedOptions {
  std::size_t m;
  std::size_t k_max;
  std::size_t step;
  std::size_t min_seg;
  double z_n;
};

/// Fills defaults for a series of length n. A defaulted K_max is capped at what
/// the candidate grid can host; an explicit one is left alone.
inline ResolvedOptions resolve_options(std::size_t n, const DetectorOptions& o) {
  ResolvedOptions r{};
  r.m = o.m != 0 ? o.m : defaults::bandwidth(n);
  r.step = o.step != 0 ? o.step : defaults::grid_step(n);
  r.min_seg = o.min_seg != 0 ? o.min_seg : defaults::min_segment(n);
  r.z_n = o.z_n >= 0.0 ? o.z_n : defaults::fixed_penalty(n);
  if (o.k_max_given) {
    r.k_max = o.k_max;
  } else {
    r.k_max = defaults::max_changes(n);
    if (n >= 2 * r.min_seg) {
      const auto grid = build_candidate_grid(n, r.step, r.min_seg);
      r.k_max = std::min(r.k_max, grid.max_breaks());
    } else {
      r.k_max = 0;
    }
  }
  return r;
}

}  // namespace lrdseg
