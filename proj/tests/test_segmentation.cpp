#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lrdseg/segmentation.hpp"
#include "lrdseg/synthesis.hpp"
#include "oracles.hpp"

using namespace lrdseg;

namespace {

std::vector<double> series(std::vector<double> ds, std::vector<double> taus, std::size_t n,
                           std::uint64_t seed) {
  ProcessSpec s;
  s.regimes.clear();
  for (double d : ds) s.regimes.push_back(Regime{Family::farima00, d});
  s.taus = std::move(taus);
  s.n = n;
  return synthesize(s, seed).values;
}

SegmentationResult curve(std::vector<double> c) {
  SegmentationResult r;
  r.n = 1000;
  r.k_max = c.size() - 1;
  for (double v : c) {
    SegmentationFit f;
    f.contrast = v;
    r.fits.push_back(f);
  }
  return r;
}

}  // namespace

TEST(CandidateGrid, CountsAndBounds) {
  const auto g = build_candidate_grid(5000, 25, 125);
  EXPECT_EQ(g.candidates.size(), 191u);
  EXPECT_EQ(g.candidates.front(), 125u);
  EXPECT_EQ(g.candidates.back(), 4875u);
  EXPECT_EQ(g.nodes().size(), 193u);
  const auto h = build_candidate_grid(100, 7, 10);
  EXPECT_EQ(h.candidates.front(), 14u);
  EXPECT_EQ(h.candidates.back(), 84u);
  EXPECT_THROW(build_candidate_grid(19, 1, 10), InvalidArgument);
  EXPECT_THROW(build_candidate_grid(25, 20, 10), InvalidArgument);
  EXPECT_THROW(build_candidate_grid(100, 0, 10), InvalidArgument);
}

TEST(CandidateGrid, MaxBreaksMatchesEnumeration) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 40 + rng() % 60;
    const std::size_t step = 1 + rng() % 6;
    const std::size_t min_seg = 3 + rng() % 10;
    if (n < 2 * min_seg) continue;
    CandidateGrid g;
    try {
      g = build_candidate_grid(n, step, min_seg);
    } catch (const InvalidArgument&) {
      continue;
    }
    if (g.candidates.size() > 14) g.candidates.resize(14);
    std::size_t best = 0;
    for (std::size_t k = 1; k <= g.candidates.size(); ++k) {
      const auto s = oracle::exhaustive(n, g.candidates, k, min_seg, [](auto, auto) { return 0.0; });
      if (std::isfinite(s.cost)) best = k;
    }
    EXPECT_EQ(g.max_breaks(), best);
  }
}

TEST(CostTable, MatchesIndependentEstimates) {
  const std::size_t n = 300, m = 30;
  const auto x = series({0.1, 0.4}, {0.5}, n, 4);
  const auto p = build_prefix(x, m);
  const auto g = build_candidate_grid(n, 25, 25);
  EXPECT_EQ(g.candidates.size(), 11u);
  const auto t = build_cost_table(p, g, 2);
  const auto nodes = t.nodes();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const auto ref = oracle::minimize_contrast(oracle::windowed_periodograms(x, nodes[i], nodes[j], m));
      const double len = double(nodes[j] - nodes[i]);
      EXPECT_NEAR(t.cost(i, j), len * ref.w, 1e-9 * len);
      EXPECT_NEAR(t.dhat(i, j), ref.d, 1e-4);
    }
  }
  EXPECT_EQ(t.degenerate_count(), 0u);
  EXPECT_EQ(t.index_of(150), 6u);
  EXPECT_EQ(t.index_of(151), t.size());
}

TEST(CostTable, InadmissibleAndDegenerateCellsAreInfinite) {
  std::vector<double> x(200, 0.0);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N01;
  for (std::size_t i = 100; i < 200; ++i) x[i] = N01(rng);
  const auto p = build_prefix(x, 10);
  const auto t = build_cost_table(p, build_candidate_grid(200, 20, 40));
  const auto i40 = t.index_of(40), i60 = t.index_of(60), i80 = t.index_of(80);
  EXPECT_TRUE(std::isinf(t.cost(i40, i60)));  // shorter than min_seg
  EXPECT_TRUE(std::isinf(t.cost(0, i80)));    // all zeros
  EXPECT_GT(t.degenerate_count(), 0u);
  EXPECT_TRUE(std::isfinite(t.cost(t.index_of(100), t.size() - 1)));
}

TEST(DynamicProgram, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 12; ++rep) {
    const std::size_t n = 120, m = 15;
    const auto x = series({0.05, 0.45}, {0.4}, n, 100 + rep);
    const auto p = build_prefix(x, m);
    const auto g = build_candidate_grid(n, 20, 20);
    ASSERT_EQ(g.candidates.size(), 5u);
    const auto t = build_cost_table(p, g);
    const auto res = dp_segment(t, 2);
    const auto cost = [&](std::size_t a, std::size_t b) {
      return t.cost(t.index_of(a), t.index_of(b));
    };
    for (std::size_t K = 0; K <= 2; ++K) {
      const auto ref = oracle::exhaustive(n, g.candidates, K, 20, cost);
      EXPECT_EQ(res.fits[K].breakpoints, ref.breaks) << "K=" << K;
      EXPECT_NEAR(res.fits[K].contrast, ref.cost / n, 1e-12);
      EXPECT_EQ(res.fits[K].dhats.size(), K + 1);
    }
  }
}

TEST(DynamicProgram, TiesResolveToLexicographicallySmallest) {
  // Constant series pieces give identical costs for every placement.
  std::vector<double> x(60);
  for (std::size_t i = 0; i < 60; ++i) x[i] = (i % 2) ? 1.0 : -1.0;
  const auto p = build_prefix(x, 5);
  const auto g = build_candidate_grid(60, 10, 10);
  const auto t = build_cost_table(p, g);
  const auto res = dp_segment(t, 2);
  const auto cost = [&](std::size_t a, std::size_t b) { return t.cost(t.index_of(a), t.index_of(b)); };
  const auto ref = oracle::exhaustive(60, g.candidates, 2, 10, cost);
  EXPECT_EQ(res.fits[2].breakpoints, ref.breaks);
}

TEST(DynamicProgram, InfeasibleRequests) {
  const auto x = series({0.2}, {}, 100, 1);
  const auto p = build_prefix(x, 10);
  const auto g = build_candidate_grid(100, 10, 30);
  const auto t = build_cost_table(p, g);
  EXPECT_EQ(g.max_breaks(), 2u);
  EXPECT_NO_THROW(dp_segment(t, 2));
  EXPECT_THROW(dp_segment(t, 3), InfeasibleSegmentation);
}

TEST(DynamicProgram, BoundaryCellsSufficeForOneBreak) {
  const std::size_t n = 400;
  const auto x = series({0.1, 0.4}, {0.3}, n, 12);
  const auto p = build_prefix(x, 40);
  const auto g = build_candidate_grid(n, 5, 20);
  const auto full = dp_segment(build_cost_table(p, g), 1);
  const auto bnd_table = build_cost_table(p, g, 1, CellSelection::boundary);
  const auto bnd = dp_segment(bnd_table, 1);
  for (std::size_t K = 0; K <= 1; ++K) {
    EXPECT_EQ(full.fits[K].breakpoints, bnd.fits[K].breakpoints);
    EXPECT_EQ(full.fits[K].dhats, bnd.fits[K].dhats);
    EXPECT_EQ(full.fits[K].contrast, bnd.fits[K].contrast);
  }
  EXPECT_THROW(dp_segment(bnd_table, 2), InvalidArgument);
  EXPECT_THROW(bnd_table.cost(1, 2), std::logic_error);
  EXPECT_EQ(known_k_segment(bnd_table, 1).breakpoints, full.fits[1].breakpoints);
}

TEST(DynamicProgram, ContrastNonIncreasingInK) {
  const std::size_t n = 1000;
  const auto x = series({0.4, 0.1, 0.3}, {0.3, 0.7}, n, 5);
  const auto p = build_prefix(x, defaults::bandwidth(n));
  const auto t = build_cost_table(p, build_candidate_grid(n, 5, 10));
  const auto res = dp_segment(t, 10);
  for (std::size_t K = 1; K <= 10; ++K) EXPECT_LE(res.fits[K].contrast, res.fits[K - 1].contrast);
  for (std::size_t K = 0; K <= 10; ++K)
    for (std::size_t i = 1; i < K; ++i)
      EXPECT_GE(res.fits[K].breakpoints[i] - res.fits[K].breakpoints[i - 1], 10u);
}

TEST(Selection, FixedPenalty) {
  const auto r = curve({1.0, 0.5, 0.45, 0.44});
  EXPECT_EQ(select_fixed_penalty(r, 0.1).k_hat, 1u);
  EXPECT_EQ(select_fixed_penalty(r, 0.0).k_hat, 3u);
  EXPECT_EQ(select_fixed_penalty(r, 1.0).k_hat, 0u);
  // Tie between K = 0 and K = 1 goes to 0.
  EXPECT_EQ(select_fixed_penalty(curve({1.0, 0.75}), 0.25).k_hat, 0u);
  EXPECT_THROW(select_fixed_penalty(r, -0.1), InvalidArgument);
}

TEST(Selection, Bic) {
  const auto s = select_bic(curve({1.0, 0.5}), 1000);
  EXPECT_DOUBLE_EQ(s.penalty, 2.0 * std::log(1000.0) / 1000.0);
  EXPECT_EQ(s.rule, SelectionRule::bic);
  EXPECT_EQ(s.k_hat, 1u);
}

TEST(Selection, SlopeHeuristicHandExample) {
  const auto r = curve({2.0, 1.0, 0.9, 0.8, 0.7});
  const auto s = slope_heuristic_select(r);  // range 2..4, slope -0.1
  EXPECT_NEAR(*s.slope, 0.1, 1e-12);
  EXPECT_NEAR(s.penalty, 0.2, 1e-12);
  EXPECT_EQ(s.k_hat, 1u);
  EXPECT_FALSE(s.at_boundary);
  EXPECT_FALSE(s.degenerate_fit);
}

TEST(Selection, SlopeHeuristicLinearCurveGivesZero) {
  const auto s = slope_heuristic_select(curve({1.0, 0.9, 0.8, 0.7, 0.6, 0.5}));
  EXPECT_EQ(s.k_hat, 0u);
  EXPECT_TRUE(s.at_boundary);
}

TEST(Selection, SlopeHeuristicFlatAndRisingFits) {
  const auto flat = slope_heuristic_select(curve({1.0, 0.5, 0.5, 0.5}));
  EXPECT_TRUE(flat.degenerate_fit);
  EXPECT_EQ(flat.k_hat, 0u);
  const auto rising = slope_heuristic_select(curve({1.0, 0.5, 0.6, 0.7}));
  EXPECT_EQ(*rising.slope, 0.0);
  EXPECT_EQ(rising.k_hat, 1u);
  EXPECT_THROW(slope_heuristic_select(curve({1.0, 0.5}), KRange{1, 1}), InvalidArgument);
}

TEST(Selection, PenaltyMonotonicity) {
  const std::size_t n = 800;
  const auto x = series({0.4, 0.05}, {0.5}, n, 21);
  const auto p = build_prefix(x, defaults::bandwidth(n));
  const auto res = dp_segment(build_cost_table(p, build_candidate_grid(n, 4, 12)), 8);
  std::size_t prev = res.k_max;
  for (double z = 0.0; z < 1.0; z += 0.0025) {
    const auto k = select_fixed_penalty(res, z).k_hat;
    EXPECT_LE(k, prev);
    prev = k;
  }
  EXPECT_EQ(prev, 0u);
}

TEST(Options, Defaults) {
  const auto r = resolve_options(5000, {});
  EXPECT_EQ(r.m, 253u);
  EXPECT_EQ(r.k_max, 14u);
  EXPECT_EQ(r.step, 5u);
  EXPECT_EQ(r.min_seg, 10u);
  EXPECT_DOUBLE_EQ(r.z_n, 2.0 / std::sqrt(5000.0));
  EXPECT_EQ(resolve_options(2000, {}).k_max, 12u);
  // Defaulted K_max shrinks to what the grid can host.
  EXPECT_EQ(resolve_options(50, {}).k_max, 4u);
  DetectorOptions o;
  o.k_max = 9;
  o.k_max_given = true;
  o.m = 7;
  EXPECT_EQ(resolve_options(50, o).k_max, 9u);
  EXPECT_EQ(resolve_options(50, o).m, 7u);
}

TEST(Options, RuleNames) {
  EXPECT_EQ(parse_rule("fixed"), SelectionRule::fixed);
  EXPECT_EQ(parse_rule("bic"), SelectionRule::bic);
  EXPECT_EQ(parse_rule("slope"), SelectionRule::slope);
  EXPECT_THROW(parse_rule("aic"), InvalidArgument);
}
