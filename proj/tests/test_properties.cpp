#include <gtest/gtest.h>

#include <cmath>

#include "lrdseg/lrdseg.hpp"

using namespace lrdseg;

namespace {

struct Detection {
  SegmentationResult result;
  Selection fixed, bic, slope;
};

Detection detect(const std::vector<double>& x) {
  const std::size_t n = x.size();
  const auto r = resolve_options(n, {});
  const auto p = build_prefix(x, r.m);
  const auto t = build_cost_table(p, build_candidate_grid(n, r.step, r.min_seg));
  Detection d{dp_segment(t, r.k_max), {}, {}, {}};
  d.fixed = select_fixed_penalty(d.result, r.z_n);
  d.bic = select_bic(d.result, n);
  d.slope = slope_heuristic_select(d.result);
  return d;
}

std::vector<double> two_regime_series(std::size_t n, std::uint64_t seed) {
  ProcessSpec s;
  s.regimes = {Regime{Family::farima00, 0.4}, Regime{Family::farima00, 0.1}};
  s.taus = {0.5};
  s.n = n;
  return synthesize(s, seed).values;
}

}  // namespace

class ScaleInvariance : public ::testing::TestWithParam<double> {};

TEST_P(ScaleInvariance, BreakpointsEstimatesAndSelections) {
  const double c = GetParam();
  const auto x = two_regime_series(600, 31);
  auto y = x;
  for (auto& v : y) v *= c;
  const auto a = detect(x);
  const auto b = detect(y);
  ASSERT_EQ(a.result.k_max, b.result.k_max);
  for (std::size_t K = 0; K <= a.result.k_max; ++K) {
    EXPECT_EQ(a.result.fits[K].breakpoints, b.result.fits[K].breakpoints) << K;
    for (std::size_t i = 0; i <= K; ++i)
      EXPECT_NEAR(a.result.fits[K].dhats[i], b.result.fits[K].dhats[i], 1e-6);
    EXPECT_NEAR(b.result.fits[K].contrast - a.result.fits[K].contrast, 2.0 * std::log(c), 1e-9);
  }
  EXPECT_EQ(a.fixed.k_hat, b.fixed.k_hat);
  EXPECT_EQ(a.bic.k_hat, b.bic.k_hat);
  EXPECT_EQ(a.slope.k_hat, b.slope.k_hat);
}

INSTANTIATE_TEST_SUITE_P(Factors, ScaleInvariance, ::testing::Values(0.01, 1.0, 100.0));

TEST(Properties, ContrastCurveNonIncreasing) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = detect(two_regime_series(500, seed));
    for (std::size_t K = 1; K <= d.result.k_max; ++K)
      EXPECT_LE(d.result.fits[K].contrast, d.result.fits[K - 1].contrast) << "seed " << seed;
  }
}

TEST(Properties, SelectedKShrinksWithPenalty) {
  const auto d = detect(two_regime_series(500, 9));
  std::size_t prev = d.result.k_max;
  for (int i = 0; i <= 200; ++i) {
    const auto k = select_fixed_penalty(d.result, 0.001 * i).k_hat;
    EXPECT_LE(k, prev);
    prev = k;
  }
}

TEST(Properties, ParallelCostTableIsIdentical) {
  const auto x = two_regime_series(500, 4);
  const auto r = resolve_options(500, {});
  const auto p = build_prefix(x, r.m);
  const auto g = build_candidate_grid(500, r.step, r.min_seg);
  const auto t1 = build_cost_table(p, g, 1);
  const auto t3 = build_cost_table(p, g, 3);
  for (std::size_t i = 0; i < t1.size(); ++i)
    for (std::size_t j = i + 1; j < t1.size(); ++j) ASSERT_EQ(t1.cost(i, j), t3.cost(i, j));
}

TEST(Parallel, PropagatesFirstException) {
  EXPECT_THROW(parallel_for(50, 4, [](std::size_t i) {
                 if (i == 17) throw NumericError("boom");
               }),
               NumericError);
  std::vector<int> hits(100, 0);
  parallel_for(100, 3, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}
