// Simulate one series with a single change in d and recover it.
#include <cstdio>

#include "lrdseg/lrdseg.hpp"

int main() {
  using namespace lrdseg;
  ProcessSpec spec;
  spec.regimes = {Regime{Family::farima00, 0.1}, Regime{Family::farima00, 0.4}};
  spec.taus = {0.5};
  spec.n = 2000;
  const auto traj = synthesize(spec, 7);

  const auto opts = resolve_options(spec.n, DetectorOptions{});
  const auto prefix = build_prefix(traj.values, opts.m);
  const auto grid = build_candidate_grid(spec.n, opts.step, opts.min_seg);
  const auto table = build_cost_table(prefix, grid, default_thread_count());
  auto result = dp_segment(table, opts.k_max);
  const auto sel = slope_heuristic_select(result);

  const auto& fit = result.fit(sel.k_hat);
  std::printf("K_hat = %zu (slope %.4g)\n", sel.k_hat, sel.slope.value_or(0.0));
  for (std::size_t i = 0; i < fit.breakpoints.size(); ++i)
    std::printf("  change at t = %zu (tau = %.3f)\n", fit.breakpoints[i],
                double(fit.breakpoints[i]) / double(spec.n));
  for (std::size_t i = 0; i < fit.dhats.size(); ++i)
    std::printf("  d_hat[%zu] = %.3f\n", i + 1, fit.dhats[i]);
}
