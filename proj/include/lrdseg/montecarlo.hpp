#pragma once

/**
 * @file
 * Replicated experiments: simulate, segment, and aggregate either RMSE of the
 * known-K estimators or recognition frequencies of K_hat per selection rule.
 *
 * Replication r uses seed seed0 + r. Results are written into per-index slots
 * and reduced in index order, so the tables do not depend on the thread count.
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "lrdseg/defaults.hpp"
#include "lrdseg/error.hpp"
#include "lrdseg/parallel.hpp"
#include "lrdseg/segmentation.hpp"
#include "lrdseg/spectral.hpp"
#include "lrdseg/synthesis.hpp"
#include "lrdseg/whittle.hpp"

namespace lrdseg {

inline double rmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw InvalidArgument("rmse of an empty sample");
  double acc = 0.0;
  for (double e : estimates) acc += (e - truth) * (e - truth);
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

enum class ExperimentMode { known_k, unknown_k };

struct ExperimentConfig {
  ProcessSpec spec;
  std::size_t reps = defaults::kReplications;
  std::uint64_t seed0 = 1;
  DetectorOptions detector;
  std::optional<KRange> slope_range;
  ExperimentMode mode = ExperimentMode::known_k;
  std::size_t threads = 1;
  /// Largest tolerated share of excluded (degenerate) replications.
  double max_excluded_fraction = 0.01;

  void validate() const {
    spec.validate();
    if (reps < 1) throw InvalidArgument("reps must be at least 1");
    if (!spec.has_distinct_adjacent_memory())
      throw InvalidArgument("adjacent regimes must have distinct memory parameters");
  }
};

struct Replication {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool excluded = false;
  std::string failure;
  std::vector<double> taus;   // estimated relative change times
  std::vector<double> dhats;
  // unknown-K mode only
  std::size_t k_fixed = 0;
  std::size_t k_bic = 0;
  std::size_t k_slope = 0;
  double slope = 0.0;
};

struct RmseTable {
  std::vector<double> tau_truth;
  std::vector<double> d_truth;
  std::vector<double> tau_rmse;
  std::vector<double> d_rmse;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::vector<Replication> raw;
};

struct FrequencyTable {
  std::size_t k_true = 0;
  double fixed = 0.0;
  double bic = 0.0;
  double slope = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  std::vector<Replication> raw;
};

namespace detail {

/// One replication of the segmentation pipeline on a ready series.
inline void segment_replication(const ExperimentConfig& cfg, std::span<const double> x,
                                Replication& rep) {
  const std::size_t n = x.size();
  const std::size_t k_true = cfg.spec.change_count();
  auto opts = cfg.detector;
  if (cfg.mode == ExperimentMode::known_k) {
    opts.k_max = k_true;
    opts.k_max_given = true;
  }
  const auto r = resolve_options(n, opts);
  const auto prefix = build_prefix(x, r.m);

  if (cfg.mode == ExperimentMode::known_k && k_true == 0) {
    const auto fit = LocalWhittle(r.m).fit(prefix, {0, n});
    rep.dhats = {fit.d_hat};
    return;
  }

  const auto grid = build_candidate_grid(n, r.step, r.min_seg);
  const auto selection = r.k_max <= 1 ? CellSelection::boundary : CellSelection::all;
  const auto table = build_cost_table(prefix, grid, 1, selection);
  const auto result = dp_segment(table, r.k_max);

  const auto record = [&](const SegmentationFit& fit) {
    rep.taus.clear();
    for (std::size_t t : fit.breakpoints)
      rep.taus.push_back(static_cast<double>(t) / static_cast<double>(n));
    rep.dhats = fit.dhats;
  };

  if (cfg.mode == ExperimentMode::known_k) {
    record(result.fits[k_true]);
    return;
  }
  rep.k_fixed = select_fixed_penalty(result, r.z_n).k_hat;
  rep.k_bic = select_bic(result, n).k_hat;
  const auto slope = slope_heuristic_select(
      result, cfg.slope_range.value_or(default_slope_range(result.k_max)));
  rep.k_slope = slope.k_hat;
  rep.slope = slope.slope.value_or(0.0);
  record(result.fits[rep.k_slope]);
}

inline std::vector<Replication> run_replications(const ExperimentConfig& cfg) {
  cfg.validate();
  const Synthesizer synth(cfg.spec);
  std::vector<Replication> reps(cfg.reps);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t r) {
    auto& rep = reps[r];
    rep.index = r;
    rep.seed = cfg.seed0 + r;
    try {
      const auto traj = synth.generate(rep.seed);
      segment_replication(cfg, traj.values, rep);
    } catch (const NumericError& e) {
      rep.excluded = true;
      rep.failure = e.what();
    }
  });

  std::size_t excluded = 0;
  for (const auto& r : reps) excluded += r.excluded ? 1 : 0;
  if (static_cast<double>(excluded) >
      cfg.max_excluded_fraction * static_cast<double>(cfg.reps))
    throw NumericError(std::to_string(excluded) + " of " + std::to_string(cfg.reps) +
                       " replications excluded as degenerate");
  return reps;
}

}  // namespace detail

/// RMSE of tau_hat_i and d_hat_i, matched to truth by sorted order.
inline RmseTable run_known_k(ExperimentConfig cfg) {
  cfg.mode = ExperimentMode::known_k;
  RmseTable table;
  table.tau_truth = cfg.spec.taus;
  for (const auto& r : cfg.spec.regimes) table.d_truth.push_back(r.d);
  table.raw = detail::run_replications(cfg);

  const std::size_t K = cfg.spec.change_count();
  std::vector<std::vector<double>> tau_est(K), d_est(K + 1);
  for (const auto& rep : table.raw) {
    if (rep.excluded) {
      ++table.excluded;
      continue;
    }
    ++table.used;
    for (std::size_t i = 0; i < K; ++i) tau_est[i].push_back(rep.taus[i]);
    for (std::size_t i = 0; i <= K; ++i) d_est[i].push_back(rep.dhats[i]);
  }
  if (table.used == 0) throw NumericError("every replication was excluded");
  for (std::size_t i = 0; i < K; ++i) table.tau_rmse.push_back(rmse(tau_est[i], table.tau_truth[i]));
  for (std::size_t i = 0; i <= K; ++i) table.d_rmse.push_back(rmse(d_est[i], table.d_truth[i]));
  return table;
}

/// Frequencies of K_hat == K* for the fixed, BIC, and slope rules, all
/// applied to the same contrast curve per replication.
inline FrequencyTable run_unknown_k(ExperimentConfig cfg) {
  cfg.mode = ExperimentMode::unknown_k;
  FrequencyTable table;
  table.k_true = cfg.spec.change_count();
  table.raw = detail::run_replications(cfg);
  std::size_t hit_fixed = 0, hit_bic = 0, hit_slope = 0;
  for (const auto& rep : table.raw) {
    if (rep.excluded) {
      ++table.excluded;
      continue;
    }
    ++table.used;
    hit_fixed += rep.k_fixed == table.k_true;
    hit_bic += rep.k_bic == table.k_true;
    hit_slope += rep.k_slope == table.k_true;
  }
  if (table.used == 0) throw NumericError("every replication was excluded");
  const double u = static_cast<double>(table.used);
  table.fixed = static_cast<double>(hit_fixed) / u;
  table.bic = static_cast<double>(hit_bic) / u;
  table.slope = static_cast<double>(hit_slope) / u;
  return table;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline std::string describe(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << to_string(cfg.spec.regimes.front().family) << ", n = " << cfg.spec.n
     << ", K* = " << cfg.spec.change_count() << ", d* = (";
  for (std::size_t i = 0; i < cfg.spec.regimes.size(); ++i)
    os << (i ? ", " : "") << cfg.spec.regimes[i].d;
  os << ")";
  if (!cfg.spec.taus.empty()) {
    os << ", tau* = (";
    for (std::size_t i = 0; i < cfg.spec.taus.size(); ++i)
      os << (i ? ", " : "") << cfg.spec.taus[i];
    os << ")";
  }
  os << ", " << cfg.reps << " replications";
  return os.str();
}

}  // namespace detail

inline std::string rmse_markdown(const RmseTable& t, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "RMSE, known number of changes: " << detail::describe(cfg) << "\n\n";
  os << "| Estimator | Truth | RMSE |\n|---|---|---|\n";
  for (std::size_t i = 0; i < t.tau_rmse.size(); ++i)
    os << "| tau_" << i + 1 << " | " << t.tau_truth[i] << " | " << t.tau_rmse[i] << " |\n";
  for (std::size_t i = 0; i < t.d_rmse.size(); ++i)
    os << "| d_" << i + 1 << " | " << t.d_truth[i] << " | " << t.d_rmse[i] << " |\n";
  os << "\nUsed " << t.used << ", excluded " << t.excluded << ".\n";
  return os.str();
}

inline std::string rmse_csv(const RmseTable& t) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "parameter,truth,rmse\n";
  for (std::size_t i = 0; i < t.tau_rmse.size(); ++i)
    os << "tau_" << i + 1 << "," << t.tau_truth[i] << "," << t.tau_rmse[i] << "\n";
  for (std::size_t i = 0; i < t.d_rmse.size(); ++i)
    os << "d_" << i + 1 << "," << t.d_truth[i] << "," << t.d_rmse[i] << "\n";
  return os.str();
}

inline std::string frequency_markdown(const FrequencyTable& t, const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "Recognition frequency of K* = " << t.k_true << ": " << detail::describe(cfg) << "\n\n";
  os << "| Rule | Frequency |\n|---|---|\n";
  os << "| fixed z_n | " << t.fixed << " |\n";
  os << "| BIC | " << t.bic << " |\n";
  os << "| slope heuristic | " << t.slope << " |\n";
  os << "\nUsed " << t.used << ", excluded " << t.excluded << ".\n";
  return os.str();
}

inline std::string frequency_csv(const FrequencyTable& t) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "rule,frequency\n";
  os << "fixed," << t.fixed << "\nbic," << t.bic << "\nslope," << t.slope << "\n";
  return os.str();
}

/// One row per replication for auditing.
inline std::string replications_csv(std::span<const Replication> raw) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "index,seed,excluded,k_fixed,k_bic,k_slope,slope,taus,dhats,failure\n";
  const auto join = [](const std::vector<double>& v) {
    std::ostringstream s;
    s << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) s << (i ? ";" : "") << v[i];
    return s.str();
  };
  for (const auto& r : raw) {
    os << r.index << "," << r.seed << "," << (r.excluded ? 1 : 0) << "," << r.k_fixed << ","
       << r.k_bic << "," << r.k_slope << "," << r.slope << "," << join(r.taus) << ","
       << join(r.dhats) << ",\"" << r.failure << "\"\n";
  }
  return os.str();
}

}  // namespace lrdseg
