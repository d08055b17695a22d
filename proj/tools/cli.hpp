#pragma once

// Command-line front end: simulate, estimate-d, detect, montecarlo, self-test.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
// Failures print one JSON record on stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "lrdseg/lrdseg.hpp"

namespace lrdseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Reads flag-mirroring config files: JSON when the first non-blank character
/// is '{', TOML otherwise. Top-level keys naming an option of the active
/// subcommand are routed to it, so one flat file serves any subcommand.
class JsonOrTomlConfig : public CLI::ConfigTOML {
 public:
  explicit JsonOrTomlConfig(const CLI::App* root) : root_(root) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::stringstream buffer;
    buffer << input.rdbuf();
    const std::string text = buffer.str();
    std::vector<CLI::ConfigItem> items;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream again(text);
      items = CLI::ConfigTOML::from_config(again);
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::exception& e) {
        throw CLI::ConversionError(std::string("config: ") + e.what());
      }
      flatten(j, {}, items);
    }
    route(items);
    return items;
  }

 private:
  void route(std::vector<CLI::ConfigItem>& items) const {
    if (root_ == nullptr) return;
    const auto subs = root_->get_subcommands();
    if (subs.empty()) return;
    const CLI::App* sub = subs.front();
    for (auto& item : items) {
      if (!item.parents.empty()) continue;
      if (sub->get_option_no_throw("--" + item.name) != nullptr)
        item.parents.push_back(sub->get_name());
    }
  }

  const CLI::App* root_;

  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const nlohmann::json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        flatten(value, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& e : value) item.inputs.push_back(scalar(e));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Default descriptions are generated from the constants in lrdseg/defaults.hpp
// so the help text cannot drift from runtime behaviour; self-test re-parses them.
inline std::string help_m() {
  return "Bandwidth m [default: floor(n^" + num(defaults::kBandwidthExponent) + ")]";
}
inline std::string help_kmax() {
  return "Largest number of changes K_max [default: 2*(floor(ln n) - 1), capped by the grid]";
}
inline std::string help_zn() {
  return "Fixed penalty per break z_n [default: " + num(defaults::kPenaltyScale) + "/sqrt(n)]";
}
inline std::string help_step() {
  return "Candidate grid step [default: max(1, floor(n/" +
         std::to_string(defaults::kTargetCandidates) + "))]";
}
inline std::string help_min_seg() {
  return "Minimum segment length [default: max(" + std::to_string(defaults::kMinSegmentFloor) +
         ", " + std::to_string(defaults::kMinSegmentSteps) + "*step)]";
}
inline std::string help_truncation() {
  return "MA filter truncation M [default: " + std::to_string(defaults::kTruncationFactor) +
         "*n]";
}
inline std::string help_reps() {
  return "Replications [default: " + std::to_string(defaults::kReplications) + "]";
}
inline std::string help_slope_range() {
  return "Slope-heuristic fit range lo:hi [default: ceil(K_max/2):K_max]";
}

struct Window {
  std::size_t a = 0;
  std::size_t b = 0;
};

inline Window parse_window(const std::string& s, std::size_t n) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InvalidArgument("window must be a:b");
  try {
    Window w{std::stoul(s.substr(0, colon)), std::stoul(s.substr(colon + 1))};
    if (!(w.a < w.b && w.b <= n)) throw InvalidArgument("window must satisfy 0 <= a < b <= n");
    return w;
  } catch (const std::logic_error&) {
    throw InvalidArgument("window must be a:b with integer bounds");
  }
}

inline KRange parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InvalidArgument("range must be lo:hi");
  try {
    return {std::stoul(s.substr(0, colon)), std::stoul(s.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw InvalidArgument("range must be lo:hi with integer bounds");
  }
}

inline void write_json(const nlohmann::json& j, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << j.dump(2) << "\n";
  } else {
    io::write_text(path, j.dump(2) + "\n");
  }
}

inline ProcessSpec build_spec(const std::string& family, const std::vector<double>& ds,
                              const std::vector<double>& taus, double psi, double theta,
                              std::size_t n, const std::string& innovation,
                              std::size_t truncation) {
  if (ds.empty()) throw InvalidArgument("at least one memory parameter --d is required");
  ProcessSpec spec;
  spec.regimes.clear();
  const Family f = parse_family(family);
  for (double d : ds) spec.regimes.push_back(Regime{f, d, psi, theta});
  spec.taus = taus;
  spec.n = n;
  spec.innovation = parse_innovation(innovation);
  spec.truncation = truncation;
  spec.validate();
  return spec;
}

}  // namespace detail

/// Everything the subcommands parse into.
struct RunConfig {
  // simulate / montecarlo process description
  std::string family = "farima00";
  std::vector<double> d{0.4};
  std::vector<double> taus;
  double psi = -0.7;
  double theta = 0.3;
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::string innovation = "normal";
  std::size_t truncation = 0;

  // estimation knobs (0 / negative = default)
  std::string input;
  std::string out;
  std::size_t m = 0;
  std::size_t kmax = 0;
  std::string rule = "slope";
  double zn = -1.0;
  std::size_t step = 0;
  std::size_t min_seg = 0;
  std::size_t known_k = 0;
  bool exact = false;
  std::string window;
  std::string emit_curve;
  std::string dump_periodogram;
  std::string slope_range;

  // montecarlo
  std::size_t reps = defaults::kReplications;
  std::string mode = "known-k";
  std::string out_dir;

  std::size_t threads = 0;
  int verbosity = 0;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) { build(); }

  int run(int argc, const char* const* argv) {
    try {
      app_.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
        // --help / --version
        std::ostringstream help;
        app_.exit(e, help, help);
        out_ << help.str();
        return kExitOk;
      }
      return fail("usage", e.what(), kExitUsage);
    }
    try {
      return dispatch();
    } catch (const InvalidArgument& e) {
      return fail(to_string(e.kind()), e.what(), kExitUsage);
    } catch (const DataError& e) {
      return fail(to_string(e.kind()), e.what(), kExitData);
    } catch (const NumericError& e) {
      return fail(to_string(e.kind()), e.what(), kExitNumeric);
    } catch (const std::exception& e) {
      return fail("internal", e.what(), kExitNumeric);
    }
  }

  std::string help(const std::string& subcommand) const {
    if (subcommand.empty()) return app_.help();
    return app_.get_subcommand(subcommand)->help();
  }

  /// Re-derives every default from the help text and checks it against the
  /// value used at runtime.
  nlohmann::json self_test() const {
    nlohmann::json checks = nlohmann::json::array();
    bool all_ok = true;
    const auto check = [&](const std::string& name, bool ok, const std::string& detail) {
      checks.push_back({{"check", name}, {"ok", ok}, {"detail", detail}});
      all_ok = all_ok && ok;
    };
    const std::string detect = help("detect");
    const std::string sim = help("simulate");
    const std::string mc = help("montecarlo");
    std::smatch mt;

    if (std::regex_search(detect, mt, std::regex(R"(floor\(n\^([0-9.]+)\))"))) {
      const double e = std::stod(mt[1]);
      check("bandwidth exponent", e == defaults::kBandwidthExponent && defaults::bandwidth(5000) ==
                                      static_cast<std::size_t>(std::floor(std::pow(5000.0, e))),
            mt[0]);
    } else {
      check("bandwidth exponent", false, "not found in help");
    }
    if (std::regex_search(detect, mt, std::regex(R"(2\*\(floor\(ln n\) - 1\))"))) {
      bool ok = true;
      for (std::size_t n : {500u, 2000u, 5000u})
        ok = ok && defaults::max_changes(n) ==
                       static_cast<std::size_t>(2 * (std::floor(std::log(double(n))) - 1));
      ok = ok && defaults::max_changes(500) == 10 && defaults::max_changes(2000) == 12 &&
           defaults::max_changes(5000) == 14;
      check("K_max formula", ok, mt[0]);
    } else {
      check("K_max formula", false, "not found in help");
    }
    if (std::regex_search(detect, mt, std::regex(R"(([0-9.]+)/sqrt\(n\))"))) {
      const double c = std::stod(mt[1]);
      check("fixed penalty", c == defaults::kPenaltyScale &&
                                 defaults::fixed_penalty(5000) == c / std::sqrt(5000.0),
            mt[0]);
    } else {
      check("fixed penalty", false, "not found in help");
    }
    if (std::regex_search(detect, mt, std::regex(R"(floor\(n/([0-9]+)\))"))) {
      const auto t = std::stoul(mt[1]);
      check("grid step", t == defaults::kTargetCandidates &&
                             defaults::grid_step(5000) == std::max<std::size_t>(1, 5000 / t),
            mt[0]);
    } else {
      check("grid step", false, "not found in help");
    }
    if (std::regex_search(detect, mt, std::regex(R"(max\(([0-9]+), ([0-9]+)\*step\))"))) {
      const auto lo = std::stoul(mt[1]);
      const auto k = std::stoul(mt[2]);
      check("minimum segment", lo == defaults::kMinSegmentFloor &&
                                   k == defaults::kMinSegmentSteps &&
                                   defaults::min_segment(5000) ==
                                       std::max<std::size_t>(lo, k * defaults::grid_step(5000)),
            mt[0]);
    } else {
      check("minimum segment", false, "not found in help");
    }
    if (std::regex_search(sim, mt, std::regex(R"(([0-9]+)\*n\])"))) {
      check("truncation", std::stoul(mt[1]) == defaults::kTruncationFactor &&
                              defaults::truncation(1000) == std::stoul(mt[1]) * 1000,
            mt[0]);
    } else {
      check("truncation", false, "not found in help");
    }
    if (std::regex_search(mc, mt, std::regex(R"(Replications \[default: ([0-9]+)\])"))) {
      check("replications", std::stoul(mt[1]) == defaults::kReplications &&
                                RunConfig{}.reps == defaults::kReplications,
            mt[0]);
    } else {
      check("replications", false, "not found in help");
    }
    {
      const auto r = default_slope_range(14);
      check("slope fit range", r.lo == 7 && r.hi == 14 &&
                                   detect.find("ceil(K_max/2):K_max") != std::string::npos,
            "ceil(K_max/2):K_max");
    }
    return {{"ok", all_ok}, {"checks", checks}};
  }

 private:
  int fail(const std::string& kind, const std::string& message, int code) {
    err_ << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump()
         << "\n";
    return code;
  }

  std::size_t threads() const {
    return cfg_.threads != 0 ? cfg_.threads : default_thread_count();
  }

  void add_process_flags(CLI::App* sub) {
    sub->add_option("--family", cfg_.family, "Process family: farima00, farima11, classl")
        ->capture_default_str();
    sub->add_option("--d", cfg_.d, "Memory parameter per regime (K*+1 values in [0, 0.5))")
        ->delimiter(',');
    sub->add_option("--taus", cfg_.taus, "Relative change times in (0,1), increasing")
        ->delimiter(',');
    sub->add_option("--psi", cfg_.psi, "AR coefficient (farima11)")->capture_default_str();
    sub->add_option("--theta", cfg_.theta, "MA coefficient (farima11)")->capture_default_str();
    sub->add_option("--n", cfg_.n, "Series length")->capture_default_str()->check(
        CLI::PositiveNumber);
    sub->add_option("--innovation", cfg_.innovation, "Innovation law: normal, uniform")
        ->capture_default_str();
    sub->add_option("--truncation", cfg_.truncation, detail::help_truncation());
  }

  void add_estimator_flags(CLI::App* sub) {
    sub->add_option("--m", cfg_.m, detail::help_m());
    sub->add_option("--kmax", cfg_.kmax, detail::help_kmax());
    sub->add_option("--zn", cfg_.zn, detail::help_zn());
    sub->add_option("--step", cfg_.step, detail::help_step());
    sub->add_option("--min-seg", cfg_.min_seg, detail::help_min_seg());
    sub->add_option("--slope-range", cfg_.slope_range, detail::help_slope_range());
  }

  void build() {
    app_.description("Change points in the long-memory parameter by penalized local Whittle "
                     "contrast minimization");
    app_.config_formatter(std::make_shared<JsonOrTomlConfig>(&app_));
    app_.set_config("--config", "", "TOML or JSON file mirroring the subcommand's flags");
    app_.fallthrough();
    app_.require_subcommand(1);
    app_.add_option("--threads", cfg_.threads, "Worker threads [default: hardware count]")
        ->envname("LRDSEG_THREADS");
    app_.add_flag("-v,--verbose", cfg_.verbosity, "Verbose diagnostics on stderr");

    auto* sim = app_.add_subcommand("simulate", "Simulate a piecewise long-memory series");
    add_process_flags(sim);
    sim->add_option("--seed", cfg_.seed, "RNG seed")->capture_default_str();
    sim->add_option("--out", cfg_.out, "Output path (.csv or .json)")->required();

    auto* est = app_.add_subcommand("estimate-d", "Local Whittle estimate of d on one window");
    est->add_option("--input", cfg_.input, "Series (.csv or .json)")->required();
    est->add_option("--m", cfg_.m, detail::help_m());
    est->add_option("--window", cfg_.window, "Window a:b covering samples a+1..b [default: 0:n]");
    est->add_option("--dump-periodogram", cfg_.dump_periodogram,
                    "Write (j, lambda_j, I) rows of the window to this CSV");
    est->add_option("--out", cfg_.out, "Output JSON path [default: stdout]");

    auto* det = app_.add_subcommand("detect", "Detect changes in the memory parameter");
    det->add_option("--input", cfg_.input, "Series (.csv or .json)")->required();
    add_estimator_flags(det);
    det->add_option("--rule", cfg_.rule, "Selection rule: fixed, bic, slope")
        ->capture_default_str()
        ->check(CLI::IsMember({"fixed", "bic", "slope"}));
    det->add_option("--known-k", cfg_.known_k, "Known number of changes (skips selection)");
    det->add_flag("--exact", cfg_.exact, "Every index is a candidate (n <= " +
                                             std::to_string(defaults::kExactModeMaxLength) + ")");
    det->add_option("--emit-curve", cfg_.emit_curve,
                    "Write K, 2C(K), 2C(K)+2*s_hat*K to this CSV");
    det->add_option("--out", cfg_.out, "Output JSON path [default: stdout]");

    auto* mc = app_.add_subcommand("montecarlo", "Replicated accuracy experiment");
    add_process_flags(mc);
    add_estimator_flags(mc);
    mc->add_option("--reps", cfg_.reps, detail::help_reps())->check(CLI::PositiveNumber);
    mc->add_option("--seed0", cfg_.seed, "Base seed; replication r uses seed0 + r")
        ->capture_default_str();
    mc->add_option("--mode", cfg_.mode, "known-k (RMSE table) or unknown-k (frequencies)")
        ->capture_default_str()
        ->check(CLI::IsMember({"known-k", "unknown-k"}));
    mc->add_option("--out-dir", cfg_.out_dir, "Directory for Markdown/CSV tables");

    app_.add_subcommand("self-test", "Check that documented defaults match runtime constants");
  }

  int dispatch() {
    const auto* sub = app_.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "simulate") return simulate();
    if (name == "estimate-d") return estimate();
    if (name == "detect") return detect(*sub);
    if (name == "montecarlo") return montecarlo(*sub);
    const auto report = self_test();
    out_ << report.dump(2) << "\n";
    return report["ok"].get<bool>() ? kExitOk : kExitNumeric;
  }

  int simulate() {
    const auto spec = detail::build_spec(cfg_.family, cfg_.d, cfg_.taus, cfg_.psi, cfg_.theta,
                                         cfg_.n, cfg_.innovation, cfg_.truncation);
    const auto traj = synthesize(spec, cfg_.seed);
    io::write_trajectory(cfg_.out, traj);
    return kExitOk;
  }

  int estimate() {
    const auto traj = io::read_trajectory(cfg_.input);
    const std::size_t n = traj.size();
    const std::size_t m = cfg_.m != 0 ? cfg_.m : defaults::bandwidth(n);
    const auto prefix = build_prefix(traj.values, m);
    SegmentWindow w{0, n};
    if (!cfg_.window.empty()) {
      const auto parsed = detail::parse_window(cfg_.window, n);
      w = {parsed.a, parsed.b};
    }
    if (!cfg_.dump_periodogram.empty()) io::dump_periodogram(prefix, w, cfg_.dump_periodogram);
    const auto fit = estimate_d(prefix, w);
    auto j = io::to_json(fit);
    j["m"] = m;
    j["n"] = n;
    j["window"] = {w.a, w.b};
    detail::write_json(j, cfg_.out, out_);
    return kExitOk;
  }

  DetectorOptions detector_options(const CLI::App& sub) const {
    DetectorOptions o;
    o.m = cfg_.m;
    o.k_max = cfg_.kmax;
    o.k_max_given = sub.count("--kmax") > 0;
    o.step = cfg_.step;
    o.min_seg = cfg_.min_seg;
    o.z_n = cfg_.zn;
    o.threads = threads();
    return o;
  }

  int detect(const CLI::App& sub) {
    const auto traj = io::read_trajectory(cfg_.input);
    const std::size_t n = traj.size();
    auto opts = detector_options(sub);
    if (cfg_.exact) {
      if (n > defaults::kExactModeMaxLength)
        throw InvalidArgument("--exact is limited to n <= " +
                              std::to_string(defaults::kExactModeMaxLength));
      opts.step = 1;
    }
    const bool known = sub.count("--known-k") > 0;
    if (known) {
      opts.k_max = cfg_.known_k;
      opts.k_max_given = true;
    }
    const auto r = resolve_options(n, opts);
    const auto prefix = build_prefix(traj.values, r.m);
    const auto grid = build_candidate_grid(n, r.step, r.min_seg);
    const auto cells = (known && r.k_max <= 1) ? CellSelection::boundary : CellSelection::all;
    const auto table = build_cost_table(prefix, grid, opts.threads, cells);
    if (cfg_.verbosity > 0)
      err_ << "cost table: " << table.size() << " nodes, " << table.degenerate_count()
           << " degenerate segments\n";
    auto result = dp_segment(table, r.k_max);

    nlohmann::json extra;
    extra["m"] = r.m;
    extra["step"] = r.step;
    extra["min_seg"] = r.min_seg;
    extra["degenerate_segments"] = table.degenerate_count();
    std::optional<Selection> slope;
    if (known) {
      extra["mode"] = "known-k";
    } else {
      extra["mode"] = "unknown-k";
      const auto range = cfg_.slope_range.empty() ? default_slope_range(r.k_max)
                                                  : detail::parse_range(cfg_.slope_range);
      const auto fixed = select_fixed_penalty(result, r.z_n);
      const auto bic = select_bic(result, n);
      nlohmann::json rules{{"fixed", io::to_json(fixed)}, {"bic", io::to_json(bic)}};
      try {
        slope = slope_heuristic_select(result, range);
        rules["slope"] = io::to_json(*slope);
        if (slope->degenerate_fit)
          err_ << nlohmann::json{{"warning", "slope heuristic fit is flat; K_hat_H = 0"}}.dump()
               << "\n";
      } catch (const InvalidArgument& e) {
        if (cfg_.rule == "slope") throw;
        rules["slope"] = {{"error", e.what()}};
      }
      extra["rules"] = rules;
      const auto rule = parse_rule(cfg_.rule);
      result.selection = rule == SelectionRule::fixed ? fixed
                         : rule == SelectionRule::bic ? bic
                                                      : *slope;
    }
    if (!cfg_.emit_curve.empty()) {
      if (!slope && result.k_max >= 2) {
        try {
          slope = slope_heuristic_select(result);
        } catch (const InvalidArgument&) {
        }
      }
      io::emit_curve(result, slope ? slope->slope.value_or(0.0) : 0.0, cfg_.emit_curve);
    }
    auto j = io::to_json(result);
    j.update(extra);
    detail::write_json(j, cfg_.out, out_);
    return kExitOk;
  }

  int montecarlo(const CLI::App& sub) {
    ExperimentConfig ec;
    ec.spec = detail::build_spec(cfg_.family, cfg_.d, cfg_.taus, cfg_.psi, cfg_.theta, cfg_.n,
                                 cfg_.innovation, cfg_.truncation);
    ec.reps = cfg_.reps;
    ec.seed0 = cfg_.seed;
    ec.detector = detector_options(sub);
    ec.detector.threads = 1;
    ec.threads = threads();
    if (!cfg_.slope_range.empty()) ec.slope_range = detail::parse_range(cfg_.slope_range);
    ec.mode = cfg_.mode == "known-k" ? ExperimentMode::known_k : ExperimentMode::unknown_k;

    std::string markdown, csv;
    std::vector<Replication> raw;
    if (ec.mode == ExperimentMode::known_k) {
      const auto t = run_known_k(ec);
      markdown = rmse_markdown(t, ec);
      csv = rmse_csv(t);
      raw = t.raw;
    } else {
      const auto t = run_unknown_k(ec);
      markdown = frequency_markdown(t, ec);
      csv = frequency_csv(t);
      raw = t.raw;
    }
    out_ << markdown;
    if (!cfg_.out_dir.empty()) {
      std::error_code ec_dir;
      std::filesystem::create_directories(cfg_.out_dir, ec_dir);
      if (ec_dir) throw DataError("cannot create '" + cfg_.out_dir + "'");
      const auto base = std::filesystem::path(cfg_.out_dir);
      io::write_text((base / "table.md").string(), markdown);
      io::write_text((base / "table.csv").string(), csv);
      io::write_text((base / "replications.csv").string(), replications_csv(raw));
    }
    return kExitOk;
  }

  std::ostream& out_;
  std::ostream& err_;
  CLI::App app_{"lrdseg"};
  RunConfig cfg_;
};

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  Cli cli(out, err);
  return cli.run(argc, argv);
}

}  // namespace lrdseg::cli
