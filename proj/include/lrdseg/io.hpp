#pragma once

// CSV and JSON interchange. Series CSV: one value per line, optional
// non-numeric header line. Values are written with 17 significant digits so a
// write/read cycle is lossless.

#include <cerrno>
#include <cctype>
#include <cstdlib>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrdseg/error.hpp"
#include "lrdseg/montecarlo.hpp"
#include "lrdseg/segmentation.hpp"
#include "lrdseg/spectral.hpp"
#include "lrdseg/synthesis.hpp"

namespace lrdseg::io {

using nlohmann::json;

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  const std::string tmp(s);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(tmp.c_str(), &end);
  return end != tmp.c_str() && *end == '\0' && errno != ERANGE;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace detail

inline std::vector<double> parse_series_csv(std::string_view text) {
  std::vector<double> values;
  std::size_t line_no = 0;
  bool seen_content = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    double v = 0.0;
    if (!detail::parse_double(line, v) || !std::isfinite(v)) {
      // Only the first non-empty line may be a header.
      if (!seen_content && line.find(',') == std::string_view::npos &&
          !std::isdigit(static_cast<unsigned char>(line.front()))) {
        seen_content = true;
        continue;
      }
      throw DataError("malformed CSV at line " + std::to_string(line_no) + ": '" +
                      std::string(line) + "'");
    }
    seen_content = true;
    values.push_back(v);
  }
  if (values.empty()) throw DataError("empty series");
  return values;
}

inline std::vector<double> read_series_csv(const std::string& path) {
  return parse_series_csv(detail::read_file(path));
}

inline void write_series_csv(const std::string& path, std::span<const double> values,
                             std::string_view header = "x") {
  auto out = detail::open_out(path);
  if (!header.empty()) out << header << "\n";
  for (double v : values) out << v << "\n";
  if (!out) throw DataError("write failed for '" + path + "'");
}

// --- ProcessSpec / Trajectory JSON ------------------------------------------

inline json to_json(const ProcessSpec& s) {
  json regimes = json::array();
  for (const auto& r : s.regimes) {
    json jr{{"family", std::string(to_string(r.family))}, {"d", r.d}};
    if (r.family == Family::farima11) {
      jr["psi"] = r.psi;
      jr["theta"] = r.theta;
    }
    regimes.push_back(jr);
  }
  return json{{"regimes", regimes},
              {"taus", s.taus},
              {"innovation", std::string(to_string(s.innovation))},
              {"n", s.n},
              {"truncation", s.effective_truncation()}};
}

inline ProcessSpec spec_from_json(const json& j) {
  try {
    ProcessSpec s;
    s.regimes.clear();
    for (const auto& jr : j.at("regimes")) {
      Regime r;
      r.family = parse_family(jr.value("family", std::string("farima00")));
      r.d = jr.at("d").get<double>();
      r.psi = jr.value("psi", r.psi);
      r.theta = jr.value("theta", r.theta);
      s.regimes.push_back(r);
    }
    s.taus = j.value("taus", std::vector<double>{});
    s.innovation = parse_innovation(j.value("innovation", std::string("normal")));
    s.n = j.at("n").get<std::size_t>();
    s.truncation = j.value("truncation", std::size_t{0});
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed process spec: ") + e.what());
  }
}

inline json to_json(const Trajectory& t) {
  json j{{"values", t.values}, {"seed", t.seed}};
  if (t.spec) j["spec"] = to_json(*t.spec);
  return j;
}

inline Trajectory trajectory_from_json(const json& j) {
  try {
    Trajectory t;
    t.values = j.at("values").get<std::vector<double>>();
    t.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("spec")) t.spec = spec_from_json(j.at("spec"));
    if (t.values.empty()) throw DataError("empty series");
    return t;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed trajectory JSON: ") + e.what());
  }
}

/// CSV or JSON by extension.
inline Trajectory read_trajectory(const std::string& path) {
  if (detail::ends_with(path, ".json")) {
    const auto text = detail::read_file(path);
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw DataError("malformed JSON in '" + path + "': " + e.what());
    }
    return trajectory_from_json(j);
  }
  Trajectory t;
  t.values = read_series_csv(path);
  return t;
}

inline void write_trajectory(const std::string& path, const Trajectory& t) {
  if (detail::ends_with(path, ".json")) {
    auto out = detail::open_out(path);
    out << to_json(t).dump(2) << "\n";
    return;
  }
  write_series_csv(path, t.values);
}

// --- results ------------------------------------------------------------------

inline json to_json(const WhittleFit& f) {
  return json{{"d_hat", f.d_hat}, {"w_min", f.w_min}, {"at_boundary", f.at_boundary}};
}

inline json to_json(const Selection& s) {
  json j{{"rule", std::string(to_string(s.rule))}, {"k_hat", s.k_hat}, {"penalty", s.penalty}};
  if (s.slope) j["slope"] = *s.slope;
  if (s.rule == SelectionRule::slope) {
    j["degenerate_fit"] = s.degenerate_fit;
    j["at_boundary"] = s.at_boundary;
  }
  return j;
}

inline json to_json(const SegmentationFit& f, std::size_t n) {
  std::vector<double> taus;
  for (std::size_t t : f.breakpoints) taus.push_back(static_cast<double>(t) / static_cast<double>(n));
  return json{{"k", f.breakpoints.size()},
              {"breakpoints", f.breakpoints},
              {"taus", taus},
              {"dhats", f.dhats},
              {"contrast", f.contrast}};
}

/// Selected segmentation up front, then the whole C(K) curve.
inline json to_json(const SegmentationResult& r) {
  json j;
  j["n"] = r.n;
  j["k_max"] = r.k_max;
  std::size_t chosen = r.k_max;
  if (r.selection) {
    j["selection"] = to_json(*r.selection);
    chosen = r.selection->k_hat;
  }
  const auto& f = r.fits.at(chosen);
  j["k_hat"] = chosen;
  const auto sel = to_json(f, r.n);
  j["breakpoints"] = sel["breakpoints"];
  j["taus"] = sel["taus"];
  j["dhats"] = sel["dhats"];
  json per_k = json::array();
  for (const auto& fit : r.fits) per_k.push_back(to_json(fit, r.n));
  j["per_k"] = per_k;
  j["contrasts"] = r.contrasts();
  return j;
}

/// Plotting data: K, 2 C(K), 2 C(K) + 2 s_hat K.
inline void emit_curve(const SegmentationResult& r, double s_hat, const std::string& path) {
  auto out = detail::open_out(path);
  out << "K,twice_contrast,twice_contrast_penalized\n";
  for (std::size_t K = 0; K < r.fits.size(); ++K) {
    const double c2 = 2.0 * r.fits[K].contrast;
    out << K << "," << c2 << "," << c2 + 2.0 * s_hat * static_cast<double>(K) << "\n";
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

/// Debug dump of one window's periodogram: j, lambda_j, I_T(lambda_j).
inline void dump_periodogram(const SpectralPrefix& prefix, const SegmentWindow& w,
                             const std::string& path) {
  auto out = detail::open_out(path);
  out << "j,lambda,periodogram\n";
  const auto ord = prefix.periodograms(w);
  for (std::size_t j = 1; j <= prefix.m(); ++j)
    out << j << "," << prefix.grid().lambda(j) << "," << ord[j - 1] << "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
  auto out = detail::open_out(path);
  out << text;
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace lrdseg::io
