#pragma once

/**
 * @file
 * Piecewise long-memory linear processes driven by one innovation stream.
 *
 * Every regime i owns a causal filter (a^{(i)}_j), truncated at lag M, and
 *   X_t = sum_{j=0..M} a^{(i)}_j eps_{t-j}   for t in regime i,
 * where the innovations eps_{1-M}, ..., eps_n are drawn once and shared by all
 * regimes. Regime i covers t = floor(n tau_{i-1}) + 1 .. floor(n tau_i).
 */

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lrdseg/defaults.hpp"
#include "lrdseg/error.hpp"
#include "lrdseg/fft.hpp"

namespace lrdseg {

enum class Family {
  farima00,  // (1-B)^{-d}
  farima11,  // (1-psi B)^{-1} (1+theta B) (1-B)^{-d}
  class_l,   // a_k = (k+1)^{d-1} + (k+1)^{d-2}
};

enum class Innovation {
  normal,
  uniform,  // centered uniform scaled to unit variance
};

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::farima00:
      return "farima00";
    case Family::farima11:
      return "farima11";
    case Family::class_l:
      return "classl";
  }
  return "unknown";
}

inline Family parse_family(std::string_view s) {
  if (s == "farima00") return Family::farima00;
  if (s == "farima11") return Family::farima11;
  if (s == "classl" || s == "class_l") return Family::class_l;
  throw InvalidArgument("unknown process family '" + std::string(s) + "'");
}

inline std::string_view to_string(Innovation i) {
  return i == Innovation::normal ? "normal" : "uniform";
}

inline Innovation parse_innovation(std::string_view s) {
  if (s == "normal") return Innovation::normal;
  if (s == "uniform") return Innovation::uniform;
  throw InvalidArgument("unknown innovation law '" + std::string(s) + "'");
}

/// Truncated MA(inf) weights a_0..a_M.
struct CoefficientSequence {
  double d = 0.0;
  std::vector<double> weights;

  std::size_t truncation() const noexcept { return weights.size() - 1; }
};

namespace detail {

inline void check_memory(double d) {
  if (!(d >= 0.0 && d < 0.5))
    throw InvalidArgument("memory parameter d must lie in [0, 0.5), got " +
                          std::to_string(d));
}

}  // namespace detail

/// Fractional integration weights: a_0 = 1, a_j = a_{j-1} (j - 1 + d) / j.
inline CoefficientSequence farima00_coeffs(double d, std::size_t truncation) {
  detail::check_memory(d);
  CoefficientSequence c{d, std::vector<double>(truncation + 1)};
  c.weights[0] = 1.0;
  for (std::size_t j = 1; j <= truncation; ++j) {
    const auto jd = static_cast<double>(j);
    c.weights[j] = c.weights[j - 1] * (jd - 1.0 + d) / jd;
  }
  return c;
}

/// FARIMA(1,d,1) for (1 - psi B) X = (1 - B)^{-d} (1 + theta B) eps. The
/// ARMA(1,1) factor is applied as the recursion b_j = psi b_{j-1} + f_j +
/// theta f_{j-1}, which equals convolution with h_0 = 1, h_j =
/// psi^{j-1}(psi + theta).
inline CoefficientSequence farima11_coeffs(double d, double psi, double theta,
                                           std::size_t truncation) {
  if (!(std::abs(psi) < 1.0))
    throw InvalidArgument("AR coefficient must satisfy |psi| < 1");
  if (!std::isfinite(theta)) throw InvalidArgument("MA coefficient must be finite");
  const auto frac = farima00_coeffs(d, truncation);
  CoefficientSequence c{d, std::vector<double>(truncation + 1)};
  c.weights[0] = frac.weights[0];
  for (std::size_t j = 1; j <= truncation; ++j)
    c.weights[j] = psi * c.weights[j - 1] + frac.weights[j] +
                   theta * frac.weights[j - 1];
  return c;
}

inline CoefficientSequence classL_coeffs(double d, std::size_t truncation) {
  detail::check_memory(d);
  CoefficientSequence c{d, std::vector<double>(truncation + 1)};
  for (std::size_t k = 0; k <= truncation; ++k) {
    const auto k1 = static_cast<double>(k + 1);
    c.weights[k] = std::pow(k1, d - 1.0) + std::pow(k1, d - 2.0);
  }
  return c;
}

/// Autocovariances r(k) = sum_j a_j a_{j+k} of the truncated filter with unit
/// innovation variance, for k = 0..maxlag.
inline std::vector<double> theoretical_acf(const CoefficientSequence& coeffs,
                                           std::size_t maxlag) {
  const std::size_t M = coeffs.truncation();
  if (2 * maxlag > M)
    throw InvalidArgument("theoretical_acf: maxlag must not exceed M/2");
  const auto& a = coeffs.weights;
  std::vector<double> r(maxlag + 1, 0.0);
  for (std::size_t k = 0; k <= maxlag; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j + k <= M; ++j) acc += a[j] * a[j + k];
    r[k] = acc;
  }
  return r;
}

struct Regime {
  Family family = Family::farima00;
  double d = 0.0;
  double psi = -0.7;   // farima11 only
  double theta = 0.3;  // farima11 only
};

inline CoefficientSequence regime_coeffs(const Regime& r, std::size_t truncation) {
  switch (r.family) {
    case Family::farima00:
      return farima00_coeffs(r.d, truncation);
    case Family::farima11:
      return farima11_coeffs(r.d, r.psi, r.theta, truncation);
    case Family::class_l:
      return classL_coeffs(r.d, truncation);
  }
  throw InvalidArgument("unknown family");
}

struct ProcessSpec {
  std::vector<Regime> regimes{Regime{}};
  std::vector<double> taus;  // relative change times, strictly increasing in (0,1)
  Innovation innovation = Innovation::normal;
  std::size_t n = 0;
  /// Filter truncation M; 0 selects the default 10 n.
  std::size_t truncation = 0;

  std::size_t change_count() const noexcept { return taus.size(); }

  std::size_t effective_truncation() const {
    return truncation != 0 ? truncation : defaults::truncation(n);
  }

  /// Change indices t_i = floor(n tau_i).
  std::vector<std::size_t> change_indices() const {
    std::vector<std::size_t> t;
    t.reserve(taus.size());
    for (double tau : taus)
      t.push_back(static_cast<std::size_t>(std::floor(static_cast<double>(n) * tau)));
    return t;
  }

  /// Structural checks. Equal memory parameters in adjacent regimes are allowed
  /// here; see has_distinct_adjacent_memory.
  void validate() const {
    if (n == 0) throw InvalidArgument("series length n must be positive");
    if (regimes.size() != taus.size() + 1)
      throw InvalidArgument("need exactly one more regime than change times");
    for (std::size_t i = 0; i < taus.size(); ++i) {
      if (!(taus[i] > 0.0 && taus[i] < 1.0))
        throw InvalidArgument("change times must lie in (0, 1)");
      if (i > 0 && !(taus[i] > taus[i - 1]))
        throw InvalidArgument("change times must be strictly increasing");
    }
    const auto t = change_indices();
    std::size_t prev = 0;
    for (std::size_t ti : t) {
      if (ti <= prev || ti >= n)
        throw InvalidArgument("change times collapse to empty regimes at this n");
      prev = ti;
    }
    for (const auto& r : regimes) {
      detail::check_memory(r.d);
      if (r.family == Family::farima11 && !(std::abs(r.psi) < 1.0))
        throw InvalidArgument("AR coefficient must satisfy |psi| < 1");
    }
  }

  bool has_distinct_adjacent_memory() const {
    for (std::size_t i = 1; i < regimes.size(); ++i)
      if (regimes[i].d == regimes[i - 1].d) return false;
    return true;
  }
};

struct Trajectory {
  std::vector<double> values;
  std::optional<ProcessSpec> spec;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return values.size(); }
};

enum class ConvolutionMethod { automatic, direct, fft };

/// Draws eps_{1-M}, ..., eps_n in that order from a generator seeded with
/// `seed`.
inline std::vector<double> draw_innovations(std::size_t count, Innovation law,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<double> eps(count);
  if (law == Innovation::normal) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (auto& e : eps) e = dist(rng);
  } else {
    // U(-sqrt 3, sqrt 3) has unit variance.
    const double half_width = std::sqrt(3.0);
    std::uniform_real_distribution<double> dist(-half_width, half_width);
    for (auto& e : eps) e = dist(rng);
  }
  return eps;
}

/// Precomputes per-regime filters (and their spectra) for one ProcessSpec so
/// that many trajectories can be drawn cheaply. Immutable after construction;
/// generate() may be called concurrently.
class Synthesizer {
 public:
  explicit Synthesizer(ProcessSpec spec,
                       ConvolutionMethod method = ConvolutionMethod::automatic)
      : spec_(std::move(spec)) {
    spec_.validate();
    truncation_ = spec_.effective_truncation();
    for (const auto& r : spec_.regimes) filters_.push_back(regime_coeffs(r, truncation_));

    const std::size_t n = spec_.n;
    if (method == ConvolutionMethod::automatic)
      method = (n * (truncation_ + 1) <= (1u << 16)) ? ConvolutionMethod::direct
                                                     : ConvolutionMethod::fft;
    method_ = method;

    if (method_ == ConvolutionMethod::fft) {
      // Outputs at indices >= M of a circular convolution are alias-free once
      // the length covers all n + M innovations.
      transform_.emplace(fft::next_power_of_two(n + truncation_));
      for (const auto& f : filters_) {
        fft::RealBuffer padded(transform_->length());
        std::copy(f.weights.begin(), f.weights.end(), padded.data());
        fft::ComplexBuffer spectrum(transform_->spectrum_size());
        transform_->forward(padded, spectrum);
        spectra_.push_back(std::move(spectrum));
      }
    }
  }

  const ProcessSpec& spec() const noexcept { return spec_; }
  std::size_t truncation() const noexcept { return truncation_; }
  ConvolutionMethod method() const noexcept { return method_; }
  const std::vector<CoefficientSequence>& filters() const noexcept { return filters_; }

  /// Regime boundaries 0 = b_0 < b_1 < ... < b_{K+1} = n; regime i covers the
  /// zero-based indices [b_i, b_{i+1}).
  std::vector<std::size_t> regime_bounds() const {
    std::vector<std::size_t> b{0};
    for (std::size_t t : spec_.change_indices()) b.push_back(t);
    b.push_back(spec_.n);
    return b;
  }

  Trajectory generate(std::uint64_t seed) const {
    const std::size_t n = spec_.n;
    const std::size_t M = truncation_;
    // eps[k] holds eps_{k + 1 - M}.
    const auto eps = draw_innovations(n + M, spec_.innovation, seed);
    const auto bounds = regime_bounds();

    Trajectory out;
    out.values.assign(n, 0.0);
    out.spec = spec_;
    out.seed = seed;

    if (method_ == ConvolutionMethod::direct) {
      for (std::size_t r = 0; r < filters_.size(); ++r) {
        const auto& a = filters_[r].weights;
        for (std::size_t i = bounds[r]; i < bounds[r + 1]; ++i) {
          // X_{i+1} = sum_j a_j eps_{i+1-j} = sum_j a_j eps[i + M - j]
          double acc = 0.0;
          for (std::size_t j = 0; j <= M; ++j) acc += a[j] * eps[i + M - j];
          out.values[i] = acc;
        }
      }
      return out;
    }

    const auto& tr = *transform_;
    fft::RealBuffer buf(tr.length());
    std::copy(eps.begin(), eps.end(), buf.data());
    fft::ComplexBuffer eps_spec(tr.spectrum_size());
    tr.forward(buf, eps_spec);
    fft::ComplexBuffer prod(tr.spectrum_size());
    const double scale = 1.0 / static_cast<double>(tr.length());
    for (std::size_t r = 0; r < filters_.size(); ++r) {
      const auto& h = spectra_[r];
      for (std::size_t k = 0; k < tr.spectrum_size(); ++k) {
        const double re = eps_spec[k][0] * h[k][0] - eps_spec[k][1] * h[k][1];
        const double im = eps_spec[k][0] * h[k][1] + eps_spec[k][1] * h[k][0];
        prod[k][0] = re;
        prod[k][1] = im;
      }
      tr.inverse(prod, buf);
      for (std::size_t i = bounds[r]; i < bounds[r + 1]; ++i)
        out.values[i] = buf[i + M] * scale;
    }
    return out;
  }

 private:
  ProcessSpec spec_;
  std::size_t truncation_ = 0;
  ConvolutionMethod method_ = ConvolutionMethod::direct;
  std::vector<CoefficientSequence> filters_;
  std::optional<fft::RealTransform> transform_;
  std::vector<fft::ComplexBuffer> spectra_;
};

inline Trajectory synthesize(const ProcessSpec& spec, std::uint64_t seed) {
  return Synthesizer(spec).generate(seed);
}

}  // namespace lrdseg
