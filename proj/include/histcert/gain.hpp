#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "histcert/error.hpp"
#include "histcert/polynomial.hpp"
#include "histcert/stability.hpp"
#include "histcert/transfer.hpp"

namespace histcert {

/// Cosine series of |c(e^{jw})|^2 for a real coefficient vector c:
/// returns s with |sum_k c_k e^{jkw}|^2 = sum_m s_m cos(m w).
inline std::vector<double> cosine_series(const Polynomial& p) {
  const auto& c = p.coeffs();
  std::vector<double> s(c.size(), 0.0);
  for (std::size_t m = 0; m < c.size(); ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k + m < c.size(); ++k) acc += c[k] * c[k + m];
    s[m] = (m == 0) ? acc : 2.0 * acc;
  }
  return s;
}

/// Power-basis polynomial of sum_m s_m T_m(x), T_m the Chebyshev polynomials.
inline Polynomial chebyshev_to_power(const std::vector<double>& s) {
  Polynomial acc;
  Polynomial t_prev = Polynomial::constant(1.0);  // T_0
  Polynomial t_cur({0.0, 1.0});                    // T_1
  const Polynomial two_x({0.0, 2.0});
  for (std::size_t m = 0; m < s.size(); ++m) {
    if (m == 0) {
      acc = acc + t_prev * s[0];
      continue;
    }
    acc = acc + t_cur * s[m];
    Polynomial t_next = two_x * t_cur - t_prev;
    t_prev = std::move(t_cur);
    t_cur = std::move(t_next);
  }
  return acc;
}

/// |K(e^{jw})|^2 written as P(x) / Q(x) with x = cos w, valid on x in [-1, 1].
struct CosRational {
  Polynomial p;
  Polynomial q;

  double operator()(double x) const { return p(x) / q(x); }
};

inline CosRational magnitude_squared_as_cos_rational(const RationalTF& k) {
  return {chebyshev_to_power(cosine_series(k.num())), chebyshev_to_power(cosine_series(k.den()))};
}

struct GainResult {
  double gain = 0.0;
  double argmax_omega = 0.0;  ///< in [0, pi]
};

inline constexpr int kDefaultGainGrid = 4096;
inline constexpr double kGainRefinementWidth = 1e-12;

namespace detail {

/// Golden-section maximization of f on [lo, hi] down to the refinement width.
template <typename F>
std::pair<double, double> golden_maximize(F&& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > kGainRefinementWidth) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

}  // namespace detail

/// H-infinity norm sup_w |K(e^{jw})| of a Schur-stable transfer function.
///
/// Maximizes P/Q over a uniform grid on [-1, 1] that always contains both
/// endpoints, then refines every interior local maximum by golden section.
/// Throws Undefined when the denominator is not Schur stable.
inline GainResult hinf_norm(const RationalTF& k, int grid_points = kDefaultGainGrid) {
  if (!is_schur(k.den(), 0.0)) throw Undefined("gain undefined for unstable system");
  const CosRational psi = magnitude_squared_as_cos_rational(k);
  const int n = std::max({grid_points, 512 * std::max(1, psi.q.degree()), 3});

  std::vector<double> xs(static_cast<std::size_t>(n));
  std::vector<double> fs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = (i == n - 1) ? 1.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    xs[static_cast<std::size_t>(i)] = x;
    fs[static_cast<std::size_t>(i)] = psi(x);
  }

  // Ties resolve to the smallest grid index, so the result is deterministic.
  std::size_t best = 0;
  for (std::size_t i = 1; i < fs.size(); ++i)
    if (fs[i] > fs[best]) best = i;
  double best_x = xs[best];
  double best_f = fs[best];

  struct Candidate {
    std::size_t index;
    double value;
  };
  std::vector<Candidate> peaks;
  for (std::size_t i = 1; i + 1 < fs.size(); ++i) {
    const bool peak = fs[i] >= fs[i - 1] && fs[i] >= fs[i + 1] && (fs[i] > fs[i - 1] || fs[i] > fs[i + 1]);
    if (peak) peaks.push_back({i, fs[i]});
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  if (peaks.size() > 32) peaks.resize(32);
  for (const Candidate& c : peaks) {
    const auto [x, f] = detail::golden_maximize(psi, xs[c.index - 1], xs[c.index + 1]);
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  return {std::sqrt(std::max(0.0, best_f)), std::acos(std::clamp(best_x, -1.0, 1.0))};
}

/// Largest |K(e^{jw})| over n uniformly spaced frequencies in [-pi, pi]; no
/// stability check and no refinement.
inline double sampled_peak_gain(const RationalTF& k, int n) {
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = -std::numbers::pi + 2.0 * std::numbers::pi * i / (n - 1);
    peak = std::max(peak, std::abs(k.evaluate(std::polar(1.0, w))));
  }
  return peak;
}

}  // namespace histcert
