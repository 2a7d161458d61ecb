#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "histcert/error.hpp"

namespace histcert {

// Parameter sets for every supported method family. Step sizes are positive
// unless noted otherwise.

/// x+ = x - eta F(x)
struct GradientDescent {
  double eta;
};

/// x+ = x - 2 eta F(x_k) + eta F(x_{k-1})
struct OptimisticGradient {
  double eta;
};

/// x+ = x - (alpha + beta) F(x_k) + beta F(x_{k-1}); beta may be zero.
struct GeneralizedOptimistic {
  double alpha;
  double beta;
};

/// x+ = x - eta F(x+)
struct ProximalPoint {
  double eta;
};

/// Discrete PID on the error e = -F; kd is unrestricted in sign.
struct PidController {
  double kp;
  double ki;
  double kd;
};

/// x_{k+T} = x_{k+T-1} - eta sum_i a_i F(x_{k+T-i}), i = 1..T.
struct HistoricalGradient {
  double eta;
  std::vector<double> a;
};

/// x_{k+T} = sum_i b_i x_{k+T-i} - eta sum_i a_i F(x_{k+T-i}), with sum b = 1.
struct GeneralHistorical {
  double eta;
  std::vector<double> a;
  std::vector<double> b;
};

/// Popov's past extra-gradient: half step with the stale gradient, then a full
/// step with the fresh one.
struct PastExtraGradient {
  double eta;
};

/// Reflected gradient: evaluate at the reflection 2 x_k - x_{k-1}.
struct ReflectedGradient {
  double eta;
};

using MethodSpec = std::variant<GradientDescent, OptimisticGradient, GeneralizedOptimistic, ProximalPoint,
                                PidController, HistoricalGradient, GeneralHistorical, PastExtraGradient,
                                ReflectedGradient>;

/// Tolerance on sum(b) = 1 for general historical methods.
inline constexpr double kEquilibriumTolerance = 1e-12;

/// Short lowercase family tag, also used as the JSON "family" value.
inline std::string_view family_name(const MethodSpec& m) {
  return std::visit(
      [](const auto& v) -> std::string_view {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GradientDescent>) return "gd";
        else if constexpr (std::is_same_v<T, OptimisticGradient>) return "ogd";
        else if constexpr (std::is_same_v<T, GeneralizedOptimistic>) return "gogd";
        else if constexpr (std::is_same_v<T, ProximalPoint>) return "pp";
        else if constexpr (std::is_same_v<T, PidController>) return "pid";
        else if constexpr (std::is_same_v<T, HistoricalGradient>) return "hgd";
        else if constexpr (std::is_same_v<T, GeneralHistorical>) return "historical";
        else if constexpr (std::is_same_v<T, PastExtraGradient>) return "pegd";
        else return "rgd";
      },
      m);
}

namespace detail {

inline void require_positive(double v, const char* what) {
  require(std::isfinite(v) && v > 0.0, std::string(what) + " must be a positive finite number");
}

inline void require_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) require(std::isfinite(x), std::string(what) + " entries must be finite");
}

}  // namespace detail

/// Throws InvalidInput when the parameters violate the family's invariants.
inline void validate(const MethodSpec& m) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GeneralizedOptimistic>) {
          detail::require_positive(v.alpha, "alpha");
          detail::require(std::isfinite(v.beta) && v.beta >= 0.0, "beta must be nonnegative");
        } else if constexpr (std::is_same_v<T, PidController>) {
          detail::require(std::isfinite(v.kp) && std::isfinite(v.ki) && std::isfinite(v.kd),
                          "PID gains must be finite");
          detail::require(v.kp >= 0.0 && v.ki > 0.0, "PID gains need kp >= 0 and ki > 0");
        } else if constexpr (std::is_same_v<T, HistoricalGradient>) {
          detail::require_positive(v.eta, "eta");
          detail::require(!v.a.empty(), "historical gradient needs a horizon T >= 1");
          detail::require_finite(v.a, "a");
        } else if constexpr (std::is_same_v<T, GeneralHistorical>) {
          detail::require_positive(v.eta, "eta");
          detail::require(!v.a.empty(), "historical method needs a horizon T >= 1");
          detail::require(v.a.size() == v.b.size(), "coefficient vectors a and b must have the same length");
          detail::require_finite(v.a, "a");
          detail::require_finite(v.b, "b");
          const double sum_b = std::accumulate(v.b.begin(), v.b.end(), 0.0);
          detail::require(std::abs(sum_b - 1.0) <= kEquilibriumTolerance,
                          "coefficients b must sum to 1 for the fixed point to be an equilibrium");
        } else {
          detail::require_positive(v.eta, "eta");
        }
      },
      m);
}

/// True for families whose parameters scale linearly with one step size.
inline bool has_single_step_size(const MethodSpec& m) {
  return !std::holds_alternative<GeneralizedOptimistic>(m) && !std::holds_alternative<PidController>(m);
}

/// Copy of `m` with its single step size replaced by `eta`.
inline MethodSpec with_step_size(const MethodSpec& m, double eta) {
  detail::require(has_single_step_size(m), std::string("family '") + std::string(family_name(m)) +
                                               "' has no single step size");
  MethodSpec out = m;
  std::visit(
      [eta](auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (!std::is_same_v<T, GeneralizedOptimistic> && !std::is_same_v<T, PidController>) v.eta = eta;
      },
      out);
  return out;
}

inline double step_size(const MethodSpec& m) {
  detail::require(has_single_step_size(m), "family has no single step size");
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GeneralizedOptimistic> || std::is_same_v<T, PidController>) return 0.0;
        else return v.eta;
      },
      m);
}

}  // namespace histcert
