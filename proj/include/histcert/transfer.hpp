#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "histcert/error.hpp"
#include "histcert/linalg.hpp"
#include "histcert/method.hpp"
#include "histcert/polynomial.hpp"
#include "histcert/stability.hpp"

namespace histcert {

/// Relative distance under which a numerator root and a denominator root are
/// considered a common factor.
inline constexpr double kCancellationTolerance = 1e-10;

/// Tolerance on cross-multiplied coefficients in tf_equal.
inline constexpr double kTransferEqualityTolerance = 1e-12;

/// Scalar rational transfer function num(z) / den(z).
///
/// Instances are always reduced (no common roots up to kCancellationTolerance)
/// and normalized so that den is monic. Real coefficients only.
class RationalTF {
 public:
  RationalTF(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) { reduce(); }

  const Polynomial& num() const { return num_; }
  const Polynomial& den() const { return den_; }

  bool strictly_proper() const { return num_.is_zero() || num_.degree() < den_.degree(); }
  bool proper() const { return num_.is_zero() || num_.degree() <= den_.degree(); }

  /// num(z) / den(z) by Horner evaluation; throws Undefined at a pole.
  Complex evaluate(Complex z) const {
    const Complex d = den_(z);
    double scale = 0.0;
    double power = 1.0;
    for (double c : den_.coeffs()) {
      scale += std::abs(c) * power;
      power *= std::abs(z);
    }
    if (std::abs(d) <= 1e-14 * std::max(1.0, scale)) throw Undefined("transfer function evaluated at a pole");
    return num_(z) / d;
  }
  Complex operator()(Complex z) const { return evaluate(z); }

 private:
  void reduce();

  Polynomial num_;
  Polynomial den_;
};

namespace detail {

inline bool close_roots(Complex a, Complex b) {
  return std::abs(a - b) <= kCancellationTolerance * std::max(1.0, std::abs(a));
}

/// Real factor (z - r) or (z^2 - 2 Re r z + |r|^2) for a root r.
inline Polynomial real_factor(Complex r) {
  if (std::abs(r.imag()) <= kCancellationTolerance * std::max(1.0, std::abs(r))) return Polynomial({-r.real(), 1.0});
  return Polynomial({std::norm(r), -2.0 * r.real(), 1.0});
}

}  // namespace detail

inline void RationalTF::reduce() {
  detail::require(!den_.is_zero(), "transfer function denominator is identically zero");
  if (num_.is_zero()) {
    den_ = Polynomial::constant(1.0);
    return;
  }
  if (num_.degree() >= 1 && den_.degree() >= 1) {
    std::vector<Complex> nr = roots(num_);
    std::vector<Complex> dr = roots(den_);
    std::vector<bool> used(dr.size(), false);
    std::vector<Complex> common;
    for (const Complex& a : nr) {
      if (a.imag() < 0.0 && std::abs(a.imag()) > kCancellationTolerance * std::max(1.0, std::abs(a))) continue;
      for (std::size_t j = 0; j < dr.size(); ++j) {
        if (!used[j] && detail::close_roots(a, dr[j])) {
          used[j] = true;
          // A complex root takes its conjugate partner along.
          if (std::abs(a.imag()) > kCancellationTolerance * std::max(1.0, std::abs(a))) {
            for (std::size_t k = 0; k < dr.size(); ++k) {
              if (!used[k] && detail::close_roots(std::conj(a), dr[k])) {
                used[k] = true;
                break;
              }
            }
          }
          common.push_back(a);
          break;
        }
      }
    }
    for (const Complex& r : common) {
      const Polynomial f = detail::real_factor(r);
      num_ = num_.divide_out(f);
      den_ = den_.divide_out(f);
    }
  }
  const double lead = den_.leading();
  num_ = num_ * (1.0 / lead);
  den_ = den_ * (1.0 / lead);
}

/// Scalar state-space realization: xi+ = A xi + B v, u = C xi + D v.
struct StateSpace {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::RowVectorXd c;
  double d = 0.0;
};

/// C (zI - A)^{-1} B + D via the Faddeev-LeVerrier resolvent expansion.
inline RationalTF transfer_of(const StateSpace& ss) {
  const Eigen::Index n = ss.a.rows();
  detail::require(ss.a.cols() == n && ss.b.size() == n && ss.c.size() == n, "state-space dimensions mismatch");
  const ResolventExpansion rx = faddeev_leverrier(ss.a);
  std::vector<double> num(static_cast<std::size_t>(n + 1), 0.0);
  for (Eigen::Index k = 1; k <= n; ++k) {
    num[static_cast<std::size_t>(n - k)] = ss.c * rx.adjugate_terms[static_cast<std::size_t>(k - 1)] * ss.b;
  }
  Polynomial numerator = Polynomial(std::move(num)) + rx.characteristic * ss.d;
  return RationalTF(numerator, rx.characteristic);
}

/// State-space controllers for the single-call extra-gradient variants.
inline StateSpace past_extra_gradient_realization(double eta) {
  StateSpace ss;
  ss.a.resize(3, 3);
  ss.a << 0, 1, -eta, 0, 1, 0, 0, 0, 0;
  ss.b.resize(3);
  ss.b << 0, -eta, 1;
  ss.c.resize(3);
  ss.c << 0, 1, -eta;
  return ss;
}

inline StateSpace reflected_gradient_realization(double eta) {
  StateSpace ss;
  ss.a.resize(3, 3);
  ss.a << 0, 2, 1, 0, 1, 0, 0, 1, 0;
  ss.b.resize(3);
  ss.b << 0, -eta, 0;
  ss.c.resize(3);
  ss.c << 0, 2, -1;
  return ss;
}

/// Transfer function K(z) of the controller that realizes `m`.
inline RationalTF build_transfer(const MethodSpec& m) {
  validate(m);
  return std::visit(
      [](const auto& v) -> RationalTF {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GradientDescent>) {
          return RationalTF({-v.eta}, {-1.0, 1.0});
        } else if constexpr (std::is_same_v<T, OptimisticGradient>) {
          return RationalTF({v.eta, -2.0 * v.eta}, {0.0, -1.0, 1.0});
        } else if constexpr (std::is_same_v<T, GeneralizedOptimistic>) {
          return RationalTF({v.beta, -(v.alpha + v.beta)}, {0.0, -1.0, 1.0});
        } else if constexpr (std::is_same_v<T, ProximalPoint>) {
          return RationalTF({0.0, -v.eta}, {-1.0, 1.0});
        } else if constexpr (std::is_same_v<T, PidController>) {
          // -kp + ki - 2kd grouped as ki - (kp + kd) - kd, so that the GOGD and PP
          // special cases (kp + kd = 0, or kd = 0 and kp = ki) round exactly like
          // the direct builders.
          const double s = v.kp + v.kd;
          return RationalTF({-v.kd, -(v.ki - s - v.kd), -s}, {0.0, -1.0, 1.0});
        } else if constexpr (std::is_same_v<T, HistoricalGradient>) {
          const std::size_t horizon = v.a.size();
          std::vector<double> num(horizon);
          for (std::size_t i = 1; i <= horizon; ++i) num[horizon - i] = -v.eta * v.a[i - 1];
          std::vector<double> den(horizon + 1, 0.0);
          den[horizon] = 1.0;
          den[horizon - 1] = -1.0;
          return RationalTF(Polynomial(std::move(num)), Polynomial(std::move(den)));
        } else if constexpr (std::is_same_v<T, GeneralHistorical>) {
          const std::size_t horizon = v.a.size();
          std::vector<double> num(horizon);
          std::vector<double> den(horizon + 1, 0.0);
          den[horizon] = 1.0;
          for (std::size_t i = 1; i <= horizon; ++i) {
            num[horizon - i] = -v.eta * v.a[i - 1];
            den[horizon - i] = -v.b[i - 1];
          }
          return RationalTF(Polynomial(std::move(num)), Polynomial(std::move(den)));
        } else if constexpr (std::is_same_v<T, PastExtraGradient>) {
          return transfer_of(past_extra_gradient_realization(v.eta));
        } else {
          return transfer_of(reflected_gradient_realization(v.eta));
        }
      },
      m);
}

/// K / (1 - h K) after the linear shift by h.
inline RationalTF complementary_sensitivity(const RationalTF& k, double h) {
  const Polynomial den = k.den() - k.num() * h;
  if (den.is_zero()) throw Undefined("1 - hK(z) vanishes identically");
  return RationalTF(k.num(), den);
}

/// K(rho z) for rho in (0, 1].
inline RationalTF rho_scale(const RationalTF& k, double rho) {
  detail::require(rho > 0.0 && rho <= 1.0, "rho must lie in (0, 1]");
  // Normalize against rho^deg(den) first so small rho cannot underflow the
  // leading coefficient below the trim threshold.
  const int n = k.den().degree();
  auto scaled = [rho, n](const Polynomial& p) {
    std::vector<double> c = p.coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::pow(rho, static_cast<double>(static_cast<int>(i) - n));
    return Polynomial(std::move(c));
  };
  return RationalTF(scaled(k.num()), scaled(k.den()));
}

/// True iff a.num * b.den and b.num * a.den agree coefficient-wise.
inline bool tf_equal(const RationalTF& a, const RationalTF& b, double tol = kTransferEqualityTolerance) {
  const Polynomial lhs = a.num() * b.den();
  const Polynomial rhs = b.num() * a.den();
  const double scale = std::max({1.0, lhs.max_abs_coeff(), rhs.max_abs_coeff()});
  const std::size_t n = std::max(lhs.coeffs().size(), rhs.coeffs().size());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(lhs[i] - rhs[i]) > tol * scale) return false;
  }
  return true;
}

}  // namespace histcert
