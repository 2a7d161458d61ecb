#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "histcert/error.hpp"

namespace histcert {

using Complex = std::complex<double>;

/// Coefficients below this magnitude are dropped from the top of a polynomial
/// before its degree is determined.
inline constexpr double kTrimThreshold = 1e-14;

/// Real polynomial with coefficients stored in ascending powers.
///
/// The representation is always trimmed: the leading coefficient is nonzero
/// unless the polynomial is identically zero, in which case `coeffs()` holds a
/// single 0.
class Polynomial {
 public:
  Polynomial() : coeffs_{0.0} {}
  Polynomial(std::initializer_list<double> c) : Polynomial(std::vector<double>(c)) {}
  explicit Polynomial(std::vector<double> c) : coeffs_(std::move(c)) { trim(); }

  static Polynomial constant(double c) { return Polynomial({c}); }
  static Polynomial monomial(std::size_t power, double c = 1.0) {
    std::vector<double> v(power + 1, 0.0);
    v[power] = c;
    return Polynomial(std::move(v));
  }

  /// Monic polynomial with the given roots. Complex roots must come in
  /// conjugate pairs; the imaginary residue of the product is discarded.
  static Polynomial from_roots(std::span<const Complex> roots) {
    std::vector<Complex> c{Complex(1.0)};
    for (const Complex& r : roots) {
      std::vector<Complex> next(c.size() + 1, Complex(0.0));
      for (std::size_t i = 0; i < c.size(); ++i) {
        next[i + 1] += c[i];
        next[i] -= r * c[i];
      }
      c = std::move(next);
    }
    std::vector<double> real(c.size());
    std::transform(c.begin(), c.end(), real.begin(), [](Complex v) { return v.real(); });
    return Polynomial(std::move(real));
  }

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  double leading() const { return coeffs_.back(); }
  double operator[](std::size_t i) const { return i < coeffs_.size() ? coeffs_[i] : 0.0; }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  double norm() const {
    double s = 0.0;
    for (double c : coeffs_) s += c * c;
    return std::sqrt(s);
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (double c : coeffs_) m = std::max(m, std::abs(c));
    return m;
  }

  template <typename T>
  T evaluate(T z) const {
    T acc = T(coeffs_.back());
    for (std::size_t i = coeffs_.size() - 1; i-- > 0;) acc = acc * z + T(coeffs_[i]);
    return acc;
  }
  double operator()(double x) const { return evaluate(x); }
  Complex operator()(Complex z) const { return evaluate(z); }

  Polynomial derivative() const {
    if (coeffs_.size() == 1) return Polynomial();
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = coeffs_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  /// p(r z): coefficient of z^i is multiplied by r^i.
  Polynomial scaled_argument(double r) const {
    std::vector<double> c = coeffs_;
    double power = 1.0;
    for (double& v : c) {
      v *= power;
      power *= r;
    }
    return Polynomial(std::move(c));
  }

  /// z^n p(1/z) for n = degree().
  Polynomial reversed() const {
    std::vector<double> c(coeffs_.rbegin(), coeffs_.rend());
    return Polynomial(std::move(c));
  }

  Polynomial monic() const {
    detail::require(!is_zero(), "cannot normalize the zero polynomial");
    return *this * (1.0 / leading());
  }

  /// Divides by a (monic) divisor and returns the quotient; the remainder is dropped.
  Polynomial divide_out(const Polynomial& divisor) const {
    detail::require(!divisor.is_zero(), "polynomial division by zero");
    const int n = degree();
    const int m = divisor.degree();
    if (n < m) return Polynomial();
    std::vector<double> rem = coeffs_;
    std::vector<double> q(static_cast<std::size_t>(n - m + 1), 0.0);
    for (int k = n - m; k >= 0; --k) {
      const double coef = rem[static_cast<std::size_t>(k + m)] / divisor.leading();
      q[static_cast<std::size_t>(k)] = coef;
      for (int j = 0; j <= m; ++j) rem[static_cast<std::size_t>(k + j)] -= coef * divisor[static_cast<std::size_t>(j)];
    }
    return Polynomial(std::move(q));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.coeffs_.size(), b.coeffs_.size()), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = a[i] + b[i];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b * -1.0; }
  friend Polynomial operator*(const Polynomial& a, double s) {
    std::vector<double> c = a.coeffs_;
    for (double& v : c) v *= s;
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(double s, const Polynomial& a) { return a * s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
      for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(c));
  }

 private:
  void trim() {
    while (coeffs_.size() > 1 && std::abs(coeffs_.back()) <= kTrimThreshold) coeffs_.pop_back();
    if (coeffs_.empty()) coeffs_.push_back(0.0);
    if (coeffs_.size() == 1 && std::abs(coeffs_[0]) <= kTrimThreshold) coeffs_[0] = 0.0;
  }

  std::vector<double> coeffs_;
};

}  // namespace histcert
