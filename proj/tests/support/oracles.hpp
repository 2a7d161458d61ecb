#pragma once

// Reference computations for the tests. Each one is deliberately written
// without the library's own machinery so that agreement means something.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;

/// sum_i c_i z^i, evaluated term by term with std::pow.
inline cplx poly_eval(const std::vector<double>& c, cplx z) {
  cplx acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] * std::pow(z, static_cast<double>(i));
  return acc;
}

/// Durand-Kerner simultaneous iteration for the roots of sum_i c_i z^i.
inline std::vector<cplx> durand_kerner(const std::vector<double>& coeffs, int iterations = 2000) {
  std::vector<double> c = coeffs;
  while (c.size() > 1 && c.back() == 0.0) c.pop_back();
  const std::size_t n = c.size() - 1;
  for (double& v : c) v /= coeffs[n];
  std::vector<cplx> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = std::pow(cplx(0.4, 0.9), static_cast<double>(i));
  for (int it = 0; it < iterations; ++it) {
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cplx denom = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) denom *= (z[i] - z[j]);
      if (std::abs(denom) == 0.0) denom = 1e-300;
      const cplx delta = poly_eval(c, z[i]) / denom;
      z[i] -= delta;
      change = std::max(change, std::abs(delta));
    }
    if (change < 1e-15) break;
  }
  return z;
}

inline double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const cplx& x : v) m = std::max(m, std::abs(x));
  return m;
}

/// max over a dense uniform frequency grid of |num(e^{jw}) / den(e^{jw})|.
inline double dense_peak(const std::vector<double>& num, const std::vector<double>& den, int n = 200001) {
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = std::numbers::pi * i / (n - 1);
    const cplx z = std::polar(1.0, w);
    peak = std::max(peak, std::abs(poly_eval(num, z) / poly_eval(den, z)));
  }
  return peak;
}

/// Iteration matrix of simultaneous or alternating OGD on f = x^T A y, over
/// the state (x_k, y_k, x_{k-1}, y_{k-1}).
inline Eigen::MatrixXd ogd_game_matrix(const Eigen::MatrixXd& a, double eta, bool alternating) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4 * n, 4 * n);
  // x_{k+1} = x_k - 2 eta A y_k + eta A y_{k-1}
  m.block(0, 0, n, n) = I;
  m.block(0, n, n, n) = -2.0 * eta * a;
  m.block(0, 3 * n, n, n) = eta * a;
  if (!alternating) {
    // y_{k+1} = y_k + 2 eta A^T x_k - eta A^T x_{k-1}
    m.block(n, 0, n, n) = 2.0 * eta * a.transpose();
    m.block(n, n, n, n) = I;
    m.block(n, 2 * n, n, n) = -eta * a.transpose();
  } else {
    // y_{k+1} = y_k + 2 eta A^T x_{k+1} - eta A^T x_k, with x_{k+1} substituted.
    const Eigen::MatrixXd xrow = m.block(0, 0, n, 4 * n);
    m.block(n, 0, n, 4 * n) = 2.0 * eta * a.transpose() * xrow;
    m.block(n, n, n, n) += I;
    m.block(n, 0, n, n) -= eta * a.transpose();
  }
  m.block(2 * n, 0, n, n) = I;
  m.block(3 * n, n, n, n) = I;
  return m;
}

inline double spectral_radius(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Random coefficients in [-1, 1] with a leading coefficient bounded away
/// from zero.
inline std::vector<double> random_poly(std::mt19937_64& gen, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(degree + 1));
  for (double& v : c) v = u(gen);
  c.back() = (c.back() < 0 ? -1.0 : 1.0) * (0.25 + std::abs(c.back()));
  return c;
}

}  // namespace oracle
