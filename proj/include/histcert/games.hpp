#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "histcert/error.hpp"
#include "histcert/linalg.hpp"
#include "histcert/polynomial.hpp"
#include "histcert/stability.hpp"

namespace histcert {

/// f(x, y) = x^T A y with A square and non-singular.
struct BilinearGame {
  Eigen::MatrixXd a;
  double gamma = 0.0;             ///< spectral norm of A
  std::vector<double> eigs_aat;   ///< eigenvalues of A A^T, ascending
};

/// Largest matrix size whose A A^T spectrum goes through the polynomial root
/// finder; bigger games use a symmetric eigensolver.
inline constexpr int kCharPolySpectrumLimit = 6;

inline BilinearGame make_bilinear_game(const Eigen::MatrixXd& a) {
  detail::require(a.rows() > 0 && a.rows() == a.cols(), "bilinear game matrix must be square and nonempty");
  detail::require(a.allFinite(), "bilinear game matrix must be finite");
  BilinearGame g;
  g.a = a;
  const Eigen::MatrixXd aat = a * a.transpose();
  if (a.rows() <= kCharPolySpectrumLimit) {
    for (const Complex& r : roots(characteristic_polynomial(aat))) g.eigs_aat.push_back(r.real());
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(aat, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) g.eigs_aat.push_back(es.eigenvalues()(i));
  }
  std::sort(g.eigs_aat.begin(), g.eigs_aat.end());
  const double top = g.eigs_aat.back();
  detail::require(g.eigs_aat.front() > 1e-12 * std::max(1.0, top), "bilinear game matrix must be non-singular");
  g.gamma = std::sqrt(top);
  return g;
}

enum class GameMode { alternating, simultaneous };

inline std::string_view mode_name(GameMode m) { return m == GameMode::alternating ? "alt" : "sim"; }

/// z (z - 1)^2 + q (2z - 1)^2 with q = eta^2 lambda.
inline Polynomial alt_char_poly(double lambda, double eta) {
  detail::require(lambda > 0.0 && eta >= 0.0, "alt_char_poly needs lambda > 0 and eta >= 0");
  const double q = eta * eta * lambda;
  return Polynomial({q, 1.0 - 4.0 * q, 4.0 * q - 2.0, 1.0});
}

/// z^2 (z - 1)^2 + q (2z - 1)^2 with q = eta^2 lambda.
inline Polynomial sim_char_poly(double lambda, double eta) {
  detail::require(lambda > 0.0 && eta >= 0.0, "sim_char_poly needs lambda > 0 and eta >= 0");
  const double q = eta * eta * lambda;
  return Polynomial({q, -4.0 * q, 1.0 + 4.0 * q, -2.0, 1.0});
}

inline Polynomial char_poly(GameMode mode, double lambda, double eta) {
  return mode == GameMode::alternating ? alt_char_poly(lambda, eta) : sim_char_poly(lambda, eta);
}

/// Spectral radius of the per-eigenvalue factor at s = eta sqrt(lambda).
inline double spectrum_radius_at(GameMode mode, double s) {
  detail::require(s > 0.0, "spectrum points need s > 0");
  return spectral_radius_poly(char_poly(mode, 1.0, s));
}

inline std::vector<std::pair<double, double>> spectrum_curve(GameMode mode, const std::vector<double>& points) {
  std::vector<std::pair<double, double>> out;
  out.reserve(points.size());
  for (double s : points) out.emplace_back(s, spectrum_radius_at(mode, s));
  return out;
}

/// Stability boundary in eta from the theorem: 2/(3 gamma) or 1/(sqrt 3 gamma).
inline double bilinear_threshold(GameMode mode, const BilinearGame& g) {
  return (mode == GameMode::alternating ? 2.0 / 3.0 : 1.0 / std::sqrt(3.0)) / g.gamma;
}

/// Largest spectral radius over every eigenvalue factor of the game.
inline double game_spectral_radius(GameMode mode, const BilinearGame& g, double eta) {
  double r = 0.0;
  for (double lambda : g.eigs_aat) r = std::max(r, spectral_radius_poly(char_poly(mode, lambda, eta)));
  return r;
}

/// Stability boundary in eta located numerically: the first grid point where
/// some factor reaches the unit circle, refined by bisection.
inline double empirical_threshold(GameMode mode, const BilinearGame& g, double tol = 1e-12) {
  const double upper = 2.0 / g.gamma;
  const int grid = 400;
  auto stable = [&](double eta) { return game_spectral_radius(mode, g, eta) < 1.0; };
  double prev = upper / grid;
  detail::require(stable(prev), "game is unstable at the smallest probed step size");
  for (int i = 2; i <= grid; ++i) {
    const double eta = upper * i / grid;
    if (!stable(eta)) {
      double lo = prev;
      double hi = eta;
      while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (stable(mid) ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
    prev = eta;
  }
  throw InternalInconsistency("no stability boundary found below 2/gamma");
}

}  // namespace histcert
