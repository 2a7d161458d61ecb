#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "histcert/error.hpp"
#include "histcert/polynomial.hpp"

namespace histcert {

/// Roots whose magnitude lies within this band of the test radius are treated
/// as marginal, and marginal roots never count as stable.
inline constexpr double kMarginalBand = 1e-9;

/// Width of the band around the test radius inside which the coefficient test
/// and the root-magnitude test are allowed to disagree.
inline constexpr double kSchurAgreementBand = 1e-6;

namespace detail {

inline void polish_root(const Polynomial& p, const Polynomial& dp, Complex& root) {
  Complex best = root;
  double best_res = std::abs(p(root));
  Complex z = root;
  for (int iter = 0; iter < 4 && best_res > 0.0; ++iter) {
    const Complex d = dp(z);
    if (std::abs(d) == 0.0) break;
    z -= p(z) / d;
    const double res = std::abs(p(z));
    if (!(res < best_res)) break;
    best = z;
    best_res = res;
  }
  root = best;
}

}  // namespace detail

/// All `degree()` roots of `p`, with multiplicity.
///
/// Exact zero roots are factored out first; the rest come from the eigenvalues
/// of the companion matrix followed by a guarded Newton polish.
inline std::vector<Complex> roots(const Polynomial& p) {
  std::vector<Complex> out;
  if (p.degree() < 1) return out;

  const auto& c = p.coeffs();
  std::size_t shift = 0;
  while (shift < c.size() && c[shift] == 0.0) ++shift;
  out.assign(shift, Complex(0.0));
  Polynomial reduced(std::vector<double>(c.begin() + static_cast<std::ptrdiff_t>(shift), c.end()));
  const int n = reduced.degree();
  if (n == 0) return out;
  if (n == 1) {
    out.emplace_back(-reduced[0] / reduced[1]);
    return out;
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -reduced[static_cast<std::size_t>(i)] / reduced.leading();
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw InternalInconsistency("companion eigenvalue solver failed");

  const Polynomial dp = reduced.derivative();
  for (int i = 0; i < n; ++i) {
    Complex r = solver.eigenvalues()[i];
    detail::polish_root(reduced, dp, r);
    out.push_back(r);
  }
  return out;
}

/// Largest root magnitude; zero for constants.
inline double spectral_radius_poly(const Polynomial& p) {
  double r = 0.0;
  for (const Complex& z : roots(p)) r = std::max(r, std::abs(z));
  return r;
}

/// Schur-Cohn coefficient recursion: true iff every root lies strictly inside
/// the unit circle. Each step replaces p by (a_n p - a_0 p*) / z, which keeps
/// the number of roots inside the circle whenever |a_0| < |a_n|.
inline bool schur_cohn_test(const Polynomial& p) {
  Polynomial q = p;
  while (q.degree() >= 1) {
    const double a0 = q[0];
    const double an = q.leading();
    if (!(std::abs(a0) < std::abs(an))) return false;
    const int n = q.degree();
    std::vector<double> next(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i <= n; ++i) {
      next[static_cast<std::size_t>(i - 1)] =
          an * q[static_cast<std::size_t>(i)] - a0 * q[static_cast<std::size_t>(n - i)];
    }
    // Rescale so repeated squaring of the coefficients cannot underflow.
    double scale = 0.0;
    for (double v : next) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    for (double& v : next) v /= scale;
    Polynomial reduced(std::move(next));
    if (reduced.degree() != n - 1) return false;
    q = std::move(reduced);
  }
  return true;
}

/// True iff every root of `p` has magnitude below 1 - margin. Marginal roots
/// (within kMarginalBand of that radius) are classified as not stable.
///
/// The verdict is computed twice, from root magnitudes and from the
/// Schur-Cohn recursion on p(r z); a disagreement away from the boundary band
/// raises InternalInconsistency. Constants have no roots and are stable.
inline bool is_schur(const Polynomial& p, double margin = 0.0) {
  detail::require(margin >= 0.0, "stability margin must be nonnegative");
  detail::require(!p.is_zero(), "stability of the zero polynomial is undefined");
  if (p.degree() < 1) return true;
  const double radius = 1.0 - std::max(margin, kMarginalBand);
  if (radius <= 0.0) return false;

  const double rmax = spectral_radius_poly(p);
  const bool by_roots = rmax < radius;
  const bool by_coefficients = schur_cohn_test(p.scaled_argument(radius));
  if (by_roots == by_coefficients) return by_roots;
  if (std::abs(rmax - radius) <= kSchurAgreementBand * std::max(1.0, rmax)) return false;
  throw InternalInconsistency("Schur testers disagree: max |root| = " + std::to_string(rmax) +
                              ", coefficient test says " + (by_coefficients ? "stable" : "unstable"));
}

}  // namespace histcert
