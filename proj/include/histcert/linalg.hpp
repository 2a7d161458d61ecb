#pragma once

#include <vector>

#include <Eigen/Dense>

#include "histcert/error.hpp"
#include "histcert/polynomial.hpp"

namespace histcert {

/// Faddeev-LeVerrier expansion of a square matrix A.
///
/// det(zI - A) = z^n + c_{n-1} z^{n-1} + ... + c_0 and
/// adj(zI - A) = sum_{k=1..n} M_k z^{n-k}.
struct ResolventExpansion {
  Polynomial characteristic;           // det(zI - A), monic
  std::vector<Eigen::MatrixXd> adjugate_terms;  // M_1 .. M_n
};

inline ResolventExpansion faddeev_leverrier(const Eigen::MatrixXd& a) {
  detail::require(a.rows() == a.cols() && a.rows() > 0, "Faddeev-LeVerrier needs a nonempty square matrix");
  const Eigen::Index n = a.rows();
  const auto id = Eigen::MatrixXd::Identity(n, n);
  std::vector<double> c(static_cast<std::size_t>(n + 1), 0.0);
  c[static_cast<std::size_t>(n)] = 1.0;
  std::vector<Eigen::MatrixXd> terms;
  Eigen::MatrixXd m = id;
  for (Eigen::Index k = 1; k <= n; ++k) {
    if (k > 1) m = a * terms.back() + c[static_cast<std::size_t>(n - k + 1)] * id;
    terms.push_back(m);
    c[static_cast<std::size_t>(n - k)] = -(a * m).trace() / static_cast<double>(k);
  }
  return {Polynomial(std::move(c)), std::move(terms)};
}

/// det(zI - A).
inline Polynomial characteristic_polynomial(const Eigen::MatrixXd& a) { return faddeev_leverrier(a).characteristic; }

inline double spectral_norm(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

inline double min_symmetric_eigenvalue(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline double max_symmetric_eigenvalue(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

inline Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace histcert
