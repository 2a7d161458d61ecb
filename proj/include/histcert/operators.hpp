#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "histcert/error.hpp"
#include "histcert/linalg.hpp"

namespace histcert {

/// Operator class [mu, L] with relative noise level delta.
struct SectorParams {
  double mu = 0.0;
  double L = 0.0;
  double delta = 0.0;

  double kappa_inv() const { return mu / L; }
  double shift() const { return 0.5 * (L + mu); }
  /// Gain of the shifted nonlinearity F - shift(), inflated by the noise.
  double shifted_gain() const { return 0.5 * (L - mu) + L * delta; }
};

inline void validate(const SectorParams& s) {
  detail::require(std::isfinite(s.mu) && std::isfinite(s.L) && std::isfinite(s.delta), "sector parameters must be finite");
  detail::require(s.mu > 0.0 && s.mu < s.L, "sector needs 0 < mu < L");
  detail::require(s.delta >= 0.0, "noise level delta must be nonnegative");
}

/// F(x) = diag(spectrum) (x - x*).
struct DiagonalQuadratic {
  std::vector<double> spectrum;
  Eigen::VectorXd fixed_point;  // empty means the origin
};

/// F(x) = 2x + sin x, the gradient of x^2 - cos x. Lies in the sector [1, 3].
struct ScalarNonconvex {};

/// Min-max gradient (A y, -A^T x) of f(x, y) = x^T A y.
struct Bilinear {
  Eigen::MatrixXd a;
};

/// F(z) = M (z - z*) with M = [[P, B], [-B^T, Q]], the min-max gradient of
/// f(x, y) = 1/2 x^T P x + x^T B y - 1/2 y^T Q y shifted to z*.
struct MinmaxQuadratic {
  Eigen::MatrixXd m;
  Eigen::VectorXd fixed_point;  // empty means the origin
  int x_dimension = 0;
};

using OperatorSpec = std::variant<DiagonalQuadratic, ScalarNonconvex, Bilinear, MinmaxQuadratic>;

inline std::string operator_kind_name(const OperatorSpec& op) {
  switch (op.index()) {
    case 0: return "diagonal-quadratic";
    case 1: return "scalar-noncvx";
    case 2: return "bilinear";
    default: return "minmax-quadratic";
  }
}

inline int dimension(const OperatorSpec& op) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiagonalQuadratic>) return static_cast<int>(v.spectrum.size());
        else if constexpr (std::is_same_v<T, ScalarNonconvex>) return 1;
        else if constexpr (std::is_same_v<T, Bilinear>) return static_cast<int>(2 * v.a.rows());
        else return static_cast<int>(v.m.rows());
      },
      op);
}

inline Eigen::VectorXd fixed_point(const OperatorSpec& op) {
  const int n = dimension(op);
  if (const auto* d = std::get_if<DiagonalQuadratic>(&op); d && d->fixed_point.size() > 0) return d->fixed_point;
  if (const auto* m = std::get_if<MinmaxQuadratic>(&op); m && m->fixed_point.size() > 0) return m->fixed_point;
  return Eigen::VectorXd::Zero(n);
}

/// Jacobian of an affine operator, or nullopt for the nonlinear one.
inline std::optional<Eigen::MatrixXd> linear_map(const OperatorSpec& op) {
  if (const auto* d = std::get_if<DiagonalQuadratic>(&op)) {
    return Eigen::MatrixXd(Eigen::Map<const Eigen::VectorXd>(d->spectrum.data(), static_cast<Eigen::Index>(d->spectrum.size())).asDiagonal());
  }
  if (const auto* b = std::get_if<Bilinear>(&op)) {
    const Eigen::Index n = b->a.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    m.topRightCorner(n, n) = b->a;
    m.bottomLeftCorner(n, n) = -b->a.transpose();
    return m;
  }
  if (const auto* q = std::get_if<MinmaxQuadratic>(&op)) return q->m;
  return std::nullopt;
}

/// Throws InvalidInput when the operator violates its structural invariants.
inline void validate(const OperatorSpec& op) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, DiagonalQuadratic>) {
          detail::require(!v.spectrum.empty(), "diagonal-quadratic needs a nonempty spectrum");
          for (double s : v.spectrum) detail::require(std::isfinite(s) && s > 0.0, "spectrum entries must be positive");
          detail::require(v.fixed_point.size() == 0 || v.fixed_point.size() == static_cast<Eigen::Index>(v.spectrum.size()),
                          "fixed_point dimension must match the spectrum");
        } else if constexpr (std::is_same_v<T, Bilinear>) {
          detail::require(v.a.rows() > 0 && v.a.rows() == v.a.cols(), "bilinear matrix must be square and nonempty");
          detail::require(v.a.allFinite(), "bilinear matrix entries must be finite");
          Eigen::JacobiSVD<Eigen::MatrixXd> svd(v.a);
          const auto& sv = svd.singularValues();
          detail::require(sv(sv.size() - 1) > 1e-12 * std::max(1.0, sv(0)), "bilinear matrix must be non-singular");
        } else if constexpr (std::is_same_v<T, MinmaxQuadratic>) {
          detail::require(v.m.rows() > 0 && v.m.rows() == v.m.cols() && v.m.allFinite(), "min-max map must be square and finite");
          detail::require(v.fixed_point.size() == 0 || v.fixed_point.size() == v.m.rows(),
                          "fixed_point dimension must match the operator");
        }
      },
      op);
}

/// F(x). For bilinear operators x stacks (x, y).
inline Eigen::VectorXd eval_operator(const OperatorSpec& op, const Eigen::VectorXd& x) {
  detail::require(x.size() == dimension(op), "point has dimension " + std::to_string(x.size()) + ", operator expects " +
                                                 std::to_string(dimension(op)));
  if (std::holds_alternative<ScalarNonconvex>(op)) {
    Eigen::VectorXd out(1);
    out(0) = 2.0 * x(0) + std::sin(x(0));
    return out;
  }
  if (const auto* d = std::get_if<DiagonalQuadratic>(&op)) {
    Eigen::VectorXd dx = x;
    if (d->fixed_point.size() > 0) dx -= d->fixed_point;
    for (Eigen::Index i = 0; i < dx.size(); ++i) dx(i) *= d->spectrum[static_cast<std::size_t>(i)];
    return dx;
  }
  if (const auto* b = std::get_if<Bilinear>(&op)) {
    const Eigen::Index n = b->a.rows();
    Eigen::VectorXd out(2 * n);
    out.head(n) = b->a * x.tail(n);
    out.tail(n) = -b->a.transpose() * x.head(n);
    return out;
  }
  const auto& q = std::get<MinmaxQuadratic>(op);
  return q.fixed_point.size() > 0 ? Eigen::VectorXd(q.m * (x - q.fixed_point)) : Eigen::VectorXd(q.m * x);
}

// -- Empirical sector checks ------------------------------------------------

inline constexpr double kSectorSlackTolerance = 1e-9;

/// Slack below zero is a violation only beyond this, scaled by the pair size.
inline double sector_tolerance(double dx2, double df2) { return kSectorSlackTolerance * (1.0 + dx2 + df2); }

struct SectorReport {
  bool monotone_ok = true;
  bool cocoercive_ok = true;
  bool qsb_ok = true;
  bool shifted_gain_ok = true;
  // Smallest slack seen for each inequality; nonnegative means it held exactly.
  double worst_monotone = std::numeric_limits<double>::infinity();
  double worst_cocoercive = std::numeric_limits<double>::infinity();
  double worst_qsb = std::numeric_limits<double>::infinity();
  double worst_shifted_gain = std::numeric_limits<double>::infinity();
  std::size_t pairs = 0;

  bool all_ok() const { return monotone_ok && cocoercive_ok && qsb_ok && shifted_gain_ok; }
};

using PointPair = std::pair<Eigen::VectorXd, Eigen::VectorXd>;

/// `count` pairs drawn uniformly from [-half_width, half_width]^d.
inline std::vector<PointPair> sample_pairs(int d, std::size_t count, std::uint64_t seed, double half_width = 10.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-half_width, half_width);
  std::vector<PointPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd a(d), b(d);
    for (int j = 0; j < d; ++j) a(j) = u(gen);
    for (int j = 0; j < d; ++j) b(j) = u(gen);
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

/// Checks monotonicity, co-coercivity and the quadratic sector bound on every
/// pair, plus the shifted-gain bound |F(x) - h(x - x*)| <= (L - mu)/2 |x - x*|
/// taking x' = x* for each first point.
inline SectorReport check_sector(const OperatorSpec& op, const SectorParams& sector, const std::vector<PointPair>& samples) {
  detail::require(!samples.empty(), "check_sector needs at least one sample pair");
  const double mu = sector.mu;
  const double L = sector.L;
  const double h = 0.5 * (L + mu);
  const Eigen::VectorXd xs = fixed_point(op);
  SectorReport r;
  for (const auto& [x, xp] : samples) {
    const Eigen::VectorXd dx = x - xp;
    const Eigen::VectorXd df = eval_operator(op, x) - eval_operator(op, xp);
    const double dx2 = dx.squaredNorm();
    const double df2 = df.squaredNorm();
    const double inner = df.dot(dx);
    const double tol = sector_tolerance(dx2, df2);

    const double mono = inner - mu * dx2;
    const double coco = inner - df2 / L;
    const double qsb = -2.0 * mu * L * dx2 + 2.0 * (L + mu) * inner - 2.0 * df2;
    r.worst_monotone = std::min(r.worst_monotone, mono);
    r.worst_cocoercive = std::min(r.worst_cocoercive, coco);
    r.worst_qsb = std::min(r.worst_qsb, qsb);
    if (mono < -tol) r.monotone_ok = false;
    if (coco < -tol) r.cocoercive_ok = false;
    if (qsb < -tol * 2.0 * (L + mu)) r.qsb_ok = false;

    const Eigen::VectorXd ex = x - xs;
    const Eigen::VectorXd fx = eval_operator(op, x);
    const double lhs = (fx - h * ex).norm();
    const double rhs = 0.5 * (L - mu) * ex.norm();
    const double gain_slack = rhs - lhs;
    r.worst_shifted_gain = std::min(r.worst_shifted_gain, gain_slack);
    if (gain_slack < -kSectorSlackTolerance * (1.0 + ex.norm() + fx.norm())) r.shifted_gain_ok = false;
    ++r.pairs;
  }
  return r;
}

// -- Min-max quadratics -----------------------------------------------------

/// Blocks of f(x, y) = 1/2 x^T P x + x^T B y - 1/2 y^T Q y, optionally
/// recentred at (x*, y*).
struct MinmaxBlocks {
  Eigen::MatrixXd p;
  Eigen::MatrixXd q;
  Eigen::MatrixXd b;
  Eigen::VectorXd fixed_point;       // empty means the origin
  std::optional<double> declared_mu;  // pick the best-conditioned sector when absent
};

/// Operator plus the sector it provably satisfies.
struct MinmaxOperator {
  OperatorSpec op;
  SectorParams sector;
  double strong_convexity = 0.0;  ///< min(lambda_min(P), lambda_min(Q))
  double cocoercivity = 0.0;      ///< smallest L' with <Mv, v> >= |Mv|^2 / L'
};

/// Smallest L' with L' sym(M) >= M^T M, for M with positive definite
/// symmetric part.
inline double cocoercivity_constant(const Eigen::MatrixXd& m) {
  const Eigen::MatrixXd s = symmetric_part(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  detail::require(es.eigenvalues()(0) > 0.0, "co-coercivity needs a positive definite symmetric part");
  const Eigen::MatrixXd s_inv_half = es.operatorInverseSqrt();
  return max_symmetric_eigenvalue(s_inv_half * m.transpose() * m * s_inv_half);
}

namespace detail {

/// lambda_min((L + mu) S - mu L I - M^T M); nonnegative iff M lies in [mu, L].
inline double qsb_slack(const Eigen::MatrixXd& m, double mu, double L) {
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXd form =
      (L + mu) * symmetric_part(m) - mu * L * Eigen::MatrixXd::Identity(n, n) - m.transpose() * m;
  return min_symmetric_eigenvalue(symmetric_part(form));
}

/// Smallest L for which qsb_slack(m, mu, L) >= 0, or nullopt if none exists.
inline std::optional<double> minimal_sector_L(const Eigen::MatrixXd& m, double mu) {
  const double upper_start = std::max(2.0 * mu, 2.0 * spectral_norm(m) * spectral_norm(m) / mu + mu);
  // The slack is concave in L, so if a huge L already fails nothing works.
  double hi = upper_start;
  int expansions = 0;
  while (qsb_slack(m, mu, hi) < 0.0) {
    hi *= 4.0;
    if (++expansions > 40) return std::nullopt;
  }
  double lo = mu;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (qsb_slack(m, mu, mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace detail

/// Builds the min-max gradient operator of a quadratic and the sector it
/// lies in.
///
/// A declared mu is honoured when the quadratic sector bound can be met for
/// some L; without one, mu is chosen to minimize L / mu.
inline MinmaxOperator build_minmax_operator(const MinmaxBlocks& blocks) {
  const Eigen::Index nx = blocks.p.rows();
  const Eigen::Index ny = blocks.q.rows();
  detail::require(nx > 0 && ny > 0 && blocks.p.cols() == nx && blocks.q.cols() == ny, "P and Q must be square and nonempty");
  detail::require(blocks.b.rows() == nx && blocks.b.cols() == ny, "B must be |x| by |y|");
  detail::require(blocks.p.allFinite() && blocks.q.allFinite() && blocks.b.allFinite(), "blocks must be finite");
  detail::require((blocks.p - blocks.p.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, blocks.p.cwiseAbs().maxCoeff()),
                  "P must be symmetric");
  detail::require((blocks.q - blocks.q.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, blocks.q.cwiseAbs().maxCoeff()),
                  "Q must be symmetric");

  Eigen::MatrixXd m(nx + ny, nx + ny);
  m.topLeftCorner(nx, nx) = blocks.p;
  m.topRightCorner(nx, ny) = blocks.b;
  m.bottomLeftCorner(ny, nx) = -blocks.b.transpose();
  m.bottomRightCorner(ny, ny) = blocks.q;

  const double modulus = std::min(min_symmetric_eigenvalue(blocks.p), min_symmetric_eigenvalue(blocks.q));
  detail::require(modulus > 0.0, "f is not strongly convex-concave: smallest block eigenvalue is " + std::to_string(modulus));

  double mu = 0.0;
  double L = 0.0;
  if (blocks.declared_mu) {
    mu = *blocks.declared_mu;
    detail::require(std::isfinite(mu) && mu > 0.0, "declared mu must be positive");
    detail::require(mu <= modulus * (1.0 + 1e-12), "declared mu = " + std::to_string(mu) +
                                                       " exceeds the strong convexity modulus " + std::to_string(modulus));
    const auto l = detail::minimal_sector_L(m, mu);
    detail::require(l.has_value(), "no L places the operator in the sector [" + std::to_string(mu) +
                                       ", L]: the skew coupling is too strong for this mu");
    L = *l;
  } else {
    auto kappa = [&m](double mu_try) {
      const auto l = detail::minimal_sector_L(m, mu_try);
      return l ? *l / mu_try : std::numeric_limits<double>::infinity();
    };
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0;
    double b = modulus;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = kappa(c);
    double fd = kappa(d);
    while (b - a > 1e-10 * modulus) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - inv_phi * (b - a);
        fc = kappa(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + inv_phi * (b - a);
        fd = kappa(d);
      }
    }
    mu = fc <= fd ? c : d;
    const auto l = detail::minimal_sector_L(m, mu);
    detail::require(l.has_value(), "no quadratic sector contains this min-max operator");
    L = *l;
  }
  // Nudge L up so rounding in the sampled checks cannot flip the verdict.
  L *= 1.0 + 1e-12;
  if (!(L > mu)) L = mu * (1.0 + 1e-9);

  MinmaxQuadratic q{m, blocks.fixed_point, static_cast<int>(nx)};
  detail::require(q.fixed_point.size() == 0 || q.fixed_point.size() == nx + ny, "fixed_point must have |x| + |y| entries");
  MinmaxOperator out{q, SectorParams{mu, L, 0.0}, modulus, cocoercivity_constant(m)};
  return out;
}

}  // namespace histcert
