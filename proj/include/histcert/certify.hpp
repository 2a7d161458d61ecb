#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "histcert/error.hpp"
#include "histcert/gain.hpp"
#include "histcert/method.hpp"
#include "histcert/operators.hpp"
#include "histcert/stability.hpp"
#include "histcert/transfer.hpp"

namespace histcert {

struct CertificationQuery {
  MethodSpec method;
  SectorParams sector;
  double rho = 0.0;
  bool allow_non_strictly_proper = false;
};

struct CertificationResult {
  bool proper_ok = false;
  bool stable_ok = false;
  std::optional<double> gain;          ///< unset when the scaled loop is unstable
  std::optional<double> argmax_omega;  ///< frequency of the peak gain
  double threshold = 0.0;
  std::optional<double> margin;        ///< threshold - gain
  bool certified = false;
  std::string diagnostics;
};

/// Small-gain threshold 1 / ((L - mu)/2 + L delta).
inline double gain_threshold(const SectorParams& s) { return 1.0 / s.shifted_gain(); }

/// K'(rho z) for the method, with K' = K / (1 - hK) and h = (L + mu)/2.
inline RationalTF scaled_complementary_sensitivity(const MethodSpec& m, const SectorParams& s, double rho) {
  return rho_scale(complementary_sensitivity(build_transfer(m), s.shift()), rho);
}

/// Small-gain certificate that the method converges linearly with rate rho on
/// every operator in the sector.
///
/// An unstable scaled loop is reported through stable_ok, not thrown.
inline CertificationResult certify(const CertificationQuery& q) {
  validate(q.method);
  validate(q.sector);
  detail::require(std::isfinite(q.rho) && q.rho > 0.0 && q.rho < 1.0, "rho must lie in (0, 1)");

  CertificationResult r;
  r.threshold = gain_threshold(q.sector);
  const RationalTF k = build_transfer(q.method);
  r.proper_ok = k.strictly_proper() || (q.allow_non_strictly_proper && k.proper());
  if (!r.proper_ok) {
    r.diagnostics = k.proper() ? "controller is not strictly proper; pass allow_non_strictly_proper to admit it"
                               : "controller is improper";
    return r;
  }

  RationalTF kp = k;
  try {
    kp = rho_scale(complementary_sensitivity(k, q.sector.shift()), q.rho);
  } catch (const Undefined& e) {
    r.diagnostics = e.what();
    return r;
  }
  r.stable_ok = is_schur(kp.den(), 0.0);
  if (!r.stable_ok) {
    r.diagnostics = "K'(rho z) is not Schur stable (spectral radius " + std::to_string(spectral_radius_poly(kp.den())) + ")";
    return r;
  }
  const GainResult g = hinf_norm(kp);
  r.gain = g.gain;
  r.argmax_omega = g.argmax_omega;
  r.margin = r.threshold - g.gain;
  r.certified = g.gain < r.threshold;
  r.diagnostics = r.certified ? "certified" : "gain exceeds the small-gain threshold";
  return r;
}

// -- Searches ---------------------------------------------------------------

inline constexpr double kDefaultRateTolerance = 1e-6;
/// Rates are searched below this value; certification here means a
/// certificate exists at all.
inline constexpr double kRateCeiling = 1.0 - 1e-6;
inline constexpr double kRateFloor = 1e-6;

struct RateSearchResult {
  bool certifiable = false;
  double rho = 1.0;              ///< smallest certified rate found
  bool monotone_validated = false;
  std::string diagnostics;
};

inline bool certified_at(const MethodSpec& m, const SectorParams& s, double rho, bool allow_improper) {
  return certify({m, s, rho, allow_improper}).certified;
}

/// Smallest certified rho, by bisection on [kRateFloor, kRateCeiling].
///
/// Monotonicity of the verdict in rho is not assumed: three points between the
/// answer and the ceiling are re-certified and reported in monotone_validated.
inline RateSearchResult best_rate(const MethodSpec& m, const SectorParams& s, double tol = kDefaultRateTolerance,
                                  bool allow_improper = false) {
  detail::require(tol > 0.0 && tol < 0.5, "rate tolerance must lie in (0, 0.5)");
  RateSearchResult out;
  if (!certified_at(m, s, kRateCeiling, allow_improper)) {
    out.diagnostics = "uncertifiable: no certificate at rho = 1 - 1e-6";
    return out;
  }
  out.certifiable = true;
  double lo = kRateFloor;
  double hi = kRateCeiling;
  if (certified_at(m, s, lo, allow_improper)) {
    hi = lo;
  } else {
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (certified_at(m, s, mid, allow_improper) ? hi : lo) = mid;
    }
  }
  out.rho = hi;
  out.monotone_validated = true;
  for (double f : {0.25, 0.5, 0.75}) {
    if (!certified_at(m, s, hi + f * (kRateCeiling - hi), allow_improper)) out.monotone_validated = false;
  }
  out.diagnostics = out.monotone_validated ? "ok" : "certification is not monotone in rho above the reported rate";
  return out;
}

inline constexpr int kLearningRateGrid = 256;

struct LearningRateResult {
  bool found = false;
  double eta = 0.0;
  std::string diagnostics;
};

/// Largest step size for which a certificate exists at some rho < 1.
///
/// The template's own step size is ignored. A log-spaced scan over
/// [1e-4/L, 4/mu] locates the last certified grid point; bisection then
/// refines the crossing above it to width tol (default 1e-6/L).
inline LearningRateResult max_learning_rate(const MethodSpec& family, const SectorParams& s,
                                            std::optional<double> tol = std::nullopt, bool allow_improper = false) {
  validate(s);
  detail::require(has_single_step_size(family), "max_learning_rate needs a family with a single step size");
  const double width = tol.value_or(1e-6 / s.L);
  detail::require(width > 0.0, "step-size tolerance must be positive");
  auto ok = [&](double eta) { return certified_at(with_step_size(family, eta), s, kRateCeiling, allow_improper); };

  const double lo = 1e-4 / s.L;
  const double hi = 4.0 / s.mu;
  std::vector<double> grid(kLearningRateGrid);
  for (int i = 0; i < kLearningRateGrid; ++i)
    grid[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (kLearningRateGrid - 1));

  int last = -1;
  for (int i = 0; i < kLearningRateGrid; ++i)
    if (ok(grid[static_cast<std::size_t>(i)])) last = i;
  LearningRateResult out;
  if (last < 0) {
    out.diagnostics = "empty region: no step size in [1e-4/L, 4/mu] is certified";
    return out;
  }
  out.found = true;
  if (last == kLearningRateGrid - 1) {
    out.eta = hi;
    out.diagnostics = "certified up to the search limit 4/mu";
    return out;
  }
  double a = grid[static_cast<std::size_t>(last)];
  double b = grid[static_cast<std::size_t>(last + 1)];
  while (b - a > width) {
    const double mid = 0.5 * (a + b);
    (ok(mid) ? a : b) = mid;
  }
  out.eta = a;
  out.diagnostics = "ok";
  return out;
}

// -- Closed-form rates ------------------------------------------------------

struct ClosedFormRate {
  double rho = 0.0;
  bool strict = false;  ///< stated as "for any rho > rho_expected"
  std::string regime;
};

namespace detail {

inline bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

/// Reads a reduced transfer function back as GD, PP or GOGD parameters.
struct CanonicalForm {
  enum class Kind { gd, pp, gogd, other } kind = Kind::other;
  double eta = 0.0;    // gd, pp
  double alpha = 0.0;  // gogd
  double beta = 0.0;
};

inline CanonicalForm canonical_form(const RationalTF& k) {
  CanonicalForm c;
  const Polynomial& n = k.num();
  const Polynomial& d = k.den();
  const auto is = [](const Polynomial& p, std::initializer_list<double> want) {
    const Polynomial w(want);
    if (p.degree() != w.degree()) return false;
    for (std::size_t i = 0; i < w.coeffs().size(); ++i)
      if (std::abs(p[i] - w[i]) > 1e-12) return false;
    return true;
  };
  if (is(d, {-1.0, 1.0}) && n.degree() == 0) {
    c.kind = CanonicalForm::Kind::gd;
    c.eta = -n[0];
  } else if (is(d, {-1.0, 1.0}) && n.degree() == 1 && std::abs(n[0]) <= 1e-14) {
    c.kind = CanonicalForm::Kind::pp;
    c.eta = -n[1];
  } else if (is(d, {0.0, -1.0, 1.0}) && n.degree() <= 1) {
    c.kind = CanonicalForm::Kind::gogd;
    c.beta = n[0];
    c.alpha = -n[1] - n[0];
  }
  return c;
}

}  // namespace detail

/// Rate promised by the matching convergence theorem, if any.
///
/// The method is matched through its transfer function, so any family that
/// realizes the same controller (HGD, PEGD, RGD, PID) hits the same theorem.
/// When several theorems apply the smallest rate is returned.
inline ClosedFormRate closed_form(const MethodSpec& m, const SectorParams& s) {
  validate(m);
  validate(s);
  const double L = s.L;
  const double mu = s.mu;
  const double lambda = s.kappa_inv();
  const double delta = s.delta;
  const detail::CanonicalForm c = detail::canonical_form(build_transfer(m));
  std::optional<ClosedFormRate> best;
  auto offer = [&best](double rho, bool strict, const char* regime) {
    if (!best || rho < best->rho) best = ClosedFormRate{rho, strict, regime};
  };
  using Kind = detail::CanonicalForm::Kind;
  using detail::near;

  if (c.kind == Kind::gd) {
    if (near(c.eta, 2.0 / (L + mu)) && delta == 0.0) offer((L - mu) / (L + mu), true, "gd-2/(L+mu)");
    if (near(c.eta, 1.0 / L) && delta < lambda) offer(1.0 - lambda + delta, true, "gd-1/L");
    // GOGD with beta = 0 reduces to GD, so the l = 0 end of that theorem lands here.
    if (near(c.eta, 1.0 / (2.0 * L)) && delta == 0.0) offer(1.0 - lambda / 4.0, false, "gogd-1/(2L)");
  } else if (c.kind == Kind::pp) {
    if (delta == 0.0 && c.eta > 0.0) {
      const double t = c.eta * (L + mu) / 2.0;
      offer((L + mu) / (L + mu + 2.0 * mu * t), true, "pp");
    }
  } else if (c.kind == Kind::gogd) {
    const double alpha = c.alpha;
    const double beta = c.beta;
    if (near(alpha, beta)) {
      const double eta = alpha;
      const double eps = 1.0 - 1.5 * L * eta;
      if (delta == 0.0 && eps > 0.0 && eps < 1.0) offer(1.0 - (2.0 / 3.0) * eps * (1.0 - eps) * lambda, false, "ogd-2/(3L)(1-eps)");
      if (near(eta, 1.0 / (2.0 * L)) && delta > 0.0 && delta <= lambda / 3.0 * (1.0 + 1e-12))
        offer(1.0 - lambda / 4.0, true, "ogd-noise");
    }
    if (delta == 0.0 && near(alpha, 1.0 / (2.0 * L))) {
      const double ell = 2.0 * L * beta;
      if (ell >= -1e-12 && ell <= 1.0 + 1e-9) offer(1.0 - lambda / 4.0, false, "gogd-1/(2L)");
    }
    if (delta == 0.0 && near(alpha, 1.0 / L)) {
      const double eps = 2.0 * L * beta;
      if (eps > 0.0 && eps < 1.0) offer(1.0 - eps * (1.0 - eps) * lambda / 2.0, false, "gogd-1/L");
    }
  }
  if (!best) throw NoClosedForm("no convergence theorem covers these parameters");
  return *best;
}

// -- Circle criterion -------------------------------------------------------

struct Disk {
  Complex center;
  double radius = 0.0;

  /// Disk D(a, b) whose diameter joins -1/a and -1/b on the real axis.
  static Disk from_sector(double a, double b) {
    detail::require(a != 0.0 && b != 0.0, "half-plane circle criterion (a or b = 0) is not supported");
    detail::require(a != b, "degenerate disk: a = b");
    return {Complex(-0.5 * (1.0 / a + 1.0 / b), 0.0), 0.5 * std::abs(1.0 / a - 1.0 / b)};
  }

  bool strictly_contains(Complex z) const { return std::abs(z - center) < radius; }
};

struct NyquistSample {
  double omega = 0.0;
  Complex value;
  bool inside = false;
};

struct CircleCriterionResult {
  bool passes = false;
  bool stable = false;
  Disk disk;
  std::vector<NyquistSample> samples;
};

/// Samples K'(rho e^{jw}) on a uniform grid over [-pi, pi] and checks that it
/// stays inside the disk D(a, -a) with a the shifted nonlinearity gain.
inline CircleCriterionResult circle_criterion(const MethodSpec& m, const SectorParams& s, double rho = 1.0, int n_points = 512) {
  validate(s);
  detail::require(n_points >= 64, "circle criterion needs at least 64 points");
  CircleCriterionResult out;
  const double a = s.shifted_gain();
  out.disk = Disk::from_sector(a, -a);
  const RationalTF kp = scaled_complementary_sensitivity(m, s, rho);
  out.stable = is_schur(kp.den(), 0.0);
  bool all_inside = true;
  out.samples.reserve(static_cast<std::size_t>(n_points));
  for (int i = 0; i < n_points; ++i) {
    const double w = (i == n_points - 1) ? std::numbers::pi
                                         : -std::numbers::pi + 2.0 * std::numbers::pi * i / (n_points - 1);
    NyquistSample smp{w, Complex(std::numeric_limits<double>::infinity(), 0.0), false};
    try {
      smp.value = kp.evaluate(std::polar(1.0, w));
      smp.inside = out.disk.strictly_contains(smp.value);
    } catch (const Undefined&) {
      // Pole on the unit circle: the plot leaves every disk.
    }
    all_inside = all_inside && smp.inside;
    out.samples.push_back(smp);
  }
  out.passes = out.stable && all_inside;
  return out;
}

}  // namespace histcert
