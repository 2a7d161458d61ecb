#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "histcert/error.hpp"
#include "histcert/method.hpp"
#include "histcert/operators.hpp"

namespace histcert {

// -- Noise ------------------------------------------------------------------

enum class NoiseStrategy { none, scale_up, scale_down, rotate, random };

inline std::string_view strategy_name(NoiseStrategy s) {
  switch (s) {
    case NoiseStrategy::none: return "none";
    case NoiseStrategy::scale_up: return "scale_up";
    case NoiseStrategy::scale_down: return "scale_down";
    case NoiseStrategy::rotate: return "rotate";
    default: return "random";
  }
}

inline NoiseStrategy parse_strategy(std::string_view s) {
  if (s == "none") return NoiseStrategy::none;
  if (s == "scale_up") return NoiseStrategy::scale_up;
  if (s == "scale_down") return NoiseStrategy::scale_down;
  if (s == "rotate") return NoiseStrategy::rotate;
  if (s == "random" || s == "seeded_random") return NoiseStrategy::random;
  throw InvalidInput("unknown noise strategy '" + std::string(s) + "'");
}

/// Relative adversary: every perturbation r satisfies |r| = delta |F|, except
/// rotate in one dimension where no orthogonal direction exists and r = 0.
struct NoiseAdversary {
  NoiseStrategy strategy = NoiseStrategy::none;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// F + r for the k-th operator evaluation.
///
/// rotate turns the (e1, e2) component of F by +90 degrees and rescales it to
/// delta |F|; if F has no component in that plane, e1 itself is orthogonal to
/// F and is used instead. random draws a direction from a generator seeded
/// by (seed, k), so runs are reproducible.
inline Eigen::VectorXd apply_noise(const NoiseAdversary& adv, const Eigen::VectorXd& f, std::uint64_t k) {
  if (adv.strategy == NoiseStrategy::none || adv.delta == 0.0) return f;
  const double fn = f.norm();
  switch (adv.strategy) {
    case NoiseStrategy::scale_up: return (1.0 + adv.delta) * f;
    case NoiseStrategy::scale_down: return (1.0 - adv.delta) * f;
    case NoiseStrategy::rotate: {
      if (f.size() < 2 || fn == 0.0) return f;
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(f.size());
      if (f(0) != 0.0 || f(1) != 0.0) {
        dir(0) = -f(1);
        dir(1) = f(0);
      } else {
        dir(0) = 1.0;  // already orthogonal to F
      }
      return f + (adv.delta * fn / dir.norm()) * dir;
    }
    default: {
      if (fn == 0.0) return f;
      std::seed_seq seq{static_cast<std::uint32_t>(adv.seed), static_cast<std::uint32_t>(adv.seed >> 32),
                        static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
      std::mt19937_64 gen(seq);
      std::normal_distribution<double> n(0.0, 1.0);
      Eigen::VectorXd dir(f.size());
      do {
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir(i) = n(gen);
      } while (dir.norm() == 0.0);
      return f + (adv.delta * fn / dir.norm()) * dir;
    }
  }
}

// -- Multistep form ---------------------------------------------------------

/// x_{k+1} = sum_i b_i x_{k-i} - sum_i a_i F(x_{k-i}) - tau F(x_{k+1}).
struct MultistepForm {
  std::vector<double> b;
  std::vector<double> a;
  double tau = 0.0;

  std::size_t lags() const { return b.size(); }
};

/// Update rule of every family except the half-step ones (PEGD, RGD).
inline std::optional<MultistepForm> multistep_form(const MethodSpec& m) {
  validate(m);
  return std::visit(
      [](const auto& v) -> std::optional<MultistepForm> {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GradientDescent>) {
          return MultistepForm{{1.0}, {v.eta}, 0.0};
        } else if constexpr (std::is_same_v<T, OptimisticGradient>) {
          return MultistepForm{{1.0, 0.0}, {2.0 * v.eta, -v.eta}, 0.0};
        } else if constexpr (std::is_same_v<T, GeneralizedOptimistic>) {
          return MultistepForm{{1.0, 0.0}, {v.alpha + v.beta, -v.beta}, 0.0};
        } else if constexpr (std::is_same_v<T, ProximalPoint>) {
          return MultistepForm{{1.0}, {0.0}, v.eta};
        } else if constexpr (std::is_same_v<T, PidController>) {
          // Incremental form of the controller; the integral state starts at zero.
          return MultistepForm{{1.0, 0.0}, {v.ki - v.kp - 2.0 * v.kd, v.kd}, v.kp + v.kd};
        } else if constexpr (std::is_same_v<T, HistoricalGradient>) {
          MultistepForm f;
          f.b.assign(v.a.size(), 0.0);
          f.b[0] = 1.0;
          for (double ai : v.a) f.a.push_back(v.eta * ai);
          return f;
        } else if constexpr (std::is_same_v<T, GeneralHistorical>) {
          MultistepForm f;
          f.b = v.b;
          for (double ai : v.a) f.a.push_back(v.eta * ai);
          return f;
        } else {
          return std::nullopt;
        }
      },
      m);
}

// -- Simulation -------------------------------------------------------------

enum class UpdateMode { simultaneous, alternating };

struct Trajectory {
  std::vector<Eigen::VectorXd> points;       ///< x_0 .. x_K
  std::vector<double> distances;             ///< |x_k - x*|
  std::vector<Eigen::VectorXd> half_points;  ///< PEGD x_{k+1/2} or RGD 2x_k - x_{k-1}
  bool diverged = false;
  double max_implicit_residual = 0.0;        ///< worst implicit-step residual, scaled by 1 + |x_k|
};

struct RunOptions {
  std::size_t steps = 100;
  NoiseAdversary adversary{};
  UpdateMode mode = UpdateMode::simultaneous;
  /// Earlier iterates x_{-1}, x_{-2}, ... (most recent first); missing lags
  /// replicate the oldest one given, or x_0. For PEGD the single entry is the
  /// half point x_{-1/2}.
  std::vector<Eigen::VectorXd> history;
};

inline constexpr double kDivergenceFactor = 1e6;
inline constexpr double kImplicitTolerance = 1e-12;
inline constexpr int kImplicitMaxIterations = 200;

namespace detail {

class Evaluator {
 public:
  Evaluator(const OperatorSpec& op, const NoiseAdversary& adv) : op_(op), adv_(adv) {}
  Eigen::VectorXd operator()(const Eigen::VectorXd& x, std::uint64_t k) const {
    return apply_noise(adv_, eval_operator(op_, x), k);
  }
  const OperatorSpec& op() const { return op_; }
  const NoiseAdversary& adversary() const { return adv_; }

 private:
  const OperatorSpec& op_;
  const NoiseAdversary& adv_;
};

/// Solves x + tau Ftilde(x) = rhs for the k-th evaluation.
class ImplicitSolver {
 public:
  ImplicitSolver(const Evaluator& eval, double tau) : eval_(eval), tau_(tau) {
    if (const auto m = linear_map(eval.op())) {
      const Eigen::Index n = m->rows();
      lu_.compute(Eigen::MatrixXd::Identity(n, n) + tau * *m);
      require(std::abs(lu_.determinant()) > 1e-14, "implicit step matrix I + tau M is singular");
      linear_ = true;
      xs_ = fixed_point(eval.op());
      m_ = *m;
    } else {
      require(tau > 0.0, "implicit steps on a nonlinear operator need a positive implicit coefficient");
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs, std::uint64_t k) const {
    if (linear_) return solve_linear(rhs, k);
    return solve_scalar(rhs, k);
  }

 private:
  // F(x) = M (x - x*), so x + tau M x = rhs + tau M x* - tau r, with r the
  // noise at the solution; iterate on r.
  Eigen::VectorXd solve_linear(const Eigen::VectorXd& rhs, std::uint64_t k) const {
    const Eigen::VectorXd base = rhs + tau_ * (m_ * xs_);
    Eigen::VectorXd x = lu_.solve(base);
    if (eval_.adversary().strategy == NoiseStrategy::none || eval_.adversary().delta == 0.0) return x;
    for (int it = 0; it < kImplicitMaxIterations; ++it) {
      const Eigen::VectorXd f = eval_operator(eval_.op(), x);
      const Eigen::VectorXd r = apply_noise(eval_.adversary(), f, k) - f;
      const Eigen::VectorXd next = lu_.solve(base - tau_ * r);
      const double step = (next - x).norm();
      x = next;
      if (step <= kImplicitTolerance * (1.0 + x.norm())) break;
    }
    return x;
  }

  // Safeguarded Newton on the increasing scalar map g(x) = x + tau Ftilde(x) - rhs.
  Eigen::VectorXd solve_scalar(const Eigen::VectorXd& rhs, std::uint64_t k) const {
    require(rhs.size() == 1, "nonlinear implicit solver is scalar only");
    auto g = [&](double x) {
      Eigen::VectorXd v(1);
      v(0) = x;
      return x + tau_ * eval_(v, k)(0) - rhs(0);
    };
    double lo = rhs(0);
    double hi = rhs(0);
    double width = 1.0 + std::abs(rhs(0));
    while (g(lo) > 0.0) lo -= (width *= 2.0);
    width = 1.0 + std::abs(rhs(0));
    while (g(hi) < 0.0) hi += (width *= 2.0);
    // Stop on the residual, not the step: the residual is the contract and
    // g' can be large when tau is.
    const double target = 0.5 * kImplicitTolerance * (1.0 + std::abs(rhs(0)));
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < kImplicitMaxIterations; ++it) {
      const double gx = g(x);
      if (std::abs(gx) <= target) break;
      (gx > 0.0 ? hi : lo) = x;
      if (!(hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x)))) break;
      const double h = 1e-7 * (1.0 + std::abs(x));
      const double slope = (g(x + h) - g(x - h)) / (2.0 * h);
      double next = (slope > 0.0) ? x - gx / slope : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      x = next;
    }
    Eigen::VectorXd out(1);
    out(0) = x;
    return out;
  }

  const Evaluator& eval_;
  double tau_;
  bool linear_ = false;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::MatrixXd m_;
  Eigen::VectorXd xs_;
};

/// Appends x to the trajectory; returns false once the run has to stop.
inline bool record(Trajectory& t, const Eigen::VectorXd& x, const Eigen::VectorXd& xs) {
  const bool finite = x.allFinite();
  const double d = finite ? (x - xs).norm() : std::numeric_limits<double>::infinity();
  t.points.push_back(x);
  t.distances.push_back(d);
  const double d0 = t.distances.front();
  if (!finite || (d0 > 0.0 && d > kDivergenceFactor * d0)) {
    t.diverged = true;
    return false;
  }
  return true;
}

inline Eigen::VectorXd history_at(const RunOptions& o, const Eigen::VectorXd& x0, std::size_t lag) {
  // lag >= 1 means x_{-lag}
  if (o.history.empty()) return x0;
  return o.history[std::min(lag, o.history.size()) - 1];
}

inline Trajectory run_multistep(const MultistepForm& form, const OperatorSpec& op, const Eigen::VectorXd& x0,
                                const RunOptions& o) {
  const Evaluator eval(op, o.adversary);
  const Eigen::VectorXd xs = fixed_point(op);
  const std::size_t lags = form.lags();
  std::optional<ImplicitSolver> implicit;
  if (form.tau != 0.0) implicit.emplace(eval, form.tau);

  // Ring of the last `lags` iterates and their observed operator values,
  // index 0 being the newest.
  std::vector<Eigen::VectorXd> xh(lags);
  std::vector<Eigen::VectorXd> fh(lags);
  xh[0] = x0;
  fh[0] = eval(x0, 0);
  for (std::size_t i = 1; i < lags; ++i) {
    xh[i] = history_at(o, x0, i);
    fh[i] = o.history.empty() ? fh[0] : eval(xh[i], 0);
  }

  Trajectory t;
  record(t, x0, xs);
  for (std::size_t k = 0; k < o.steps; ++k) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(x0.size());
    for (std::size_t i = 0; i < lags; ++i) {
      if (form.b[i] != 0.0) rhs += form.b[i] * xh[i];
      if (form.a[i] != 0.0) rhs -= form.a[i] * fh[i];
    }
    Eigen::VectorXd next;
    Eigen::VectorXd fnext;
    if (implicit) {
      next = implicit->solve(rhs, k + 1);
      fnext = eval(next, k + 1);
      if (o.adversary.strategy == NoiseStrategy::none) {
        const double res = (next - rhs + form.tau * fnext).norm() / (1.0 + xh[0].norm());
        t.max_implicit_residual = std::max(t.max_implicit_residual, res);
      }
    } else {
      next = rhs;
    }
    if (!record(t, next, xs)) break;
    if (!implicit) fnext = eval(next, k + 1);
    for (std::size_t i = lags; i-- > 1;) {
      xh[i] = std::move(xh[i - 1]);
      fh[i] = std::move(fh[i - 1]);
    }
    xh[0] = std::move(next);
    fh[0] = std::move(fnext);
  }
  return t;
}

/// Alternating play on a bilinear game: the x player moves first and the y
/// player reacts to the new x.
inline Trajectory run_alternating(const MultistepForm& form, const Bilinear& game, const OperatorSpec& op,
                                  const Eigen::VectorXd& x0, const RunOptions& o) {
  const Eigen::Index n = game.a.rows();
  const std::size_t lags = form.lags();
  // History of the stacked iterate; gx_j = A y_j, gy_j = -A^T x_j.
  std::vector<Eigen::VectorXd> zh(lags);
  zh[0] = x0;
  for (std::size_t i = 1; i < lags; ++i) zh[i] = history_at(o, x0, i);
  std::vector<Eigen::VectorXd> gx(lags), gy(lags + 1);
  for (std::size_t i = 0; i < lags; ++i) {
    gx[i] = game.a * zh[i].tail(n);
    gy[i + 1] = -game.a.transpose() * zh[i].head(n);
  }
  const Eigen::VectorXd xs = fixed_point(op);
  Trajectory t;
  record(t, x0, xs);
  for (std::size_t k = 0; k < o.steps; ++k) {
    Eigen::VectorXd next(2 * n);
    Eigen::VectorXd xn = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < lags; ++i) xn += form.b[i] * zh[i].head(n) - form.a[i] * gx[i];
    // gy[0] is the y-gradient at the new x; gy[i] (i >= 1) belongs to x_{k+1-i}.
    gy[0] = -game.a.transpose() * xn;
    Eigen::VectorXd yn = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < lags; ++i) yn += form.b[i] * zh[i].tail(n) - form.a[i] * gy[i];
    next << xn, yn;
    if (!record(t, next, xs)) break;
    for (std::size_t i = lags; i-- > 1;) {
      zh[i] = std::move(zh[i - 1]);
      gx[i] = std::move(gx[i - 1]);
    }
    for (std::size_t i = lags; i >= 1; --i) gy[i] = gy[i - 1];
    zh[0] = next;
    gx[0] = game.a * next.tail(n);
  }
  return t;
}

}  // namespace detail

/// Simulates the method on the operator with F replaced by F + r at every
/// evaluation.
///
/// Runs stop early when an iterate turns non-finite or its distance to x*
/// exceeds 1e6 times the initial one; the trajectory is then flagged diverged.
inline Trajectory run(const MethodSpec& m, const OperatorSpec& op, const Eigen::VectorXd& x0, const RunOptions& o) {
  validate(op);
  detail::require(x0.size() == dimension(op), "x0 dimension does not match the operator");
  detail::require(o.adversary.delta >= 0.0 && o.adversary.delta < 1.0, "noise level must lie in [0, 1)");
  for (const auto& h : o.history) detail::require(h.size() == x0.size(), "history entries must match x0 dimension");
  if (o.mode == UpdateMode::alternating) {
    const auto* game = std::get_if<Bilinear>(&op);
    detail::require(game != nullptr, "alternating updates are only defined for bilinear operators");
    detail::require(o.adversary.strategy == NoiseStrategy::none || o.adversary.delta == 0.0,
                    "alternating updates do not support noise");
    const auto form = multistep_form(m);
    detail::require(form.has_value() && form->tau == 0.0, "alternating updates need an explicit multistep method");
    return detail::run_alternating(*form, *game, op, x0, o);
  }
  if (const auto form = multistep_form(m)) return detail::run_multistep(*form, op, x0, o);

  // Half-step families.
  const double eta = step_size(m);
  const detail::Evaluator eval(op, o.adversary);
  const Eigen::VectorXd xs = fixed_point(op);
  Trajectory t;
  detail::record(t, x0, xs);
  Eigen::VectorXd x = x0;
  if (std::holds_alternative<PastExtraGradient>(m)) {
    // x_{k+1/2} = x_k - eta F(x_{k-1/2}); x_{k+1} = x_k - eta F(x_{k+1/2}).
    Eigen::VectorXd f_half = eval(o.history.empty() ? x0 : o.history.front(), 0);
    for (std::size_t k = 0; k < o.steps; ++k) {
      const Eigen::VectorXd half = x - eta * f_half;
      t.half_points.push_back(half);
      f_half = eval(half, k + 1);
      x = x - eta * f_half;
      if (!detail::record(t, x, xs)) break;
    }
  } else {
    // x_{k+1} = x_k - eta F(2 x_k - x_{k-1}).
    Eigen::VectorXd prev = o.history.empty() ? x0 : o.history.front();
    for (std::size_t k = 0; k < o.steps; ++k) {
      const Eigen::VectorXd reflected = 2.0 * x - prev;
      t.half_points.push_back(reflected);
      prev = x;
      x = x - eta * eval(reflected, k + 1);
      if (!detail::record(t, x, xs)) break;
    }
  }
  return t;
}

// -- Rate estimation --------------------------------------------------------

inline constexpr double kDistanceFloor = 1e-13;
inline constexpr std::size_t kMinRatePoints = 20;

/// exp of the least-squares slope of log distance against k.
///
/// Only the prefix of strictly positive distances above 1e-13 is used, so the
/// floating-point floor does not flatten the fit. The default burn-in drops
/// the first 20% of that prefix.
inline double estimate_rate(const Trajectory& t, std::optional<std::size_t> burn_in = std::nullopt) {
  if (t.diverged) throw InsufficientData("cannot estimate a rate from a diverged trajectory");
  std::size_t usable = 0;
  while (usable < t.distances.size() && t.distances[usable] > kDistanceFloor && std::isfinite(t.distances[usable])) ++usable;
  const std::size_t start = burn_in.value_or(usable / 5);
  if (usable < start + kMinRatePoints) throw InsufficientData("insufficient decay data");
  double sk = 0.0, sy = 0.0, skk = 0.0, sky = 0.0;
  const double n = static_cast<double>(usable - start);
  for (std::size_t k = start; k < usable; ++k) {
    const double kk = static_cast<double>(k);
    const double y = std::log(t.distances[k]);
    sk += kk;
    sy += y;
    skk += kk * kk;
    sky += kk * y;
  }
  const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
  return std::exp(slope);
}

enum class Outcome { converging, non_convergent, diverged };

inline std::string_view outcome_name(Outcome o) {
  switch (o) {
    case Outcome::converging: return "converging";
    case Outcome::non_convergent: return "non_convergent";
    default: return "diverged";
  }
}

/// Converging means the final distance fell below `reduction` times the
/// initial one; bounded runs that stall or oscillate are non_convergent.
inline Outcome classify(const Trajectory& t, double reduction = 1e-6) {
  if (t.diverged) return Outcome::diverged;
  const double d0 = t.distances.front();
  if (d0 == 0.0) return Outcome::converging;
  return t.distances.back() <= reduction * d0 ? Outcome::converging : Outcome::non_convergent;
}

}  // namespace histcert
