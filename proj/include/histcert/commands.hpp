#pragma once

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "histcert/certify.hpp"
#include "histcert/dynamics.hpp"
#include "histcert/games.hpp"
#include "histcert/io.hpp"

// Subcommands of the histcert tool. Each writes its data to the given
// streams and returns the process exit code; input errors surface as
// exceptions, which run_guarded maps to exit code 1.

namespace histcert::cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNegative = 2;  ///< analysis completed, verdict negative

inline json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("malformed JSON: ") + e.what());
  }
}

inline json load_config(const std::string& path) {
  std::ifstream in(path);
  detail::require(static_cast<bool>(in), "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Every top-level key any subcommand understands; anything else is a typo.
inline void check_config_keys(const json& cfg) {
  io::detail::allow_only(cfg, "config",
                         {"method", "sector", "operator", "rho", "allow_improper", "x0", "history", "delta", "mode"});
}

inline MethodSpec config_method(const json& cfg) {
  io::detail::require_keys(cfg, "config", {"method"});
  return io::parse_method(cfg["method"]);
}

inline SectorParams config_sector(const json& cfg) {
  io::detail::require_keys(cfg, "config", {"sector"});
  return io::parse_sector(cfg["sector"]);
}

/// PP, and PID with a direct feedthrough, are not strictly proper and are
/// admitted automatically.
inline bool needs_improper_admission(const MethodSpec& m) {
  if (std::holds_alternative<ProximalPoint>(m)) return true;
  if (const auto* p = std::get_if<PidController>(&m)) return p->kp + p->kd != 0.0;
  return false;
}

inline bool config_allow_improper(const json& cfg, const MethodSpec& m, bool flag) {
  bool v = flag || needs_improper_admission(m);
  if (cfg.contains("allow_improper")) {
    detail::require(cfg["allow_improper"].is_boolean(), "allow_improper must be boolean");
    v = v || cfg["allow_improper"].get<bool>();
  }
  return v;
}

inline int cmd_certify(const json& cfg, bool allow_improper_flag, std::ostream& out) {
  check_config_keys(cfg);
  const MethodSpec m = config_method(cfg);
  const SectorParams s = config_sector(cfg);
  io::detail::require_keys(cfg, "config", {"rho"});
  const double rho = io::detail::number(cfg, "rho", "config");
  const CertificationResult r = certify({m, s, rho, config_allow_improper(cfg, m, allow_improper_flag)});
  out << io::to_json(r).dump(2) << '\n';
  return r.certified ? kExitOk : kExitNegative;
}

/// One row per step size on a uniform grid: eta, best certified rho.
inline int cmd_sweep(const json& cfg, double eta_min, double eta_max, int eta_steps, bool allow_improper_flag,
                     std::ostream& csv) {
  check_config_keys(cfg);
  const MethodSpec m = config_method(cfg);
  const SectorParams s = config_sector(cfg);
  detail::require(eta_steps >= 1, "sweep needs at least one grid point");
  detail::require(std::isfinite(eta_min) && std::isfinite(eta_max) && eta_min > 0.0 && eta_max >= eta_min,
                  "sweep needs 0 < eta_min <= eta_max");
  detail::require(has_single_step_size(m), "sweep needs a family with a single step size");
  const bool allow = config_allow_improper(cfg, m, allow_improper_flag);
  io::CsvWriter w(csv);
  w.header({"eta", "best_rho"});
  bool any = false;
  for (int i = 0; i < eta_steps; ++i) {
    const double eta = eta_steps == 1 ? eta_min : eta_min + (eta_max - eta_min) * i / (eta_steps - 1);
    const RateSearchResult r = best_rate(with_step_size(m, eta), s, kDefaultRateTolerance, allow);
    w.cell(eta);
    if (r.certifiable) {
      w.cell(r.rho);
      any = true;
    } else {
      w.cell(std::string_view("uncertified"));
    }
    w.end_row();
  }
  return any ? kExitOk : kExitNegative;
}

inline int cmd_nyquist(const json& cfg, int points, std::ostream& csv) {
  check_config_keys(cfg);
  const MethodSpec m = config_method(cfg);
  const SectorParams s = config_sector(cfg);
  const double rho = cfg.contains("rho") ? io::detail::number(cfg, "rho", "config") : 1.0;
  const CircleCriterionResult r = circle_criterion(m, s, rho, points);
  io::CsvWriter w(csv);
  w.header({"omega", "re", "im", "inside_disk"});
  for (const NyquistSample& smp : r.samples) {
    w.cell(smp.omega).cell(smp.value.real()).cell(smp.value.imag()).cell(static_cast<long long>(smp.inside ? 1 : 0));
    w.end_row();
  }
  return r.passes ? kExitOk : kExitNegative;
}

/// Both spectrum curves on the left-open grid (s_min, s_max].
inline int cmd_spectrum(double s_min, double s_max, int points, std::ostream& csv) {
  detail::require(points >= 1, "spectrum needs at least one point");
  detail::require(std::isfinite(s_min) && std::isfinite(s_max) && s_min >= 0.0 && s_max > s_min,
                  "spectrum needs 0 <= s_min < s_max");
  io::CsvWriter w(csv);
  w.header({"s", "alt_max_root", "sim_max_root"});
  for (int i = 0; i < points; ++i) {
    const double s = s_min + (s_max - s_min) * (i + 1) / points;
    w.cell(s).cell(spectrum_radius_at(GameMode::alternating, s)).cell(spectrum_radius_at(GameMode::simultaneous, s));
    w.end_row();
  }
  return kExitOk;
}

struct SimulateArgs {
  std::size_t steps = 500;
  std::uint64_t seed = 0;
  NoiseStrategy strategy = NoiseStrategy::none;
  bool coordinates = false;
};

/// Trajectory CSV on `csv`, a JSON summary on `summary`.
inline int cmd_simulate(const json& cfg, const SimulateArgs& args, std::ostream& csv, std::ostream& summary) {
  check_config_keys(cfg);
  const MethodSpec m = config_method(cfg);
  io::detail::require_keys(cfg, "config", {"operator", "x0"});
  const io::ParsedOperator parsed = io::parse_operator(cfg["operator"]);
  RunOptions opt;
  opt.steps = args.steps;
  opt.adversary.strategy = args.strategy;
  opt.adversary.seed = args.seed;
  if (cfg.contains("delta")) {
    opt.adversary.delta = io::detail::number(cfg, "delta", "config");
  } else if (cfg.contains("sector")) {
    opt.adversary.delta = io::parse_sector(cfg["sector"]).delta;
  }
  if (cfg.contains("mode")) {
    detail::require(cfg["mode"].is_string(), "mode must be a string");
    const std::string mode = cfg["mode"].get<std::string>();
    detail::require(mode == "simultaneous" || mode == "alternating", "mode must be 'simultaneous' or 'alternating'");
    opt.mode = mode == "alternating" ? UpdateMode::alternating : UpdateMode::simultaneous;
  }
  if (cfg.contains("history")) {
    detail::require(cfg["history"].is_array(), "history must be an array of points");
    for (const auto& h : cfg["history"]) opt.history.push_back(io::detail::eigen_vector(h, "history entry"));
  }
  const Eigen::VectorXd x0 = io::detail::eigen_vector(cfg["x0"], "x0");
  const Trajectory t = run(m, parsed.op, x0, opt);

  io::CsvWriter w(csv);
  std::vector<std::string> cols{"k", "distance"};
  if (args.coordinates)
    for (Eigen::Index i = 0; i < x0.size(); ++i) cols.push_back("x" + std::to_string(i));
  w.header(cols);
  for (std::size_t k = 0; k < t.distances.size(); ++k) {
    w.cell(static_cast<long long>(k)).cell(t.distances[k]);
    if (args.coordinates)
      for (Eigen::Index i = 0; i < x0.size(); ++i) w.cell(t.points[k](i));
    w.end_row();
  }

  json j;
  j["outcome"] = std::string(outcome_name(classify(t)));
  j["diverged"] = t.diverged;
  j["steps_run"] = t.distances.size() - 1;
  j["final_distance"] = t.distances.back();
  try {
    j["rate_estimate"] = estimate_rate(t);
  } catch (const InsufficientData&) {
    j["rate_estimate"] = nullptr;
  }
  summary << j.dump(2) << '\n';
  return kExitOk;
}

inline int cmd_equivalence(const json& lhs, const json& rhs, std::ostream& out) {
  const RationalTF a = build_transfer(io::parse_method(lhs));
  const RationalTF b = build_transfer(io::parse_method(rhs));
  const bool equal = tf_equal(a, b);
  json j;
  j["equal"] = equal;
  j["lhs"] = io::to_json(a);
  j["rhs"] = io::to_json(b);
  out << j.dump(2) << '\n';
  return equal ? kExitOk : kExitNegative;
}

/// Runs a subcommand, turning any library error into exit code 1.
inline int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

/// `out` names a file, or standard output when empty or "-".
inline int with_output(const std::string& path, const std::function<int(std::ostream&)>& body) {
  if (path.empty() || path == "-") return body(std::cout);
  std::ofstream f(path, std::ios::binary);
  detail::require(static_cast<bool>(f), "cannot open '" + path + "' for writing");
  const int code = body(f);
  f.flush();
  detail::require(static_cast<bool>(f), "failed writing '" + path + "'");
  return code;
}

}  // namespace histcert::cli
