#pragma once

#include <charconv>
#include <initializer_list>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "histcert/certify.hpp"
#include "histcert/error.hpp"
#include "histcert/method.hpp"
#include "histcert/operators.hpp"
#include "histcert/transfer.hpp"

namespace histcert::io {

using nlohmann::json;

namespace detail {

inline void require(bool ok, const std::string& msg) { histcert::detail::require(ok, msg); }

inline void allow_only(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  require(j.is_object(), std::string(where) + " must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (auto allowed : keys) known = known || k == allowed;
    require(known, "unknown field '" + k + "' in " + std::string(where));
  }
}

inline void require_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
  for (auto k : keys) require(j.contains(std::string(k)), "missing field '" + std::string(k) + "' in " + std::string(where));
}

inline double number(const json& j, std::string_view key, std::string_view where) {
  const json& v = j.at(std::string(key));
  require(v.is_number(), "field '" + std::string(key) + "' in " + std::string(where) + " must be a number");
  return v.get<double>();
}

inline std::vector<double> vector(const json& v, std::string_view what) {
  require(v.is_array(), std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    require(e.is_number(), std::string(what) + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline Eigen::VectorXd eigen_vector(const json& v, std::string_view what) {
  const std::vector<double> d = vector(v, what);
  return Eigen::Map<const Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size()));
}

inline Eigen::MatrixXd matrix(const json& v, std::string_view what) {
  require(v.is_array() && !v.empty(), std::string(what) + " must be a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : v) rows.push_back(vector(r, what));
  const std::size_t cols = rows.front().size();
  require(cols > 0, std::string(what) + " rows must be nonempty");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == cols, std::string(what) + " rows must all have the same length");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

inline json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace detail

// -- Methods ----------------------------------------------------------------

inline MethodSpec parse_method(const json& j) {
  histcert::detail::require(j.is_object() && j.contains("family") && j["family"].is_string(),
                            "method needs a string field 'family'");
  const std::string fam = j["family"].get<std::string>();
  using detail::allow_only;
  using detail::number;
  using detail::require_keys;
  MethodSpec m = GradientDescent{0.0};
  if (fam == "gd" || fam == "ogd" || fam == "pp" || fam == "pegd" || fam == "rgd") {
    allow_only(j, "method", {"family", "eta"});
    require_keys(j, "method", {"eta"});
    const double eta = number(j, "eta", "method");
    if (fam == "gd") m = GradientDescent{eta};
    else if (fam == "ogd") m = OptimisticGradient{eta};
    else if (fam == "pp") m = ProximalPoint{eta};
    else if (fam == "pegd") m = PastExtraGradient{eta};
    else m = ReflectedGradient{eta};
  } else if (fam == "gogd") {
    allow_only(j, "method", {"family", "alpha", "beta"});
    require_keys(j, "method", {"alpha", "beta"});
    m = GeneralizedOptimistic{number(j, "alpha", "method"), number(j, "beta", "method")};
  } else if (fam == "pid") {
    allow_only(j, "method", {"family", "kp", "ki", "kd"});
    require_keys(j, "method", {"kp", "ki", "kd"});
    m = PidController{number(j, "kp", "method"), number(j, "ki", "method"), number(j, "kd", "method")};
  } else if (fam == "hgd") {
    allow_only(j, "method", {"family", "eta", "a"});
    require_keys(j, "method", {"eta", "a"});
    m = HistoricalGradient{number(j, "eta", "method"), detail::vector(j["a"], "method.a")};
  } else if (fam == "historical") {
    allow_only(j, "method", {"family", "eta", "a", "b"});
    require_keys(j, "method", {"eta", "a", "b"});
    m = GeneralHistorical{number(j, "eta", "method"), detail::vector(j["a"], "method.a"), detail::vector(j["b"], "method.b")};
  } else {
    throw InvalidInput("unknown method family '" + fam + "'");
  }
  validate(m);
  return m;
}

inline json to_json(const MethodSpec& m) {
  json j;
  j["family"] = std::string(family_name(m));
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GeneralizedOptimistic>) {
          j["alpha"] = v.alpha;
          j["beta"] = v.beta;
        } else if constexpr (std::is_same_v<T, PidController>) {
          j["kp"] = v.kp;
          j["ki"] = v.ki;
          j["kd"] = v.kd;
        } else if constexpr (std::is_same_v<T, HistoricalGradient>) {
          j["eta"] = v.eta;
          j["a"] = v.a;
        } else if constexpr (std::is_same_v<T, GeneralHistorical>) {
          j["eta"] = v.eta;
          j["a"] = v.a;
          j["b"] = v.b;
        } else {
          j["eta"] = v.eta;
        }
      },
      m);
  return j;
}

// -- Sectors ----------------------------------------------------------------

inline SectorParams parse_sector(const json& j) {
  detail::allow_only(j, "sector", {"mu", "L", "delta"});
  detail::require_keys(j, "sector", {"mu", "L"});
  SectorParams s{detail::number(j, "mu", "sector"), detail::number(j, "L", "sector"),
                 j.contains("delta") ? detail::number(j, "delta", "sector") : 0.0};
  validate(s);
  return s;
}

inline json to_json(const SectorParams& s) { return {{"mu", s.mu}, {"L", s.L}, {"delta", s.delta}}; }

// -- Operators --------------------------------------------------------------

/// Parsed operator plus the sector a min-max quadratic was placed in.
struct ParsedOperator {
  OperatorSpec op;
  std::optional<SectorParams> derived_sector;
};

inline ParsedOperator parse_operator(const json& j) {
  histcert::detail::require(j.is_object() && j.contains("kind") && j["kind"].is_string(),
                            "operator needs a string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  ParsedOperator out{ScalarNonconvex{}, std::nullopt};
  if (kind == "scalar-noncvx") {
    detail::allow_only(j, "operator", {"kind"});
  } else if (kind == "diagonal-quadratic") {
    detail::allow_only(j, "operator", {"kind", "spectrum", "fixed_point"});
    detail::require_keys(j, "operator", {"spectrum"});
    DiagonalQuadratic d{detail::vector(j["spectrum"], "operator.spectrum"), {}};
    if (j.contains("fixed_point")) d.fixed_point = detail::eigen_vector(j["fixed_point"], "operator.fixed_point");
    out.op = d;
  } else if (kind == "bilinear") {
    detail::allow_only(j, "operator", {"kind", "matrix"});
    detail::require_keys(j, "operator", {"matrix"});
    out.op = Bilinear{detail::matrix(j["matrix"], "operator.matrix")};
  } else if (kind == "minmax-quadratic") {
    detail::allow_only(j, "operator", {"kind", "p", "q", "b", "mu", "fixed_point"});
    detail::require_keys(j, "operator", {"p", "q", "b"});
    MinmaxBlocks blocks{detail::matrix(j["p"], "operator.p"), detail::matrix(j["q"], "operator.q"),
                        detail::matrix(j["b"], "operator.b"), {}, std::nullopt};
    if (j.contains("mu")) blocks.declared_mu = detail::number(j, "mu", "operator");
    if (j.contains("fixed_point")) blocks.fixed_point = detail::eigen_vector(j["fixed_point"], "operator.fixed_point");
    MinmaxOperator mm = build_minmax_operator(blocks);
    out.op = mm.op;
    out.derived_sector = mm.sector;
  } else {
    throw InvalidInput("unknown operator kind '" + kind + "'");
  }
  validate(out.op);
  return out;
}

// -- Results ----------------------------------------------------------------

inline json to_json(const CertificationResult& r) {
  json j;
  j["proper_ok"] = r.proper_ok;
  j["stable_ok"] = r.stable_ok;
  j["gain"] = r.gain ? json(*r.gain) : json(nullptr);
  j["argmax_omega"] = r.argmax_omega ? json(*r.argmax_omega) : json(nullptr);
  j["threshold"] = r.threshold;
  j["margin"] = r.margin ? json(*r.margin) : json(nullptr);
  j["certified"] = r.certified;
  j["diagnostics"] = r.diagnostics;
  return j;
}

/// Schema check for emitted certification results; throws on violation.
inline CertificationResult parse_certification_result(const json& j) {
  detail::allow_only(j, "result", {"proper_ok", "stable_ok", "gain", "argmax_omega", "threshold", "margin", "certified",
                                   "diagnostics"});
  detail::require_keys(j, "result",
                       {"proper_ok", "stable_ok", "gain", "argmax_omega", "threshold", "margin", "certified", "diagnostics"});
  auto flag = [&j](const char* k) {
    detail::require(j[k].is_boolean(), std::string("result.") + k + " must be boolean");
    return j[k].get<bool>();
  };
  auto maybe = [&j](const char* k) -> std::optional<double> {
    if (j[k].is_null()) return std::nullopt;
    detail::require(j[k].is_number(), std::string("result.") + k + " must be a number or null");
    return j[k].get<double>();
  };
  CertificationResult r;
  r.proper_ok = flag("proper_ok");
  r.stable_ok = flag("stable_ok");
  r.certified = flag("certified");
  r.gain = maybe("gain");
  r.argmax_omega = maybe("argmax_omega");
  r.margin = maybe("margin");
  detail::require(j["threshold"].is_number(), "result.threshold must be a number");
  r.threshold = j["threshold"].get<double>();
  detail::require(j["diagnostics"].is_string(), "result.diagnostics must be a string");
  r.diagnostics = j["diagnostics"].get<std::string>();
  detail::require(!r.certified || (r.proper_ok && r.stable_ok && r.gain && *r.gain < r.threshold),
                  "certified results need proper_ok, stable_ok and gain < threshold");
  return r;
}

inline json to_json(const RationalTF& k) { return {{"num", k.num().coeffs()}, {"den", k.den().coeffs()}}; }

// -- CSV --------------------------------------------------------------------

/// 17 significant digits with a '.' decimal point, independent of locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void header(std::initializer_list<std::string_view> cols) {
    bool first = true;
    for (auto c : cols) {
      if (!first) os_ << ',';
      os_ << c;
      first = false;
    }
    os_ << '\n';
  }
  void header(const std::vector<std::string>& cols) {
    for (std::size_t i = 0; i < cols.size(); ++i) os_ << (i ? "," : "") << cols[i];
    os_ << '\n';
  }

  CsvWriter& cell(double v) { return raw(format_number(v)); }
  CsvWriter& cell(long long v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::string_view s) { return raw(s); }
  void end_row() {
    os_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(std::string_view s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& os_;
  bool first_ = true;
};

}  // namespace histcert::io
