#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "histcert/commands.hpp"

using namespace histcert;
using histcert::io::json;
namespace cli = histcert::cli;

namespace {

json gd_config(double rho) {
  json j = json::parse(R"({"method":{"family":"gd","eta":0.4444},"sector":{"mu":0.5,"L":4}})");
  j["rho"] = rho;
  return j;
}

json ogd_sector_config() { return json::parse(R"({"method":{"family":"ogd","eta":0.1},"sector":{"mu":0.5,"L":4}})"); }

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(CmdCertify, Certified) {
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_certify(gd_config(0.9), false, out), cli::kExitOk);
  const json j = json::parse(out.str());
  EXPECT_TRUE(j["certified"].get<bool>());
  // |K'(rho e^{jw})| peaks at w = 0: eta / (rho - 1 + h eta), h = (L + mu) / 2.
  EXPECT_NEAR(j["gain"].get<double>(), 0.4444 / (0.9 - 1.0 + 2.25 * 0.4444), 1e-9);
}

TEST(CmdCertify, Uncertified) {
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_certify(gd_config(0.7), false, out), cli::kExitNegative);
  EXPECT_FALSE(json::parse(out.str())["certified"].get<bool>());
}

TEST(CmdCertify, SchemaErrors) {
  std::ostringstream out;
  json missing = gd_config(0.9);
  missing.erase("sector");
  EXPECT_THROW(cli::cmd_certify(missing, false, out), InvalidInput);
  json unknown = gd_config(0.9);
  unknown["rh0"] = 0.9;
  EXPECT_THROW(cli::cmd_certify(unknown, false, out), InvalidInput);
  json bad_method = gd_config(0.9);
  bad_method["method"]["extra"] = 1;
  EXPECT_THROW(cli::cmd_certify(bad_method, false, out), InvalidInput);
  json bad_family = gd_config(0.9);
  bad_family["method"]["family"] = "adam";
  EXPECT_THROW(cli::cmd_certify(bad_family, false, out), InvalidInput);
  EXPECT_EQ(cli::run_guarded([&] { return cli::cmd_certify(missing, false, out); }, out), cli::kExitError);
  EXPECT_THROW(cli::parse_config_text("{not json"), InvalidInput);
}

TEST(CmdCertify, ImproperAdmission) {
  EXPECT_TRUE(cli::needs_improper_admission(ProximalPoint{0.1}));
  EXPECT_TRUE(cli::needs_improper_admission(PidController{0.1, 0.2, 0.0}));
  EXPECT_FALSE(cli::needs_improper_admission(PidController{0.1, 0.2, -0.1}));
  EXPECT_FALSE(cli::needs_improper_admission(OptimisticGradient{0.1}));
  std::ostringstream out;
  const json pp = json::parse(R"({"method":{"family":"pp","eta":0.4444},"sector":{"mu":0.5,"L":4},"rho":0.85})");
  EXPECT_EQ(cli::cmd_certify(pp, false, out), cli::kExitOk);
}

TEST(CmdSweep, OgdBoundaryNearTwoOverThreeL) {
  std::ostringstream csv;
  const double L = 4.0;
  const int steps = 100;
  EXPECT_EQ(cli::cmd_sweep(ogd_sector_config(), 0.01 / L, 1.0 / L, steps, false, csv), cli::kExitOk);
  const auto rows = parse_csv(csv.str());
  ASSERT_EQ(rows.size(), static_cast<std::size_t>(steps + 1));
  EXPECT_EQ(rows[0], (std::vector<std::string>{"eta", "best_rho"}));
  double last = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i][1] != "uncertified") last = std::stod(rows[i][0]);
  const double grid = (1.0 / L - 0.01 / L) / (steps - 1);
  EXPECT_NEAR(last, 2.0 / (3.0 * L), grid);
}

TEST(CmdSweep, GdCertifiedUpToOptimalStep) {
  std::ostringstream csv;
  const json cfg = json::parse(R"({"method":{"family":"gd","eta":0.1},"sector":{"mu":0.5,"L":4}})");
  cli::cmd_sweep(cfg, 0.01, 0.6, 60, false, csv);
  const auto rows = parse_csv(csv.str());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double eta = std::stod(rows[i][0]);
    if (eta <= 2.0 / 4.5) {
      EXPECT_NE(rows[i][1], "uncertified") << eta;
    }
  }
}

TEST(CmdSweep, RejectsBadGrids) {
  std::ostringstream csv;
  EXPECT_THROW(cli::cmd_sweep(ogd_sector_config(), 0.01, 0.2, 0, false, csv), InvalidInput);
  EXPECT_THROW(cli::cmd_sweep(ogd_sector_config(), 0.2, 0.01, 5, false, csv), InvalidInput);
  const json gogd = json::parse(R"({"method":{"family":"gogd","alpha":0.1,"beta":0.05},"sector":{"mu":0.5,"L":4}})");
  EXPECT_THROW(cli::cmd_sweep(gogd, 0.01, 0.2, 5, false, csv), InvalidInput);
}

TEST(CmdSweep, AllUncertifiedExitsNegative) {
  std::ostringstream csv;
  EXPECT_EQ(cli::cmd_sweep(ogd_sector_config(), 0.2, 0.25, 3, false, csv), cli::kExitNegative);
}

TEST(CmdNyquist, OgdLeavesTheDisk) {
  std::ostringstream csv;
  const json cfg = json::parse(R"({"method":{"family":"ogd","eta":0.175},"sector":{"mu":0.5,"L":4}})");
  EXPECT_EQ(cli::cmd_nyquist(cfg, 256, csv), cli::kExitNegative);
  const auto rows = parse_csv(csv.str());
  ASSERT_EQ(rows.size(), 257u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"omega", "re", "im", "inside_disk"}));
  bool outside = false;
  for (std::size_t i = 1; i < rows.size(); ++i) outside = outside || rows[i][3] == "0";
  EXPECT_TRUE(outside);
  std::ostringstream small;
  EXPECT_EQ(cli::cmd_nyquist(json::parse(R"({"method":{"family":"ogd","eta":0.0625},"sector":{"mu":0.5,"L":4}})"), 64, small),
            cli::kExitOk);
}

TEST(CmdSpectrum, AltCrossingBracketsTwoThirds) {
  std::ostringstream csv;
  EXPECT_EQ(cli::cmd_spectrum(0.0, 1.0, 200, csv), cli::kExitOk);
  const auto rows = parse_csv(csv.str());
  ASSERT_EQ(rows.size(), 201u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"s", "alt_max_root", "sim_max_root"}));
  EXPECT_GT(std::stod(rows[1][0]), 0.0);
  EXPECT_EQ(std::stod(rows[200][0]), 1.0);
  int crossings = 0;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const bool before = std::stod(rows[i - 1][1]) < 1.0;
    const bool after = std::stod(rows[i][1]) < 1.0;
    if (before && !after) {
      ++crossings;
      EXPECT_LE(std::stod(rows[i - 1][0]), 2.0 / 3.0);
      EXPECT_GE(std::stod(rows[i][0]), 2.0 / 3.0);
    }
  }
  EXPECT_EQ(crossings, 1);
  EXPECT_THROW(cli::cmd_spectrum(0.5, 0.5, 10, csv), InvalidInput);
}

TEST(CmdSimulate, CsvAndSummary) {
  const json cfg = json::parse(R"({"method":{"family":"gd","eta":0.2},
    "operator":{"kind":"diagonal-quadratic","spectrum":[0.5,4]},"x0":[1,1],"delta":0.05})");
  cli::SimulateArgs args;
  args.steps = 200;
  args.seed = 3;
  args.strategy = NoiseStrategy::random;
  args.coordinates = true;
  std::ostringstream csv, summary;
  EXPECT_EQ(cli::cmd_simulate(cfg, args, csv, summary), cli::kExitOk);
  const auto rows = parse_csv(csv.str());
  ASSERT_EQ(rows.size(), 202u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"k", "distance", "x0", "x1"}));
  const json s = json::parse(summary.str());
  EXPECT_EQ(s["outcome"], "converging");
  EXPECT_EQ(s["steps_run"].get<int>(), 200);
  EXPECT_TRUE(s["rate_estimate"].is_number());
}

TEST(CmdSimulate, MinmaxOperatorAndAlternatingMode) {
  const json mm = json::parse(R"({"method":{"family":"ogd","eta":0.05},
    "operator":{"kind":"minmax-quadratic","p":[[2]],"q":[[1]],"b":[[1]]},"x0":[1,-1]})");
  std::ostringstream csv, summary;
  EXPECT_EQ(cli::cmd_simulate(mm, {}, csv, summary), cli::kExitOk);
  const json alt = json::parse(R"({"method":{"family":"ogd","eta":0.5},
    "operator":{"kind":"bilinear","matrix":[[1]]},"x0":[1,1],"mode":"alternating"})");
  std::ostringstream csv2, summary2;
  EXPECT_EQ(cli::cmd_simulate(alt, {}, csv2, summary2), cli::kExitOk);
  EXPECT_EQ(json::parse(summary2.str())["outcome"], "converging");
  json bad = alt;
  bad["mode"] = "sideways";
  EXPECT_THROW(cli::cmd_simulate(bad, {}, csv2, summary2), InvalidInput);
}

TEST(CmdEquivalence, Examples) {
  std::ostringstream out;
  EXPECT_EQ(cli::cmd_equivalence(json::parse(R"({"family":"ogd","eta":0.1})"), json::parse(R"({"family":"rgd","eta":0.1})"), out),
            cli::kExitOk);
  EXPECT_TRUE(json::parse(out.str())["equal"].get<bool>());
  std::ostringstream out2;
  EXPECT_EQ(cli::cmd_equivalence(json::parse(R"({"family":"gd","eta":0.1})"), json::parse(R"({"family":"ogd","eta":0.1})"), out2),
            cli::kExitNegative);
  const json j = json::parse(out2.str());
  EXPECT_FALSE(j["equal"].get<bool>());
  EXPECT_EQ(j["lhs"]["den"].size(), 2u);
}

TEST(Json, CertificationResultRoundTrip) {
  for (const CertificationQuery& q :
       {CertificationQuery{GradientDescent{0.4444}, {0.5, 4.0, 0.0}, 0.9}, CertificationQuery{GradientDescent{2.0}, {0.5, 4.0, 0.0}, 0.9},
        CertificationQuery{ProximalPoint{0.3}, {0.5, 4.0, 0.0}, 0.9}}) {
    const CertificationResult r = certify(q);
    const json j = io::to_json(r);
    const CertificationResult back = io::parse_certification_result(json::parse(j.dump()));
    EXPECT_EQ(back.proper_ok, r.proper_ok);
    EXPECT_EQ(back.stable_ok, r.stable_ok);
    EXPECT_EQ(back.gain, r.gain);
    EXPECT_EQ(back.argmax_omega, r.argmax_omega);
    EXPECT_EQ(back.threshold, r.threshold);
    EXPECT_EQ(back.margin, r.margin);
    EXPECT_EQ(back.certified, r.certified);
    EXPECT_EQ(back.diagnostics, r.diagnostics);
    EXPECT_EQ(io::to_json(back), j);
  }
}

TEST(Json, ValidatorRejectsInconsistentResults) {
  json j = io::to_json(certify({GradientDescent{0.4444}, {0.5, 4.0, 0.0}, 0.9}));
  j["gain"] = 10.0;
  EXPECT_THROW(io::parse_certification_result(j), InvalidInput);
  json k = io::to_json(certify({GradientDescent{0.4444}, {0.5, 4.0, 0.0}, 0.9}));
  k.erase("margin");
  EXPECT_THROW(io::parse_certification_result(k), InvalidInput);
}

TEST(Json, MethodRoundTrip) {
  for (const MethodSpec& m : {MethodSpec{GradientDescent{0.1}}, MethodSpec{OptimisticGradient{0.0833}},
                              MethodSpec{GeneralizedOptimistic{0.125, 0.0625}}, MethodSpec{ProximalPoint{0.3}},
                              MethodSpec{PidController{0.1, 0.2, -0.1}}, MethodSpec{HistoricalGradient{0.1, {2.0, -1.0}}},
                              MethodSpec{GeneralHistorical{0.2, {1.0, 0.0}, {1.3, -0.3}}}, MethodSpec{PastExtraGradient{0.1}},
                              MethodSpec{ReflectedGradient{0.1}}}) {
    const json j = io::to_json(m);
    EXPECT_EQ(io::to_json(io::parse_method(json::parse(j.dump()))), j) << j.dump();
  }
  const SectorParams s{0.5, 4.0, 0.1};
  const SectorParams back = io::parse_sector(io::to_json(s));
  EXPECT_EQ(back.mu, s.mu);
  EXPECT_EQ(back.L, s.L);
  EXPECT_EQ(back.delta, s.delta);
}

TEST(Json, OperatorSchema) {
  EXPECT_THROW(io::parse_operator(json::parse(R"({"kind":"bilinear","matrix":[[0]]})")), InvalidInput);
  EXPECT_THROW(io::parse_operator(json::parse(R"({"kind":"bilinear","matrix":[[1,2],[3]]})")), InvalidInput);
  EXPECT_THROW(io::parse_operator(json::parse(R"({"kind":"scalar-noncvx","x":1})")), InvalidInput);
  EXPECT_THROW(io::parse_operator(json::parse(R"({"kind":"minmax-quadratic","p":[[1]],"q":[[1]],"b":[[0]],"mu":2})")),
               InvalidInput);
  const io::ParsedOperator mm =
      io::parse_operator(json::parse(R"({"kind":"minmax-quadratic","p":[[4]],"q":[[4]],"b":[[1]],"mu":2})"));
  ASSERT_TRUE(mm.derived_sector.has_value());
  EXPECT_DOUBLE_EQ(mm.derived_sector->mu, 2.0);
}

TEST(Csv, SeventeenDigitsNoLocale) {
  EXPECT_EQ(io::format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_number(1.0), "1");
  EXPECT_EQ(io::format_number(1e-20), "9.9999999999999995e-21");
  EXPECT_EQ(std::stod(io::format_number(M_PI)), M_PI);
}

TEST(Determinism, RepeatedRunsAreByteIdentical) {
  auto sweep = [] {
    std::ostringstream o;
    cli::cmd_sweep(ogd_sector_config(), 0.01, 0.2, 20, false, o);
    return o.str();
  };
  EXPECT_EQ(sweep(), sweep());
  auto simulate = [] {
    const json cfg = json::parse(R"({"method":{"family":"ogd","eta":0.1},
      "operator":{"kind":"diagonal-quadratic","spectrum":[0.5,1,4]},"x0":[1,2,3],"delta":0.1})");
    cli::SimulateArgs a;
    a.steps = 100;
    a.seed = 77;
    a.strategy = NoiseStrategy::random;
    a.coordinates = true;
    std::ostringstream c, s;
    cli::cmd_simulate(cfg, a, c, s);
    return c.str() + s.str();
  };
  EXPECT_EQ(simulate(), simulate());
  auto nyquist = [] {
    std::ostringstream o;
    cli::cmd_nyquist(ogd_sector_config(), 128, o);
    return o.str();
  };
  EXPECT_EQ(nyquist(), nyquist());
}
