// histcert: certify, sweep and simulate historical gradient methods.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "histcert/commands.hpp"

namespace cli = histcert::cli;

int main(int argc, char** argv) {
  CLI::App app{"Small-gain convergence certificates for historical gradient methods"};
  app.require_subcommand(1);
  // CLI11 reports usage errors with its own codes; keep the tool's 0/1/2 contract.
  app.set_help_flag("-h,--help", "Print help and exit");

  std::string config;
  std::string out;
  bool allow_improper = false;

  auto* certify = app.add_subcommand("certify", "Run the small-gain certificate at one rate");
  certify->add_option("--config", config, "JSON run config")->required();
  certify->add_flag("--allow-improper", allow_improper, "Admit controllers that are proper but not strictly proper");

  double eta_min = 0.0, eta_max = 0.0;
  int eta_steps = 0;
  auto* sweep = app.add_subcommand("sweep", "Best certified rate over a step-size grid");
  sweep->add_option("--config", config, "JSON run config")->required();
  sweep->add_option("--eta-min", eta_min, "Smallest step size")->required();
  sweep->add_option("--eta-max", eta_max, "Largest step size")->required();
  sweep->add_option("--eta-steps", eta_steps, "Number of grid points")->required();
  sweep->add_option("--out", out, "Output CSV (default: stdout)");
  sweep->add_flag("--allow-improper", allow_improper, "Admit controllers that are proper but not strictly proper");

  int points = 512;
  auto* nyquist = app.add_subcommand("nyquist", "Sample K'(e^{jw}) against the circle criterion disk");
  nyquist->add_option("--config", config, "JSON run config")->required();
  nyquist->add_option("--points", points, "Number of frequencies (>= 64)");
  nyquist->add_option("--out", out, "Output CSV (default: stdout)");

  double s_min = 0.0, s_max = 1.0;
  int s_points = 200;
  auto* spectrum = app.add_subcommand("spectrum", "Alternating and simultaneous OGD spectrum curves");
  spectrum->add_option("--s-min", s_min, "Left end of the (open) s interval");
  spectrum->add_option("--s-max", s_max, "Right end of the s interval");
  spectrum->add_option("--points", s_points, "Number of points");
  spectrum->add_option("--out", out, "Output CSV (default: stdout)");

  cli::SimulateArgs sim;
  std::string strategy = "none";
  std::uint64_t seed = 0;
  std::size_t steps = 500;
  auto* simulate = app.add_subcommand("simulate", "Run the method on a test operator");
  simulate->add_option("--config", config, "JSON run config")->required();
  simulate->add_option("--steps", steps, "Number of iterations");
  simulate->add_option("--seed", seed, "Seed for the random adversary");
  simulate->add_option("--noise-strategy", strategy, "none, scale_up, scale_down, rotate or random")
      ->check(CLI::IsMember({"none", "scale_up", "scale_down", "rotate", "random"}));
  simulate->add_flag("--coords", sim.coordinates, "Add per-coordinate columns");
  simulate->add_option("--out", out, "Output CSV (default: stdout)");

  std::string lhs, rhs;
  auto* equivalence = app.add_subcommand("equivalence", "Compare the transfer functions of two methods");
  equivalence->add_option("--lhs", lhs, "Method JSON")->required();
  equivalence->add_option("--rhs", rhs, "Method JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitError;
  }

  return cli::run_guarded(
      [&]() -> int {
        if (*certify) return cli::cmd_certify(cli::load_config(config), allow_improper, std::cout);
        if (*sweep) {
          const auto cfg = cli::load_config(config);
          return cli::with_output(out, [&](std::ostream& os) {
            return cli::cmd_sweep(cfg, eta_min, eta_max, eta_steps, allow_improper, os);
          });
        }
        if (*nyquist) {
          const auto cfg = cli::load_config(config);
          return cli::with_output(out, [&](std::ostream& os) { return cli::cmd_nyquist(cfg, points, os); });
        }
        if (*spectrum)
          return cli::with_output(out, [&](std::ostream& os) { return cli::cmd_spectrum(s_min, s_max, s_points, os); });
        if (*simulate) {
          const auto cfg = cli::load_config(config);
          sim.steps = steps;
          sim.seed = seed;
          sim.strategy = histcert::parse_strategy(strategy);
          // With the CSV on stdout the summary goes to stderr so the two never mix.
          std::ostream& summary = (out.empty() || out == "-") ? std::cerr : std::cout;
          return cli::with_output(out, [&](std::ostream& os) { return cli::cmd_simulate(cfg, sim, os, summary); });
        }
        return cli::cmd_equivalence(cli::parse_config_text(lhs), cli::parse_config_text(rhs), std::cout);
      },
      std::cerr);
}
