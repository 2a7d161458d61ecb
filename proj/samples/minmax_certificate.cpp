// Certify GD and OGD on a strongly convex-concave quadratic game
//   f(x, y) = x'Px/2 + x'By - y'Qy/2.
// The sector [mu, L] is derived from the blocks, then the best certified
// rate is compared against a simulated run.

#include <cstdio>

#include "histcert/histcert.hpp"

using namespace histcert;

int main() {
  MinmaxBlocks blocks;
  blocks.p = Eigen::MatrixXd::Identity(2, 2) * 2.0;
  blocks.q = Eigen::MatrixXd::Identity(2, 2) * 1.5;
  blocks.b.resize(2, 2);
  blocks.b << 1.0, 0.5, -0.25, 1.0;
  const MinmaxOperator mm = build_minmax_operator(blocks);
  std::printf("sector: mu = %.6f, L = %.6f (modulus %.3f, co-coercivity %.6f)\n", mm.sector.mu, mm.sector.L,
              mm.strong_convexity, mm.cocoercivity);

  const double L = mm.sector.L;
  Eigen::VectorXd x0 = Eigen::VectorXd::Ones(4);
  for (const MethodSpec& m : {MethodSpec{GradientDescent{1.0 / L}}, MethodSpec{OptimisticGradient{1.0 / (2.0 * L)}}}) {
    const RateSearchResult r = best_rate(m, mm.sector);
    RunOptions opt;
    opt.steps = 300;
    const Trajectory t = run(m, mm.op, x0, opt);
    const double observed = estimate_rate(t);
    if (r.certifiable)
      std::printf("%-4s certified rho = %.6f, observed %.6f\n", std::string(family_name(m)).c_str(), r.rho, observed);
    else
      std::printf("%-4s not certified, observed %.6f\n", std::string(family_name(m)).c_str(), observed);
  }
  return 0;
}
