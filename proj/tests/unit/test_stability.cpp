#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "histcert/error.hpp"
#include "histcert/stability.hpp"
#include "support/oracles.hpp"

using namespace histcert;

namespace {

double residual_bound(const Polynomial& p) { return 1e-8 * p.norm(); }

}  // namespace

TEST(Roots, Linear) {
  const auto r = roots(Polynomial({-0.5, 1.0}));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0].real(), 0.5, 1e-15);
}

TEST(Roots, ConstantHasNone) { EXPECT_TRUE(roots(Polynomial::constant(3.0)).empty()); }

TEST(Roots, OgdGdQuadraticMatchesQuadraticFormula) {
  const double eta = 0.25;
  const Polynomial p({-3.0 * eta, 6.0 * eta - 1.0, 1.0});
  auto r = roots(p);
  std::sort(r.begin(), r.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  const double disc = std::sqrt(36.0 * eta * eta + 1.0);
  EXPECT_NEAR(r[0].real(), (1.0 - 6.0 * eta - disc) / 2.0, 1e-12);
  EXPECT_NEAR(r[1].real(), (1.0 - 6.0 * eta + disc) / 2.0, 1e-12);
  EXPECT_NEAR(r[1].real(), 0.6514, 1e-4);
  EXPECT_NEAR(r[0].real(), -1.1514, 1e-4);
}

TEST(Roots, AltCubicVietaAndOracle) {
  const Polynomial p({0.25, 0.0, -1.0, 1.0});
  const auto r = roots(p);
  ASSERT_EQ(r.size(), 3u);
  const Complex prod = r[0] * r[1] * r[2];
  EXPECT_NEAR(prod.real(), -0.25, 1e-12);
  EXPECT_NEAR(prod.imag(), 0.0, 1e-12);
  const auto dk = oracle::durand_kerner(p.coeffs());
  for (const Complex& z : r) {
    double best = 1e300;
    for (const auto& w : dk) best = std::min(best, std::abs(z - w));
    EXPECT_LT(best, 1e-10);
  }
}

TEST(Roots, ExactZeroRootsAreFactored) {
  const auto r = roots(Polynomial({0.0, 0.0, -1.0, 1.0}));
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(std::count(r.begin(), r.end(), Complex(0.0)), 2);
}

TEST(Schur, Examples) {
  EXPECT_TRUE(is_schur(Polynomial({-0.5, 1.0})));
  EXPECT_FALSE(is_schur(Polynomial({-0.75, 6.0 * 0.25 - 1.0, 1.0})));
  // Alternating OGD exactly on its stability boundary: z = -1 is a root.
  const Polynomial boundary({4.0 / 9.0, -7.0 / 9.0, -2.0 / 9.0, 1.0});
  EXPECT_NEAR(boundary(-1.0), 0.0, 1e-15);
  EXPECT_FALSE(is_schur(boundary));
}

TEST(Schur, MarginShrinksTheDisk) {
  const Polynomial p({-0.5, 1.0});
  EXPECT_TRUE(is_schur(p, 0.4));
  EXPECT_FALSE(is_schur(p, 0.5));
  EXPECT_FALSE(is_schur(p, 0.6));
}

TEST(Schur, MarginalRootIsNotStable) {
  EXPECT_FALSE(is_schur(Polynomial({-(1.0 - 1e-10), 1.0})));
  EXPECT_FALSE(is_schur(Polynomial({-1.0, 1.0})));
}

TEST(Schur, RejectsZeroPolynomialAndNegativeMargin) {
  EXPECT_THROW(is_schur(Polynomial()), InvalidInput);
  EXPECT_THROW(is_schur(Polynomial({1.0, 1.0}), -0.1), InvalidInput);
}

TEST(SpectralRadius, Examples) {
  EXPECT_NEAR(spectral_radius_poly(Polynomial({0.0, 1.0, -2.0, 1.0})), 1.0, 1e-7);
  EXPECT_NEAR(spectral_radius_poly(Polynomial({4.0 / 9.0, -7.0 / 9.0, -2.0 / 9.0, 1.0})), 1.0, 1e-9);
  EXPECT_NEAR(spectral_radius_poly(Polynomial({-0.25, 0.0, 1.0})), 0.5, 1e-15);
}

// -- Properties over random polynomials --------------------------------------

class RandomPolynomials : public ::testing::Test {
 protected:
  std::mt19937_64 gen{20240611};
  Polynomial next() {
    std::uniform_int_distribution<int> deg(1, 8);
    return Polynomial(oracle::random_poly(gen, deg(gen)));
  }
};

TEST_F(RandomPolynomials, ResidualBound) {
  for (int i = 0; i < 1000; ++i) {
    const Polynomial p = next();
    const auto r = roots(p);
    ASSERT_EQ(static_cast<int>(r.size()), p.degree());
    for (const Complex& z : r) EXPECT_LE(std::abs(p(z)), residual_bound(p));
  }
}

TEST_F(RandomPolynomials, ReconstructionFromRoots) {
  for (int i = 0; i < 1000; ++i) {
    const Polynomial p = next();
    const Polynomial rebuilt = Polynomial::from_roots(roots(p)) * p.leading();
    ASSERT_EQ(rebuilt.degree(), p.degree());
    const double scale = p.max_abs_coeff();
    for (int k = 0; k <= p.degree(); ++k) EXPECT_LE(std::abs(rebuilt[static_cast<std::size_t>(k)] - p[static_cast<std::size_t>(k)]), 1e-7 * scale);
  }
}

TEST_F(RandomPolynomials, IsSchurMatchesSpectralRadius) {
  int stable = 0;
  for (int i = 0; i < 1000; ++i) {
    // Shrink half of the samples toward the origin so both verdicts occur.
    Polynomial p = next();
    if (i % 2 == 0) p = p.scaled_argument(2.0);
    const double rmax = spectral_radius_poly(p);
    if (std::abs(rmax - 1.0) < 1e-9) continue;
    const bool verdict = is_schur(p, 0.0);
    EXPECT_EQ(verdict, rmax < 1.0) << "rmax = " << rmax;
    stable += verdict;
  }
  EXPECT_GT(stable, 50);
}

TEST_F(RandomPolynomials, CoefficientTestAgreesWithRootMagnitudes) {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> radius(0.0, 1.3);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  int agreements = 0;
  for (int i = 0; i < 1000; ++i) {
    // Roots drawn directly so stable and unstable cases are balanced.
    std::vector<Complex> r;
    std::uniform_int_distribution<int> pairs(0, 4);
    const int np = pairs(g);
    for (int k = 0; k < np; ++k) {
      const Complex z = std::polar(radius(g), angle(g));
      r.push_back(z);
      r.push_back(std::conj(z));
    }
    if (r.empty() || i % 3 == 0) r.emplace_back(radius(g) * (i % 2 ? 1.0 : -1.0));
    const Polynomial p = Polynomial::from_roots(r);
    const double rmax = oracle::max_abs(oracle::durand_kerner(p.coeffs()));
    if (std::abs(rmax - 1.0) < 1e-9) continue;
    EXPECT_EQ(schur_cohn_test(p), rmax < 1.0) << "rmax = " << rmax;
    ++agreements;
  }
  EXPECT_GT(agreements, 990);
}
