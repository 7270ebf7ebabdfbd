#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "latspec/io.hpp"
#include "latspec/multiplier.hpp"

using namespace latspec;

TEST(EvalPsi, CatalogueValues) {
  EXPECT_DOUBLE_EQ(eval_psi(MultiplierSpec::identity(), 1.0), 1.0);
  EXPECT_NEAR(eval_psi(MultiplierSpec::fractional(1.0), 2.0), 1.41421356, 1e-8);
  EXPECT_EQ(eval_psi(MultiplierSpec::relativistic(1.0, 1.0), 0.0), 0.0);
  // (u + 1)^{1/2} - 1 at u = 3
  EXPECT_NEAR(eval_psi(MultiplierSpec::relativistic(1.0, 1.0), 2.0), std::sqrt(3.0) - 1.0, 1e-15);
  EXPECT_NEAR(eval_psi(MultiplierSpec::jump_diffusion(1.0, 0.5), 1.0), 1.5, 1e-15);
  EXPECT_NEAR(eval_psi(MultiplierSpec::higher_order(3.0), 2.0), 8.0, 1e-14);
  EXPECT_NEAR(eval_psi(MultiplierSpec::bernstein(0.5, {{1.0, 2.0}}), 1.0),
              0.5 + (1.0 - std::exp(-2.0)), 1e-15);
}

TEST(EvalPsi, RejectsInvalidParameters) {
  EXPECT_THROW(MultiplierSpec::fractional(0.0), InvalidSpec);
  EXPECT_THROW(MultiplierSpec::fractional(2.0), InvalidSpec);
  EXPECT_THROW(MultiplierSpec::relativistic(1.0, -1.0), InvalidSpec);
  EXPECT_THROW(MultiplierSpec::higher_order(1.0), InvalidSpec);
  EXPECT_THROW(MultiplierSpec::jump_diffusion(1.0, 0.0), InvalidSpec);
  EXPECT_THROW(MultiplierSpec::bernstein(0.0, {{-1.0, 1.0}}), InvalidSpec);
  EXPECT_THROW(MultiplierSpec::bernstein(0.0, {}), InvalidSpec);
  EXPECT_THROW(MultiplierSpec::geometric_stable(std::nan("")), InvalidSpec);
  EXPECT_THROW(eval_psi(MultiplierSpec::identity(), 2.5), std::domain_error);
  EXPECT_THROW(eval_psi(MultiplierSpec::identity(), -0.1), std::domain_error);
}

TEST(SpectralWindow, Examples) {
  auto w = spectral_window(MultiplierSpec::identity());
  EXPECT_EQ(w.lo, 0.0);
  EXPECT_EQ(w.hi, 2.0);
  w = spectral_window(MultiplierSpec::fractional(1.0));
  EXPECT_EQ(w.lo, 0.0);
  EXPECT_NEAR(w.hi, std::sqrt(2.0), 1e-15);
  w = spectral_window(MultiplierSpec::geometric_stable(1.0));
  EXPECT_EQ(w.lo, 0.0);
  EXPECT_NEAR(w.hi, 0.88137359, 1e-8);
}

TEST(SpectralWindow, BoundsAreEvalAtEnds) {
  for (const auto& s : default_catalogue()) {
    const auto w = spectral_window(s);
    EXPECT_EQ(w.lo, s(0.0));
    EXPECT_EQ(w.hi, s(2.0));
    EXPECT_LT(w.lo, w.hi);
  }
}

TEST(Multiplier, StrictlyIncreasingOnGrid) {
  auto cat = default_catalogue();
  cat.push_back(MultiplierSpec::fractional(0.3));
  cat.push_back(MultiplierSpec::fractional(1.7));
  cat.push_back(MultiplierSpec::relativistic(0.5, 2.0));
  cat.push_back(MultiplierSpec::higher_order(3.5));
  cat.push_back(MultiplierSpec::bernstein(0.2, {{1.0, 0.5}, {3.0, 7.0}}));
  for (const auto& s : cat) {
    double prev = s(0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double cur = s(2.0 * i / 1000);
      ASSERT_LT(prev, cur) << kind_name(s.kind()) << " at i=" << i;
      prev = cur;
    }
  }
}

TEST(Multiplier, RiseAndDropMatchDirectDifferences) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  auto cat = default_catalogue();
  cat.push_back(MultiplierSpec::relativistic(0.7, 0.3));
  for (const auto& s : cat) {
    for (int i = 0; i < 200; ++i) {
      const double x = u(rng);
      EXPECT_NEAR(s.rise(x), s(x) - s(0.0), 1e-13 * (1.0 + s(2.0)));
      EXPECT_NEAR(s.drop(x), s(2.0) - s(2.0 - x), 1e-13 * (1.0 + s(2.0)));
    }
    EXPECT_NEAR(s.drop(2.0), s(2.0) - s(0.0), 1e-14 * (1.0 + s(2.0)));
  }
}

TEST(Multiplier, MasslessRelativisticIsFractional) {
  for (double alpha : {0.4, 1.0, 1.6}) {
    const auto rel = MultiplierSpec::relativistic(alpha, 0.0);
    const auto frac = MultiplierSpec::fractional(alpha);
    for (int i = 0; i <= 1000; ++i) {
      const double u = 2.0 * i / 1000;
      ASSERT_EQ(rel(u), frac(u));
    }
    EXPECT_EQ(edge_exponents(rel), edge_exponents(frac));
  }
}

TEST(EdgeExponents, Analytic) {
  EXPECT_EQ(edge_exponents(MultiplierSpec::identity()), (EdgeExponents{1.0, 1.0}));
  EXPECT_EQ(edge_exponents(MultiplierSpec::fractional(1.0)), (EdgeExponents{0.5, 1.0}));
  EXPECT_EQ(edge_exponents(MultiplierSpec::higher_order(2.0)), (EdgeExponents{2.0, 1.0}));
  EXPECT_EQ(edge_exponents(MultiplierSpec::relativistic(1.0, 1.0)), (EdgeExponents{1.0, 1.0}));
  EXPECT_EQ(edge_exponents(MultiplierSpec::jump_diffusion(1.2, 1.0)), (EdgeExponents{0.6, 1.0}));
  EXPECT_EQ(edge_exponents(MultiplierSpec::geometric_stable(1.0)), (EdgeExponents{0.5, 1.0}));
  EXPECT_EQ(edge_exponents(MultiplierSpec::bernstein(0.0, {{1.0, 2.0}})), (EdgeExponents{1.0, 1.0}));
}

TEST(EdgeExponents, BernsteinFamilyIsConcaveAtZero) {
  for (const auto& s : default_catalogue()) {
    if (s.kind() == MultiplierKind::HigherOrder)
      continue;
    EXPECT_LE(edge_exponents(s).a, 1.0) << kind_name(s.kind());
  }
}

TEST(EstimateEdgeExponents, AgreesWithAnalyticWithinFivePercent) {
  auto cat = default_catalogue();
  cat.push_back(MultiplierSpec::fractional(0.5));
  cat.push_back(MultiplierSpec::relativistic(1.0, 0.0));
  for (const auto& s : cat) {
    const auto est = estimate_edge_exponents(s);
    const auto ex = edge_exponents(s);
    EXPECT_NEAR(est.a, ex.a, 0.05 * ex.a) << kind_name(s.kind());
    EXPECT_NEAR(est.b, ex.b, 0.05 * ex.b) << kind_name(s.kind());
  }
}

TEST(EstimateEdgeExponents, Examples) {
  auto e = estimate_edge_exponents(MultiplierSpec::identity());
  EXPECT_NEAR(e.a, 1.0, 0.05);
  EXPECT_NEAR(e.b, 1.0, 0.05);
  e = estimate_edge_exponents(MultiplierSpec::fractional(1.0));
  EXPECT_NEAR(e.a, 0.5, 0.025);
  EXPECT_NEAR(e.b, 1.0, 0.05);
  e = estimate_edge_exponents(MultiplierSpec::geometric_stable(1.0));
  EXPECT_NEAR(e.a, 0.5, 0.025);
  EXPECT_NEAR(e.b, 1.0, 0.05);
}

TEST(EstimateEdgeExponents, FailureCarriesSlopes) {
  EXPECT_THROW(estimate_edge_exponents(MultiplierSpec::identity(), 3), std::invalid_argument);
  // A tiny mass moves the crossover from x^{1/2} to x beyond the sampled range.
  try {
    estimate_edge_exponents(MultiplierSpec::relativistic(1.0, 1e-4), 24, 1e-3);
    FAIL() << "expected EstimationFailure";
  } catch (const EstimationFailure& e) {
    EXPECT_EQ(e.slopes_a().size(), 23u);
    EXPECT_EQ(e.slopes_b().size(), 23u);
  }
}

TEST(MultiplierJson, CanonicalFieldNames) {
  EXPECT_EQ(to_json(MultiplierSpec::fractional(1.0)).dump(), R"({"alpha":1.0,"kind":"fractional"})");
  EXPECT_EQ(to_json(MultiplierSpec::bernstein(0.0, {{1.0, 2.0}})).dump(),
            R"({"atoms":[{"w":1.0,"y":2.0}],"drift":0.0,"kind":"bernstein"})");
  const auto s = multiplier_from_json(nlohmann::json::parse(R"({"kind": "fractional", "alpha": 1.0})"));
  EXPECT_EQ(s, MultiplierSpec::fractional(1.0));
}

TEST(MultiplierJson, RoundTripsEveryCatalogueEntry) {
  auto cat = default_catalogue();
  cat.push_back(MultiplierSpec::bernstein(0.25, {{0.5, 1.5}, {2.0, 0.1}}));
  for (const auto& s : cat)
    EXPECT_EQ(multiplier_from_json(nlohmann::json::parse(to_json(s).dump())), s);
}

TEST(MultiplierJson, RejectsMalformed) {
  EXPECT_THROW(multiplier_from_json(nlohmann::json::parse(R"({"kind":"fractional"})")), InvalidSpec);
  EXPECT_THROW(multiplier_from_json(nlohmann::json::parse(R"({"kind":"banana"})")), InvalidSpec);
  EXPECT_THROW(multiplier_from_json(nlohmann::json::parse(R"({"kind":"fractional","alpha":3})")),
               InvalidSpec);
}
