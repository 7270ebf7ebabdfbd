#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/ellint_1.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "latspec/io.hpp"
#include "latspec/torus_quadrature.hpp"

using namespace latspec;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// Simple-cubic lattice Green constant in closed form.
double watson_w3() {
  using boost::math::tgamma;
  return std::sqrt(6.0) / (32.0 * std::pow(pi, 3)) * tgamma(1.0 / 24) * tgamma(5.0 / 24) *
         tgamma(7.0 / 24) * tgamma(11.0 / 24);
}

/// Independent 2-d oracle: nested adaptive Gauss-Kronrod over [0, pi]^2.
double nested_gk_J(const MultiplierSpec& s, double e) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto inner = [&](double t1) {
    auto f = [&](double t2) {
      const double th[2] = {t1, t2};
      return 1.0 / (e - symbol_g(s, th));
    };
    return GK::integrate(f, 0.0, pi, 15, 1e-13);
  };
  return 4.0 * GK::integrate(inner, 0.0, pi, 15, 1e-12);
}

double value(const IntegralEstimate& est) {
  EXPECT_TRUE(est.finite);
  EXPECT_TRUE(est.value.has_value());
  return est.value.value_or(std::nan(""));
}

} // namespace

TEST(SymbolG, Examples) {
  const auto id = MultiplierSpec::identity();
  for (int d = 1; d <= 4; ++d) {
    std::vector<double> zero(d, 0.0), corner(d, pi);
    EXPECT_DOUBLE_EQ(symbol_g(id, zero), 2.0);
    EXPECT_NEAR(symbol_g(id, corner), 0.0, 1e-15);
  }
  const double half[2] = {pi / 2, pi / 2};
  EXPECT_NEAR(symbol_g(id, half), 1.0, 1e-15);
}

TEST(SymbolG, RangeOverRandomAngles) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (const auto& s : default_catalogue()) {
    const auto w = spectral_window(s);
    for (int i = 0; i < 10000; ++i) {
      const int d = 1 + i % 8;
      std::vector<double> th(d);
      for (auto& t : th)
        t = u(rng);
      const double g = symbol_g(s, th);
      ASSERT_GE(g, w.lo);
      ASSERT_LE(g, w.hi);
    }
  }
}

TEST(EdgeFiniteness, Examples) {
  auto v = edge_finiteness(1.0, 3);
  EXPECT_TRUE(v.J_finite);
  EXPECT_FALSE(v.I_finite);
  v = edge_finiteness(0.5, 2);
  EXPECT_TRUE(v.J_finite);
  EXPECT_FALSE(v.I_finite);
  v = edge_finiteness(1.0, 5);
  EXPECT_TRUE(v.J_finite);
  EXPECT_TRUE(v.I_finite);
  EXPECT_THROW(edge_finiteness(0.0, 3), std::invalid_argument);
  EXPECT_THROW(edge_finiteness(1.0, 9), std::invalid_argument);
}

TEST(EdgeFiniteness, IFiniteImpliesJFinite) {
  for (double e : {0.1, 0.25, 0.5, 0.6, 1.0, 1.5, 2.0, 3.0})
    for (int d = 1; d <= 8; ++d) {
      const auto v = edge_finiteness(e, d);
      EXPECT_TRUE(!v.I_finite || v.J_finite);
      EXPECT_EQ(v.exponent_used, e);
    }
}

TEST(GaussLegendre, ExactForPolynomials) {
  for (int n : {2, 5, 8, 10, 16}) {
    const auto r = detail::gauss_legendre(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double q = 0.0;
      for (int i = 0; i < n; ++i)
        q += r.w[i] * std::pow(r.x[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(q, exact, 1e-14) << "n=" << n << " p=" << p;
    }
  }
}

TEST(IntegralJ, ClosedFormOneDimension) {
  const auto id = MultiplierSpec::identity();
  const TorusDomain dom{1};
  EXPECT_NEAR(value(integral_J(id, dom, 3.0)), 2 * pi / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(value(integral_I(id, dom, 3.0)), 4 * pi / std::pow(3.0, 1.5), 1e-12);
  for (double c : {1.001, 1.1, 2.0, 10.0, 1000.0}) {
    const double e = 1.0 + c;
    EXPECT_LT(rel_err(value(integral_J(id, dom, e)), 2 * pi / std::sqrt(c * c - 1)), 1e-9) << c;
    EXPECT_LT(rel_err(value(integral_I(id, dom, e)), 2 * pi * c / std::pow(c * c - 1, 1.5)), 1e-8)
        << c;
  }
}

TEST(IntegralJ, EllipticOracleTwoDimensions) {
  const auto id = MultiplierSpec::identity();
  const TorusDomain dom{2};
  for (double e : {2.001, 2.05, 2.5, 4.0, 20.0}) {
    const double c = e - 1.0;
    const double exact = std::pow(2 * pi, 2) * 2.0 / (pi * c) * boost::math::ellint_1(1.0 / c);
    EXPECT_LT(rel_err(value(integral_J(id, dom, e)), exact), 1e-8) << e;
  }
}

TEST(IntegralJ, NestedGaussKronrodOracleFractional) {
  const auto s = MultiplierSpec::fractional(1.0);
  const TorusDomain dom{2};
  for (double e : {std::sqrt(2.0) + 0.3, std::sqrt(2.0) + 3.0, -0.3, -2.0}) {
    const double ref = nested_gk_J(s, e);
    EXPECT_LT(rel_err(value(integral_J(s, dom, e)), ref), 1e-7) << e;
  }
}

TEST(IntegralJ, WatsonConstantAtTopEdge) {
  const auto est = integral_J(MultiplierSpec::identity(), TorusDomain{3}, 2.0);
  ASSERT_TRUE(est.finite);
  EXPECT_EQ(est.method, QuadratureMethod::GradedShells);
  const double w3 = *est.value / std::pow(2 * pi, 3);
  EXPECT_NEAR(watson_w3(), 1.5163860591, 1e-9);
  EXPECT_LT(rel_err(w3, watson_w3()), 1e-5);
  EXPECT_NEAR(*est.value, 376.1397, 1e-3);
}

TEST(IntegralJ, EdgeValueMatchesExteriorExtrapolation) {
  // J(2 + eps) = J0 - c sqrt(eps) + O(eps) for d = 3, so 2 J(eps/4) - J(eps) -> J0.
  const auto id = MultiplierSpec::identity();
  const TorusDomain dom{3};
  const double j0 = value(integral_J(id, dom, EdgeOffset{Edge::Top, 0.0}));
  const double eps = 1e-6;
  const double j1 = value(integral_J(id, dom, EdgeOffset{Edge::Top, eps}));
  const double j4 = value(integral_J(id, dom, EdgeOffset{Edge::Top, eps / 4}));
  EXPECT_LT(rel_err(2 * j4 - j1, j0), 1e-4);
  EXPECT_LT(j1, j4);
  EXPECT_LT(j4, j0);
}

TEST(IntegralJ, DivergentEdges) {
  const auto est = integral_J(MultiplierSpec::fractional(1.0), TorusDomain{1}, 0.0);
  EXPECT_FALSE(est.finite);
  EXPECT_FALSE(est.value.has_value());
  EXPECT_EQ(est.method, QuadratureMethod::Divergent);
  EXPECT_FALSE(integral_I(MultiplierSpec::identity(), TorusDomain{3}, 2.0).finite);
  EXPECT_TRUE(integral_I(MultiplierSpec::fractional(1.0), TorusDomain{3}, 0.0).finite);
}

TEST(IntegralJ, RectangleAndGradedRoutesAgree) {
  QuadratureOptions opt;
  const auto id = MultiplierSpec::identity();
  for (int d = 1; d <= 3; ++d) {
    for (double gap : {0.5, 2.0}) {
      const detail::ResolventKernel f{&id, Edge::Top, gap, d, 1};
      const auto rect = detail::rectangle_integral(f, opt, 1e-10);
      ASSERT_TRUE(rect.has_value());
      EXPECT_EQ(rect->method, QuadratureMethod::PeriodicRectangle);
      const auto graded = detail::graded_integral(f, opt, 1e-10, true);
      EXPECT_LT(rel_err(*graded.value, *rect->value), 1e-9) << "d=" << d << " gap=" << gap;
    }
  }
}

TEST(IntegralJ, RejectsInteriorEnergies) {
  const auto id = MultiplierSpec::identity();
  EXPECT_THROW(integral_J(id, TorusDomain{1}, 1.0), InteriorEnergy);
  EXPECT_THROW(integral_I(id, TorusDomain{2}, 0.5), InteriorEnergy);
  EXPECT_THROW(integral_J(id, TorusDomain{9}, 3.0), std::invalid_argument);
  EXPECT_THROW(integral_J(id, TorusDomain{1}, EdgeOffset{Edge::Top, -1.0}), std::invalid_argument);
}

TEST(IntegralProperties, DerivativeIdentity) {
  QuadratureOptions opt;
  opt.tol_exterior = 1e-12;
  for (const auto& s : default_catalogue()) {
    for (int d = 1; d <= 3; ++d) {
      const TorusDomain dom{d};
      for (const auto& off : {EdgeOffset{Edge::Top, 0.5}, EdgeOffset{Edge::Bottom, 0.5}}) {
        const double e = energy_of(s, off);
        const double h = 1e-3;
        const double dj = (value(integral_J(s, dom, e + h, opt)) - value(integral_J(s, dom, e - h, opt))) /
                          (2 * h);
        const double i = value(integral_I(s, dom, e, opt));
        EXPECT_LT(rel_err(-dj, i), 1e-4) << kind_name(s.kind()) << " d=" << d;
      }
    }
  }
}

TEST(IntegralProperties, TailNormalization) {
  for (const auto& s : default_catalogue())
    for (int d = 1; d <= 3; ++d) {
      const double e = 1e3 * s(2.0);
      const double ej = e * value(integral_J(s, TorusDomain{d}, e));
      EXPECT_LT(rel_err(ej, std::pow(2 * pi, d)), 0.01);
    }
}

TEST(IntegralProperties, Monotonicity) {
  for (const auto& s : default_catalogue()) {
    for (int d = 1; d <= 3; ++d) {
      double prev_top = HUGE_VAL, prev_bottom = -HUGE_VAL;
      for (int k = 0; k < 20; ++k) {
        const double gap = 0.01 * std::pow(1.5, k);
        const double jt = value(integral_J(s, TorusDomain{d}, EdgeOffset{Edge::Top, gap}));
        const double jb = value(integral_J(s, TorusDomain{d}, EdgeOffset{Edge::Bottom, gap}));
        EXPECT_LT(jt, prev_top);
        EXPECT_GT(jb, prev_bottom);
        EXPECT_GT(jt, 0.0);
        EXPECT_LT(jb, 0.0);
        prev_top = jt;
        prev_bottom = jb;
      }
    }
  }
}

TEST(IntegralProperties, IdentitySymmetry) {
  const auto id = MultiplierSpec::identity();
  for (int d = 1; d <= 4; ++d) {
    for (double t : {0.01, 0.3, 1.0, 5.0}) {
      const TorusDomain dom{d};
      EXPECT_LT(rel_err(-value(integral_J(id, dom, -t)), value(integral_J(id, dom, 2 + t))), 1e-8);
      EXPECT_LT(rel_err(value(integral_I(id, dom, -t)), value(integral_I(id, dom, 2 + t))), 1e-8);
    }
  }
}

TEST(IntegralProperties, TracesCorroborateFiniteness) {
  QuadratureOptions opt;
  for (const auto& s : default_catalogue()) {
    const auto ex = edge_exponents(s);
    for (int d = 1; d <= 6; ++d) {
      for (Edge edge : {Edge::Bottom, Edge::Top}) {
        const auto verdict = edge_finiteness(edge_exponent(ex, edge), d);
        for (int power : {1, 2}) {
          const bool finite = power == 1 ? verdict.J_finite : verdict.I_finite;
          const EdgeOffset off{edge, 0.0};
          const auto est = power == 1 ? integral_J(s, TorusDomain{d}, off, opt)
                                      : integral_I(s, TorusDomain{d}, off, opt);
          SCOPED_TRACE(std::string(kind_name(s.kind())) + " d=" + std::to_string(d) + " " +
                       std::string(edge_name(edge)) + " power=" + std::to_string(power));
          ASSERT_EQ(est.finite, finite);
          const auto& tr = est.trace;
          ASSERT_GE(tr.size(), 4u);
          if (finite) {
            EXPECT_TRUE(est.converged);
          } else {
            // Shell increments of a divergent integral do not decay.
            const std::size_t n = tr.size();
            const double late = std::abs(tr[n - 1] - tr[n - 2]);
            const double early = std::abs(tr[n - 11] - tr[n - 12]);
            EXPECT_GT(late, 0.5 * early);
            EXPECT_GT(std::abs(tr.back()), std::abs(tr[n / 2]));
          }
        }
      }
    }
  }
}

TEST(IntegralProperties, InteriorTraceGrows) {
  const auto id = MultiplierSpec::identity();
  for (int d = 1; d <= 3; ++d) {
    const auto tr = interior_divergence_trace(id, TorusDomain{d}, 0.7, 6);
    ASSERT_EQ(tr.size(), 6u);
    EXPECT_GT(tr.back(), 10.0 * tr.front());
  }
}

TEST(FourierCoefficient, SiteZeroIsJ) {
  for (const auto& s : default_catalogue()) {
    for (int d = 1; d <= 3; ++d) {
      const std::vector<int> origin(d, 0);
      for (const auto& off : {EdgeOffset{Edge::Top, 0.2}, EdgeOffset{Edge::Bottom, 1.0}}) {
        const double k0 = value(resolvent_fourier_coefficient(s, TorusDomain{d}, off, origin));
        const double j = value(integral_J(s, TorusDomain{d}, off));
        EXPECT_LT(rel_err(k0, j), 1e-7) << kind_name(s.kind()) << " d=" << d;
      }
    }
  }
}

TEST(FourierCoefficient, OneDimensionalClosedForm) {
  // int cos(x theta) / (c - cos theta) = 2 pi r^|x| / sqrt(c^2 - 1), r = c - sqrt(c^2 - 1).
  const auto id = MultiplierSpec::identity();
  const double c = 2.0;
  const double r = c - std::sqrt(c * c - 1);
  for (int x = -4; x <= 4; ++x) {
    const int site[1] = {x};
    const double k = value(resolvent_fourier_coefficient(id, TorusDomain{1}, EdgeOffset{Edge::Top, 1.0}, site));
    EXPECT_NEAR(k, 2 * pi * std::pow(r, std::abs(x)) / std::sqrt(c * c - 1), 1e-9) << x;
    // Below the band the sign alternates with the site parity.
    const double kb =
        value(resolvent_fourier_coefficient(id, TorusDomain{1}, EdgeOffset{Edge::Bottom, 1.0}, site));
    EXPECT_NEAR(kb, -std::pow(-1.0, x) * k, 1e-9) << x;
  }
}

TEST(IntegralEstimateJson, Fields) {
  const auto j = to_json(integral_J(MultiplierSpec::identity(), TorusDomain{1}, 3.0));
  for (const char* key : {"finite", "value", "abs_error", "trace", "converged", "method"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j["finite"].get<bool>());
  const auto div = to_json(integral_J(MultiplierSpec::identity(), TorusDomain{1}, 2.0));
  EXPECT_TRUE(div["value"].is_null());
}
