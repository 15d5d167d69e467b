#include <gtest/gtest.h>

#include <cmath>

#include "qfrac/awop.hpp"

using namespace qfrac;

namespace {

SymmetricLaurentFn hermite_breve(std::size_t n, const QContext& ctx) {
  return SymmetricLaurentFn([n, ctx](cplx z) { return hermite_eval(n, 0.5 * (z + 1.0 / z), ctx); });
}

SymmetricLaurentFn g_hermite_breve(std::size_t n, const QContext& ctx) {
  return SymmetricLaurentFn([n, ctx](cplx z) {
    const cplx x = 0.5 * (z + 1.0 / z);
    return g_eval(x, ctx) * hermite_eval(n, x, ctx);
  });
}

SymmetricLaurentFn hermite_over_g_breve(std::size_t n, const QContext& ctx) {
  return SymmetricLaurentFn([n, ctx](cplx z) {
    const cplx x = 0.5 * (z + 1.0 / z);
    return hermite_eval(n, x, ctx) / g_eval(x, ctx);
  });
}

const double xs[] = {-1.0, -0.6, -0.1, 0.35, 0.8, 1.0};

}  // namespace

TEST(DqOperator, LowDegreeMonomials) {
  for (double q : {0.3, 0.5, 0.8}) {
    const QContext ctx(q);
    const auto one = SymmetricLaurentFn::from_x([](cplx x) { return cplx(1.0) + 0.0 * x; });
    const auto lin = SymmetricLaurentFn::from_x([](cplx x) { return x; });
    const auto sq = SymmetricLaurentFn::from_x([](cplx x) { return x * x; });
    for (double x : xs) {
      EXPECT_NEAR(dq_apply(one, x, ctx), 0.0, 1e-12);
      EXPECT_NEAR(dq_apply(lin, x, ctx), 1.0, 1e-9);
      // D_q x^2 = (1 + q) q^{-1/2} x
      EXPECT_NEAR(dq_apply(sq, x, ctx), (1.0 + q) / std::sqrt(q) * x, 1e-8) << "q=" << q << " x=" << x;
    }
  }
}

TEST(DqOperator, HermiteLowering) {
  for (double q : {0.3, 0.5, 0.8}) {
    const QContext ctx(q);
    for (std::size_t n = 1; n <= 8; ++n) {
      const double dn = static_cast<double>(n);
      const double c = 2.0 * (1.0 - std::pow(q, dn)) / (1.0 - q) * std::pow(q, (1.0 - dn) / 2.0);
      for (double x : xs)
        EXPECT_NEAR(dq_apply(hermite_breve(n, ctx), x, ctx), c * hermite_eval(n - 1, x, ctx),
                    1e-8 * std::max(1.0, std::abs(c) * std::pow(2.0, dn)))
            << "q=" << q << " n=" << n << " x=" << x;
    }
  }
}

TEST(DqOperator, SeriesAgreesWithPointwise) {
  const QContext ctx(0.5);
  const HermiteSeries s(ctx, {0.3, -1.0, 0.5, 0.25, -0.125});
  const HermiteSeries d = dq_series(s);
  const auto sb = SymmetricLaurentFn([s](cplx z) { return s(0.5 * (z + 1.0 / z)); });
  for (double x : xs) EXPECT_NEAR(dq_apply(sb, x, ctx), d(x), 1e-8);
  const HermiteSeries d2 = dq_series(d);
  const auto p2 = dq_power(sb, 2, ctx);
  for (double x : {-0.5, 0.2, 0.7}) {
    const cplx z = std::polar(1.0, std::acos(x));
    EXPECT_NEAR(p2(z).real(), d2(x), 1e-7);
  }
  EXPECT_EQ(dq_series(HermiteSeries(ctx, {2.0})).size(), 1u);
}

TEST(DivDiffEigen, GTimesHermiteAndHermiteOverG) {
  for (double q : {0.3, 0.5, 0.8}) {
    const QContext ctx(q);
    for (std::size_t m = 0; m <= 6; ++m) {
      const double lam = divdiff_eigenvalue(m, ctx);
      EXPECT_NEAR(lam, 2.0 * std::pow(q, 0.25) / (1.0 - q) * std::pow(q, -0.5 * m), 1e-14 * lam);
      for (double x : {-0.9, -0.2, 0.4, 0.95}) {
        const double gh = g_eval(x, ctx) * hermite_eval(m, x, ctx);
        const double hg = hermite_eval(m, x, ctx) / g_eval(x, ctx);
        const double tol = 1e-8 * lam * std::max(1.0, std::pow(2.0, m));
        EXPECT_NEAR(dq_apply(g_hermite_breve(m, ctx), x, ctx), lam * gh, tol * g_eval(x, ctx));
        EXPECT_NEAR(cq_apply(hermite_over_g_breve(m, ctx), x, ctx), lam * hg, tol / g_eval(x, ctx));
        EXPECT_NEAR(bq_apply(hermite_breve(m, ctx), x, ctx), lam * hermite_eval(m, x, ctx), tol);
      }
    }
  }
}

TEST(DivDiffEigen, ExplicitBqFormCarriesQuarterPower) {
  for (double q : {0.3, 0.5, 0.8}) {
    const QContext ctx(q);
    for (std::size_t m = 0; m <= 4; ++m)
      for (double x : {-0.7, 0.3}) {
        const double b = bq_apply(hermite_breve(m, ctx), x, ctx);
        const double e = bq_explicit_apply(hermite_breve(m, ctx), x, ctx);
        if (std::abs(b) > 1e-6) EXPECT_NEAR(e / b, std::pow(q, 0.25), 1e-8) << "q=" << q << " m=" << m;
      }
  }
}

TEST(DivDiff, EndpointLimitMatchesInterior) {
  const QContext ctx(0.5);
  const auto f = hermite_breve(3, ctx);
  EXPECT_NEAR(dq_apply(f, 1.0, ctx), dq_apply(f, 1.0 - 1e-4, ctx), 1e-2);
  EXPECT_NEAR(dq_apply(f, -1.0, ctx), dq_apply(f, -1.0 + 1e-4, ctx), 1e-2);
}

TEST(DivDiff, RejectsNonSymmetricEvaluator) {
  const QContext ctx(0.5);
  const SymmetricLaurentFn bad([](cplx z) { return z; });
  EXPECT_THROW(dq_apply(bad, 0.3, ctx), NumericalError);
  EXPECT_THROW(dq_apply(hermite_breve(1, ctx), 1.5, ctx), DomainError);
}
