#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "qfrac/semigroups.hpp"

using namespace qfrac;

namespace {

using Fn = std::function<double(double)>;

double sup_diff(const Fn& a, const Fn& b, int n = 41) {
  double m = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -1.0 + 2.0 * i / (n - 1);
    m = std::max(m, std::abs(a(x) - b(x)));
  }
  return m;
}

double sup_abs(const Fn& a, int n = 41) {
  return sup_diff(a, [](double) { return 0.0; }, n);
}

Fn tagged_hermite(Kind k, std::size_t m, const QContext& ctx) {
  switch (eigen_tag(k)) {
    case EigenTag::g_times: return [=](double x) { return g_eval(x, ctx) * hermite_eval(m, x, ctx); };
    case EigenTag::over_g: return [=](double x) { return hermite_eval(m, x, ctx) / g_eval(x, ctx); };
    default: return [=](double x) { return hermite_eval(m, x, ctx); };
  }
}

Fn image_fn(Kind k, double a, const Fn& f, const QContext& ctx) {
  auto img = std::make_shared<KernelImage>(apply_quadrature(k, a, f, ctx));
  return [img](double x) { return (*img)(x); };
}

}  // namespace

TEST(Semigroup, ScaleAndEigenvalues) {
  const QContext ctx(0.5);
  const double c = (1.0 - 0.5) / (2.0 * std::pow(0.5, 0.25));
  EXPECT_NEAR(scale_c(1.7, ctx), std::pow(c, 1.7), 1e-15);
  EXPECT_NEAR(eigenvalue(Kind::T, 3, 1.2, ctx), std::pow(c, 1.2) * std::pow(0.5, 1.8), 1e-15);
  EXPECT_NEAR(eigenvalue(Kind::F, 3, 1.2, ctx), std::pow(0.5, 1.8), 1e-15);
  EXPECT_EQ(eigen_tag(Kind::T), EigenTag::g_times);
  EXPECT_EQ(eigen_tag(Kind::S), EigenTag::over_g);
  EXPECT_EQ(eigen_tag(Kind::F), EigenTag::plain);
  EXPECT_THROW(eigenvalue(Kind::T, 0, -1.0, ctx), DomainError);
}

TEST(Semigroup, QuadratureReproducesEigenvalues) {
  for (double q : {0.3, 0.8}) {
    const QContext ctx(q);
    for (Kind k : {Kind::T, Kind::S, Kind::F})
      for (double a : {0.5, 2.0})
        for (std::size_t m : {0u, 3u, 7u}) {
          const Fn f = tagged_hermite(k, m, ctx);
          const Fn img = image_fn(k, a, f, ctx);
          const double lam = eigenvalue(k, m, a, ctx);
          EXPECT_LT(sup_diff(img, [&](double x) { return lam * f(x); }), 1e-8 * lam * sup_abs(f))
              << kind_name(k) << " q=" << q << " a=" << a << " m=" << m;
        }
  }
}

TEST(Semigroup, CompositionOfQuadratureImages) {
  const QContext ctx(0.5);
  const Fn f = [](double x) { return std::exp(0.4 * x) + x * x; };
  for (Kind k : {Kind::T, Kind::F}) {
    auto ta = std::make_shared<KernelImage>(apply_quadrature(k, 0.7, f, ctx));
    const Fn tab = image_fn(k, 0.6, [ta](double x) { return (*ta)(x); }, ctx);
    const Fn direct = image_fn(k, 1.3, f, ctx);
    EXPECT_LT(sup_diff(tab, direct), 1e-9 * sup_abs(direct)) << kind_name(k);
  }
}

TEST(Semigroup, SpectralAgreesWithQuadrature) {
  const QContext ctx(0.5);
  const Fn f = [&](double x) { return g_eval(x, ctx) * std::cos(2.0 * x); };
  const Fn qd = apply(Kind::T, 0.8, f, Backend::quadrature, ctx);
  const Fn sp = apply(Kind::T, 0.8, f, Backend::spectral, ctx);
  EXPECT_LT(sup_diff(qd, sp), 1e-9 * sup_abs(qd));
  const TaggedSeries s = expand_tagged(f, EigenTag::g_times, ctx);
  EXPECT_THROW(apply_spectral(Kind::S, 0.8, s, ctx), DomainError);
}

TEST(Semigroup, SmallOrderApproachesIdentity) {
  const QContext ctx(0.3);
  const Fn f = [](double x) { return 1.0 + x - x * x * x; };
  EXPECT_LT(sup_diff(apply(Kind::F, 1e-8, f, Backend::spectral, ctx), f), 1e-7);
  EXPECT_THROW(apply(Kind::F, 0.0, f, Backend::spectral, ctx), DomainError);
}

TEST(Moments, ClosedFormsAgainstQuadrature) {
  for (double q : {0.3, 0.5, 0.8}) {
    const QContext ctx(q);
    for (Kind k : {Kind::T, Kind::F, Kind::G})
      for (double a : {0.3, 1.5})
        for (int j = 0; j <= 2; ++j) {
          const Fn img = image_fn(k, a, [j](double x) { return std::pow(x, j); }, ctx);
          const Fn cf = [&](double x) { return moments_closed_form(k, j, a, x, ctx); };
          EXPECT_LT(sup_diff(img, cf, 33), 1e-9 * std::max(1.0, sup_abs(cf, 33)))
              << kind_name(k) << " q=" << q << " a=" << a << " j=" << j;
        }
  }
}

TEST(Moments, Domain) {
  const QContext ctx(0.5);
  EXPECT_THROW(moments_closed_form(Kind::T, 3, 1.0, 0.0, ctx), DomainError);
  EXPECT_THROW(moments_closed_form(Kind::T, 0, -1.0, 0.0, ctx), DomainError);
  EXPECT_DOUBLE_EQ(moments_closed_form(Kind::T, 2, 0.0, 0.3, ctx), 0.09);
}

TEST(Moments, SecondMomentVanishesLinearly) {
  const QContext ctx(0.5);
  for (Kind k : {Kind::T, Kind::F}) {
    const double r1 = second_moment(k, 1e-3, 0.4, ctx);
    const double r2 = second_moment(k, 1e-4, 0.4, ctx);
    EXPECT_NEAR(r1 / r2, 10.0, 0.5) << kind_name(k);
  }
}

TEST(Actions, PhiMinusVariantClosedForm) {
  const QContext ctx(0.5);
  for (double beta : {0.0, 0.7, 2.0}) {
    const PhiAction act = action_phi_beta(1.3, beta, PhiVariant::minus, ctx);
    EXPECT_TRUE(act.closed_form_holds);
    const Fn img = image_fn(Kind::T, 1.3, [&](double x) { return phi_basis_eval(beta, x, PhiVariant::minus, ctx); }, ctx);
    const Fn rhs = [&](double x) { return act.scalar * phi_basis_eval(act.order, x, PhiVariant::minus, ctx); };
    EXPECT_LT(sup_diff(img, rhs), 1e-9 * sup_abs(rhs)) << "beta=" << beta;
  }
}

TEST(Actions, PhiPlusVariantDoesNotSatisfyProductRatio) {
  const QContext ctx(0.5);
  const PhiAction act = action_phi_beta(1.0, 1.0, PhiVariant::plus, ctx);
  EXPECT_FALSE(act.closed_form_holds);
  const Fn img = image_fn(Kind::T, 1.0, [&](double x) { return phi_basis_eval(1.0, x, PhiVariant::plus, ctx); }, ctx);
  const Fn rhs = [&](double x) { return act.scalar * phi_basis_eval(act.order, x, PhiVariant::plus, ctx); };
  EXPECT_GT(sup_diff(img, rhs), 1e-3 * sup_abs(rhs));
}

TEST(Actions, QExponentialShift) {
  const QContext ctx(0.5);
  for (double t : {-0.5, 0.5}) {
    const QexpAction act = action_qexp(0.9, t, ctx);
    EXPECT_NEAR(act.shifted_t, std::pow(0.5, 0.45) * t, 1e-15);
    const Fn img = image_fn(Kind::T, 0.9, [&](double x) { return g_eval(x, ctx) * qexp_eval(x, t, ctx); }, ctx);
    const Fn rhs = [&](double x) { return act.scalar * g_eval(x, ctx) * qexp_eval(x, act.shifted_t, ctx); };
    EXPECT_LT(sup_diff(img, rhs), 1e-9 * sup_abs(rhs)) << "t=" << t;
  }
  EXPECT_THROW(action_qexp(1.0, 1.0, ctx), DomainError);
}

TEST(Generator, MatchesFiniteDifferenceOfEigenvalues) {
  const QContext ctx(0.5);
  const double h = 1e-5;
  for (Kind k : {Kind::T, Kind::F})
    for (std::size_t m : {0u, 2u, 5u}) {
      const double a = 0.8;
      const double fd = (std::log(eigenvalue(k, m, a + h, ctx)) - std::log(eigenvalue(k, m, a - h, ctx))) / (2 * h);
      EXPECT_NEAR(generator_multiplier(k, m, ctx), fd, 1e-8) << kind_name(k) << " m=" << m;
    }
}

TEST(Generator, MatchesQuadratureDifferenceQuotient) {
  const QContext ctx(0.5);
  const Fn f = tagged_hermite(Kind::T, 2, ctx);
  const double h = 1e-4;
  const Fn ip = image_fn(Kind::T, 1.0 + h, f, ctx);
  const Fn im = image_fn(Kind::T, 1.0 - h, f, ctx);
  const Fn i0 = image_fn(Kind::T, 1.0, f, ctx);
  const double J = generator_multiplier(Kind::T, 2, ctx);
  for (double x : {-0.5, 0.3, 0.9}) EXPECT_NEAR((ip(x) - im(x)) / (2 * h), J * i0(x), 1e-6 * std::abs(J * i0(x)) + 1e-9);
}

TEST(Inversion, FRoundTripOnSeries) {
  const QContext ctx(0.5);
  const HermiteSeries f(ctx, {1.0, 0.5, -0.25, 0.1});
  std::vector<double> c = f.coefficients();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= eigenvalue(Kind::F, m, 1.5, ctx);
  const HermiteSeries r = invert_f(1.5, HermiteSeries(ctx, c), ctx);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(r.coeff(m), f.coeff(m), 1e-12);
}

TEST(Inversion, TAndSOperatorRoute) {
  const QContext ctx(0.5);
  const Fn p = [](double x) { return 1.0 - x + 0.5 * x * x; };
  for (Kind k : {Kind::T, Kind::S})
    for (double a : {0.4, 1.6}) {
      const Fn f = (k == Kind::T) ? Fn([&](double x) { return g_eval(x, ctx) * p(x); })
                                  : Fn([&](double x) { return p(x) / g_eval(x, ctx); });
      const Fn img = image_fn(k, a, f, ctx);
      const Reconstruction r = invert(k, a, img, ctx);
      double worst = 0.0;
      for (int i = 0; i <= 32; ++i) {
        const double x = -1.0 + i / 16.0;
        const double gx = g_eval(x, ctx);
        const double s = (k == Kind::T) ? 1.0 / gx : gx;
        worst = std::max(worst, std::abs(r(x) - f(x)) * s);
      }
      EXPECT_LT(worst, 1e-7) << kind_name(k) << " a=" << a;
    }
}

TEST(Inversion, LowerTaggedMatchesDividedDifferences) {
  const QContext ctx(0.5);
  const TaggedSeries gs{HermiteSeries(ctx, {0.5, -0.3, 0.2, 0.1}), EigenTag::g_times};
  const TaggedSeries os{HermiteSeries(ctx, {0.5, -0.3, 0.2, 0.1}), EigenTag::over_g};
  const TaggedSeries gl = lower_tagged(gs, 2, ctx);
  const TaggedSeries ol = lower_tagged(os, 1, ctx);
  const auto gd = dq_power(gs.breve(), 2, ctx);
  for (double x : {-0.7, 0.1, 0.6}) {
    const cplx z = std::polar(1.0, std::acos(x));
    EXPECT_NEAR(gd(z).real(), gl(x), 1e-6 * std::max(1.0, std::abs(gl(x))));
    EXPECT_NEAR(cq_apply(os.breve(), x, ctx), ol(x), 1e-8 * std::max(1.0, std::abs(ol(x))));
  }
  EXPECT_THROW(lower_tagged({HermiteSeries(ctx, {1.0}), EigenTag::plain}, 1, ctx), DomainError);
}

TEST(Expansion, RejectsNonRepresentableInput) {
  const QContext ctx(0.8);
  const Fn step = [](double x) { return x < 0.1 ? 0.0 : 1.0; };
  EXPECT_THROW(expand_tagged(step, EigenTag::g_times, ctx), NumericalError);
}

TEST(Resolvent, MultiplierAndMonotoneLimit) {
  EXPECT_DOUBLE_EQ(resolvent_multiplier(0, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(resolvent_multiplier(2, 10.0), 10.0 / 11.0);
  const QContext ctx(0.5);
  const TaggedSeries f{HermiteSeries(ctx, {1.0, 0.5, 0.25, 0.125}), EigenTag::g_times};
  double prev = std::numeric_limits<double>::infinity();
  for (double y : {1.0, 10.0, 100.0}) {
    const TaggedSeries r = resolvent_limit(Kind::T, f, y, ctx);
    double err = 0.0;
    for (std::size_t m = 0; m < 4; ++m) err += std::abs(r.series.coeff(m) - f.series.coeff(m));
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_THROW(resolvent_limit(Kind::F, f, 1.0, ctx), DomainError);
  EXPECT_THROW(resolvent_limit(Kind::T, f, 0.0, ctx), DomainError);
}

TEST(Contraction, ProfileAndThreshold) {
  const QContext ctx(0.5);
  EXPECT_NEAR(contraction_profile(0.0, ctx), 0.0, 1e-14);
  const double h = 1e-4;
  for (double a : {0.5, 3.0, 8.0}) {
    const double d1 = (contraction_profile(a + h, ctx) - contraction_profile(a - h, ctx)) / (2 * h);
    const double d2 =
        (contraction_profile(a + h, ctx) - 2 * contraction_profile(a, ctx) + contraction_profile(a - h, ctx)) / (h * h);
    EXPECT_NEAR(contraction_profile_d1(a, ctx), d1, 1e-7);
    EXPECT_NEAR(contraction_profile_d2(a, ctx), d2, 1e-4);
    EXPECT_LT(contraction_profile_d2(a, ctx), 0.0);
  }
  const ContractionThreshold c = find_c(ctx);
  EXPECT_NEAR(contraction_profile_d1(c.stationary, ctx), 0.0, 1e-8);
  EXPECT_NEAR(contraction_profile(c.a0, ctx), 0.0, 1e-8);
  double sup = 0.0;
  for (int i = 0; i <= 200; ++i) sup = std::max(sup, moments_closed_form(Kind::T, 0, c.a0 + 0.1, -1.0 + i / 100.0, ctx));
  EXPECT_LT(sup, 1.0);
  EXPECT_NEAR(std::log(sup), contraction_profile(c.a0 + 0.1, ctx), 1e-10);
}
