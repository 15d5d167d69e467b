#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "qfrac/qcore.hpp"

using namespace qfrac;

namespace {

long double poch_ld(long double a, long double q, int terms) {
  long double p = 1.0L, qk = 1.0L;
  for (int k = 0; k < terms; ++k) {
    p *= 1.0L - a * qk;
    qk *= q;
  }
  return p;
}

}  // namespace

TEST(QContext, RejectsBadBase) {
  EXPECT_THROW(QContext(0.0), DomainError);
  EXPECT_THROW(QContext(1.0), DomainError);
  EXPECT_THROW(QContext(1.2), DomainError);
  EXPECT_THROW(QContext(-0.5), DomainError);
  EXPECT_THROW(QContext(0.5, 0.0), DomainError);
  EXPECT_NO_THROW(QContext(0.5));
}

TEST(QPochhammer, InfiniteProductMatchesLongDouble) {
  for (double q : {0.1, 0.3, 0.5, 0.8, 0.95}) {
    const QContext ctx(q);
    for (double a : {-0.9, -0.3, 0.2, 0.5, q, 0.99}) {
      const long double ref = poch_ld(a, q, 4000);
      EXPECT_NEAR(qpoch_inf(a, ctx), static_cast<double>(ref), 1e-14 * std::abs(static_cast<double>(ref)))
          << "q=" << q << " a=" << a;
    }
  }
}

TEST(QPochhammer, FiniteProduct) {
  const QContext ctx(0.4);
  EXPECT_DOUBLE_EQ(qpoch(0.7, ctx, 0), 1.0);
  EXPECT_NEAR(qpoch(0.7, ctx, 3), (1 - 0.7) * (1 - 0.7 * 0.4) * (1 - 0.7 * 0.16), 1e-15);
  EXPECT_NEAR(qpoch(0.7, ctx, q_infinity), qpoch_inf(0.7, ctx), 0.0);
  // (a;q)_inf = (a;q)_n (a q^n;q)_inf
  EXPECT_NEAR(qpoch_inf(0.7, ctx), qpoch(0.7, ctx, 5) * qpoch_inf(0.7 * std::pow(0.4, 5), ctx), 1e-15);
}

TEST(QPochhammer, ComplexArgument) {
  const QContext ctx(0.5);
  const cplx a(0.3, 0.4);
  std::complex<long double> p = 1.0L, qk = 1.0L;
  for (int k = 0; k < 200; ++k) {
    p *= 1.0L - std::complex<long double>(a) * qk;
    qk *= 0.5L;
  }
  const cplx v = qpoch_inf(a, ctx);
  EXPECT_NEAR(v.real(), static_cast<double>(p.real()), 1e-15);
  EXPECT_NEAR(v.imag(), static_cast<double>(p.imag()), 1e-15);
}

TEST(HProduct, SingleParameterMatchesLongDouble) {
  const QContext ctx(0.3);
  const long double x = 0.3L, a = 0.4L, q = 0.3L;
  long double ref = 1.0L, qk = 1.0L;
  for (int k = 0; k < 200; ++k) {
    ref *= 1.0L - 2.0L * a * qk * x + a * a * qk * qk;
    qk *= q;
  }
  EXPECT_NEAR(h_product_real(0.3, {0.4}, ctx), static_cast<double>(ref), 1e-15);
}

TEST(HProduct, ConjugatePairIsReal) {
  const QContext ctx(0.5);
  const cplx a(0.2, 0.5);
  const cplx v = h_product(0.1, {a, std::conj(a)}, ctx);
  EXPECT_LT(std::abs(v.imag()), 1e-15);
  EXPECT_THROW(h_product(1.5, {a}, ctx), DomainError);
}

TEST(HProduct, FactorMatchesExponentialForm) {
  const QContext ctx(0.6);
  const double th = 0.7, a = 0.45;
  const cplx z = std::polar(1.0, th);
  const cplx ref = qpoch_inf(cplx(a) * z, ctx) * qpoch_inf(cplx(a) / z, ctx);
  EXPECT_NEAR(h_product_real(std::cos(th), {a}, ctx), ref.real(), 1e-14);
}

TEST(HyperSum, QChuVandermonde) {
  const double q = 0.45, b = 0.3, c = 0.7;
  const QContext ctx(q);
  for (std::size_t n = 0; n <= 8; ++n) {
    double mag = 0.0;
    const cplx s = terminating_hyper_sum(n, {std::pow(q, -static_cast<double>(n)), b}, {c}, q, q, &mag);
    const double ref = qpoch(c / b, ctx, n) / qpoch(c, ctx, n) * std::pow(b, static_cast<double>(n));
    EXPECT_NEAR(s.real(), ref, 1e-14 * mag) << "n=" << n;
  }
}

TEST(HyperSum, QSaalschutz) {
  // 3phi2(q^{-n}, a, b; c, a b q^{1-n}/c; q, q) = (c/a, c/b; q)_n / (c, c/(ab); q)_n
  const double q = 0.5, a = 0.2, b = -0.35, c = 0.6;
  const QContext ctx(q);
  for (std::size_t n = 1; n <= 6; ++n) {
    const double dn = static_cast<double>(n);
    const cplx s = basic_hyper_sum({std::pow(q, -dn), a, b}, {c, a * b * std::pow(q, 1.0 - dn) / c}, ctx, q);
    const double ref = qpoch(c / a, ctx, n) * qpoch(c / b, ctx, n) / (qpoch(c, ctx, n) * qpoch(c / (a * b), ctx, n));
    EXPECT_NEAR(s.real(), ref, 1e-11 * std::max(1.0, std::abs(ref))) << "n=" << n;
  }
}

TEST(HyperSum, NeedsTerminatingParameter) {
  const QContext ctx(0.5);
  EXPECT_THROW(basic_hyper_sum({0.3, 0.2}, {0.1}, ctx, 0.5), DomainError);
}

TEST(PhiBasis, IntegerOrderIsFiniteProduct) {
  const QContext ctx(0.5);
  const double x = 0.3;
  double ref = 1.0;
  for (int k = 0; k < 3; ++k) ref *= 1.0 + 2.0 * x * ctx.pow(0.25 + k / 2.0) + ctx.pow(0.5 + k);
  EXPECT_NEAR(phi_basis_eval(3.0, x, PhiVariant::minus, ctx), ref, 1e-14);
  EXPECT_DOUBLE_EQ(phi_basis_eval(0.0, x, PhiVariant::plus, ctx), 1.0);
}

TEST(PhiBasis, RealOrderAgreesWithFiniteProductAtIntegers) {
  const QContext ctx(0.3);
  for (auto v : {PhiVariant::plus, PhiVariant::minus})
    for (int n = 1; n <= 4; ++n)
      for (double x : {-0.8, 0.0, 0.6})
        EXPECT_NEAR(phi_basis_ratio(n, x, v, ctx), phi_basis_finite(n, x, v, ctx),
                    1e-13 * std::abs(phi_basis_finite(n, x, v, ctx)));
}

TEST(PhiBasis, Domain) {
  const QContext ctx(0.5);
  EXPECT_THROW(phi_basis_eval(-1.0, 0.0, PhiVariant::minus, ctx), DomainError);
  EXPECT_THROW(phi_basis_eval(1.0, 1.1, PhiVariant::minus, ctx), DomainError);
}

TEST(RhoBasis, LowOrders) {
  const QContext ctx(0.5);
  const double th = 0.9, x = std::cos(th);
  EXPECT_NEAR(rho_basis_eval(0, x, ctx).real(), 1.0, 0.0);
  // rho_1 = (1 + z^2)/z = 2x
  EXPECT_NEAR(rho_basis_eval(1, x, ctx).real(), 2.0 * x, 1e-15);
  EXPECT_NEAR(rho_basis_eval(1, x, ctx).imag(), 0.0, 1e-15);
  const cplx z = std::polar(1.0, th);
  const cplx ref = (1.0 + z * z) / (z * z) * (1.0 + z * z);
  EXPECT_NEAR(std::abs(rho_basis_eval(2, x, ctx) - ref), 0.0, 1e-14);
}

TEST(RealChecked, RejectsImaginaryPart) {
  EXPECT_DOUBLE_EQ(real_checked(cplx(2.0, 1e-14)), 2.0);
  EXPECT_THROW(real_checked(cplx(1.0, 1e-3)), NumericalError);
  EXPECT_THROW(real_checked(cplx(NAN, 0.0)), NumericalError);
  EXPECT_NO_THROW(real_checked(cplx(1e-10, 1e-12), 1.0));
}
