#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "qfrac/error.hpp"

namespace qfrac {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

// Order tag for infinite q-Pochhammer products.
inline constexpr std::size_t q_infinity = std::numeric_limits<std::size_t>::max();

class QContext {
 public:
  explicit QContext(double q, double eps_product = 1e-15, double eps_series = 1e-14)
      : q_(q), eps_product_(eps_product), eps_series_(eps_series) {
    if (!(q > 0.0 && q < 1.0)) {
      throw DomainError("q must lie strictly between 0 and 1, got " + std::to_string(q));
    }
    if (!(eps_product > 0.0) || !(eps_series > 0.0)) {
      throw DomainError("tolerances must be positive");
    }
  }

  double q() const { return q_; }
  double eps_product() const { return eps_product_; }
  double eps_series() const { return eps_series_; }

  // q raised to a real power.
  double pow(double p) const { return std::pow(q_, p); }

 private:
  double q_;
  double eps_product_;
  double eps_series_;
};

// Cast to real after checking the imaginary residual against |v| (or a
// caller-supplied magnitude when the value itself results from cancellation).
inline double real_checked(cplx v, double scale = 0.0, double rel = 1e-12) {
  const double mag = std::max(std::abs(v), scale);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
    throw NumericalError("non-finite value in real cast");
  }
  if (std::abs(v.imag()) > rel * mag + 1e-300) {
    throw NumericalError("imaginary residual " + std::to_string(v.imag()) + " exceeds tolerance");
  }
  return v.real();
}

inline void check_base(double base) {
  if (!(base > 0.0 && base < 1.0)) throw DomainError("product base must lie in (0,1)");
}

// (a; base)_n
template <class T>
T qpoch_finite(T a, double base, std::size_t n) {
  T p = 1.0;
  double bk = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    p *= (1.0 - a * bk);
    bk *= base;
  }
  return p;
}

template <class T>
struct PochResult {
  T value;
  std::size_t terms;
  double tail_bound;
};

// (a; base)_inf. The loop stops once |a| base^N / (1 - base) < eps, so the
// remaining factors change the product by at most exp(that) - 1.
template <class T>
PochResult<T> qpoch_inf_detail(T a, double base, double eps) {
  check_base(base);
  const double am = std::abs(a);
  const double scale = 1.0 / (1.0 - base);
  T p = 1.0;
  double bk = 1.0;
  std::size_t k = 0;
  while (am * bk * scale >= eps) {
    p *= (1.0 - a * bk);
    bk *= base;
    if (++k > 200000) throw NumericalError("q-Pochhammer product failed to converge");
  }
  const double tail = std::expm1(am * bk * scale);
  if (!(tail <= 2.0 * eps)) throw NumericalError("q-Pochhammer tail bound above tolerance");
  return {p, k, tail};
}

template <class T>
T qpoch_inf(T a, double base, double eps = 1e-16) {
  return qpoch_inf_detail(a, base, eps).value;
}

inline double qpoch_inf(double a, const QContext& ctx) {
  return qpoch_inf(a, ctx.q(), ctx.eps_product());
}

inline cplx qpoch_inf(cplx a, const QContext& ctx) {
  return qpoch_inf(a, ctx.q(), ctx.eps_product());
}

// (a; q)_n with n == q_infinity selecting the infinite product.
inline cplx qpoch(cplx a, const QContext& ctx, std::size_t n) {
  if (n == q_infinity) return qpoch_inf(a, ctx);
  return qpoch_finite(a, ctx.q(), n);
}

inline double qpoch(double a, const QContext& ctx, std::size_t n) {
  if (n == q_infinity) return qpoch_inf(a, ctx);
  return qpoch_finite(a, ctx.q(), n);
}

// Single Rahman factor (a e^{i th}, a e^{-i th}; base)_inf written in x = cos th,
// i.e. prod_k (1 - 2 a base^k x + a^2 base^{2k}). Valid for complex x as the
// analytic continuation.
template <class X, class A>
auto h_factor(X x, A a, double base, double eps) {
  using R = decltype(X{} * A{});
  check_base(base);
  R p = 1.0;
  const double ax = std::abs(a);
  const double bound = (2.0 * ax * std::abs(x) + ax * ax) / (1.0 - base);
  double bk = 1.0;
  std::size_t k = 0;
  while (bound * bk >= eps) {
    const A ak = a * bk;
    p *= (1.0 - 2.0 * ak * x + ak * ak);
    bk *= base;
    if (++k > 200000) throw NumericalError("h-product failed to converge");
  }
  return p;
}

// h(x; a_1, ..., a_k) in the given base.
template <class X>
cplx h_product_base(X x, const std::vector<cplx>& params, double base, double eps) {
  cplx p = 1.0;
  for (const cplx& a : params) p *= h_factor(cplx(x), a, base, eps);
  return p;
}

inline cplx h_product(double x, const std::vector<cplx>& params, const QContext& ctx) {
  if (x < -1.0 || x > 1.0) throw DomainError("h_product requires x in [-1,1]");
  return h_product_base(x, params, ctx.q(), ctx.eps_product());
}

// Real value of h when the parameter set is closed under conjugation.
inline double h_product_real(double x, const std::vector<cplx>& params, const QContext& ctx) {
  return real_checked(h_product(x, params, ctx));
}

namespace detail {

// Detects a numerator parameter of the form q^{-n}; returns n or -1.
inline long terminating_index(const cplx& a, double q) {
  if (std::abs(a.imag()) > 1e-14 * std::abs(a) || a.real() <= 0.0) return -1;
  const double n = -std::log(a.real()) / std::log(q);
  const double r = std::round(n);
  if (r < 0.0 || std::abs(n - r) > 1e-9) return -1;
  if (std::abs(a.real() - std::pow(q, -r)) > 1e-10 * a.real()) return -1;
  return static_cast<long>(r);
}

}  // namespace detail

// Terminating r phi s sum with the standard term
// (a_1..a_r; q)_k / (q, b_1..b_s; q)_k [(-1)^k q^{k(k-1)/2}]^{1+s-r} z^k
// summed for k = 0..n.
inline cplx terminating_hyper_sum(std::size_t n, const std::vector<cplx>& num,
                                  const std::vector<cplx>& den, double q, cplx z, double* abs_sum = nullptr) {
  const int extra = 1 + static_cast<int>(den.size()) - static_cast<int>(num.size());
  cplx term = 1.0;
  cplx sum = 1.0;
  double mag = 1.0;
  double qk = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    cplx ratio = z / (1.0 - qk * q);
    for (const cplx& a : num) ratio *= (1.0 - a * qk);
    for (const cplx& b : den) {
      const cplx d = 1.0 - b * qk;
      if (std::abs(d) < 1e-300) throw DomainError("vanishing denominator parameter in basic hypergeometric sum");
      ratio /= d;
    }
    if (extra != 0) ratio *= std::pow(-qk, extra);
    term *= ratio;
    sum += term;
    mag += std::abs(term);
    qk *= q;
  }
  if (abs_sum) *abs_sum = mag;
  return sum;
}

inline cplx basic_hyper_sum(const std::vector<cplx>& numerator, const std::vector<cplx>& denominator,
                            const QContext& ctx, cplx z) {
  long n = -1;
  for (const cplx& a : numerator) {
    const long k = detail::terminating_index(a, ctx.q());
    if (k >= 0 && (n < 0 || k < n)) n = k;
  }
  if (n < 0) throw DomainError("basic_hyper_sum needs a numerator parameter q^{-n}");
  return terminating_hyper_sum(static_cast<std::size_t>(n), numerator, denominator, ctx.q(), z);
}

enum class PhiVariant { plus, minus };

// Finite product prod_{k<n} (1 -+ 2x q^{1/4+k/2} + q^{1/2+k}).
inline double phi_basis_finite(std::size_t n, double x, PhiVariant v, const QContext& ctx) {
  const double sign = (v == PhiVariant::plus) ? -1.0 : 1.0;
  const double rq = std::sqrt(ctx.q());
  double u = ctx.pow(0.25);
  double p = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    p *= 1.0 + sign * 2.0 * x * u + u * u;
    u *= rq;
  }
  return p;
}

// Ratio h(x; +-q^{1/4}) / h(x; +-q^{beta/2+1/4}) in base q^{1/2}.
inline double phi_basis_ratio(double beta, double x, PhiVariant v, const QContext& ctx) {
  const double s = (v == PhiVariant::plus) ? 1.0 : -1.0;
  const double base = std::sqrt(ctx.q());
  const double num = h_factor(x, s * ctx.pow(0.25), base, ctx.eps_product());
  const double den = h_factor(x, s * ctx.pow(beta / 2.0 + 0.25), base, ctx.eps_product());
  return num / den;
}

inline double phi_basis_eval(double beta, double x, PhiVariant v, const QContext& ctx) {
  if (beta < 0.0) throw DomainError("phi basis order must be non-negative");
  if (x < -1.0 || x > 1.0) throw DomainError("phi basis requires x in [-1,1]");
  const double r = std::round(beta);
  if (std::abs(beta - r) < 1e-14 && r < 4096) return phi_basis_finite(static_cast<std::size_t>(r), x, v, ctx);
  return phi_basis_ratio(beta, x, v, ctx);
}

// rho_n(x) = (1 + z^2) z^{-n} (-q^{2-n} z^2; q^2)_{n-1}, z = e^{i theta}.
inline cplx rho_basis_eval(std::size_t n, double x, const QContext& ctx) {
  if (x < -1.0 || x > 1.0) throw DomainError("rho basis requires x in [-1,1]");
  if (n == 0) return 1.0;
  const double th = std::acos(x);
  const cplx z = std::polar(1.0, th);
  const cplx z2 = z * z;
  const double nn = static_cast<double>(n);
  return (1.0 + z2) * std::polar(1.0, -nn * th) *
         qpoch_finite<cplx>(-ctx.pow(2.0 - nn) * z2, ctx.q() * ctx.q(), n - 1);
}

}  // namespace qfrac
