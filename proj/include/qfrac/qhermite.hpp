#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/quadrature.hpp"

namespace qfrac {

inline double zeta(const QContext& ctx) { return 0.5 * (ctx.pow(0.25) + ctx.pow(-0.25)); }

// (q;q)_0 .. (q;q)_n
inline std::vector<double> qfactorials(std::size_t n, double q) {
  std::vector<double> f(n + 1);
  f[0] = 1.0;
  double qk = q;
  for (std::size_t k = 1; k <= n; ++k) {
    f[k] = f[k - 1] * (1.0 - qk);
    qk *= q;
  }
  return f;
}

template <class X>
X hermite_value(std::size_t n, X x, double q) {
  X h0 = 1.0;
  if (n == 0) return h0;
  X h1 = 2.0 * x;
  double qk = q;
  for (std::size_t k = 1; k < n; ++k) {
    const X h2 = 2.0 * x * h1 - (1.0 - qk) * h0;
    h0 = h1;
    h1 = h2;
    qk *= q;
  }
  return h1;
}

inline double hermite_eval(std::size_t n, double x, const QContext& ctx) {
  if (x < -1.5 || x > 1.5) throw DomainError("hermite_eval requires x in [-1.5,1.5]");
  return hermite_value(n, x, ctx.q());
}

inline cplx hermite_eval(std::size_t n, cplx x, const QContext& ctx) { return hermite_value(n, x, ctx.q()); }

// H_0(x) .. H_n(x)
template <class X>
std::vector<X> hermite_all(std::size_t n, X x, double q) {
  std::vector<X> h(n + 1);
  h[0] = 1.0;
  if (n >= 1) h[1] = 2.0 * x;
  double qk = q;
  for (std::size_t k = 1; k < n; ++k) {
    h[k + 1] = 2.0 * x * h[k] - (1.0 - qk) * h[k - 1];
    qk *= q;
  }
  return h;
}

// |(e^{2i phi}; q)_inf|^2
inline double theta_factor_sq(double phi, const QContext& ctx) {
  const double s = std::sin(phi);
  const double c2 = std::cos(2.0 * phi);
  const double q = ctx.q();
  double p = 4.0 * s * s;
  double qk = q;
  while (4.0 * qk / (1.0 - q) >= ctx.eps_product()) {
    p *= 1.0 - 2.0 * qk * c2 + qk * qk;
    qk *= q;
  }
  return p;
}

// w_H(cos phi) sin phi, the integrand weight in the angle variable.
inline double weight_sin(double phi, const QContext& ctx) {
  return qpoch_inf(ctx.q(), ctx) * theta_factor_sq(phi, ctx) / (2.0 * pi);
}

inline double weight_eval(double x, const QContext& ctx) {
  if (!(x > -1.0 && x < 1.0)) throw DomainError("weight_eval requires x in (-1,1)");
  const double phi = std::acos(x);
  return weight_sin(phi, ctx) / std::sin(phi);
}

// g(x) = (-q^{1/4} e^{i th}, -q^{1/4} e^{-i th}; q^{1/2})_inf
template <class X>
X g_value(X x, const QContext& ctx) {
  return h_factor(x, -ctx.pow(0.25), std::sqrt(ctx.q()), ctx.eps_product());
}

inline double g_eval(double x, const QContext& ctx) {
  if (x < -1.0 || x > 1.0) throw DomainError("g_eval requires x in [-1,1]");
  return g_value(x, ctx);
}

inline cplx g_eval(cplx x, const QContext& ctx) { return g_value(x, ctx); }

// g with shifted base point: (-q^{a/2+1/4} e^{+-i th}; q^{1/2})_inf
template <class X>
X g_shifted(X x, double a, const QContext& ctx) {
  return h_factor(x, -ctx.pow(a / 2.0 + 0.25), std::sqrt(ctx.q()), ctx.eps_product());
}

class HermiteSeries {
 public:
  explicit HermiteSeries(const QContext& ctx, std::vector<double> coeffs = {})
      : ctx_(ctx), c_(std::move(coeffs)) {}

  const QContext& context() const { return ctx_; }
  const std::vector<double>& coefficients() const { return c_; }
  std::size_t size() const { return c_.size(); }
  double coeff(std::size_t n) const { return n < c_.size() ? c_[n] : 0.0; }

  template <class X>
  X evaluate(X x) const {
    // Clenshaw for H_{k+1} = 2x H_k - (1 - q^k) H_{k-1}
    if (c_.empty()) return X(0.0);
    const double q = ctx_.q();
    X b1 = 0.0, b2 = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) {
      const double qk1 = std::pow(q, static_cast<double>(k + 1));
      const X b0 = c_[k] + 2.0 * x * b1 - (1.0 - qk1) * b2;
      b2 = b1;
      b1 = b0;
    }
    return b1;
  }

  double operator()(double x) const { return evaluate(x); }
  cplx operator()(cplx x) const { return evaluate(x); }

  // Squared L2(w_H) norm via Parseval.
  double norm_sq() const {
    const auto f = qfactorials(c_.size(), ctx_.q());
    double s = 0.0;
    for (std::size_t n = 0; n < c_.size(); ++n) s += c_[n] * c_[n] * f[n];
    return s;
  }

 private:
  QContext ctx_;
  std::vector<double> c_;
};

// Per-q data attached to a rule: x = cos(theta), weighted measure and g.
struct NodeData {
  QuadratureRule rule;
  std::vector<double> x;
  std::vector<double> sin_theta;
  std::vector<double> measure;  // rule weight * w_H(x) sin(theta)
  std::vector<double> g;
};

inline std::shared_ptr<const NodeData> make_nodes(const QuadratureRule& rule, const QContext& ctx) {
  auto d = std::make_shared<NodeData>();
  d->rule = rule;
  const std::size_t n = rule.size();
  d->x.resize(n);
  d->sin_theta.resize(n);
  d->measure.resize(n);
  d->g.resize(n);
  const double qinf = qpoch_inf(ctx.q(), ctx);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = rule.theta[i];
    d->x[i] = std::cos(th);
    d->sin_theta[i] = std::sin(th);
    d->measure[i] = rule.weight[i] * qinf * theta_factor_sq(th, ctx) / (2.0 * pi);
    d->g[i] = g_value(d->x[i], ctx);
  }
  return d;
}

// Hermite coefficients of sampled values: c_n = (1/(q;q)_n) sum_i m_i v_i H_n(x_i).
inline HermiteSeries hermite_project(const NodeData& nodes, const std::vector<double>& values, std::size_t M,
                                     const QContext& ctx) {
  std::vector<double> c(M + 1, 0.0);
  const double q = ctx.q();
  for (std::size_t i = 0; i < nodes.x.size(); ++i) {
    const double x = nodes.x[i];
    const double v = nodes.measure[i] * values[i];
    double h0 = 1.0, h1 = 2.0 * x, qk = q;
    c[0] += v;
    if (M >= 1) c[1] += v * h1;
    for (std::size_t k = 1; k < M; ++k) {
      const double h2 = 2.0 * x * h1 - (1.0 - qk) * h0;
      c[k + 1] += v * h2;
      h0 = h1;
      h1 = h2;
      qk *= q;
    }
  }
  const auto f = qfactorials(M, q);
  for (std::size_t n = 0; n <= M; ++n) c[n] /= f[n];
  return HermiteSeries(ctx, std::move(c));
}

inline HermiteSeries hermite_expand(const std::function<double(double)>& f, std::size_t M,
                                    const QuadratureRule& rule, const QContext& ctx) {
  const auto nodes = make_nodes(rule, ctx);
  std::vector<double> v(nodes->x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(nodes->x[i]);
  return hermite_project(*nodes, v, M, ctx);
}

struct ExpandOptions {
  std::size_t start = 48;
  std::size_t max_terms = 4096;
  double tail_tol = 1e-13;
  // Sup-norm check of the reconstruction on Chebyshev points, relative to max(1, sup|f|); 0 disables it.
  double verify_tol = 1e-8;
};

// Relative L2(w_H) weight of the coefficients beyond index `from`.
inline double series_tail_ratio(const HermiteSeries& s, std::size_t from) {
  const auto f = qfactorials(s.size(), s.context().q());
  double total = 0.0, tail = 0.0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    const double e = s.coefficients()[n] * s.coefficients()[n] * f[n];
    total += e;
    if (n >= from) tail += e;
  }
  if (total == 0.0) return 0.0;
  return std::sqrt(tail / total);
}

// Doubles the truncation until the trailing eighth of the coefficients carries
// less than tail_tol of the L2(w_H) norm.
inline HermiteSeries hermite_expand_adaptive(const std::function<double(double)>& f, const QContext& ctx,
                                             const ExpandOptions& opt = {}) {
  for (std::size_t M = opt.start;; M *= 2) {
    const std::size_t N = std::max<std::size_t>(256, 2 * M + 64);
    auto s = hermite_expand(f, M, QuadratureRule::midpoint(N), ctx);
    if (series_tail_ratio(s, M - M / 8) < opt.tail_tol) return s;
    if (2 * M > opt.max_terms) {
      throw NumericalError("Hermite expansion did not converge within " + std::to_string(M) + " terms");
    }
  }
}

enum class PoissonForm { closed, series };
enum class BilinearForm { carlitz, ismail_stanton };

namespace detail {

inline void check_t(double t) {
  if (!(std::abs(t) < 1.0)) throw DomainError("kernel parameter t must satisfy |t| < 1");
}

// prod_k (1 - 2 t q^k cos(u) + t^2 q^{2k})
inline double cos_product(double t, double cu, const QContext& ctx) {
  const double q = ctx.q();
  double p = 1.0, r = t;
  const double bound = (2.0 * std::abs(t) + t * t) / (1.0 - q);
  double qk = 1.0;
  while (bound * qk >= ctx.eps_product()) {
    p *= 1.0 - 2.0 * r * cu + r * r;
    r *= q;
    qk *= q;
  }
  return p;
}

// (t e^{i u}; q)_n
inline cplx poch_exp(double t, double u, std::size_t n, double q) {
  return qpoch_finite<cplx>(std::polar(t, u), q, n);
}

inline double gauss_binomial(std::size_t m, std::size_t j, double q) {
  const auto f = qfactorials(m, q);
  return f[m] / (f[j] * f[m - j]);
}

}  // namespace detail

// Denominator (t e^{i(th+ph)}, t e^{i(th-ph)}, t e^{-i(th+ph)}, t e^{i(ph-th)}; q)_inf
inline double poisson_denominator(double theta, double phi, double t, const QContext& ctx) {
  return detail::cos_product(t, std::cos(theta + phi), ctx) * detail::cos_product(t, std::cos(theta - phi), ctx);
}

inline double poisson_kernel(double x, double y, double t, const QContext& ctx,
                             PoissonForm form = PoissonForm::closed) {
  detail::check_t(t);
  if (x < -1.0 || x > 1.0 || y < -1.0 || y > 1.0) throw DomainError("poisson_kernel requires x,y in [-1,1]");
  if (form == PoissonForm::closed) {
    return qpoch_inf(t * t, ctx) / poisson_denominator(std::acos(x), std::acos(y), t, ctx);
  }
  // |H_n(x)| <= H_n(1) on [-1,1], so |t|^n H_n(1)^2/((q;q)_n (1-|t|)) majorizes the tail.
  const double q = ctx.q();
  double sum = 1.0, tn = 1.0, poch = 1.0, qn = 1.0;
  double hx0 = 1.0, hx1 = 2.0 * x, hy0 = 1.0, hy1 = 2.0 * y, h10 = 1.0, h11 = 2.0;
  for (std::size_t n = 1; n < 100000; ++n) {
    poch *= (1.0 - qn * q);
    tn *= t;
    sum += hx1 * hy1 * tn / poch;
    const double major = std::abs(tn) * h11 * h11 / poch / (1.0 - std::abs(t));
    if (major < ctx.eps_series() * std::abs(sum)) return sum;
    qn *= q;
    const double nx = 2.0 * x * hx1 - (1.0 - qn) * hx0;
    const double ny = 2.0 * y * hy1 - (1.0 - qn) * hy0;
    const double n1 = 2.0 * h11 - (1.0 - qn) * h10;
    hx0 = hx1;
    hx1 = nx;
    hy0 = hy1;
    hy1 = ny;
    h10 = h11;
    h11 = n1;
  }
  throw NumericalError("Poisson series did not converge");
}

// sum_n H_n(x) H_{n+m}(y) t^n / (q;q)_n in closed form.
inline double bilinear_kernel(double x, double y, double t, std::size_t m, const QContext& ctx,
                              BilinearForm form = BilinearForm::ismail_stanton) {
  detail::check_t(t);
  if (x < -1.0 || x > 1.0 || y < -1.0 || y > 1.0) throw DomainError("bilinear_kernel requires x,y in [-1,1]");
  const double th = std::acos(x), ph = std::acos(y);
  const double q = ctx.q();
  const double den = poisson_denominator(th, ph, t, ctx);
  cplx sum = 0.0;
  double scale = 0.0;
  if (form == BilinearForm::carlitz) {
    for (std::size_t j = 0; j <= m; ++j) {
      const cplx term = detail::gauss_binomial(m, j, q) * detail::poch_exp(t, th + ph, j, q) *
                        detail::poch_exp(t, ph - th, j, q) / qpoch_finite(t * t, q, j) *
                        std::polar(1.0, ph * (static_cast<double>(m) - 2.0 * static_cast<double>(j)));
      sum += term;
      scale = std::max(scale, std::abs(term));
    }
    return real_checked(sum, scale, 1e-10) * qpoch_inf(t * t, ctx) / den;
  }
  for (std::size_t k = 0; k <= m; ++k) {
    const cplx term = detail::gauss_binomial(m, k, q) * detail::poch_exp(t, ph - th, k, q) *
                      detail::poch_exp(t, th - ph, m - k, q) *
                      std::polar(1.0, (static_cast<double>(m) - 2.0 * static_cast<double>(k)) * ph);
    sum += term;
    scale = std::max(scale, std::abs(term));
  }
  return real_checked(sum, scale, 1e-10) * qpoch_inf(t * t * std::pow(q, static_cast<double>(m)), ctx) / den;
}

// (q t^2; q^2)_inf, the normalizer relating E_q to its Hermite expansion.
inline double qexp_normalizer(double t, const QContext& ctx) {
  return qpoch_inf(ctx.q() * t * t, ctx.q() * ctx.q(), ctx.eps_product());
}

// E_q(x; t) = (q t^2; q^2)_inf^{-1} sum_n q^{n^2/4} t^n H_n(x) / (q;q)_n
template <class X>
X qexp_value(X x, double t, const QContext& ctx) {
  detail::check_t(t);
  const double q = ctx.q();
  X sum = 1.0, h0 = 1.0, h1 = 2.0 * x;
  double coef = 1.0, qn = 1.0;
  for (std::size_t n = 1; n < 10000; ++n) {
    const double dn = static_cast<double>(n);
    coef *= t / (1.0 - qn * q);
    const X term = coef * std::pow(q, dn * dn / 4.0) * h1;
    sum += term;
    if (std::abs(coef) * std::pow(q, dn * dn / 4.0) * std::pow(2.0 * std::abs(x) + 2.0, dn) <
        ctx.eps_series() * std::abs(sum))
      break;
    qn *= q;
    const X h2 = 2.0 * x * h1 - (1.0 - qn) * h0;
    h0 = h1;
    h1 = h2;
  }
  const double norm = qexp_normalizer(t, ctx);
  if (norm == 0.0) throw DomainError("vanishing q-exponential normalizer");
  return sum / norm;
}

inline double qexp_eval(double x, double t, const QContext& ctx) { return qexp_value(x, t, ctx); }

// Hermite coefficients of 1/g.
inline HermiteSeries g_recip_series(std::size_t M, const QContext& ctx) {
  const double q = ctx.q();
  const auto f = qfactorials(M, q);
  const auto hz = hermite_all(M, zeta(ctx), q);
  const double qinf = qpoch_inf(q, ctx);
  std::vector<double> c(M + 1);
  for (std::size_t n = 0; n <= M; ++n) {
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    c[n] = sign * std::pow(q, static_cast<double>(n) / 2.0) * hz[n] / (f[n] * qinf);
  }
  return HermiteSeries(ctx, std::move(c));
}

}  // namespace qfrac
