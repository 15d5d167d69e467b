#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/qhermite.hpp"
#include "qfrac/quadrature.hpp"
#include "qfrac/semigroups.hpp"

namespace qfrac {

struct AWParams {
  std::array<cplx, 4> t;

  AWParams(cplx t1, cplx t2, cplx t3, cplx t4) : t{t1, t2, t3, t4} {
    for (int j = 0; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (!(std::abs(t[j] * t[k]) < 1.0)) throw DomainError("Askey-Wilson parameters need |t_j t_k| < 1");
  }

  cplx product() const { return t[0] * t[1] * t[2] * t[3]; }
};

// p_n(x; t) from the terminating 4phi3 sum with prefactor (ab, ac, ad; q)_n a^{-n}.
inline double awp_eval_sum(std::size_t n, double x, const AWParams& p, const QContext& ctx) {
  if (x < -1.0 || x > 1.0) throw DomainError("awp_eval requires x in [-1,1]");
  if (n == 0) return 1.0;
  const cplx a = p.t[0];
  if (std::abs(a) == 0.0) throw DomainError("awp_eval needs a non-zero first parameter");
  const double q = ctx.q();
  const double dn = static_cast<double>(n);
  const cplx z = std::polar(1.0, std::acos(x));
  const cplx ab = a * p.t[1], ac = a * p.t[2], ad = a * p.t[3];
  double mag = 0.0;
  const cplx sum = terminating_hyper_sum(n, {std::pow(q, -dn), std::pow(q, dn - 1.0) * p.product(), a * z, a / z},
                                         {ab, ac, ad}, q, q, &mag);
  const cplx pre = qpoch_finite(ab, q, n) * qpoch_finite(ac, q, n) * qpoch_finite(ad, q, n) * std::pow(a, -dn);
  return real_checked(pre * sum, std::abs(pre) * mag, 1e-9);
}

// p_n(x; t) through the three-term recurrence of the normalized 4phi3.
inline double awp_eval(std::size_t n, double x, const AWParams& p, const QContext& ctx) {
  if (x < -1.0 || x > 1.0) throw DomainError("awp_eval requires x in [-1,1]");
  if (n == 0) return 1.0;
  const cplx a = p.t[0], b = p.t[1], c = p.t[2], d = p.t[3];
  if (std::abs(a) == 0.0) throw DomainError("awp_eval needs a non-zero first parameter");
  const double q = ctx.q();
  const cplx abcd = p.product();
  cplx prev = 0.0, cur = 1.0, pre = 1.0;
  double qk = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx An = (1.0 - a * b * qk) * (1.0 - a * c * qk) * (1.0 - a * d * qk) * (1.0 - abcd * qk / q) /
                    (a * (1.0 - abcd * qk * qk / q) * (1.0 - abcd * qk * qk));
    const cplx Cn = (k == 0) ? cplx(0.0)
                             : a * (1.0 - qk) * (1.0 - b * c * qk / q) * (1.0 - b * d * qk / q) *
                                   (1.0 - c * d * qk / q) / ((1.0 - abcd * qk * qk / (q * q)) * (1.0 - abcd * qk * qk / q));
    const cplx next = ((2.0 * x - a - 1.0 / a + An + Cn) * cur - Cn * prev) / An;
    pre *= (1.0 - a * b * qk) * (1.0 - a * c * qk) * (1.0 - a * d * qk) / a;
    prev = cur;
    cur = next;
    qk *= q;
  }
  return real_checked(pre * cur, 0.0, 1e-9);
}

// (e^{2i th}, e^{-2i th}; q)_inf / prod_j h(x; t_j), in the d(theta) measure.
inline double aw_weight(double theta, const AWParams& p, const QContext& ctx) {
  std::vector<cplx> ps(p.t.begin(), p.t.end());
  const cplx h = h_product_base(std::cos(theta), ps, ctx.q(), ctx.eps_product());
  return theta_factor_sq(theta, ctx) / real_checked(h, 0.0, 1e-10);
}

// Squared norm int p_n^2 w d(theta).
inline double aw_norm(std::size_t n, const AWParams& p, const QContext& ctx) {
  const double q = ctx.q();
  const double dn = static_cast<double>(n);
  const cplx abcd = p.product();
  cplx num = 2.0 * pi * qpoch_inf(abcd * std::pow(q, 2.0 * dn), ctx) *
             qpoch_finite(abcd * std::pow(q, dn - 1.0), q, n);
  cplx den = qpoch_inf(cplx(std::pow(q, dn + 1.0)), ctx);
  for (int j = 0; j < 4; ++j)
    for (int k = j + 1; k < 4; ++k) den *= qpoch_inf(p.t[j] * p.t[k] * std::pow(q, dn), ctx);
  return real_checked(num / den, 0.0, 1e-10);
}

enum class IntegralMethod { closed, quadrature };

// int w_H / h(x; a_1..a_4) dx
inline double aw_integral(const std::array<cplx, 4>& a, const QContext& ctx,
                          IntegralMethod method = IntegralMethod::closed, std::size_t min_nodes = 256) {
  double rmax = 0.0;
  for (int j = 0; j < 4; ++j) {
    rmax = std::max(rmax, std::abs(a[j]));
    for (int k = j + 1; k < 4; ++k)
      if (!(std::abs(a[j] * a[k]) < 1.0)) throw DomainError("aw_integral requires |a_j a_k| < 1");
  }
  if (method == IntegralMethod::closed) {
    cplx den = 1.0;
    for (int j = 0; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k) den *= qpoch_inf(a[j] * a[k], ctx);
    return real_checked(qpoch_inf(a[0] * a[1] * a[2] * a[3], ctx) / den, 0.0, 1e-10);
  }
  if (!(rmax < 1.0)) throw DomainError("quadrature evaluation needs |a_j| < 1");
  const std::vector<cplx> ps(a.begin(), a.end());
  const auto rule = QuadratureRule::midpoint(midpoint_nodes_for(rmax, min_nodes, std::size_t(1) << 20));
  return integrate(rule, [&](double th) {
    return weight_sin(th, ctx) / real_checked(h_product_base(std::cos(th), ps, ctx.q(), ctx.eps_product()), 0.0, 1e-10);
  });
}

// Right side of the T_a action on p_n(.; -q^{1/4}, b, c, d) as a 5phi4.
inline double ta_on_awp(std::size_t n, double a, double b, double c, double d, double x, const QContext& ctx) {
  if (x < -1.0 || x > 1.0) throw DomainError("ta_on_awp requires x in [-1,1]");
  const double q = ctx.q();
  const double dn = static_cast<double>(n);
  const double q14 = ctx.pow(0.25);
  const cplx z = std::polar(1.0, std::acos(x));
  const double s = (n % 2 == 0) ? 1.0 : -1.0;
  const double poch = qpoch_finite(-q14 * b, q, n) * qpoch_finite(-q14 * c, q, n) * qpoch_finite(-q14 * d, q, n);
  const double pre = s * poch * scale_c(a, ctx) * qpoch_inf(ctx.pow(a + 1.0), ctx) * ctx.pow(-dn / 4.0) /
                     qpoch_inf(q, ctx) * g_value(x, ctx) / g_shifted(x, a, ctx);
  const cplx u = -ctx.pow(a / 2.0 + 0.25);
  double mag = 0.0;
  const cplx sum = terminating_hyper_sum(n, {std::pow(q, -dn), -std::pow(q, dn - 0.75) * b * c * d, q, u * z, u / z},
                                         {-q14 * b, -q14 * c, -q14 * d, ctx.pow(a + 1.0)}, q, q, &mag);
  return pre * real_checked(sum, mag, 1e-9);
}

// Sign of the q^{a/2} exponent attached to c and d in the connection relation.
enum class ShiftSign { minus, plus };

// Right side of the connection relation for T_a p_n(.; -q^{1/4}, -q^{3/4}, c, d).
inline double connection_rhs(std::size_t n, double a, double c, double d, double x, const QContext& ctx,
                             ShiftSign sign = ShiftSign::minus) {
  const double q = ctx.q();
  const double dn = static_cast<double>(n);
  const double sh = (sign == ShiftSign::minus) ? ctx.pow(-a / 2.0) : ctx.pow(a / 2.0);
  const AWParams shifted(-ctx.pow(a / 2.0 + 0.25), -ctx.pow(a / 2.0 + 0.75), c * sh, d * sh);
  const double pre = qpoch_finite(q, q, n) / qpoch_finite(ctx.pow(a + 1.0), q, n) * ctx.pow(a * dn / 2.0) *
                     scale_c(a, ctx) * qpoch_inf(ctx.pow(a + 1.0), ctx) / qpoch_inf(q, ctx) * g_value(x, ctx) /
                     g_shifted(x, a, ctx);
  return pre * awp_eval(n, x, shifted, ctx);
}

// Normalisation sequences of the Hilbert-Schmidt construction.
struct AWNormalization {
  std::vector<double> M, A, B, C;
};

inline AWNormalization aw_normalization(std::size_t n_max, double a, double c, double d, const QContext& ctx) {
  AWNormalization r;
  const double q = ctx.q();
  const AWParams base(-ctx.pow(0.25), -ctx.pow(0.75), c, d);
  const AWParams shifted(-ctx.pow(a / 2.0 + 0.25), -ctx.pow(a / 2.0 + 0.75), c * ctx.pow(-a / 2.0),
                         d * ctx.pow(-a / 2.0));
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double dn = static_cast<double>(n);
    r.M.push_back(aw_norm(n, base, ctx));
    r.B.push_back(r.M.back());
    r.A.push_back(aw_norm(n, shifted, ctx));
    r.C.push_back(qpoch_finite(q, q, n) / (qpoch_finite(ctx.pow(a), q, n + 1) * qpoch_inf(q, ctx)) *
                  ctx.pow(a * dn / 2.0));
  }
  return r;
}

// Midpoint nodes for the Hilbert-Schmidt integrals: at least min_nodes and
// enough to resolve the Poisson factors of radius q^{a/2} and the zeros of g
// at radius q^{1/4}.
inline std::size_t hs_nodes(double a, const QContext& ctx, std::size_t min_nodes) {
  return midpoint_nodes_for(std::max(ctx.pow(a / 2.0), ctx.pow(0.25)), min_nodes, std::size_t(1) << 14);
}

// The symmetric Hilbert-Schmidt kernel K(cos ph1, cos ph2) built from the
// inner theta integral, tabulated on a midpoint rule.
class HSKernel {
 public:
  HSKernel(double a, double c, double d, const QContext& ctx, std::size_t nodes = 96)
      : a_(a), c_(c), d_(d), ctx_(ctx),
        base_(-ctx.pow(0.25), -ctx.pow(0.75), c, d),
        shifted_(-ctx.pow(a / 2.0 + 0.25), -ctx.pow(a / 2.0 + 0.75), c * ctx.pow(-a / 2.0), d * ctx.pow(-a / 2.0)) {
    SemigroupOrder ord(a);
    t_ = ctx.pow(a / 2.0);
    nodes = hs_nodes(a, ctx, nodes);
    const auto rule = QuadratureRule::midpoint(nodes);
    theta_ = rule.theta;
    w0_.resize(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
      const double x = std::cos(theta_[k]);
      const double ga = g_shifted(x, a, ctx);
      w0_[k] = rule.weight[k] * aw_weight(theta_[k], shifted_, ctx) * ga * ga;
    }
  }

  const AWParams& base_params() const { return base_; }
  const AWParams& shifted_params() const { return shifted_; }
  double t() const { return t_; }
  const std::vector<double>& theta() const { return theta_; }
  const std::vector<double>& theta_weights() const { return w0_; }

  // 1 / h(cos ph; t e^{i th}, t e^{-i th})
  double inv_h(double phi, double theta) const { return 1.0 / poisson_denominator(theta, phi, t_, ctx_); }

  // w_H(cos ph) sin ph / g(cos ph)
  double side_factor(double phi) const { return weight_sin(phi, ctx_) / g_value(std::cos(phi), ctx_); }

  // int w_0 / (h(ph1) h(ph2)) d theta
  double inner(double phi1, double phi2) const {
    double s = 0.0;
    for (std::size_t k = 0; k < theta_.size(); ++k) s += w0_[k] * inv_h(phi1, theta_[k]) * inv_h(phi2, theta_[k]);
    return s;
  }

  double operator()(double phi1, double phi2) const {
    return side_factor(phi1) * side_factor(phi2) / aw_weight(phi2, base_, ctx_) * inner(phi1, phi2);
  }

  // K divided by the base weight at phi1; symmetric in its arguments.
  double symmetric(double phi1, double phi2) const { return (*this)(phi1, phi2) / aw_weight(phi1, base_, ctx_); }

 private:
  double a_, c_, d_;
  QContext ctx_;
  AWParams base_, shifted_;
  double t_ = 0.0;
  std::vector<double> theta_, w0_;
};

struct HSValue {
  double value;
  double delta;
  bool converged;
};

// Kernel value with a node-doubling convergence flag.
inline HSValue hs_kernel(double phi1, double phi2, double a, double c, double d, const QContext& ctx,
                         std::size_t nodes = 96) {
  const double v1 = HSKernel(a, c, d, ctx, nodes)(phi1, phi2);
  const double v2 = HSKernel(a, c, d, ctx, 2 * nodes)(phi1, phi2);
  const double delta = std::abs(v2 - v1) / std::max(std::abs(v2), 1e-300);
  return {v2, delta, delta <= 1e-6};
}

struct BilinearRow {
  std::size_t n;
  double phi2;
  double lhs;
  double rhs;
  double rel_residual;
};

// Eigen-relation check: int K(ph1, ph2) p_n(ph1) d ph1 = (A_n C_n^2 / B_n) p_n(ph2).
inline std::vector<BilinearRow> bilinear_check(std::size_t n_max, double a, double c, double d, const QContext& ctx,
                                               std::size_t nodes = 96, const std::vector<double>& phi2s = {0.4, 1.1, 2.3}) {
  const HSKernel K(a, c, d, ctx, nodes);
  const AWNormalization nz = aw_normalization(n_max, a, c, d, ctx);
  const auto rule = QuadratureRule::midpoint(K.theta().size());
  std::vector<BilinearRow> rows;
  for (std::size_t n = 0; n <= n_max; ++n) {
    const double lambda = nz.A[n] * nz.C[n] * nz.C[n] / nz.B[n];
    for (double p2 : phi2s) {
      double s = 0.0;
      for (std::size_t i = 0; i < rule.size(); ++i)
        s += rule.weight[i] * K(rule.theta[i], p2) * awp_eval(n, std::cos(rule.theta[i]), K.base_params(), ctx);
      const double rhs = lambda * awp_eval(n, std::cos(p2), K.base_params(), ctx);
      rows.push_back({n, p2, s, rhs, std::abs(s - rhs) / std::max(std::abs(rhs), 1e-300)});
    }
  }
  return rows;
}

// Partial sum of the bilinear expansion of K / w_base.
inline double bilinear_partial_sum(std::size_t terms, double phi1, double phi2, double a, double c, double d,
                                   const QContext& ctx) {
  const AWNormalization nz = aw_normalization(terms, a, c, d, ctx);
  const AWParams base(-ctx.pow(0.25), -ctx.pow(0.75), c, d);
  double s = 0.0;
  for (std::size_t n = 0; n < terms; ++n) {
    s += nz.A[n] * nz.C[n] * nz.C[n] / (nz.B[n] * nz.B[n]) * awp_eval(n, std::cos(phi1), base, ctx) *
         awp_eval(n, std::cos(phi2), base, ctx);
  }
  return s;
}

// Double integral of the Hilbert-Schmidt orthogonality identity for (m, n),
// evaluated on a tensor rule of `nodes` points per axis.
inline double hs_orthogonality(std::size_t m, std::size_t n, double a, double c, double d, const QContext& ctx,
                               std::size_t nodes = 96) {
  const HSKernel K(a, c, d, ctx, nodes);
  nodes = K.theta().size();
  const auto rule = QuadratureRule::midpoint(nodes);
  const auto& th = K.theta();
  std::vector<double> um(nodes), un(nodes);
  for (std::size_t i = 0; i < nodes; ++i) {
    const double f = rule.weight[i] * K.side_factor(rule.theta[i]);
    um[i] = f * awp_eval(m, std::cos(rule.theta[i]), K.base_params(), ctx);
    un[i] = f * awp_eval(n, std::cos(rule.theta[i]), K.base_params(), ctx);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < th.size(); ++k) {
    double sm = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      const double e = K.inv_h(rule.theta[i], th[k]);
      sm += um[i] * e;
      sn += un[i] * e;
    }
    total += K.theta_weights()[k] * sm * sn;
  }
  return total;
}

}  // namespace qfrac
