#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/qhermite.hpp"
#include "qfrac/quadrature.hpp"
#include "qfrac/semigroups.hpp"

namespace qfrac {

// Power series sum g_n t^n at a finite working truncation.
struct EntireSeries {
  std::vector<double> g;

  double operator()(double t) const {
    double s = 0.0;
    for (std::size_t n = g.size(); n-- > 0;) s = s * t + g[n];
    return s;
  }
};

// Coefficient path: f_n -> f_n q^{n^2/4}.
inline EntireSeries wq_forward(const HermiteSeries& f) {
  const double q = f.context().q();
  EntireSeries e;
  e.g.resize(f.size());
  for (std::size_t n = 0; n < f.size(); ++n) {
    const double dn = static_cast<double>(n);
    e.g[n] = f.coefficients()[n] * std::pow(q, dn * dn / 4.0);
  }
  return e;
}

// Pointwise path: (q t^2; q^2)_inf int E_q(x; t) f(x) w_H(x) dx.
inline double wq_forward(const std::function<double(double)>& f, double t, const QContext& ctx,
                         const QuadratureRule& rule = default_rule()) {
  if (!(std::abs(t) < 1.0)) throw DomainError("pointwise transform requires |t| < 1");
  const double norm = qexp_normalizer(t, ctx);
  return norm * integrate(rule, [&](double th) {
    const double x = std::cos(th);
    return qexp_eval(x, t, ctx) * f(x) * weight_sin(th, ctx);
  });
}

// f_n = q^{-n^2/4} g_n. The rescaled entries in the top quarter of the working
// truncation must carry less than eps_series of the norm.
inline HermiteSeries wq_invert(const EntireSeries& gser, const QContext& ctx, std::size_t trunc = 48) {
  const double q = ctx.q();
  std::vector<double> c(gser.g.size());
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double dn = static_cast<double>(n);
    c[n] = gser.g[n] * std::pow(q, -dn * dn / 4.0);
  }
  const std::size_t work = std::max(trunc, c.size());
  const double tail = tail_norm_ratio(c, 3 * work / 4, ctx);
  if (!(tail <= ctx.eps_series())) {
    throw NumericalError("series is not a transform image at this truncation: rescaled tail norm ratio " +
                         std::to_string(tail));
  }
  return HermiteSeries(ctx, std::move(c));
}

}  // namespace qfrac
