#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"

namespace qfrac {

enum class RuleKind { midpoint, gauss_legendre };

// Nodes and weights on an interval of the angle variable.
struct QuadratureRule {
  RuleKind kind = RuleKind::midpoint;
  std::vector<double> theta;
  std::vector<double> weight;
  double lo = 0.0;
  double hi = pi;

  std::size_t size() const { return theta.size(); }

  // True for the equispaced midpoint rule on the full interval [0, pi].
  bool full_midpoint() const { return kind == RuleKind::midpoint && lo == 0.0 && hi == pi; }

  // Midpoint rule. On [0, pi] applied to the sin-weighted integrands this is
  // Gauss-Chebyshev quadrature, exact for cosine polynomials of degree < 2N.
  static QuadratureRule midpoint(std::size_t n, double lo = 0.0, double hi = pi) {
    if (n == 0) throw DomainError("quadrature rule needs at least one node");
    QuadratureRule r;
    r.kind = RuleKind::midpoint;
    r.lo = lo;
    r.hi = hi;
    r.theta.resize(n);
    r.weight.assign(n, (hi - lo) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      r.theta[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    }
    return r;
  }

  static QuadratureRule gauss_legendre(std::size_t n, double lo = 0.0, double hi = pi) {
    if (n == 0) throw DomainError("quadrature rule needs at least one node");
    QuadratureRule r;
    r.kind = RuleKind::gauss_legendre;
    r.lo = lo;
    r.hi = hi;
    r.theta.resize(n);
    r.weight.resize(n);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
      double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
          const double dk = static_cast<double>(k);
          const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
          p0 = p1;
          p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = dn * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) {
          // refresh derivative at the converged node
          p0 = 1.0;
          p1 = x;
          for (std::size_t k = 2; k <= n; ++k) {
            const double dk = static_cast<double>(k);
            const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
            p0 = p1;
            p1 = p2;
          }
          if (n == 1) p0 = 1.0;
          dp = dn * (x * p1 - p0) / (x * x - 1.0);
          break;
        }
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      r.theta[i] = mid - half * x;
      r.theta[n - 1 - i] = mid + half * x;
      r.weight[i] = r.weight[n - 1 - i] = half * w;
    }
    return r;
  }
};

inline QuadratureRule default_rule(std::size_t n = 256) { return QuadratureRule::midpoint(n); }

template <class F>
double integrate(const QuadratureRule& rule, F&& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) s += rule.weight[i] * f(rule.theta[i]);
  return s;
}

// Node count for the midpoint rule so that r^{2N} stays below 1e-16 when the
// nearest singularity of the integrand sits at modulus r in e^{i phi}.
inline std::size_t midpoint_nodes_for(double r, std::size_t min_nodes, std::size_t max_nodes,
                                      double extra_log_range = 0.0) {
  if (!(r < 1.0)) throw NumericalError("integrand singularity reaches the unit circle");
  std::size_t n = min_nodes;
  if (r > 0.0) {
    const double need = std::ceil((36.8 + extra_log_range) / (-2.0 * std::log(r)));
    if (need > static_cast<double>(n)) n = static_cast<std::size_t>(need);
  }
  if (n > max_nodes) throw NumericalError("required quadrature node count exceeds the configured cap");
  return n;
}

}  // namespace qfrac
