#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <utility>

#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/qhermite.hpp"

namespace qfrac {

// A function of z, meant to be the breve form f(x) with x = (z + 1/z)/2.
class SymmetricLaurentFn {
 public:
  using Evaluator = std::function<cplx(cplx)>;

  explicit SymmetricLaurentFn(Evaluator f, bool symmetric = true) : f_(std::move(f)), symmetric_(symmetric) {}

  // Lift a function of x (analytic near [-1,1]) to its breve form.
  template <class Fx>
  static SymmetricLaurentFn from_x(Fx fx) {
    return SymmetricLaurentFn([fx](cplx z) { return cplx(fx(0.5 * (z + 1.0 / z))); }, true);
  }

  cplx operator()(cplx z) const { return f_(z); }
  bool symmetric() const { return symmetric_; }

 private:
  Evaluator f_;
  bool symmetric_;
};

enum class DivDiff { D, C, B_explicit };

namespace detail {

inline void check_symmetry(const SymmetricLaurentFn& f, cplx z, cplx fz) {
  if (!f.symmetric()) return;
  const cplx fi = f(1.0 / z);
  const double diff = std::abs(fz - fi);
  if (diff > 1e-10 * std::max(std::abs(fz), std::abs(fi)) && diff > 1e-14) {
    throw NumericalError("evaluator violates the z <-> 1/z symmetry");
  }
}

inline cplx divdiff_raw(const SymmetricLaurentFn& f, cplx z, DivDiff kind, const QContext& ctx, bool check) {
  const double rq = std::sqrt(ctx.q());
  const cplx zp = rq * z, zm = z / rq;
  const cplx fp = f(zp), fm = f(zm);
  if (check) {
    check_symmetry(f, zp, fp);
    check_symmetry(f, zm, fm);
  }
  const double q = ctx.q();
  switch (kind) {
    case DivDiff::D:
      return (fp - fm) / ((rq - 1.0 / rq) * (z - 1.0 / z) * 0.5);
    case DivDiff::C: {
      const cplx z2 = z * z;
      return 2.0 * (fp - z2 * z2 * fm) / ((1.0 - q) * (1.0 - z2) * z);
    }
    case DivDiff::B_explicit: {
      const cplx z2 = z * z;
      return 2.0 * rq * (fp - z2 * fm) / ((q - 1.0) * (z2 - 1.0));
    }
  }
  return 0.0;
}

}  // namespace detail

// Divided difference evaluated at an arbitrary z. Near z^2 = 1 the value is the
// limit along z0 e^{i delta}, delta in {d, d/2, d/4}, with two Richardson steps
// in delta^2.
inline cplx divdiff_at_z(const SymmetricLaurentFn& f, cplx z, DivDiff kind, const QContext& ctx,
                         bool check = true) {
  const cplx z2 = z * z;
  if (std::abs(1.0 - z2) > 2e-5) return detail::divdiff_raw(f, z, kind, ctx, check);
  const double d = 1e-5;
  const cplx z0 = (z.real() >= 0.0) ? cplx(std::abs(z)) : cplx(-std::abs(z));
  auto at = [&](double delta) { return detail::divdiff_raw(f, z0 * std::polar(1.0, delta), kind, ctx, check); };
  const cplx D1 = at(d), D2 = at(d / 2.0), D4 = at(d / 4.0);
  const cplx R1 = (4.0 * D2 - D1) / 3.0;
  const cplx R2 = (4.0 * D4 - D2) / 3.0;
  const cplx R = (16.0 * R2 - R1) / 15.0;
  if (std::abs(R - R2) > 1e-6 * std::max(std::abs(R), 1.0)) {
    throw NumericalError("divided-difference limit at z^2 = 1 did not stabilize");
  }
  return R;
}

inline cplx divdiff_at_x(const SymmetricLaurentFn& f, double x, DivDiff kind, const QContext& ctx) {
  if (x < -1.0 || x > 1.0) throw DomainError("pointwise divided differences require x in [-1,1]");
  return divdiff_at_z(f, std::polar(1.0, std::acos(x)), kind, ctx);
}

inline double dq_apply(const SymmetricLaurentFn& f, double x, const QContext& ctx) {
  return real_checked(divdiff_at_x(f, x, DivDiff::D, ctx), 0.0, 1e-9);
}

inline double cq_apply(const SymmetricLaurentFn& f, double x, const QContext& ctx) {
  return real_checked(divdiff_at_x(f, x, DivDiff::C, ctx), 0.0, 1e-9);
}

// B_q f = (1/g) D_q (g f)
inline double bq_apply(const SymmetricLaurentFn& f, double x, const QContext& ctx) {
  SymmetricLaurentFn gf(
      [f, ctx](cplx z) { return g_eval(0.5 * (z + 1.0 / z), ctx) * f(z); }, f.symmetric());
  return dq_apply(gf, x, ctx) / g_eval(x, ctx);
}

// The explicit z-quotient with prefactor 2 q^{1/2}.
inline double bq_explicit_apply(const SymmetricLaurentFn& f, double x, const QContext& ctx) {
  return real_checked(divdiff_at_x(f, x, DivDiff::B_explicit, ctx), 0.0, 1e-9);
}

// Breve form of z -> (op f)(x(z)) usable as input to another divided difference.
inline SymmetricLaurentFn lift(const SymmetricLaurentFn& f, DivDiff kind, const QContext& ctx) {
  return SymmetricLaurentFn([f, kind, ctx](cplx z) { return divdiff_at_z(f, z, kind, ctx, false); },
                            f.symmetric());
}

inline SymmetricLaurentFn dq_power(const SymmetricLaurentFn& f, std::size_t k, const QContext& ctx) {
  SymmetricLaurentFn r = f;
  for (std::size_t i = 0; i < k; ++i) r = lift(r, DivDiff::D, ctx);
  return r;
}

inline SymmetricLaurentFn cq_power(const SymmetricLaurentFn& f, std::size_t k, const QContext& ctx) {
  SymmetricLaurentFn r = f;
  for (std::size_t i = 0; i < k; ++i) r = lift(r, DivDiff::C, ctx);
  return r;
}

// D_q on coefficients: D_q H_n = 2 (1 - q^n)/(1 - q) q^{(1-n)/2} H_{n-1}.
inline HermiteSeries dq_series(const HermiteSeries& s) {
  const QContext& ctx = s.context();
  const double q = ctx.q();
  if (s.size() <= 1) return HermiteSeries(ctx, {0.0});
  std::vector<double> c(s.size() - 1);
  for (std::size_t n = 1; n < s.size(); ++n) {
    const double dn = static_cast<double>(n);
    c[n - 1] = s.coefficients()[n] * 2.0 * (1.0 - std::pow(q, dn)) / (1.0 - q) * std::pow(q, (1.0 - dn) / 2.0);
  }
  return HermiteSeries(ctx, std::move(c));
}

// Eigenvalue of D_q on g H_m, of C_q on H_m/g and of B_q on H_m.
inline double divdiff_eigenvalue(std::size_t m, const QContext& ctx) {
  return 2.0 * ctx.pow(0.25) / (1.0 - ctx.q()) * ctx.pow(-static_cast<double>(m) / 2.0);
}

}  // namespace qfrac
