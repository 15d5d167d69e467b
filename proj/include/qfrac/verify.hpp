#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qfrac/awop.hpp"
#include "qfrac/awpoly.hpp"
#include "qfrac/dualeq.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/qhermite.hpp"
#include "qfrac/quadrature.hpp"
#include "qfrac/semigroups.hpp"
#include "qfrac/transforms.hpp"

namespace qfrac {

// One certified identity: `value` is the measured residual (or statistic) and
// the row passes when it does not exceed `tolerance`. Rows with an infinite
// tolerance are recorded findings.
struct VerifyRow {
  std::string suite;
  std::string name;
  std::string params;
  double value;
  double tolerance;
  bool pass;
};

using RealFn = std::function<double(double)>;

namespace vdetail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

class Rows {
 public:
  explicit Rows(std::string suite) : suite_(std::move(suite)) {}
  void add(std::string name, std::string params, double value, double tol) {
    const bool ok = std::isfinite(value) && value <= tol;
    rows_.push_back({suite_, std::move(name), std::move(params), value, tol, ok});
  }
  // Passes when value < bound strictly.
  void add_below(std::string name, std::string params, double value, double bound) {
    const bool ok = std::isfinite(value) && value < bound;
    rows_.push_back({suite_, std::move(name), std::move(params), value, bound, ok});
  }
  void finding(std::string name, std::string params, double value) {
    rows_.push_back({suite_, std::move(name), std::move(params), value, std::numeric_limits<double>::infinity(),
                     !std::isnan(value)});
  }
  void failure(std::string name, std::string params, const std::exception& e) {
    rows_.push_back({suite_, std::move(name) + " [" + e.what() + "]", std::move(params),
                     std::numeric_limits<double>::quiet_NaN(), 0.0, false});
  }
  std::vector<VerifyRow> take() { return std::move(rows_); }

 private:
  std::string suite_;
  std::vector<VerifyRow> rows_;
};

inline std::vector<double> grid(std::size_t n = 33, double lo = -1.0, double hi = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return x;
}

template <class A, class B>
double sup_diff(const A& f, const B& g, const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(f(x) - g(x)));
  return m;
}

template <class A>
double sup_abs(const A& f, const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, std::abs(f(x)));
  return m;
}

// sup|f - ref| / max(1, sup|ref|)
template <class A, class B>
double scaled_diff(const A& f, const B& ref, const std::vector<double>& xs) {
  return sup_diff(f, ref, xs) / std::max(1.0, sup_abs(ref, xs));
}

inline ApplyOptions plain_options() { return ApplyOptions{256, std::size_t(1) << 18, false}; }

inline KernelImage image(Kind k, double a, const RealFn& f, const QContext& ctx, bool continuation = false) {
  ApplyOptions o = plain_options();
  o.continuation = continuation;
  return apply_quadrature(k, a, f, ctx, o);
}

inline RealFn hermite_fn(std::size_t n, const QContext& ctx) {
  return [n, ctx](double x) { return hermite_eval(n, x, ctx); };
}

inline SymmetricLaurentFn breve_of(std::shared_ptr<const KernelImage> img) {
  return SymmetricLaurentFn([img](cplx z) { return (*img)(0.5 * (z + 1.0 / z)); });
}

// Least-squares slope of log(err) against log(a).
inline double loglog_slope(const std::vector<double>& a, const std::vector<double>& err) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mx += std::log(a[i]);
    my += std::log(err[i]);
  }
  mx /= static_cast<double>(a.size());
  my /= static_cast<double>(a.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sxy += (std::log(a[i]) - mx) * (std::log(err[i]) - my);
    sxx += (std::log(a[i]) - mx) * (std::log(a[i]) - mx);
  }
  return sxy / sxx;
}

inline std::string qa(const QContext& ctx, double a) { return "q=" + fmt(ctx.q()) + " a=" + fmt(a); }

}  // namespace vdetail

// Orthogonality of H_m against H_n on the default rule.
inline std::vector<VerifyRow> verify_orthogonality(const QContext& ctx) {
  vdetail::Rows rows("orthogonality");
  const std::size_t top = 12;
  const auto nodes = make_nodes(default_rule(), ctx);
  const auto fac = qfactorials(top + 1, ctx.q());
  std::vector<std::vector<double>> H(top + 1, std::vector<double>(nodes->x.size()));
  for (std::size_t i = 0; i < nodes->x.size(); ++i) {
    const auto h = hermite_all(top, nodes->x[i], ctx.q());
    for (std::size_t n = 0; n <= top; ++n) H[n][i] = h[n];
  }
  for (std::size_t m = 0; m <= top; ++m) {
    double worst = 0.0;
    for (std::size_t n = 0; n <= top; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < nodes->x.size(); ++i) s += nodes->measure[i] * H[m][i] * H[n][i];
      worst = std::max(worst, std::abs(s - (m == n ? fac[n] : 0.0)));
    }
    rows.add("gram row m=" + std::to_string(m), "q=" + vdetail::fmt(ctx.q()) + " n<=12", worst, 1e-9);
  }
  return rows.take();
}

// Poisson kernel closed form against its 60-term series, Carlitz against
// Ismail-Stanton, and the generating function.
inline std::vector<VerifyRow> verify_kernels(const QContext& ctx) {
  vdetail::Rows rows("kernels");
  const std::string qs = "q=" + vdetail::fmt(ctx.q());
  const auto xs = vdetail::grid(9, -0.95, 0.95);
  const auto fac = qfactorials(61, ctx.q());
  double worst = 0.0, min_val = std::numeric_limits<double>::infinity();
  for (double t : {0.1, 0.25, 0.4}) {
    for (double x : xs) {
      const auto hx = hermite_all(60, x, ctx.q());
      for (double y : xs) {
        const auto hy = hermite_all(60, y, ctx.q());
        double s = 0.0, tn = 1.0;
        for (std::size_t n = 0; n < 60; ++n, tn *= t) s += hx[n] * hy[n] * tn / fac[n];
        const double c = poisson_kernel(x, y, t, ctx);
        min_val = std::min(min_val, c);
        worst = std::max(worst, std::abs(c - s) / std::abs(c));
      }
    }
  }
  rows.add("poisson closed vs 60-term series (relative)", qs + " 9x9x3 grid", worst, 1e-10);
  rows.add_below("poisson kernel positivity (negated minimum)", qs, -min_val, 0.0);

  // Relative to the sup over the grid: the m > 0 kernels change sign.
  for (std::size_t m = 0; m <= 4; ++m) {
    double w = 0.0;
    for (double t : {0.1, 0.25, 0.4}) {
      double diff = 0.0, sup = 0.0;
      for (double x : xs)
        for (double y : xs) {
          const double c = bilinear_kernel(x, y, t, m, ctx, BilinearForm::carlitz);
          const double s = bilinear_kernel(x, y, t, m, ctx, BilinearForm::ismail_stanton);
          diff = std::max(diff, std::abs(c - s));
          sup = std::max(sup, std::abs(s));
        }
      w = std::max(w, diff / sup);
    }
    rows.add("carlitz vs ismail-stanton m=" + std::to_string(m), qs + " 9x9x3 grid", w, 1e-10);
  }

  double gen = 0.0;
  for (double t : {-0.4, -0.2, 0.3, 0.4})
    for (double x : xs) {
      const auto h = hermite_all(40, x, ctx.q());
      double s = 0.0, tn = 1.0;
      for (std::size_t n = 0; n <= 40; ++n, tn *= t) s += h[n] * tn / fac[n];
      const double th = std::acos(x);
      const double closed = 1.0 / real_checked(qpoch_inf(std::polar(t, th), ctx) * qpoch_inf(std::polar(t, -th), ctx));
      gen = std::max(gen, std::abs(s - closed) / std::abs(closed));
    }
  rows.add("generating function, 40 terms", qs + " |t|<=0.4", gen, 1e-10);
  return rows.take();
}

// T_a T_b = T_{a+b}, and likewise for S and F, on a shared rule.
inline std::vector<VerifyRow> verify_semigroup(const QContext& ctx) {
  vdetail::Rows rows("semigroup");
  const auto xs = vdetail::grid();
  const std::vector<double> orders{0.5, 1.0, 1.7};
  for (Kind k : {Kind::T, Kind::S, Kind::F}) {
    std::vector<std::pair<std::string, RealFn>> fs{
        {"e0", [](double) { return 1.0; }}, {"e1", [](double x) { return x; }}, {"e2", [](double x) { return x * x; }}};
    if (k == Kind::T) fs.push_back({"g*H3", [ctx](double x) { return g_value(x, ctx) * hermite_eval(3, x, ctx); }});
    if (k == Kind::S) fs.push_back({"H3/g", [ctx](double x) { return hermite_eval(3, x, ctx) / g_value(x, ctx); }});
    if (k == Kind::F) fs.push_back({"H3", vdetail::hermite_fn(3, ctx)});
    for (double a : orders)
      for (double b : orders) {
        std::size_t n = 0;
        for (double o : {a, b, a + b}) n = std::max(n, required_nodes(k, o, vdetail::plain_options(), ctx));
        const auto nodes = make_nodes(QuadratureRule::midpoint(n), ctx);
        for (const auto& [name, f] : fs) {
          try {
            std::vector<double> v(nodes->x.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(nodes->x[i]);
            const KernelImage inner(k, b, nodes, v, ctx);
            const KernelImage outer(k, a, nodes, inner.at_nodes(), ctx);
            const KernelImage direct(k, a + b, nodes, v, ctx);
            const double r =
                vdetail::scaled_diff([&](double x) { return outer(x); }, [&](double x) { return direct(x); }, xs);
            rows.add(std::string(kind_name(k)) + "_a " + kind_name(k) + "_b " + name,
                     "q=" + vdetail::fmt(ctx.q()) + " a=" + vdetail::fmt(a) + " b=" + vdetail::fmt(b), r, 1e-7);
          } catch (const std::exception& e) {
            rows.failure(std::string(kind_name(k)) + " composition " + name, vdetail::qa(ctx, a), e);
          }
        }
      }
  }
  return rows.take();
}

// Quadrature-applied operators on their tagged eigenfunctions.
inline std::vector<VerifyRow> verify_eigen(const QContext& ctx) {
  vdetail::Rows rows("eigen");
  const auto xs = vdetail::grid();
  for (Kind k : {Kind::T, Kind::S, Kind::F})
    for (double a : {0.5, 1.0, 2.0}) {
      double worst = 0.0;
      for (std::size_t m = 0; m <= 8; ++m) {
        const RealFn f = [k, m, ctx](double x) {
          const double h = hermite_eval(m, x, ctx);
          if (k == Kind::T) return g_value(x, ctx) * h;
          if (k == Kind::S) return h / g_value(x, ctx);
          return h;
        };
        const double lam = eigenvalue(k, m, a, ctx);
        const KernelImage img = vdetail::image(k, a, f, ctx);
        const double r = vdetail::sup_diff([&](double x) { return img(x); }, [&](double x) { return lam * f(x); }, xs);
        worst = std::max(worst, r / (lam * vdetail::sup_abs(f, xs)));
      }
      rows.add(std::string(kind_name(k)) + " eigenvalues m<=8 (relative)", vdetail::qa(ctx, a), worst, 1e-8);
    }
  return rows.take();
}

// Order lowering and the commutation identities.
inline std::vector<VerifyRow> verify_lowering(const QContext& ctx) {
  vdetail::Rows rows("lowering");
  const auto xs = vdetail::grid();
  const double q = ctx.q();
  const RealFn poly = [ctx](double x) {
    return hermite_eval(0, x, ctx) + 0.3 * hermite_eval(2, x, ctx) + 0.2 * hermite_eval(3, x, ctx);
  };
  for (double a : {1.5, 2.2}) {
    const std::string ps = vdetail::qa(ctx, a);
    try {
      const RealFn f = [poly, ctx](double x) { return g_value(x, ctx) * poly(x); };
      auto img = std::make_shared<const KernelImage>(vdetail::image(Kind::T, a, f, ctx, true));
      const KernelImage low = vdetail::image(Kind::T, a - 1.0, f, ctx);
      const auto br = vdetail::breve_of(img);
      rows.add("D_q T_a = T_{a-1}", ps,
               vdetail::scaled_diff([&](double x) { return dq_apply(br, x, ctx); }, [&](double x) { return low(x); }, xs),
               1e-7);
    } catch (const std::exception& e) {
      rows.failure("D_q T_a = T_{a-1}", ps, e);
    }
    try {
      const RealFn f = [poly, ctx](double x) { return poly(x) / g_value(x, ctx); };
      auto img = std::make_shared<const KernelImage>(vdetail::image(Kind::S, a, f, ctx, true));
      const KernelImage low = vdetail::image(Kind::S, a - 1.0, f, ctx);
      const auto br = vdetail::breve_of(img);
      rows.add("C_q S_a = S_{a-1}", ps,
               vdetail::scaled_diff([&](double x) { return cq_apply(br, x, ctx); }, [&](double x) { return low(x); }, xs),
               1e-7);
    } catch (const std::exception& e) {
      rows.failure("C_q S_a = S_{a-1}", ps, e);
    }
    try {
      auto img = std::make_shared<const KernelImage>(vdetail::image(Kind::G, a, poly, ctx, true));
      const KernelImage low = vdetail::image(Kind::G, a - 1.0, poly, ctx);
      const auto br = vdetail::breve_of(img);
      rows.add("B_q G_a = G_{a-1}", ps,
               vdetail::scaled_diff([&](double x) { return bq_apply(br, x, ctx); }, [&](double x) { return low(x); }, xs),
               1e-7);
    } catch (const std::exception& e) {
      rows.failure("B_q G_a = G_{a-1}", ps, e);
    }

    const RealFn p6 = [](double x) { return std::pow(x, 6) - 0.5 * x * x * x + 0.2 * x + 0.1; };
    const auto p6b = SymmetricLaurentFn::from_x([](cplx x) { return std::pow(x, 6) - 0.5 * x * x * x + 0.2 * x + 0.1; });
    const RealFn dp6 = [p6b, ctx](double x) { return dq_apply(p6b, x, ctx); };
    try {
      auto img = std::make_shared<const KernelImage>(vdetail::image(Kind::F, a, p6, ctx, true));
      const KernelImage rhs = vdetail::image(Kind::F, a, dp6, ctx);
      const auto br = vdetail::breve_of(img);
      const double s = std::pow(q, a / 2.0);
      rows.add("D_q F_a = q^{a/2} F_a D_q", ps,
               vdetail::scaled_diff([&](double x) { return dq_apply(br, x, ctx); }, [&](double x) { return s * rhs(x); }, xs),
               1e-7);
    } catch (const std::exception& e) {
      rows.failure("D_q F_a = q^{a/2} F_a D_q", ps, e);
    }
    try {
      const KernelImage lhs = vdetail::image(Kind::F, a, dp6, ctx);
      const KernelImage fm = vdetail::image(Kind::F, a - 1.0, [p6](double x) { return x * p6(x); }, ctx);
      const KernelImage ff = vdetail::image(Kind::F, a - 1.0, p6, ctx);
      const double pre = 4.0 / ((1.0 - q) * (1.0 - std::pow(q, a - 1.0)));
      const double s = std::pow(q, (a - 1.0) / 2.0);
      rows.add("F_a D_q = product identity", ps,
               vdetail::scaled_diff([&](double x) { return lhs(x); },
                                 [&](double x) { return pre * (fm(x) - s * x * ff(x)); }, xs),
               1e-7);
    } catch (const std::exception& e) {
      rows.failure("F_a D_q = product identity", ps, e);
    }
  }
  const auto one = SymmetricLaurentFn::from_x([](cplx) { return cplx(1.0); });
  double ratio_dev = 0.0;
  for (double x : {-0.7, 0.1, 0.6}) {
    ratio_dev = std::max(ratio_dev, std::abs(bq_explicit_apply(one, x, ctx) / bq_apply(one, x, ctx) / ctx.pow(0.25) - 1.0));
  }
  rows.add("explicit B_q z-form / normative B_q equals q^{1/4}", "q=" + vdetail::fmt(q), ratio_dev, 1e-10);
  return rows.take();
}

// Closed-form moments against quadrature, and the O(a) second moment.
inline std::vector<VerifyRow> verify_moments(const QContext& ctx) {
  vdetail::Rows rows("moments");
  const auto xs = vdetail::grid();
  for (Kind k : {Kind::T, Kind::F})
    for (double a : {0.5, 1.5})
      for (int j = 0; j <= 2; ++j) {
        const KernelImage img = vdetail::image(k, a, [j](double x) { return std::pow(x, j); }, ctx);
        const auto closed = [&](double x) { return moments_closed_form(k, j, a, x, ctx); };
        const double r = vdetail::sup_diff([&](double x) { return img(x); }, closed, xs) / vdetail::sup_abs(closed, xs);
        rows.add(std::string(kind_name(k)) + "_a e_" + std::to_string(j) + " closed vs quadrature", vdetail::qa(ctx, a), r,
                 1e-9);
      }
  const std::vector<double> as{1e-1, 1e-2, 1e-3};
  for (Kind k : {Kind::T, Kind::F}) {
    std::vector<double> m;
    for (double a : as) m.push_back(vdetail::sup_abs([&](double x) { return second_moment(k, a, x, ctx); }, xs));
    rows.add(std::string(kind_name(k)) + "_a (x-y)^2 log-log slope deviation from 1",
             "q=" + vdetail::fmt(ctx.q()) + " a in {1e-1,1e-2,1e-3}", std::abs(vdetail::loglog_slope(as, m) - 1.0), 0.15);
  }
  return rows.take();
}

// O(a) approximation of the identity on cos(2x).
inline std::vector<VerifyRow> verify_rate(const QContext& ctx) {
  vdetail::Rows rows("rate");
  const auto xs = vdetail::grid();
  const RealFn f = [](double x) { return std::cos(2.0 * x); };
  const std::vector<double> as{1e-1, 1e-2, 1e-3};
  for (Kind k : {Kind::T, Kind::F}) {
    try {
      std::vector<double> err;
      for (double a : as) {
        const KernelImage img = vdetail::image(k, a, f, ctx);
        err.push_back(vdetail::sup_diff([&](double x) { return img(x); }, f, xs));
      }
      rows.add(std::string(kind_name(k)) + "_a f - f log-log slope deviation from 1",
               "q=" + vdetail::fmt(ctx.q()) + " f=cos(2x)", std::abs(vdetail::loglog_slope(as, err) - 1.0), 0.15);
      rows.add_below(std::string(kind_name(k)) + "_a f - f at a=1e-3 below a=1e-1", "q=" + vdetail::fmt(ctx.q()),
                     err.back() / err.front(), 1.0);
    } catch (const std::exception& e) {
      rows.failure(std::string(kind_name(k)) + " rate", "q=" + vdetail::fmt(ctx.q()), e);
    }
  }
  return rows.take();
}

// Contraction profile and threshold.
inline std::vector<VerifyRow> verify_contraction(const QContext& ctx) {
  vdetail::Rows rows("contraction");
  const std::string qs = "q=" + vdetail::fmt(ctx.q());
  rows.add("|h(0)|", qs, std::abs(contraction_profile(0.0, ctx)), 1e-14);
  double maxd2 = -std::numeric_limits<double>::infinity();
  for (double a = 0.05; a <= 20.0; a += 0.05) maxd2 = std::max(maxd2, contraction_profile_d2(a, ctx));
  rows.add_below("max h''(a) on (0, 20]", qs, maxd2, 0.0);
  try {
    const ContractionThreshold c = find_c(ctx);
    rows.finding("stationary point of h", qs, c.stationary);
    rows.finding("a0 with h < 0 beyond", qs, c.a0);
    const auto fine = vdetail::grid(1001);
    for (double off : {0.1, 0.5, 2.0, 10.0}) {
      const double a = c.a0 + off;
      const double sup = vdetail::sup_abs([&](double x) { return moments_closed_form(Kind::T, 0, a, x, ctx); }, fine);
      rows.add_below("sup_x T_a e_0 below 1", qs + " a=a0+" + vdetail::fmt(off), sup, 1.0);
    }
    double gap = 0.0;
    for (double a : {0.3, 1.0, c.a0 + 0.1}) {
      const double sup = vdetail::sup_abs([&](double x) { return moments_closed_form(Kind::T, 0, a, x, ctx); }, fine);
      gap = std::max(gap, std::abs(std::log(sup) - contraction_profile(a, ctx)));
    }
    rows.add("h(a) = log sup_x T_a e_0", qs, gap, 1e-10);
  } catch (const std::exception& e) {
    rows.failure("find_c", qs, e);
  }
  return rows.take();
}

// Connection relation and the Hilbert-Schmidt orthogonality identity.
inline std::vector<VerifyRow> verify_awpoly(const QContext& ctx) {
  vdetail::Rows rows("awpoly");
  const double a = 1.3, c = 0.2, d = -0.3;
  const std::string ps = vdetail::qa(ctx, a) + " c=0.2 d=-0.3";
  const auto xs = vdetail::grid();
  const AWParams base(-ctx.pow(0.25), -ctx.pow(0.75), c, d);
  double plus_gap = 0.0;
  for (std::size_t n = 0; n <= 4; ++n) {
    const KernelImage img = vdetail::image(Kind::T, a, [&](double x) { return awp_eval(n, x, base, ctx); }, ctx);
    const auto rhs = [&](double x) { return connection_rhs(n, a, c, d, x, ctx); };
    const double r = vdetail::sup_diff([&](double x) { return img(x); }, rhs, xs) / vdetail::sup_abs(rhs, xs);
    rows.add("connection relation n=" + std::to_string(n), ps, r, 1e-8);
    const auto rhs_plus = [&](double x) { return connection_rhs(n, a, c, d, x, ctx, ShiftSign::plus); };
    plus_gap = std::max(plus_gap, vdetail::sup_diff([&](double x) { return img(x); }, rhs_plus, xs) /
                                      vdetail::sup_abs(rhs, xs));
  }
  rows.finding("connection relation with c q^{a/2}, d q^{a/2} (max relative gap)", ps, plus_gap);
  const AWNormalization nz = aw_normalization(2, a, c, d, ctx);
  for (std::size_t m = 0; m <= 2; ++m)
    for (std::size_t n = 0; n <= 2; ++n) {
      const double v = hs_orthogonality(m, n, a, c, d, ctx);
      const double target = (m == n) ? nz.A[n] * nz.C[n] * nz.C[n] : 0.0;
      const double scale = std::sqrt(nz.A[m] * nz.C[m] * nz.C[m] * nz.A[n] * nz.C[n] * nz.C[n]);
      rows.add("hilbert-schmidt identity m=" + std::to_string(m) + " n=" + std::to_string(n), ps,
               std::abs(v - target) / scale, 1e-6);
    }
  return rows.take();
}

// Further Askey-Wilson identities: norms, integral, 5phi4 action, eigen-relation
// of the kernel and the bilinear partial sums.
inline std::vector<VerifyRow> verify_aw_identities(const QContext& ctx) {
  vdetail::Rows rows("aw_identities");
  const std::string qs = "q=" + vdetail::fmt(ctx.q());
  const double a = 1.0, c = 0.2, d = -0.3;
  const AWParams base(-ctx.pow(0.25), -ctx.pow(0.75), c, d);
  const auto rule = QuadratureRule::midpoint(midpoint_nodes_for(ctx.pow(0.25), 256, std::size_t(1) << 14));
  for (std::size_t n = 0; n <= 5; ++n) {
    const double s = integrate(rule, [&](double th) {
      const double p = awp_eval(n, std::cos(th), base, ctx);
      return p * p * aw_weight(th, base, ctx);
    });
    rows.add("norm M_" + std::to_string(n) + " (relative)", qs, std::abs(s / aw_norm(n, base, ctx) - 1.0), 1e-8);
  }
  double off = 0.0;
  for (std::size_t m = 0; m <= 3; ++m)
    for (std::size_t n = m + 1; n <= 4; ++n) {
      const double s = integrate(rule, [&](double th) {
        return awp_eval(m, std::cos(th), base, ctx) * awp_eval(n, std::cos(th), base, ctx) * aw_weight(th, base, ctx);
      });
      off = std::max(off, std::abs(s) / std::sqrt(aw_norm(m, base, ctx) * aw_norm(n, base, ctx)));
    }
  rows.add("orthogonality off-diagonal m<n<=4", qs, off, 1e-9);
  const std::array<cplx, 4> prm{0.3, -0.2, 0.5, 0.1};
  const double ic = aw_integral(prm, ctx, IntegralMethod::closed);
  const double iq = aw_integral(prm, ctx, IntegralMethod::quadrature);
  rows.add("askey-wilson integral closed vs quadrature", qs, std::abs(ic - iq) / std::abs(ic), 1e-9);

  const double b2 = 0.2, c2 = 0.3, d2 = -0.1;
  const AWParams gen(-ctx.pow(0.25), b2, c2, d2);
  const auto xs = vdetail::grid();
  for (std::size_t n = 0; n <= 3; ++n) {
    const KernelImage img = vdetail::image(Kind::T, a, [&](double x) { return awp_eval(n, x, gen, ctx); }, ctx);
    const auto rhs = [&](double x) { return ta_on_awp(n, a, b2, c2, d2, x, ctx); };
    rows.add("T_a p_n 5phi4 form n=" + std::to_string(n), qs + " a=1 (b,c,d)=(0.2,0.3,-0.1)",
             vdetail::sup_diff([&](double x) { return img(x); }, rhs, xs) / vdetail::sup_abs(rhs, xs), 1e-8);
  }
  double worst = 0.0;
  for (const auto& r : bilinear_check(3, a, c, d, ctx)) worst = std::max(worst, r.rel_residual);
  rows.add("kernel eigen-relation n<=3", qs + " a=1", worst, 1e-6);
  const HSKernel K(a, c, d, ctx);
  const double k12 = K.symmetric(1.0, 0.6), k21 = K.symmetric(0.6, 1.0);
  rows.add("kernel symmetry after weight division", qs, std::abs(k12 - k21) / std::abs(k12), 1e-10);
  const auto terms = static_cast<std::size_t>(std::ceil(std::log(1e-10) / std::log(ctx.pow(a / 2.0)))) + 10;
  const double ps = bilinear_partial_sum(terms, 1.0, 0.6, a, c, d, ctx);
  rows.add("bilinear expansion partial sum at (1.0, 0.6)", qs + " terms=" + std::to_string(terms),
           std::abs(ps - k12) / std::abs(k12), 1e-6);
  return rows.take();
}

// q-Gauss-Weierstrass transform.
inline std::vector<VerifyRow> verify_transform(const QContext& ctx) {
  vdetail::Rows rows("transform");
  const std::string qs = "q=" + vdetail::fmt(ctx.q());
  const double q = ctx.q();
  std::vector<std::pair<std::string, HermiteSeries>> fs{
      {"e0", HermiteSeries(ctx, {1.0})},
      {"e1", HermiteSeries(ctx, {0.0, 0.5})},
      {"e2", HermiteSeries(ctx, {(1.0 - q) / 4.0, 0.0, 0.25})},
      {"H4", HermiteSeries(ctx, {0.0, 0.0, 0.0, 0.0, 1.0})}};
  std::vector<double> inv(24);
  const auto fac = qfactorials(24, q);
  for (std::size_t n = 0; n < inv.size(); ++n) inv[n] = 1.0 / fac[n];
  fs.push_back({"1/(q;q)_n", HermiteSeries(ctx, inv)});
  for (const auto& [name, f] : fs) {
    const HermiteSeries back = wq_invert(wq_forward(f), ctx);
    double r = 0.0;
    for (std::size_t n = 0; n < f.size(); ++n)
      r = std::max(r, std::abs(back.coeff(n) - f.coeff(n)) / std::max(std::abs(f.coeff(n)), 1e-300));
    for (std::size_t n = f.size(); n < back.size(); ++n) r = std::max(r, std::abs(back.coeff(n)));
    rows.add("round trip " + name + " (max relative coefficient error)", qs, r, 4e-15);
  }
  const auto rule = default_rule();
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& [name, f] = fs[i];
    const EntireSeries g = wq_forward(f);
    double r = 0.0;
    for (double t : {-0.5, -0.25, 0.0, 0.25, 0.5})
      r = std::max(r, std::abs(wq_forward([&f](double x) { return f(x); }, t, ctx, rule) - g(t)));
    rows.add("pointwise vs spectral forward " + name, qs + " |t|<=0.5", r, 1e-9);
  }
  const HermiteSeries f(ctx, {0.2, 0.0, 0.5, 1.0});
  for (double a : {0.7, 1.5}) {
    double r = 0.0;
    const TaggedSeries gf = apply_spectral(Kind::G, a, TaggedSeries{f, EigenTag::plain}, ctx);
    for (double t : {0.2, 0.4}) {
      const double lhs = integrate(rule, [&](double th) {
        const double x = std::cos(th);
        return qexp_eval(x, t, ctx) * gf(x) * weight_sin(th, ctx);
      });
      const double rhs = integrate(rule, [&](double th) {
        const double x = std::cos(th);
        return qexp_eval(x, t * ctx.pow(a / 2.0), ctx) * f(x) * weight_sin(th, ctx);
      });
      const double q2 = q * q;
      const double s = std::pow(1.0 - q, a) * qpoch_inf(ctx.pow(a + 1.0) * t * t, q2, ctx.eps_product()) /
                       (std::pow(2.0, a) * ctx.pow(a / 4.0) * qpoch_inf(q * t * t, q2, ctx.eps_product()));
      r = std::max(r, std::abs(lhs - s * rhs) / std::abs(lhs));
    }
    rows.add("multiplier identity for G_a", vdetail::qa(ctx, a), r, 1e-8);
  }
  return rows.take();
}

// Resolvent multipliers and convergence to the identity.
inline std::vector<VerifyRow> verify_resolvent(const QContext& ctx) {
  vdetail::Rows rows("resolvent");
  const std::string qs = "q=" + vdetail::fmt(ctx.q());
  const double lq = std::log(ctx.q());
  const auto rule = QuadratureRule::gauss_legendre(64, 0.0, 1.0);
  double worst = 0.0;
  for (double y : {1.0, 10.0, 100.0})
    for (std::size_t m = 0; m <= 8; ++m) {
      // log(q^{-y}) int_0^inf c_a^{-1} lambda_m(a) q^{ay} da, split into panels.
      const double rate = -lq * (y + static_cast<double>(m) / 2.0);
      const double len = 1.0 / rate;
      double s = 0.0;
      for (int p = 0; p < 40; ++p)
        s += integrate(rule, [&](double u) {
          const double a = (p + u) * len;
          return eigenvalue(Kind::T, m, a, ctx) / scale_c(a, ctx) * std::exp(a * y * lq);
        }) * len;
      s *= -y * lq;
      worst = std::max(worst, std::abs(s - resolvent_multiplier(m, y)));
    }
  rows.add("multiplier y/(y+m/2) vs integral", qs + " m<=8 y in {1,10,100}", worst, 1e-12);
  double m0 = 0.0;
  for (double y : {1e-3, 1.0, 10.0, 1e3}) m0 = std::max(m0, std::abs(resolvent_multiplier(0, y) - 1.0));
  rows.add("multiplier at m=0 equals 1", qs, m0, 0.0);
  rows.add("multiplier at m=2, y=10 equals 10/11", qs, std::abs(resolvent_multiplier(2, 10.0) - 10.0 / 11.0), 1e-16);

  const auto xs = vdetail::grid();
  ExpandOptions projection;
  projection.verify_tol = 0.0;
  for (Kind k : {Kind::T, Kind::S}) {
    const RealFn e2 = [](double x) { return x * x; };
    const TaggedSeries f = expand_tagged(e2, eigen_tag(k), ctx, projection);
    const auto fac = qfactorials(f.series.size(), ctx.q());
    std::vector<double> l2, sup;
    for (double y : {1.0, 10.0, 100.0}) {
      std::vector<double> c = resolvent_limit(k, f, y, ctx).series.coefficients();
      double e = 0.0;
      for (std::size_t m = 0; m < c.size(); ++m) {
        c[m] -= f.series.coeff(m);
        e += c[m] * c[m] * fac[m];
      }
      l2.push_back(std::sqrt(e));
      const TaggedSeries d{HermiteSeries(ctx, std::move(c)), f.tag};
      sup.push_back(vdetail::sup_abs([&](double x) { return d(x); }, xs));
    }
    const std::string kn = kind_name(k);
    rows.add_below(kn + " resolvent L2 error ratio y=10 over y=1", qs, l2[1] / l2[0], 1.0);
    rows.add_below(kn + " resolvent L2 error ratio y=100 over y=10", qs, l2[2] / l2[1], 1.0);
    rows.add_below(kn + " resolvent sup error ratio y=10 over y=1", qs, sup[1] / sup[0], 1.0);
    rows.add_below(kn + " resolvent sup error ratio y=100 over y=10", qs, sup[2] / sup[1], 1.0);
  }
  return rows.take();
}

namespace vdetail {

struct Manufactured {
  DualProblem problem;
  RealFn exact;
};

inline Manufactured manufactured(double a, double b, const QContext& ctx) {
  const HermiteSeries ps(ctx, {1.0, 0.0, 0.3});
  const RealFn psi = [ps, ctx](double x) { return g_value(x, ctx) * ps(x); };
  auto ia = std::make_shared<const KernelImage>(image(Kind::T, a, psi, ctx, true));
  auto ib = std::make_shared<const KernelImage>(image(Kind::T, b, psi, ctx, true));
  const double sa = dual_scale(a, ctx), sb = dual_scale(b, ctx);
  DualProblem p{BoundaryData::analytic([ia, sa](cplx x) { return (*ia)(x) / sa; }, -1.0, 0.0),
                BoundaryData::analytic([ib, sb](cplx x) { return (*ib)(x) / sb; }, 0.0, 1.0), a, b,
                grid(41, -0.975, 0.975)};
  return {std::move(p), psi};
}

inline void dual_rows(Rows& rows, const QContext& ctx, double a, double b, double tol) {
  const std::string ps = "q=" + fmt(ctx.q()) + " a=" + fmt(a) + " b=" + fmt(b);
  try {
    const Manufactured m = manufactured(a, b, ctx);
    const DualSolution s = dual_solve(m.problem, ctx);
    double err = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i) err = std::max(err, std::abs(s.psi[i] - m.exact(s.grid[i])));
    const std::string label = std::string("case ") + dual_case_name(s.which);
    rows.add(label + " recovery of manufactured psi", ps, err, tol);
    rows.add(label + " relative residual on (-1,0)", ps, s.residual_F, 1e-4);
    rows.add(label + " relative residual on (0,1)", ps, s.residual_G, 1e-4);
    if (s.system_size > 0) {
      rows.finding(label + " collocation condition number", ps, s.condition);
      rows.finding(label + " Legendre degree of the unknown", ps, static_cast<double>(s.degree));
    }
    if (s.which == DualCase::equal_orders) {
      const Reconstruction r = dual_equal_direct(m.problem, ctx);
      rows.add("case b direct display vs generic pipeline", ps, sup_diff(r, s, m.problem.grid), 1e-6);
    }
  } catch (const std::exception& e) {
    rows.failure("dual solve", ps, e);
  }
}

}  // namespace vdetail

// Manufactured-solution recoveries for the equal, integer-gap and Fredholm cases.
inline std::vector<VerifyRow> verify_dual(const QContext& ctx) {
  vdetail::Rows rows("dual");
  vdetail::dual_rows(rows, ctx, 1.5, 1.5, 1e-5);
  vdetail::dual_rows(rows, ctx, 2.5, 1.5, 1e-5);
  vdetail::dual_rows(rows, ctx, 1.7, 1.2, 1e-4);
  return rows.take();
}

// The mirrored cases a < b.
inline std::vector<VerifyRow> verify_dual_mirror(const QContext& ctx) {
  vdetail::Rows rows("dual_mirror");
  vdetail::dual_rows(rows, ctx, 1.5, 2.5, 1e-5);
  vdetail::dual_rows(rows, ctx, 1.2, 1.7, 1e-4);
  return rows.take();
}

// Adjointness, conjugation, intertwining, positivity, closed-form actions,
// generators, backend agreement and inversion.
inline std::vector<VerifyRow> verify_operators(const QContext& ctx) {
  vdetail::Rows rows("operators");
  const std::string qs = "q=" + vdetail::fmt(ctx.q());
  const auto xs = vdetail::grid();
  const auto rule = default_rule();
  const RealFn f = [](double x) { return 1.0 + x - 0.5 * x * x * x; };
  const RealFn h = [](double x) { return std::exp(0.3 * x); };
  for (double a : {0.6, 1.4}) {
    const std::string ps = vdetail::qa(ctx, a);
    const KernelImage tf = vdetail::image(Kind::T, a, f, ctx);
    const KernelImage sh = vdetail::image(Kind::S, a, h, ctx);
    const double l = integrate(rule, [&](double th) { return tf(std::cos(th)) * h(std::cos(th)) * weight_sin(th, ctx); });
    const double r = integrate(rule, [&](double th) { return f(std::cos(th)) * sh(std::cos(th)) * weight_sin(th, ctx); });
    rows.add("adjoint <T_a f, h> = <f, S_a h>", ps, std::abs(l - r) / std::abs(l), 1e-8);

    const KernelImage tg2 = vdetail::image(
        Kind::T, a, [&](double x) { return g_value(x, ctx) * g_value(x, ctx) * h(x); }, ctx);
    rows.add("conjugation S_a = K T_a K^{-1}", ps,
             vdetail::sup_diff([&](double x) { return sh(x); },
                               [&](double x) { return tg2(x) / (g_value(x, ctx) * g_value(x, ctx)); }, xs) /
                 vdetail::sup_abs([&](double x) { return sh(x); }, xs),
             1e-8);

    double inter = 0.0;
    for (double t : {0.2, 0.5}) {
      const QexpAction act = action_qexp(a, t, ctx);
      const double lhs = integrate(rule, [&](double th) {
        const double x = std::cos(th);
        return qexp_eval(x, t, ctx) * tf(x) / g_value(x, ctx) * weight_sin(th, ctx);
      });
      const double rhs = integrate(rule, [&](double th) {
        const double x = std::cos(th);
        return qexp_eval(x, act.shifted_t, ctx) * f(x) / g_value(x, ctx) * weight_sin(th, ctx);
      });
      inter = std::max(inter, std::abs(lhs - act.scalar * rhs) / std::abs(lhs));
    }
    rows.add("intertwining with E_q", ps, inter, 1e-8);

    double qe = 0.0;
    for (double t : {0.0, 0.3, -0.6}) {
      const QexpAction act = action_qexp(a, t, ctx);
      const KernelImage img = vdetail::image(
          Kind::T, a, [&](double x) { return g_value(x, ctx) * qexp_eval(x, t, ctx); }, ctx);
      const auto rhs = [&](double x) { return act.scalar * g_value(x, ctx) * qexp_eval(x, act.shifted_t, ctx); };
      qe = std::max(qe, vdetail::sup_diff([&](double x) { return img(x); }, rhs, xs) / vdetail::sup_abs(rhs, xs));
    }
    rows.add("T_a on g E_q(.;t)", ps, qe, 1e-8);

    for (double beta : {0.0, 0.5, 1.0, 2.0}) {
      const PhiAction act = action_phi_beta(a, beta, PhiVariant::minus, ctx);
      const KernelImage img = vdetail::image(
          Kind::T, a, [&](double x) { return phi_basis_eval(beta, x, PhiVariant::minus, ctx); }, ctx);
      const auto rhs = [&](double x) { return act.scalar * phi_basis_eval(act.order, x, PhiVariant::minus, ctx); };
      rows.add("T_a phi_beta (minus variant) beta=" + vdetail::fmt(beta), ps,
               vdetail::sup_diff([&](double x) { return img(x); }, rhs, xs) / vdetail::sup_abs(rhs, xs), 1e-8);
    }
    {
      const PhiAction act = action_phi_beta(a, 1.0, PhiVariant::plus, ctx);
      const KernelImage img = vdetail::image(
          Kind::T, a, [&](double x) { return phi_basis_eval(1.0, x, PhiVariant::plus, ctx); }, ctx);
      const auto rhs = [&](double x) { return act.scalar * phi_basis_eval(act.order, x, PhiVariant::plus, ctx); };
      rows.finding("T_a phi_1 plus variant against the product formula (relative gap)", ps,
                   vdetail::sup_diff([&](double x) { return img(x); }, rhs, xs) / vdetail::sup_abs(rhs, xs));
    }

    double neg = std::numeric_limits<double>::infinity();
    for (double x : xs)
      for (double y : xs) neg = std::min(neg, kernel_value(make_kernel_spec(Kind::T, a, ctx), x, y, ctx));
    rows.add_below("T kernel positivity on grid (negated minimum)", ps, -neg, 0.0);
  }

  for (Kind k : {Kind::T, Kind::S, Kind::F}) {
    for (double a : {0.7, 1.6}) {
      const RealFn p = [](double x) { return 0.3 + x * x - std::pow(x, 5) + 0.2 * std::pow(x, 8); };
      const RealFn fk = (k == Kind::T)   ? RealFn([p, ctx](double x) { return g_value(x, ctx) * p(x); })
                        : (k == Kind::S) ? RealFn([p, ctx](double x) { return p(x) / g_value(x, ctx); })
                                         : p;
      const KernelImage img = vdetail::image(k, a, fk, ctx);
      const auto spec = apply(k, a, fk, Backend::spectral, ctx);
      rows.add(std::string(kind_name(k)) + " quadrature vs spectral backend", vdetail::qa(ctx, a),
               vdetail::sup_diff([&](double x) { return img(x); }, spec, xs) / vdetail::sup_abs(spec, xs), 1e-8);
    }
  }

  for (Kind k : {Kind::T, Kind::S, Kind::F}) {
    for (double a : {0.7, 1.0, 1.5, 2.3}) {
      const RealFn p = [](double x) { return 0.5 - x + 0.8 * x * x * x - 0.3 * std::pow(x, 6); };
      const RealFn fk = (k == Kind::T)   ? RealFn([p, ctx](double x) { return g_value(x, ctx) * p(x); })
                        : (k == Kind::S) ? RealFn([p, ctx](double x) { return p(x) / g_value(x, ctx); })
                                         : p;
      const std::string name = std::string(kind_name(k)) + " inversion round trip";
      try {
        const auto img = std::make_shared<const KernelImage>(vdetail::image(k, a, fk, ctx));
        const Reconstruction r = invert(k, a, [img](double x) { return (*img)(x); }, ctx);
        rows.add(name, vdetail::qa(ctx, a), vdetail::scaled_diff(r, fk, xs), 1e-7);
      } catch (const std::exception& e) {
        rows.failure(name, vdetail::qa(ctx, a), e);
      }
    }
  }

  for (Kind k : {Kind::T, Kind::S, Kind::F}) {
    const HermiteSeries s(ctx, {1.0, -0.4, 0.3, 0.2, -0.1});
    const HermiteSeries j = generator_apply(k, s, ctx);
    const EigenTag tag = eigen_tag(k);
    std::vector<double> as{1e-2, 1e-3, 1e-4}, err;
    for (double a : as) {
      const TaggedSeries ta = apply_spectral(k, a, TaggedSeries{s, tag}, ctx);
      double e = 0.0;
      for (std::size_t n = 0; n < s.size(); ++n)
        e = std::max(e, std::abs((ta.series.coeff(n) - s.coeff(n)) / a - j.coeff(n)));
      err.push_back(e);
    }
    rows.add(std::string(kind_name(k)) + " generator finite-difference slope deviation from 1", qs,
             std::abs(vdetail::loglog_slope(as, err) - 1.0), 0.15);
  }
  return rows.take();
}

using SuiteFn = std::vector<VerifyRow> (*)(const QContext&);

inline const std::map<std::string, SuiteFn>& verify_suites() {
  static const std::map<std::string, SuiteFn> suites{
      {"orthogonality", &verify_orthogonality}, {"kernels", &verify_kernels},
      {"semigroup", &verify_semigroup},         {"eigen", &verify_eigen},
      {"lowering", &verify_lowering},           {"moments", &verify_moments},
      {"rate", &verify_rate},                   {"contraction", &verify_contraction},
      {"awpoly", &verify_awpoly},               {"aw_identities", &verify_aw_identities},
      {"transform", &verify_transform},         {"resolvent", &verify_resolvent},
      {"dual", &verify_dual},                   {"dual_mirror", &verify_dual_mirror},
      {"operators", &verify_operators},
  };
  return suites;
}

inline std::vector<VerifyRow> run_suite(const std::string& name, const QContext& ctx) {
  const auto& s = verify_suites();
  if (name == "all") {
    std::vector<VerifyRow> all;
    for (const auto& [n, fn] : s) {
      auto r = fn(ctx);
      all.insert(all.end(), r.begin(), r.end());
    }
    return all;
  }
  const auto it = s.find(name);
  if (it == s.end()) throw DomainError("unknown verify suite '" + name + "'");
  return it->second(ctx);
}

}  // namespace qfrac
