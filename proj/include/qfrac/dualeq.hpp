#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qfrac/awop.hpp"
#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/qhermite.hpp"
#include "qfrac/quadrature.hpp"
#include "qfrac/semigroups.hpp"

namespace qfrac {

// Boundary data on a sub-interval. Real evaluation is exact for callables and
// locally cubic for tables; the complex continuation needed by D_q comes
// from the callable itself or from a Chebyshev least-squares fit.
class BoundaryData {
 public:
  using AnalyticFn = std::function<cplx(cplx)>;

  static BoundaryData analytic(AnalyticFn f, double lo, double hi) {
    BoundaryData b(lo, hi);
    b.fn_ = std::move(f);
    return b;
  }

  static BoundaryData table(std::vector<double> xs, std::vector<double> vs, double lo, double hi) {
    if (xs.size() != vs.size() || xs.size() < 2) throw DomainError("boundary table needs at least two (x, value) rows");
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!std::isfinite(xs[i]) || !std::isfinite(vs[i])) throw DomainError("boundary table has non-finite entries");
      if (xs[i] < lo || xs[i] > hi) throw DomainError("boundary table abscissa outside the declared interval");
      if (i > 0 && !(xs[i] > xs[i - 1])) throw DomainError("boundary table abscissae must be strictly increasing");
    }
    BoundaryData b(lo, hi);
    b.xs_ = std::move(xs);
    b.vs_ = std::move(vs);
    b.fit_chebyshev();
    return b;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  bool tabulated() const { return !xs_.empty(); }

  double operator()(double x) const {
    if (!tabulated()) return real_checked(fn_(cplx(x)), 0.0, 1e-8);
    if (x <= xs_.front()) return vs_.front();
    if (x >= xs_.back()) return vs_.back();
    const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    const std::size_t j = static_cast<std::size_t>(it - xs_.begin());
    if (xs_.size() < 4) {
      const double s = (x - xs_[j - 1]) / (xs_[j] - xs_[j - 1]);
      return (1.0 - s) * vs_[j - 1] + s * vs_[j];
    }
    // Cubic Lagrange interpolation through the four surrounding rows.
    const std::size_t first = std::min(j >= 2 ? j - 2 : 0, xs_.size() - 4);
    double sum = 0.0;
    for (std::size_t i = first; i < first + 4; ++i) {
      double w = 1.0;
      for (std::size_t k = first; k < first + 4; ++k)
        if (k != i) w *= (x - xs_[k]) / (xs_[i] - xs_[k]);
      sum += w * vs_[i];
    }
    return sum;
  }

  cplx continued(cplx x) const {
    if (!tabulated()) return fn_(x);
    const cplx u = (2.0 * x - (lo_ + hi_)) / (hi_ - lo_);
    cplx b1 = 0.0, b2 = 0.0;
    for (std::size_t k = cheb_.size(); k-- > 1;) {
      const cplx b0 = cheb_[k] + 2.0 * u * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return cheb_[0] + u * b1 - b2;
  }

 private:
  BoundaryData(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(hi > lo)) throw DomainError("boundary interval must be non-empty");
  }

  void fit_chebyshev() {
    const std::size_t deg = std::min<std::size_t>(20, xs_.size() / 3 + 1);
    Eigen::MatrixXd V(xs_.size(), deg + 1);
    Eigen::VectorXd y(xs_.size());
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      const double u = (2.0 * xs_[i] - (lo_ + hi_)) / (hi_ - lo_);
      double t0 = 1.0, t1 = u;
      V(static_cast<long>(i), 0) = 1.0;
      if (deg >= 1) V(static_cast<long>(i), 1) = u;
      for (std::size_t k = 2; k <= deg; ++k) {
        const double t2 = 2.0 * u * t1 - t0;
        V(static_cast<long>(i), static_cast<long>(k)) = t2;
        t0 = t1;
        t1 = t2;
      }
      y(static_cast<long>(i)) = vs_[i];
    }
    const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
    cheb_.assign(c.data(), c.data() + c.size());
  }

  double lo_, hi_;
  AnalyticFn fn_;
  std::vector<double> xs_, vs_, cheb_;
};

struct DualProblem {
  BoundaryData F;  // data on (-1, 0)
  BoundaryData G;  // data on (0, 1)
  double a;
  double b;
  std::vector<double> grid;
};

enum class DualCase { fredholm_a_gt_b, equal_orders, fredholm_a_lt_b, integer_gap_a_gt_b, integer_gap_a_lt_b };

inline const char* dual_case_name(DualCase c) {
  switch (c) {
    case DualCase::fredholm_a_gt_b: return "a";
    case DualCase::equal_orders: return "b";
    case DualCase::fredholm_a_lt_b: return "c";
    case DualCase::integer_gap_a_gt_b: return "d";
    case DualCase::integer_gap_a_lt_b: return "e";
  }
  return "?";
}

struct DualOptions {
  // Lower bounds; both grow with the kernel's pole distance ln(1/t) from the real angle axis.
  std::size_t nystrom_nodes = 64;
  std::size_t rhs_nodes = 160;
  // The unknown is g times a Legendre series on the sub-interval; the degree
  // grows in steps of 4 until the weighted residual falls below residual_target
  // or stops improving.
  std::size_t max_degree = 48;
  double residual_target = 1e-13;
  // Singular values below svd_cut * sigma_max are discarded in the least-squares solve.
  double svd_cut = 1e-14;
  // Systems whose kept condition number exceeds this are rejected.
  double max_condition = 1e15;
  InvertOptions invert;
  std::size_t residual_points = 33;
};

struct DualSolution {
  DualCase which;
  std::vector<double> grid;
  std::vector<double> psi;
  std::shared_ptr<TaggedSeries> series;
  double residual_F = 0.0;
  double residual_G = 0.0;
  // Nystrom diagnostics (cases a and c only).
  double condition = 0.0;
  double full_condition = 0.0;
  std::size_t rank = 0;
  std::size_t degree = 0;
  std::size_t system_size = 0;

  double operator()(double x) const { return (*series)(x); }
};

// s_a = ((1-q)/(2 q^{1/4}))^a (q^a; q)_inf
inline double dual_scale(double a, const QContext& ctx) { return kernel_prefactor(Kind::T, a, ctx); }

inline DualCase classify_dual(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw DomainError("dual equations need orders a, b > 0");
  }
  const double gap = a - b;
  if (std::abs(gap) < 1e-12) return DualCase::equal_orders;
  if (std::abs(gap - std::round(gap)) < 1e-12) {
    return gap > 0 ? DualCase::integer_gap_a_gt_b : DualCase::integer_gap_a_lt_b;
  }
  return gap > 0 ? DualCase::fredholm_a_gt_b : DualCase::fredholm_a_lt_b;
}

namespace detail {

// T_c restricted to a sub-interval, discretised on the given angle rule.
// Row i evaluates at x = cos(theta_out[i]).
inline Eigen::MatrixXd restricted_t_matrix(double c, const std::vector<double>& theta_out, const QuadratureRule& in,
                                           const QContext& ctx) {
  const double t = ctx.pow(c / 2.0);
  const double pref = scale_c(c, ctx) * qpoch_inf(t * t, ctx);
  Eigen::MatrixXd A(theta_out.size(), in.size());
  std::vector<double> col(in.size());
  for (std::size_t j = 0; j < in.size(); ++j) {
    col[j] = in.weight[j] * weight_sin(in.theta[j], ctx) / g_value(std::cos(in.theta[j]), ctx);
  }
  for (std::size_t i = 0; i < theta_out.size(); ++i) {
    const double gx = g_value(std::cos(theta_out[i]), ctx);
    for (std::size_t j = 0; j < in.size(); ++j) {
      A(static_cast<long>(i), static_cast<long>(j)) =
          pref * gx * col[j] / poisson_denominator(theta_out[i], in.theta[j], t, ctx);
    }
  }
  return A;
}

// Gauss-Legendre size on an angle interval of the given length so that the
// kernel poles at distance ln(1/t) give an error near 1e-13.
inline std::size_t gauss_nodes_for_kernel(double c, double length, const QContext& ctx) {
  const double d = -std::log(ctx.pow(c / 2.0)) / (length / 2.0);
  const double rho = d + std::sqrt(d * d + 1.0);
  return static_cast<std::size_t>(std::ceil(30.0 / (2.0 * std::log(rho))));
}

struct NystromResult {
  double lo = 0.0, hi = 0.0;
  std::vector<double> legendre;
  std::vector<double> theta;
  std::vector<double> values;
  double condition = 0.0;
  double full_condition = 0.0;
  double residual = 0.0;
  std::size_t rank = 0;
  std::size_t degree = 0;

  // The solved function g(x) sum_k a_k P_k(s), s the affine image of x in [-1, 1].
  double operator()(double x, const QContext& ctx) const {
    const double s = (2.0 * x - lo - hi) / (hi - lo);
    double p0 = 1.0, p1 = s, sum = legendre[0];
    if (legendre.size() > 1) sum += legendre[1] * s;
    for (std::size_t k = 1; k + 1 < legendre.size(); ++k) {
      const double dk = static_cast<double>(k);
      const double p2 = ((2.0 * dk + 1.0) * s * p1 - dk * p0) / (dk + 1.0);
      sum += legendre[k + 1] * p2;
      p0 = p1;
      p1 = p2;
    }
    return g_value(x, ctx) * sum;
  }
};

inline Eigen::MatrixXd legendre_matrix(const std::vector<double>& xs, double lo, double hi, std::size_t degree) {
  Eigen::MatrixXd P(static_cast<long>(xs.size()), static_cast<long>(degree + 1));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    const auto r = static_cast<long>(j);
    const double s = (2.0 * xs[j] - lo - hi) / (hi - lo);
    double p0 = 1.0, p1 = s;
    P(r, 0) = 1.0;
    if (degree >= 1) P(r, 1) = s;
    for (std::size_t k = 1; k < degree; ++k) {
      const double dk = static_cast<double>(k);
      const double p2 = ((2.0 * dk + 1.0) * s * p1 - dk * p0) / (dk + 1.0);
      P(r, static_cast<long>(k + 1)) = p2;
      p0 = p1;
      p1 = p2;
    }
  }
  return P;
}

// Solves s_known * T_c[u chi_unknown] = rhs on the unknown sub-interval, where
// rhs = s_data * data - s_known * T_c[known chi_known]. The equation is
// collocated at the Gauss nodes of the unknown half and u = g * (Legendre series).
inline NystromResult solve_first_kind(double c, double s_known, bool unknown_left,
                                      const std::function<double(double)>& data_on_unknown, double s_data,
                                      const std::function<double(double)>& known_other, const QContext& ctx,
                                      const DualOptions& opt) {
  const double half = pi / 2.0;
  const std::size_t n_un = std::max(opt.nystrom_nodes, gauss_nodes_for_kernel(c, half, ctx));
  const std::size_t n_kn = std::max(opt.rhs_nodes, 2 * n_un);
  const QuadratureRule un = unknown_left ? QuadratureRule::gauss_legendre(n_un, half, pi)
                                         : QuadratureRule::gauss_legendre(n_un, 0.0, half);
  const QuadratureRule kn = unknown_left ? QuadratureRule::gauss_legendre(n_kn, 0.0, half)
                                         : QuadratureRule::gauss_legendre(n_kn, half, pi);
  const Eigen::MatrixXd A = s_known * restricted_t_matrix(c, un.theta, un, ctx);
  const Eigen::MatrixXd B = s_known * restricted_t_matrix(c, un.theta, kn, ctx);
  Eigen::VectorXd known(kn.size());
  for (std::size_t j = 0; j < kn.size(); ++j) known(static_cast<long>(j)) = known_other(std::cos(kn.theta[j]));
  Eigen::VectorXd rhs(un.size());
  for (std::size_t i = 0; i < un.size(); ++i) rhs(static_cast<long>(i)) = s_data * data_on_unknown(std::cos(un.theta[i]));
  rhs -= B * known;

  // Rows weighted for L^2(w_H / g^2), where T_c is self-adjoint.
  std::vector<double> xs(un.size());
  Eigen::VectorXd rw(un.size()), gv(un.size());
  for (std::size_t j = 0; j < un.size(); ++j) {
    const auto r = static_cast<long>(j);
    xs[j] = std::cos(un.theta[j]);
    gv(r) = g_value(xs[j], ctx);
    rw(r) = std::sqrt(un.weight[j] * weight_sin(un.theta[j], ctx)) / gv(r);
  }
  const Eigen::MatrixXd Ag = rw.asDiagonal() * A * gv.asDiagonal();
  const Eigen::VectorXd b = rw.cwiseProduct(rhs);
  const double bnorm = b.norm();
  const double lo = unknown_left ? -1.0 : 0.0, hi = unknown_left ? 0.0 : 1.0;
  const std::size_t max_degree = std::min(opt.max_degree, un.size() / 2);

  NystromResult best;
  double best_res = std::numeric_limits<double>::infinity();
  for (std::size_t K = 4; K <= max_degree; K += 4) {
    const Eigen::MatrixXd M = Ag * legendre_matrix(xs, lo, hi, K);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv.size() == 0 || !(sv(0) > 0.0)) throw NumericalError("Nystrom system is singular");
    std::size_t rank = 0;
    while (rank < static_cast<std::size_t>(sv.size()) && sv(static_cast<long>(rank)) > opt.svd_cut * sv(0)) ++rank;
    const double cond = sv(0) / sv(static_cast<long>(rank) - 1);
    if (!(cond <= opt.max_condition)) break;
    const Eigen::VectorXd ub = svd.matrixU().transpose() * b;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(M.cols());
    for (std::size_t k = 0; k < rank; ++k) {
      a += svd.matrixV().col(static_cast<long>(k)) * (ub(static_cast<long>(k)) / sv(static_cast<long>(k)));
    }
    const double res = bnorm > 0.0 ? (M * a - b).norm() / bnorm : 0.0;
    const bool stalled = res > 0.5 * best_res;
    if (!stalled) {
      best.legendre.assign(a.data(), a.data() + a.size());
      best.condition = cond;
      best.full_condition = sv(0) / sv(sv.size() - 1);
      best.residual = res;
      best.rank = rank;
      best.degree = K;
      best_res = res;
    }
    if (stalled || res <= opt.residual_target) break;
  }
  if (best.legendre.empty()) throw NumericalError("Nystrom system ill-conditioned at every degree");
  best.lo = lo;
  best.hi = hi;
  best.theta = un.theta;
  for (double x : xs) best.values.push_back(best(x, ctx));
  return best;
}

inline std::function<double(double)> dq_power_of(const BoundaryData& d, std::size_t k, const QContext& ctx) {
  const SymmetricLaurentFn f([d](cplx z) { return d.continued(0.5 * (z + 1.0 / z)); });
  const SymmetricLaurentFn fk = dq_power(f, k, ctx);
  return [fk](double x) { return real_checked(fk(std::polar(1.0, std::acos(x))), 0.0, 1e-8); };
}

}  // namespace detail

// sup over interior points of |T_c psi / s_c - data|, relative to max(1, sup |data|).
inline double dual_residual(const TaggedSeries& psi, double c, const BoundaryData& data, double lo, double hi,
                            std::size_t points, const QContext& ctx) {
  const std::function<double(double)> f = [&psi](double x) { return psi(x); };
  const KernelImage img = apply_quadrature(Kind::T, c, f, ctx, ApplyOptions{256, std::size_t(1) << 18, false});
  const double s = dual_scale(c, ctx);
  double worst = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    const double d = data(x);
    scale = std::max(scale, std::abs(d));
    worst = std::max(worst, std::abs(img(x) / s - d));
  }
  return worst / scale;
}

// Data function m with T_c psi = m on (-1, 1), assembled per case.
struct AssembledData {
  double order;
  std::function<double(double)> m;
  detail::NystromResult nystrom;
  bool has_nystrom = false;
};

inline AssembledData dual_assemble(const DualProblem& p, const QContext& ctx, const DualOptions& opt = {}) {
  const DualCase which = classify_dual(p.a, p.b);
  const double sa = dual_scale(p.a, ctx), sb = dual_scale(p.b, ctx);
  const BoundaryData F = p.F, G = p.G;
  AssembledData out;
  switch (which) {
    case DualCase::equal_orders:
      out.order = p.a;
      out.m = [F, G, sa](double x) { return x < 0.0 ? sa * F(x) : sa * G(x); };
      break;
    case DualCase::integer_gap_a_gt_b: {
      const auto k = static_cast<std::size_t>(std::lround(p.a - p.b));
      const auto dF = detail::dq_power_of(F, k, ctx);
      out.order = p.b;
      out.m = [dF, G, sa, sb](double x) { return x < 0.0 ? sa * dF(x) : sb * G(x); };
      break;
    }
    case DualCase::integer_gap_a_lt_b: {
      const auto k = static_cast<std::size_t>(std::lround(p.b - p.a));
      const auto dG = detail::dq_power_of(G, k, ctx);
      out.order = p.a;
      out.m = [F, dG, sa, sb](double x) { return x < 0.0 ? sa * F(x) : sb * dG(x); };
      break;
    }
    case DualCase::fredholm_a_gt_b: {
      // s_b T_{a-b} g = s_a f with g unknown on (-1, 0)
      auto r = detail::solve_first_kind(
          p.a - p.b, sb, true, [F](double x) { return F(x); }, sa, [G](double x) { return G(x); }, ctx, opt);
      auto u = std::make_shared<const detail::NystromResult>(r);
      out.order = p.b;
      out.m = [u, G, sb, ctx](double x) { return x < 0.0 ? sb * (*u)(x, ctx) : sb * G(x); };
      out.nystrom = std::move(r);
      out.has_nystrom = true;
      break;
    }
    case DualCase::fredholm_a_lt_b: {
      // s_a T_{b-a} f = s_b g with f unknown on (0, 1)
      auto r = detail::solve_first_kind(
          p.b - p.a, sa, false, [G](double x) { return G(x); }, sb, [F](double x) { return F(x); }, ctx, opt);
      auto u = std::make_shared<const detail::NystromResult>(r);
      out.order = p.a;
      out.m = [u, F, sa, ctx](double x) { return x < 0.0 ? sa * F(x) : sa * (*u)(x, ctx); };
      out.nystrom = std::move(r);
      out.has_nystrom = true;
      break;
    }
  }
  return out;
}

inline DualSolution dual_solve(const DualProblem& p, const QContext& ctx, const DualOptions& opt = {}) {
  DualSolution sol;
  sol.which = classify_dual(p.a, p.b);
  const AssembledData data = dual_assemble(p, ctx, opt);
  const TaggedSeries psi = invert_samples(Kind::T, data.order, data.m, ctx, opt.invert);
  sol.series = std::make_shared<TaggedSeries>(psi);
  if (data.has_nystrom) {
    sol.condition = data.nystrom.condition;
    sol.full_condition = data.nystrom.full_condition;
    sol.rank = data.nystrom.rank;
    sol.degree = data.nystrom.degree;
    sol.system_size = data.nystrom.values.size();
  }
  sol.grid = p.grid;
  for (double x : p.grid) sol.psi.push_back(psi(x));
  sol.residual_F = dual_residual(psi, p.a, p.F, -1.0, 0.0, opt.residual_points, ctx);
  sol.residual_G = dual_residual(psi, p.b, p.G, 0.0, 1.0, opt.residual_points, ctx);
  return sol;
}

// Equal-order solution through the integral display:
// psi = D_q^{floor(a)+1} T_{1-{a}} h with h = s_a F on (-1,0), s_a G on (0,1).
inline Reconstruction dual_equal_direct(const DualProblem& p, const QContext& ctx, const InvertOptions& opt = {}) {
  if (classify_dual(p.a, p.b) != DualCase::equal_orders) throw DomainError("direct display needs a = b");
  const double sa = dual_scale(p.a, ctx);
  const BoundaryData F = p.F, G = p.G;
  return invert(Kind::T, p.a, [F, G, sa](double x) { return x < 0.0 ? sa * F(x) : sa * G(x); }, ctx, opt);
}

}  // namespace qfrac
