#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "qfrac/awop.hpp"
#include "qfrac/error.hpp"
#include "qfrac/qcore.hpp"
#include "qfrac/qhermite.hpp"
#include "qfrac/quadrature.hpp"

namespace qfrac {

enum class Kind { T, S, F, G };
enum class Backend { quadrature, spectral };
enum class EigenTag { g_times, over_g, plain };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::T: return "T";
    case Kind::S: return "S";
    case Kind::F: return "F";
    case Kind::G: return "G";
  }
  return "?";
}

namespace detail {

class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += (std::abs(sum_) >= std::abs(v)) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

}  // namespace detail

struct SemigroupOrder {
  double a;
  explicit SemigroupOrder(double value) : a(value) {
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError("operator order must be a positive real");
  }
  std::size_t whole() const { return static_cast<std::size_t>(std::floor(a)); }
  double frac() const { return a - std::floor(a); }
};

// ((1-q)/(2 q^{1/4}))^a
inline double scale_c(double a, const QContext& ctx) {
  return std::pow((1.0 - ctx.q()) / (2.0 * ctx.pow(0.25)), a);
}

// Scaling used by the dual equations and the kernel prefactor of T and S.
inline double kernel_prefactor(Kind kind, double a, const QContext& ctx) {
  const double p = qpoch_inf(ctx.pow(a), ctx);
  return (kind == Kind::F) ? p : scale_c(a, ctx) * p;
}

struct KernelSpec {
  Kind kind;
  double a;
  double prefactor;
};

inline KernelSpec make_kernel_spec(Kind kind, double a, const QContext& ctx) {
  SemigroupOrder ord(a);
  return {kind, ord.a, kernel_prefactor(kind, ord.a, ctx)};
}

// K(x,y) with (Op f)(x) = int K(x,y) f(y) w_H(y) dy.
inline double kernel_value(const KernelSpec& k, double x, double y, const QContext& ctx) {
  const double t = ctx.pow(k.a / 2.0);
  const double base = k.prefactor / poisson_denominator(std::acos(x), std::acos(y), t, ctx);
  switch (k.kind) {
    case Kind::T: return base * g_eval(x, ctx) / g_eval(y, ctx);
    case Kind::S: return base * g_eval(y, ctx) / g_eval(x, ctx);
    default: return base;
  }
}

inline EigenTag eigen_tag(Kind k) {
  switch (k) {
    case Kind::T: return EigenTag::g_times;
    case Kind::S: return EigenTag::over_g;
    default: return EigenTag::plain;
  }
}

inline double eigenvalue(Kind kind, std::size_t m, double a, const QContext& ctx) {
  if (a < 0.0) throw DomainError("eigenvalue requires a >= 0");
  const double base = ctx.pow(static_cast<double>(m) * a / 2.0);
  return (kind == Kind::F) ? base : scale_c(a, ctx) * base;
}

struct ApplyOptions {
  std::size_t nodes = 256;
  std::size_t max_nodes = std::size_t(1) << 18;
  // Size the rule so that the image can also be evaluated on |z| = q^{-1/2}.
  bool continuation = true;
};

inline std::size_t required_nodes(Kind kind, double a, const ApplyOptions& opt, const QContext& ctx) {
  const double t = ctx.pow(a / 2.0);
  const double rq = std::sqrt(ctx.q());
  double r = (opt.continuation && t / rq < 0.98) ? t / rq : t;
  if (kind == Kind::T) r = std::max(r, ctx.pow(0.25));
  // S images carry 1/g(x), so the rule must also cover the range of g.
  const double range = (kind == Kind::S) ? std::log(g_value(1.0, ctx) / g_value(-1.0, ctx)) : 0.0;
  return midpoint_nodes_for(r, opt.nodes, opt.max_nodes, range);
}

// Result of applying an operator by quadrature. Stores the weighted samples
// and evaluates the kernel integral at any real x or, as analytic
// continuation, at complex x.
class KernelImage {
 public:
  KernelImage(Kind kind, double a, std::shared_ptr<const NodeData> nodes, const std::vector<double>& samples,
              const QContext& ctx)
      : kind_(kind), a_(SemigroupOrder(a).a), ctx_(ctx), nodes_(std::move(nodes)) {
    if (samples.size() != nodes_->x.size()) throw DomainError("sample count does not match the rule");
    t_ = ctx.pow(a_ / 2.0);
    pref_ = qpoch_inf(t_ * t_, ctx);
    if (kind_ != Kind::F) pref_ *= scale_c(a_, ctx);
    u_.resize(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
      double w = nodes_->measure[j] * samples[j];
      if (kind_ == Kind::T) w /= nodes_->g[j];
      if (kind_ == Kind::S) w *= nodes_->g[j];
      u_[j] = w;
    }
    const double q = ctx.q();
    for (double r = t_; (2.0 * r + r * r) / (1.0 - q) >= ctx.eps_product(); r *= q) {
      r_.push_back(r);
      omr2_.push_back((1.0 - r) * (1.0 - r));
    }
    phi_ = nodes_->rule.theta;
    cos_phi_.resize(samples.size());
    sin_phi_.resize(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) {
      cos_phi_[j] = nodes_->x[j];
      sin_phi_[j] = nodes_->sin_theta[j];
    }
  }

  Kind kind() const { return kind_; }
  double order() const { return a_; }
  const std::shared_ptr<const NodeData>& nodes() const { return nodes_; }

  double operator()(double x) const {
    if (x < -1.0 || x > 1.0) return real_checked((*this)(cplx(x)), 0.0, 1e-9);
    const double th = std::acos(x);
    detail::NeumaierSum s;
    for (std::size_t j = 0; j < u_.size(); ++j) {
      const double sp = std::sin(0.5 * (th + phi_[j])), sm = std::sin(0.5 * (th - phi_[j]));
      const double hp = 4.0 * sp * sp, hm = 4.0 * sm * sm;
      double den = 1.0;
      for (std::size_t k = 0; k < r_.size(); ++k) den *= (omr2_[k] + r_[k] * hp) * (omr2_[k] + r_[k] * hm);
      s.add(u_[j] / den);
    }
    return pref_ * outer(x) * s.value();
  }

  cplx operator()(cplx x) const {
    cplx s = 0.0;
    for (std::size_t j = 0; j < u_.size(); ++j) {
      const cplx e(cos_phi_[j], sin_phi_[j]);
      cplx den = 1.0;
      for (double r : r_) {
        const cplx b = r * e;
        const cplx bc = std::conj(b);
        den *= (1.0 - 2.0 * b * x + b * b) * (1.0 - 2.0 * bc * x + bc * bc);
      }
      s += u_[j] / den;
    }
    return pref_ * outer(x) * s;
  }

  // Values at the rule's own nodes. On the full midpoint rule cos(th_i +- ph_j)
  // only takes 2N+1 distinct values, so the products are tabulated once.
  std::vector<double> at_nodes() const {
    const std::size_t n = u_.size();
    std::vector<double> out(n);
    if (!nodes_->rule.full_midpoint()) {
      for (std::size_t i = 0; i < n; ++i) out[i] = (*this)(nodes_->x[i]);
      return out;
    }
    std::vector<double> table(2 * n + 1);
    for (std::size_t m = 0; m <= 2 * n; ++m) {
      const double sh = std::sin(0.5 * pi * static_cast<double>(m) / static_cast<double>(n));
      const double h = 4.0 * sh * sh;
      double p = 1.0;
      for (std::size_t k = 0; k < r_.size(); ++k) p *= omr2_[k] + r_[k] * h;
      table[m] = 1.0 / p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      detail::NeumaierSum acc;
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t d = (i > j) ? i - j : j - i;
        acc.add(u_[j] * table[i + j + 1] * table[d]);
      }
      const double s = acc.value();
      double o = 1.0;
      if (kind_ == Kind::T) o = nodes_->g[i];
      if (kind_ == Kind::S) o = 1.0 / nodes_->g[i];
      out[i] = pref_ * o * s;
    }
    return out;
  }

 private:
  template <class X>
  X outer(X x) const {
    if (kind_ == Kind::T) return g_value(x, ctx_);
    if (kind_ == Kind::S) return X(1.0) / g_value(x, ctx_);
    return X(1.0);
  }

  Kind kind_;
  double a_;
  double t_ = 0.0;
  double pref_ = 0.0;
  QContext ctx_;
  std::shared_ptr<const NodeData> nodes_;
  std::vector<double> u_, r_, omr2_, phi_, cos_phi_, sin_phi_;
};

inline KernelImage apply_on_nodes(Kind kind, double a, std::shared_ptr<const NodeData> nodes,
                                  const std::vector<double>& samples, const QContext& ctx) {
  return KernelImage(kind, a, std::move(nodes), samples, ctx);
}

inline KernelImage apply_quadrature(Kind kind, double a, const std::function<double(double)>& f,
                                    const QContext& ctx, const ApplyOptions& opt = {}) {
  SemigroupOrder ord(a);
  const auto nodes = make_nodes(QuadratureRule::midpoint(required_nodes(kind, ord.a, opt, ctx)), ctx);
  std::vector<double> v(nodes->x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(nodes->x[i]);
  return KernelImage(kind, ord.a, nodes, v, ctx);
}

// Quadrature on a user-supplied rule (e.g. Gauss-Legendre).
inline KernelImage apply_quadrature(Kind kind, double a, const std::function<double(double)>& f,
                                    const QuadratureRule& rule, const QContext& ctx) {
  const auto nodes = make_nodes(rule, ctx);
  std::vector<double> v(nodes->x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(nodes->x[i]);
  return KernelImage(kind, a, nodes, v, ctx);
}

// A Hermite series in the eigenbasis of one operator family:
// g * sum c_m H_m, (sum c_m H_m)/g or sum c_m H_m.
struct TaggedSeries {
  HermiteSeries series;
  EigenTag tag;

  template <class X>
  X evaluate(X x) const {
    const X s = series.evaluate(x);
    switch (tag) {
      case EigenTag::g_times: return g_value(x, series.context()) * s;
      case EigenTag::over_g: return s / g_value(x, series.context());
      default: return s;
    }
  }
  double operator()(double x) const { return evaluate(x); }
  cplx operator()(cplx x) const { return evaluate(x); }

  SymmetricLaurentFn breve() const {
    const TaggedSeries self = *this;
    return SymmetricLaurentFn([self](cplx z) { return self.evaluate(0.5 * (z + 1.0 / z)); });
  }
};

inline std::function<double(double)> untag(const std::function<double(double)>& f, EigenTag tag,
                                           const QContext& ctx) {
  switch (tag) {
    case EigenTag::g_times: return [f, ctx](double x) { return f(x) / g_value(x, ctx); };
    case EigenTag::over_g: return [f, ctx](double x) { return f(x) * g_value(x, ctx); };
    default: return f;
  }
}

inline TaggedSeries expand_tagged(const std::function<double(double)>& f, EigenTag tag, const QContext& ctx,
                                  const ExpandOptions& opt = {}) {
  TaggedSeries s{hermite_expand_adaptive(untag(f, tag, ctx), ctx, opt), tag};
  if (opt.verify_tol > 0.0) {
    constexpr int points = 65;
    double scale = 1.0, err = 0.0;
    for (int k = 0; k < points; ++k) {
      const double x = std::cos(std::numbers::pi * (k + 0.5) / points);
      const double v = f(x);
      scale = std::max(scale, std::abs(v));
      err = std::max(err, std::abs(s(x) - v));
    }
    if (!(err <= opt.verify_tol * scale)) {
      throw NumericalError("eigen-weighted expansion does not reproduce the input (sup error " +
                           std::to_string(err) + ")");
    }
  }
  return s;
}

inline TaggedSeries apply_spectral(Kind kind, double a, const TaggedSeries& f, const QContext& ctx) {
  SemigroupOrder ord(a);
  if (f.tag != eigen_tag(kind)) {
    throw DomainError(std::string("input series is not in the eigen-weighted form of ") + kind_name(kind));
  }
  std::vector<double> c = f.series.coefficients();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= eigenvalue(kind, m, ord.a, ctx);
  return {HermiteSeries(ctx, std::move(c)), f.tag};
}

inline std::function<double(double)> apply(Kind kind, double a, const std::function<double(double)>& f,
                                           Backend backend, const QContext& ctx, const ApplyOptions& opt = {}) {
  if (backend == Backend::quadrature) {
    auto img = std::make_shared<KernelImage>(apply_quadrature(kind, a, f, ctx, opt));
    return [img](double x) { return (*img)(x); };
  }
  const TaggedSeries s = apply_spectral(kind, a, expand_tagged(f, eigen_tag(kind), ctx), ctx);
  return [s](double x) { return s(x); };
}

// Closed forms of the images of e_0, e_1, e_2.
inline double moments_closed_form(Kind kind, int j, double a, double x, const QContext& ctx) {
  if (j < 0 || j > 2) throw DomainError("moments are available for j = 0, 1, 2");
  if (a < 0.0) throw DomainError("moments require a >= 0");
  if (x < -1.0 || x > 1.0) throw DomainError("moments require x in [-1,1]");
  if (a == 0.0) return std::pow(x, j);
  const double q = ctx.q();
  auto qa = [&](double p) { return std::pow(q, p); };
  if (kind == Kind::F || kind == Kind::G) {
    const double s = (kind == Kind::G) ? scale_c(a, ctx) : 1.0;
    if (j == 0) return s;
    if (j == 1) return s * qa(a / 2.0) * x;
    return s * (qa(a) * x * x + (1.0 - q) * (1.0 - qa(a)) / 4.0);
  }
  if (kind != Kind::T) throw DomainError("closed-form moments exist for T, F and G");
  const double ratio = g_value(x, ctx) / g_shifted(x, a, ctx);
  const double base = scale_c(a, ctx) * ratio / qpoch_inf(q, ctx);
  if (j == 0) return base * qpoch_inf(qa(a + 1.0), ctx);
  if (j == 1) {
    return base * qpoch_inf(qa(a + 2.0), ctx) * (x * qa(a / 2.0) * (1.0 - q) + zeta(ctx) * qa(0.5) * (qa(a) - 1.0));
  }
  const double h = a / 2.0;
  const double c2 = qa(a) * (1.0 - q) * (1.0 - q * q);
  const double c1 = 0.5 * ((qa(a) + q) * (qa(h + 0.25) + qa(h + 0.75) + qa(h + 1.25) + qa(h + 1.75)) -
                           (1.0 + q) * (qa(h + 0.25) + qa(h + 0.75) + qa(3.0 * h + 1.25) + qa(3.0 * h + 1.75)));
  const double c0 = 0.25 * ((1.0 + q) * (qa(0.5) + q + qa(a) + qa(a + 2.0) + qa(2.0 * a + 1.0) + qa(2.0 * a + 1.5) -
                                         1.0 - qa(a + 0.5) - qa(a + 1.5) - qa(2.0 * a + 2.0)) +
                            2.0 * (1.0 - qa(a + 1.0)) * (1.0 - qa(a + 2.0)) - 2.0 * (qa(a) + qa(a + 3.0)));
  return base * qpoch_inf(qa(a + 3.0), ctx) * (c2 * x * x + c1 * x + c0);
}

// x^2 T_a e_0 - 2x T_a e_1 + T_a e_2, the image of (x - y)^2 at fixed x.
inline double second_moment(Kind kind, double a, double x, const QContext& ctx) {
  return x * x * moments_closed_form(kind, 0, a, x, ctx) - 2.0 * x * moments_closed_form(kind, 1, a, x, ctx) +
         moments_closed_form(kind, 2, a, x, ctx);
}

struct PhiAction {
  double order;
  double scalar;
  PhiVariant variant;
  // The product-ratio identity holds for the minus variant only.
  bool closed_form_holds;
};

inline PhiAction action_phi_beta(double a, double beta, PhiVariant variant, const QContext& ctx) {
  if (a < 0.0 || beta < 0.0) throw DomainError("action_phi_beta requires a, beta >= 0");
  const double s = scale_c(a, ctx) * qpoch_inf(ctx.pow(a + beta + 1.0), ctx) / qpoch_inf(ctx.pow(beta + 1.0), ctx);
  return {beta + a, s, variant, variant == PhiVariant::minus};
}

struct QexpAction {
  double scalar;
  double shifted_t;
};

inline QexpAction action_qexp(double a, double t, const QContext& ctx) {
  if (!(std::abs(t) < 1.0)) throw DomainError("action_qexp requires |t| < 1");
  if (a < 0.0) throw DomainError("action_qexp requires a >= 0");
  const double q2 = ctx.q() * ctx.q();
  const double s = scale_c(a, ctx) * qpoch_inf(ctx.pow(a + 1.0) * t * t, q2, ctx.eps_product()) /
                   qpoch_inf(ctx.q() * t * t, q2, ctx.eps_product());
  return {s, ctx.pow(a / 2.0) * t};
}

inline double generator_multiplier(Kind kind, std::size_t m, const QContext& ctx) {
  const double dm = static_cast<double>(m);
  if (kind == Kind::F) return dm / 2.0 * std::log(ctx.q());
  return std::log((1.0 - ctx.q()) / 2.0 * ctx.pow((2.0 * dm - 1.0) / 4.0));
}

inline HermiteSeries generator_apply(Kind kind, const HermiteSeries& f, const QContext& ctx) {
  std::vector<double> c = f.coefficients();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= generator_multiplier(kind, m, ctx);
  return HermiteSeries(ctx, std::move(c));
}

struct InvertOptions {
  std::size_t trunc = 48;
  std::size_t nodes = 256;
  // Coefficients below this fraction of the L2(w_H) norm are treated as noise.
  double noise_rel = 1e-11;
  // Relative tail norm allowed after rescaling (F inversion).
  double tail_tol = 1e-14;
};

// Zeroes coefficients that sit at the noise floor. The floor is the larger of
// noise_rel * |f| and 20 times the median weighted magnitude over the upper
// half of the index range.
inline HermiteSeries threshold_noise(const HermiteSeries& s, double noise_rel) {
  const auto f = qfactorials(s.size(), s.context().q());
  std::vector<double> w(s.size());
  for (std::size_t n = 0; n < s.size(); ++n) w[n] = std::abs(s.coefficients()[n]) * std::sqrt(f[n]);
  const double norm = std::sqrt(s.norm_sq());
  double floor_level = noise_rel * norm;
  if (s.size() >= 16) {
    std::vector<double> upper(w.begin() + static_cast<long>(s.size() / 2), w.end());
    std::nth_element(upper.begin(), upper.begin() + static_cast<long>(upper.size() / 2), upper.end());
    floor_level = std::max(floor_level, 20.0 * upper[upper.size() / 2]);
  }
  std::vector<double> c = s.coefficients();
  for (std::size_t n = 0; n < c.size(); ++n)
    if (w[n] < floor_level) c[n] = 0.0;
  return HermiteSeries(s.context(), std::move(c));
}

inline double tail_norm_ratio(const std::vector<double>& c, std::size_t from, const QContext& ctx) {
  const auto f = qfactorials(c.size(), ctx.q());
  double total = 0.0, tail = 0.0;
  for (std::size_t n = 0; n < c.size(); ++n) {
    const double e = c[n] * c[n] * f[n];
    if (!std::isfinite(e)) return std::numeric_limits<double>::infinity();
    total += e;
    if (n >= from) tail += e;
  }
  return total > 0.0 ? std::sqrt(tail / total) : 0.0;
}

// F inversion on coefficients: g_n -> g_n q^{-na/2}. The rescaled entries in
// the top quarter of the working truncation must carry a negligible share of
// the norm.
inline HermiteSeries invert_f(double a, const HermiteSeries& g, const QContext& ctx, const InvertOptions& opt = {}) {
  if (a < 0.0) throw DomainError("inversion order must be non-negative");
  std::vector<double> c = g.coefficients();
  for (std::size_t n = 0; n < c.size(); ++n) c[n] *= ctx.pow(-static_cast<double>(n) * a / 2.0);
  const std::size_t work = std::max(opt.trunc, c.size());
  const double tail = tail_norm_ratio(c, 3 * work / 4, ctx);
  if (!(tail <= opt.tail_tol)) {
    throw NumericalError("rescaled coefficients fail the square-summability bound (tail ratio " +
                         std::to_string(tail) + ")");
  }
  return HermiteSeries(ctx, std::move(c));
}

inline TaggedSeries invert_spectral(Kind kind, double a, const TaggedSeries& g, const QContext& ctx,
                                    const InvertOptions& opt = {}) {
  if (g.tag != eigen_tag(kind)) {
    throw DomainError(std::string("input series is not in the eigen-weighted form of ") + kind_name(kind));
  }
  if (kind == Kind::F || kind == Kind::G) {
    HermiteSeries s = g.series;
    if (kind == Kind::G) {
      std::vector<double> c = s.coefficients();
      for (double& v : c) v /= scale_c(a, ctx);
      s = HermiteSeries(ctx, std::move(c));
    }
    return {invert_f(a, s, ctx, opt), g.tag};
  }
  std::vector<double> c = g.series.coefficients();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] /= eigenvalue(kind, m, a, ctx);
  return {HermiteSeries(ctx, std::move(c)), g.tag};
}

// Projection of sampled values onto a tagged Hermite series with noise removal.
inline TaggedSeries project_tagged(const NodeData& nodes, const std::vector<double>& values, EigenTag tag,
                                   const QContext& ctx, const InvertOptions& opt) {
  std::vector<double> v(values);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (tag == EigenTag::g_times) v[i] /= nodes.g[i];
    if (tag == EigenTag::over_g) v[i] *= nodes.g[i];
  }
  return {threshold_noise(hermite_project(nodes, v, opt.trunc, ctx), opt.noise_rel), tag};
}

inline std::shared_ptr<const NodeData> inversion_nodes(double b, const InvertOptions& opt, const QContext& ctx) {
  ApplyOptions ao;
  ao.nodes = std::max(opt.nodes, 2 * opt.trunc + 64);
  ao.continuation = false;
  return make_nodes(QuadratureRule::midpoint(required_nodes(Kind::T, b, ao, ctx)), ctx);
}

// Thresholded spectral inversion of a sampled function.
inline TaggedSeries invert_samples(Kind kind, double a, const std::function<double(double)>& gfun,
                                   const QContext& ctx, const InvertOptions& opt = {}) {
  SemigroupOrder ord(a);
  const auto nodes = inversion_nodes(1.0, opt, ctx);
  std::vector<double> v(nodes->x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = gfun(nodes->x[i]);
  return invert_spectral(kind, ord.a, project_tagged(*nodes, v, eigen_tag(kind), ctx, opt), ctx, opt);
}

// D_q^k on g-tagged series and C_q^k on 1/g-tagged series. Both act on the
// tagged basis by g H_m -> 2 q^{1/4} q^{-m/2}/(1-q) g H_m (and likewise for H_m/g).
inline TaggedSeries lower_tagged(const TaggedSeries& f, std::size_t k, const QContext& ctx) {
  if (f.tag == EigenTag::plain) throw DomainError("lowering needs a g-tagged or 1/g-tagged series");
  std::vector<double> c = f.series.coefficients();
  const double base = 2.0 * ctx.pow(0.25) / (1.0 - ctx.q());
  const double dk = static_cast<double>(k);
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= std::pow(base * ctx.pow(-static_cast<double>(m) / 2.0), dk);
  return {HermiteSeries(ctx, std::move(c)), f.tag};
}

// Left inversion through the operator route:
// T: f = D_q^{floor(a)+1} T_{1-{a}} g, S: f = C_q^{floor(a)+1} S_{1-{a}} g.
// The intermediate image is projected onto the eigen-weighted basis, where the
// divided differences act coefficientwise.
class Reconstruction {
 public:
  Reconstruction(TaggedSeries result, TaggedSeries intermediate)
      : result_(std::move(result)), intermediate_(std::move(intermediate)) {}
  double operator()(double x) const { return result_(x); }
  const TaggedSeries& result() const { return result_; }
  const TaggedSeries& intermediate() const { return intermediate_; }

 private:
  TaggedSeries result_;
  TaggedSeries intermediate_;
};

inline Reconstruction invert(Kind kind, double a, const std::function<double(double)>& gfun, const QContext& ctx,
                             const InvertOptions& opt = {}) {
  SemigroupOrder ord(a);
  if (kind == Kind::F || kind == Kind::G) {
    const TaggedSeries s = invert_samples(kind, ord.a, gfun, ctx, opt);
    return Reconstruction(s, s);
  }
  const std::size_t k = ord.whole() + 1;
  const double b = 1.0 - ord.frac();
  const auto nodes = inversion_nodes(b, opt, ctx);
  std::vector<double> v(nodes->x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = gfun(nodes->x[i]);
  const KernelImage img(kind, b, nodes, v, ctx);
  const TaggedSeries mid = project_tagged(*nodes, img.at_nodes(), eigen_tag(kind), ctx, opt);
  return Reconstruction(lower_tagged(mid, k, ctx), mid);
}

// Contraction profile h(a) = log sup_x (T_a e_0)(x).
inline double contraction_profile(double a, const QContext& ctx) {
  if (a < 0.0) throw DomainError("contraction profile requires a >= 0");
  const double q = ctx.q();
  const double base = std::sqrt(q);
  const double c = (1.0 - q) / (2.0 * ctx.pow(0.25));
  return a * std::log(c) + std::log(qpoch_inf(ctx.pow(a + 1.0), ctx)) - std::log(qpoch_inf(q, ctx)) +
         2.0 * std::log(qpoch_inf(-ctx.pow(0.25), base, ctx.eps_product())) -
         2.0 * std::log(qpoch_inf(-ctx.pow(a / 2.0 + 0.25), base, ctx.eps_product()));
}

inline double contraction_profile_d1(double a, const QContext& ctx, std::size_t terms = 200) {
  const double q = ctx.q(), lq = std::log(q);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < terms; ++n) {
    const double dn = static_cast<double>(n);
    const double v = std::pow(q, a + dn + 1.0);
    const double u = std::pow(q, (a + dn + 0.5) / 2.0);
    s1 += v / (1.0 - v);
    s2 += u / (1.0 + u);
  }
  return std::log((1.0 - q) / (2.0 * ctx.pow(0.25))) - lq * s1 - lq * s2;
}

inline double contraction_profile_d2(double a, const QContext& ctx, std::size_t terms = 200) {
  const double q = ctx.q(), lq = std::log(q);
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t n = 0; n < terms; ++n) {
    const double dn = static_cast<double>(n);
    const double v = std::pow(q, a + dn + 1.0);
    const double u = std::pow(q, (a + dn + 0.5) / 2.0);
    s1 += v / ((1.0 - v) * (1.0 - v));
    s2 += u / ((1.0 + u) * (1.0 + u));
  }
  return -lq * lq * s1 - 0.5 * lq * lq * s2;
}

struct ContractionThreshold {
  // Maximiser of h; h is strictly decreasing beyond it.
  double stationary;
  // Smallest a0 with h(a) < 0 for all a > a0.
  double a0;
};

inline ContractionThreshold find_c(const QContext& ctx) {
  const double c = (1.0 - ctx.q()) / (2.0 * ctx.pow(0.25));
  if (!(c < 1.0)) throw DomainError("no contraction threshold: (1-q)/(2 q^{1/4}) >= 1");
  auto bisect = [](auto&& fn, double lo, double hi) {
    for (int i = 0; i < 200 && hi - lo > 1e-10; ++i) {
      const double mid = 0.5 * (lo + hi);
      (fn(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  double stat = 0.0;
  if (contraction_profile_d1(0.0, ctx) > 0.0) {
    double hi = 1.0;
    while (contraction_profile_d1(hi, ctx) > 0.0) {
      hi *= 2.0;
      if (hi > 1e6) throw NumericalError("find_c: derivative does not change sign");
    }
    stat = bisect([&](double a) { return contraction_profile_d1(a, ctx); }, 0.0, hi);
  }
  double a0 = stat;
  if (contraction_profile(stat, ctx) > 0.0) {
    double hi = std::max(1.0, 2.0 * stat);
    while (contraction_profile(hi, ctx) > 0.0) {
      hi *= 2.0;
      if (hi > 1e6) throw NumericalError("find_c: profile does not become negative");
    }
    a0 = bisect([&](double a) { return contraction_profile(a, ctx); }, stat, hi);
  }
  return {stat, a0};
}

inline double resolvent_multiplier(std::size_t m, double y) { return y / (y + static_cast<double>(m) / 2.0); }

inline TaggedSeries resolvent_limit(Kind kind, const TaggedSeries& f, double y, const QContext& ctx) {
  if (kind != Kind::T && kind != Kind::S) throw DomainError("resolvent_limit is defined for T and S");
  if (!(y > 0.0)) throw DomainError("resolvent_limit requires y > 0");
  if (f.tag != eigen_tag(kind)) throw DomainError("input series is not in the eigen-weighted form");
  std::vector<double> c = f.series.coefficients();
  for (std::size_t m = 0; m < c.size(); ++m) c[m] *= resolvent_multiplier(m, y);
  return {HermiteSeries(ctx, std::move(c)), f.tag};
}

}  // namespace qfrac
