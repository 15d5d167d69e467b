#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfrac/qfrac.hpp"

#ifndef QFRAC_GIT_DESCRIBE
#define QFRAC_GIT_DESCRIBE "unknown"
#endif

namespace qfrac::cli {

struct RunConfig {
  double q = 0.5;
  double a = 1.0;
  double b = 1.0;
  std::size_t nodes = 256;
  std::size_t trunc = 48;
  double eps_product = 1e-15;
  double eps_series = 1e-14;
  std::string format = "csv";
  std::string output;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  void add(std::vector<Cell> r) { rows.push_back(std::move(r)); }
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ",";
      std::visit(
          [&os](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) os << format_double(v);
            else if constexpr (std::is_same_v<V, long long>) os << v;
            else os << csv_field(v);
          },
          r[i]);
    }
    os << "\n";
  }
}

inline void write_json(std::ostream& os, const Table& t, const RunConfig& cfg, const std::string& command) {
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["q"] = cfg.q;
  meta["a"] = cfg.a;
  meta["b"] = cfg.b;
  meta["nodes"] = cfg.nodes;
  meta["trunc"] = cfg.trunc;
  meta["git_describe"] = QFRAC_GIT_DESCRIBE;
  for (const auto& [k, v] : t.extra.items()) meta[k] = v;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : t.rows) {
    nlohmann::ordered_json row;
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) {
              if (std::isfinite(v)) row[t.columns[i]] = v;
              else row[t.columns[i]] = format_double(v);
            } else {
              row[t.columns[i]] = v;
            }
          },
          r[i]);
    }
    rows.push_back(std::move(row));
  }
  nlohmann::ordered_json doc;
  doc["metadata"] = std::move(meta);
  doc["columns"] = t.columns;
  doc["rows"] = std::move(rows);
  os << doc.dump(2) << "\n";
}

inline std::vector<double> uniform_grid(std::size_t n, double lo, double hi) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return xs;
}

// Midpoints of n equal cells, for functions that are singular at the ends.
inline std::vector<double> open_grid(std::size_t n, double lo, double hi) {
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  return xs;
}

// Two-column decimal CSV; a first line that does not parse as numbers is a header.
inline std::pair<std::vector<double>, std::vector<double>> read_two_column(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open data file '" + path + "'");
  std::vector<double> xs, vs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto comma = line.find(',');
    double x = 0.0, v = 0.0;
    bool ok = comma != std::string::npos;
    if (ok) {
      try {
        std::size_t p1 = 0, p2 = 0;
        const std::string s1 = line.substr(0, comma), s2 = line.substr(comma + 1);
        x = std::stod(s1, &p1);
        v = std::stod(s2, &p2);
        ok = s1.find_first_not_of(" \t", p1) == std::string::npos && s2.find_first_not_of(" \t", p2) == std::string::npos;
      } catch (const std::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      if (lineno == 1 && xs.empty()) continue;
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected two numeric columns");
    }
    xs.push_back(x);
    vs.push_back(v);
  }
  return {xs, vs};
}

inline Kind parse_kind(const std::string& s) {
  static const std::map<std::string, Kind> m{{"T", Kind::T}, {"S", Kind::S}, {"F", Kind::F}, {"G", Kind::G}};
  return m.at(s);
}

inline std::function<double(double)> builtin_function(const std::string& name, const QContext& ctx) {
  if (name == "e0") return [](double) { return 1.0; };
  if (name == "e1") return [](double x) { return x; };
  if (name == "e2") return [](double x) { return x * x; };
  if (name == "cos2x") return [](double x) { return std::cos(2.0 * x); };
  if (name == "H3") return [ctx](double x) { return hermite_eval(3, x, ctx); };
  if (name == "gH3") return [ctx](double x) { return g_value(x, ctx) * hermite_eval(3, x, ctx); };
  if (name == "H3/g") return [ctx](double x) { return hermite_eval(3, x, ctx) / g_value(x, ctx); };
  throw DomainError("unknown built-in function '" + name + "'");
}

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"e0", "e1", "e2", "cos2x", "H3", "gH3", "H3/g"};
  return names;
}

struct EvalArgs {
  std::string what;
  std::size_t n = 0, m = 0;
  std::vector<double> x;
  std::size_t points = 33;
  double y = 0.3, t = 0.3, beta = 1.0;
  std::string variant = "minus";
  std::string form;
};

inline Table run_eval(const EvalArgs& e, const QContext& ctx) {
  Table t;
  std::vector<double> xs = e.x;
  if (xs.empty()) xs = (e.what == "weight") ? open_grid(e.points, -1.0, 1.0) : uniform_grid(e.points, -1.0, 1.0);
  const PhiVariant pv = (e.variant == "plus") ? PhiVariant::plus : PhiVariant::minus;
  if (e.what == "rho") {
    t.columns = {"x", "n", "re", "im"};
    for (double x : xs) {
      const cplx v = rho_basis_eval(e.n, x, ctx);
      t.add({x, static_cast<long long>(e.n), v.real(), v.imag()});
    }
    return t;
  }
  if (e.what == "hermite") {
    t.columns = {"x", "n", "value"};
    for (double x : xs) t.add({x, static_cast<long long>(e.n), hermite_eval(e.n, x, ctx)});
  } else if (e.what == "weight") {
    t.columns = {"x", "value"};
    for (double x : xs) t.add({x, weight_eval(x, ctx)});
  } else if (e.what == "g") {
    t.columns = {"x", "value"};
    for (double x : xs) t.add({x, g_eval(x, ctx)});
  } else if (e.what == "qexp") {
    t.columns = {"x", "t", "value"};
    for (double x : xs) t.add({x, e.t, qexp_eval(x, e.t, ctx)});
  } else if (e.what == "phi") {
    t.columns = {"x", "beta", "variant", "value"};
    for (double x : xs) t.add({x, e.beta, e.variant, phi_basis_eval(e.beta, x, pv, ctx)});
  } else if (e.what == "poisson") {
    const PoissonForm f = (e.form == "series") ? PoissonForm::series : PoissonForm::closed;
    t.columns = {"x", "y", "t", "value"};
    for (double x : xs) t.add({x, e.y, e.t, poisson_kernel(x, e.y, e.t, ctx, f)});
  } else if (e.what == "bilinear") {
    const BilinearForm f = (e.form == "carlitz") ? BilinearForm::carlitz : BilinearForm::ismail_stanton;
    t.columns = {"x", "y", "t", "m", "value"};
    for (double x : xs) t.add({x, e.y, e.t, static_cast<long long>(e.m), bilinear_kernel(x, e.y, e.t, e.m, ctx, f)});
  }
  return t;
}

struct ApplyArgs {
  std::string kind = "T";
  std::string f = "e2";
  std::string table;
  std::string backend = "quadrature";
  std::vector<double> x;
  std::size_t points = 33;
};

inline Table run_apply(const ApplyArgs& p, const RunConfig& cfg, const QContext& ctx) {
  std::function<double(double)> f;
  std::string label = p.f;
  if (!p.table.empty()) {
    auto [xs, vs] = read_two_column(p.table);
    auto data = std::make_shared<BoundaryData>(BoundaryData::table(std::move(xs), std::move(vs), -1.0, 1.0));
    f = [data](double x) { return (*data)(x); };
    label = p.table;
  } else {
    f = builtin_function(p.f, ctx);
  }
  const Kind k = parse_kind(p.kind);
  const Backend be = (p.backend == "spectral") ? Backend::spectral : Backend::quadrature;
  ApplyOptions ao;
  ao.nodes = cfg.nodes;
  const auto img = apply(k, cfg.a, f, be, ctx, ao);
  Table t;
  t.columns = {"x", "f", "value"};
  t.extra["kind"] = p.kind;
  t.extra["function"] = label;
  t.extra["backend"] = p.backend;
  const std::vector<double> xs = p.x.empty() ? uniform_grid(p.points, -1.0, 1.0) : p.x;
  for (double x : xs) t.add({x, f(x), img(x)});
  return t;
}

inline Table run_moments(const std::string& kind, std::size_t points, const RunConfig& cfg, const QContext& ctx) {
  const Kind k = parse_kind(kind);
  Table t;
  t.columns = {"x", "e0", "e1", "e2"};
  t.extra["kind"] = kind;
  for (double x : uniform_grid(points, -1.0, 1.0)) {
    t.add({x, moments_closed_form(k, 0, cfg.a, x, ctx), moments_closed_form(k, 1, cfg.a, x, ctx),
           moments_closed_form(k, 2, cfg.a, x, ctx)});
  }
  return t;
}

inline Table run_verify(const std::string& suite, const QContext& ctx, bool& all_pass) {
  Table t;
  t.columns = {"suite", "name", "params", "value", "tolerance", "pass"};
  all_pass = true;
  for (const auto& r : run_suite(suite, ctx)) {
    t.add({r.suite, r.name, r.params, r.value, r.tolerance, r.pass ? std::string("true") : std::string("false")});
    all_pass = all_pass && r.pass;
  }
  t.extra["suite"] = suite;
  t.extra["all_pass"] = all_pass;
  return t;
}

inline Table run_contraction(bool threshold, double a_max, std::size_t points, const QContext& ctx) {
  Table t;
  if (threshold) {
    const ContractionThreshold c = find_c(ctx);
    t.columns = {"q", "stationary", "a0"};
    t.add({ctx.q(), c.stationary, c.a0});
    return t;
  }
  if (!(a_max > 0.0)) throw DomainError("--a-max must be positive");
  t.columns = {"a", "h", "dh", "d2h"};
  for (double a : uniform_grid(points, 0.0, a_max)) {
    t.add({a, contraction_profile(a, ctx), contraction_profile_d1(a, ctx), contraction_profile_d2(a, ctx)});
  }
  return t;
}

inline Table run_gwt(const std::string& direction, const std::vector<double>& coeffs, const std::vector<double>& ts,
                     const RunConfig& cfg, const QContext& ctx) {
  if (coeffs.empty()) throw DomainError("--coeffs needs at least one value");
  Table t;
  t.extra["direction"] = direction;
  if (direction == "forward") {
    const EntireSeries e = wq_forward(HermiteSeries(ctx, coeffs));
    if (!ts.empty()) {
      t.columns = {"t", "value"};
      for (double s : ts) t.add({s, e(s)});
      return t;
    }
    t.columns = {"n", "f_n", "g_n"};
    for (std::size_t n = 0; n < coeffs.size(); ++n) t.add({static_cast<long long>(n), coeffs[n], e.g[n]});
    return t;
  }
  const HermiteSeries f = wq_invert(EntireSeries{coeffs}, ctx, std::max(cfg.trunc, coeffs.size()));
  t.columns = {"n", "g_n", "f_n"};
  for (std::size_t n = 0; n < f.size(); ++n) {
    t.add({static_cast<long long>(n), n < coeffs.size() ? coeffs[n] : 0.0, f.coeff(n)});
  }
  return t;
}

inline Table run_dual(const std::string& fpath, const std::string& gpath, std::size_t points, const RunConfig& cfg,
                      const QContext& ctx) {
  auto [fx, fv] = read_two_column(fpath);
  auto [gx, gv] = read_two_column(gpath);
  DualProblem p{BoundaryData::table(std::move(fx), std::move(fv), -1.0, 0.0),
                BoundaryData::table(std::move(gx), std::move(gv), 0.0, 1.0), cfg.a, cfg.b,
                open_grid(points, -1.0, 1.0)};
  DualOptions opt;
  opt.invert.trunc = cfg.trunc;
  opt.invert.nodes = cfg.nodes;
  const DualSolution s = dual_solve(p, ctx, opt);
  Table t;
  t.columns = {"x", "psi", "case", "residual_F", "residual_G"};
  const std::string which = dual_case_name(s.which);
  for (std::size_t i = 0; i < s.grid.size(); ++i) t.add({s.grid[i], s.psi[i], which, s.residual_F, s.residual_G});
  t.extra["case"] = which;
  t.extra["residual_F"] = s.residual_F;
  t.extra["residual_G"] = s.residual_G;
  if (s.system_size > 0) {
    t.extra["collocation_condition"] = s.condition;
    t.extra["legendre_degree"] = s.degree;
  }
  return t;
}

// Exit codes: 0 success, 1 numerical failure or failed verification, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"q-fractional Askey-Wilson operators"};
  app.require_subcommand(1);
  RunConfig cfg;
  app.add_option("--q", cfg.q, "base q in (0, 1)")->capture_default_str();
  app.add_option("--nodes", cfg.nodes, "quadrature nodes")->capture_default_str();
  app.add_option("--trunc", cfg.trunc, "spectral truncation M")->capture_default_str();
  app.add_option("--eps-product", cfg.eps_product, "infinite product truncation")->capture_default_str();
  app.add_option("--eps-series", cfg.eps_series, "series tail tolerance")->capture_default_str();
  app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("-o,--output", cfg.output, "output file (default stdout)");
  app.fallthrough();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "evaluate special functions and kernels");
  eval->add_option("what", ev.what, "function")
      ->required()
      ->check(CLI::IsMember({"hermite", "weight", "g", "qexp", "phi", "rho", "poisson", "bilinear"}));
  eval->add_option("--n", ev.n, "degree");
  eval->add_option("--m", ev.m, "index shift of the bilinear kernel");
  eval->add_option("--x", ev.x, "evaluation points (default: grid)");
  eval->add_option("--points", ev.points, "grid size when --x is absent");
  eval->add_option("--y", ev.y, "second kernel variable");
  eval->add_option("--t", ev.t, "kernel or generating parameter");
  eval->add_option("--beta", ev.beta, "phi basis order");
  eval->add_option("--variant", ev.variant, "phi sign variant")->check(CLI::IsMember({"minus", "plus"}));
  eval->add_option("--form", ev.form, "closed|series (poisson), carlitz|ismail-stanton (bilinear)")
      ->check(CLI::IsMember({"closed", "series", "carlitz", "ismail-stanton"}));

  ApplyArgs ap;
  auto* app_apply = app.add_subcommand("apply", "apply T, S, F or G to a function");
  app_apply->add_option("--kind", ap.kind)->check(CLI::IsMember({"T", "S", "F", "G"}))->capture_default_str();
  app_apply->add_option("--a", cfg.a, "order a")->capture_default_str();
  auto* fopt = app_apply->add_option("--f", ap.f, "built-in function")->check(CLI::IsMember(builtin_names()));
  app_apply->add_option("--table", ap.table, "two-column CSV on [-1, 1]")->excludes(fopt);
  app_apply->add_option("--backend", ap.backend)->check(CLI::IsMember({"quadrature", "spectral"}))->capture_default_str();
  app_apply->add_option("--x", ap.x, "evaluation points (default: grid)");
  app_apply->add_option("--points", ap.points, "grid size when --x is absent");

  std::string mkind = "T";
  std::size_t mpoints = 33;
  auto* moments = app.add_subcommand("moments", "closed-form images of e0, e1, e2");
  moments->add_option("--kind", mkind)->check(CLI::IsMember({"T", "F", "G"}))->capture_default_str();
  moments->add_option("--a", cfg.a, "order a")->capture_default_str();
  moments->add_option("--points", mpoints, "grid size");

  std::string suite = "all";
  auto* verify = app.add_subcommand("verify", "run an invariant suite");
  std::vector<std::string> suite_names{"all"};
  for (const auto& [n, fn] : verify_suites()) suite_names.push_back(n);
  verify->add_option("--suite", suite)->check(CLI::IsMember(suite_names))->capture_default_str();

  bool threshold = false;
  double a_max = 20.0;
  std::size_t cpoints = 41;
  auto* contraction = app.add_subcommand("contraction", "contraction profile h(a) and threshold");
  contraction->add_flag("--find-c", threshold, "report the stationary point and a0");
  contraction->add_option("--a-max", a_max, "profile range [0, a-max]");
  contraction->add_option("--points", cpoints, "profile grid size");

  std::string direction = "forward";
  std::vector<double> coeffs, ts;
  auto* gwt = app.add_subcommand("gwt", "q-Gauss-Weierstrass transform");
  gwt->add_option("--direction", direction)->check(CLI::IsMember({"forward", "invert"}))->capture_default_str();
  gwt->add_option("--coeffs", coeffs, "input coefficients")->required()->delimiter(',');
  gwt->add_option("--t", ts, "evaluate the forward transform at these points")->delimiter(',');

  std::string fpath, gpath;
  std::size_t dpoints = 41;
  auto* dual = app.add_subcommand("dual", "solve the dual integral equations");
  dual->add_option("--F", fpath, "data on (-1, 0)")->required()->check(CLI::ExistingFile);
  dual->add_option("--G", gpath, "data on (0, 1)")->required()->check(CLI::ExistingFile);
  dual->add_option("--a", cfg.a, "order on (-1, 0)")->required();
  dual->add_option("--b", cfg.b, "order on (0, 1)")->required();
  dual->add_option("--points", dpoints, "output grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  std::string command;
  for (auto* sc : app.get_subcommands()) command = sc->get_name();
  int status = 0;
  Table table;
  try {
    const QContext ctx(cfg.q, cfg.eps_product, cfg.eps_series);
    if (command == "eval") {
      table = run_eval(ev, ctx);
    } else if (command == "apply") {
      table = run_apply(ap, cfg, ctx);
    } else if (command == "moments") {
      table = run_moments(mkind, mpoints, cfg, ctx);
    } else if (command == "verify") {
      bool pass = true;
      table = run_verify(suite, ctx, pass);
      status = pass ? 0 : 1;
    } else if (command == "contraction") {
      table = run_contraction(threshold, a_max, cpoints, ctx);
    } else if (command == "gwt") {
      table = run_gwt(direction, coeffs, ts, cfg, ctx);
    } else if (command == "dual") {
      table = run_dual(fpath, gpath, dpoints, cfg, ctx);
    }
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  std::ofstream file;
  std::ostream* os = &out;
  if (!cfg.output.empty()) {
    file.open(cfg.output);
    if (!file) {
      err << "usage error: cannot write '" << cfg.output << "'\n";
      return 2;
    }
    os = &file;
  }
  if (cfg.format == "json") write_json(*os, table, cfg, command);
  else write_csv(*os, table);
  if (status != 0) err << "verification failed: at least one residual exceeds its tolerance\n";
  return status;
}

}  // namespace qfrac::cli
