#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qfrac/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qfrac");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qfrac::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
      if (ch == '"') quoted = !quoted;
      else if (ch == ',' && !quoted) {
        cells.push_back(cell);
        cell.clear();
      } else cell += ch;
    }
    cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qfrac_cli_test_" + name);
}

}  // namespace

TEST(Cli, EvalHermiteExample) {
  const Result r = run({"eval", "hermite", "--n", "2", "--x", "0.5", "--q", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].front(), "x");
  EXPECT_DOUBLE_EQ(std::stod(rows[1].back()), 0.5);
}

TEST(Cli, MomentsAtZeroOrderAreExact) {
  const Result r = run({"moments", "--q", "0.5", "--a", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_GT(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x", "e0", "e1", "e2"}));
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::stod(rows[i][0]);
    EXPECT_EQ(std::stod(rows[i][1]), 1.0);
    EXPECT_EQ(std::stod(rows[i][2]), x);
    EXPECT_EQ(std::stod(rows[i][3]), x * x);
  }
}

TEST(Cli, VerifySemigroupSuitePasses) {
  const Result r = run({"verify", "--suite", "semigroup", "--q", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_GT(rows.size(), 1u);
  EXPECT_EQ(rows[0].back(), "pass");
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].back(), "true") << rows[i][1];
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"eval", "hermite", "--n", "2", "--x", "0.5", "--q", "1.2"}).code, 2);
  EXPECT_EQ(run({"eval", "hermite", "--q", "0"}).code, 2);
  EXPECT_EQ(run({"nosuchcommand"}).code, 2);
  EXPECT_EQ(run({"verify", "--suite", "nosuchsuite"}).code, 2);
  EXPECT_EQ(run({"apply", "--kind", "X"}).code, 2);
  EXPECT_EQ(run({"dual", "--F", "/nonexistent", "--G", "/nonexistent", "--a", "1", "--b", "1"}).code, 2);
  const Result r = run({"eval", "poisson", "--t", "1.5", "--x", "0.1", "--y", "0.2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("usage error"), std::string::npos);
}

TEST(Cli, NumericalFailureExitsOne) {
  std::string ones = "1";
  for (int i = 1; i < 48; ++i) ones += ",1";
  const Result r = run({"gwt", "--direction", "invert", "--coeffs", ones});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("numerical error"), std::string::npos);
}

TEST(Cli, HelpExitsZero) {
  const Result r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("verify"), std::string::npos);
}

TEST(Cli, HeaderAndSeventeenDigits) {
  const Result r = run({"eval", "weight", "--points", "5", "--q", "0.3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0][0], "x");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v = std::stod(rows[i][1]);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    EXPECT_EQ(rows[i][1], buf);
  }
}

TEST(Cli, OutputIsDeterministic) {
  const std::vector<std::string> args{"apply", "--kind", "T", "--a", "0.7", "--f", "cos2x", "--points", "9"};
  const Result a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, JsonMetadata) {
  const Result r = run({"moments", "--q", "0.4", "--a", "1.5", "--points", "3", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["metadata"]["command"], "moments");
  EXPECT_DOUBLE_EQ(j["metadata"]["q"].get<double>(), 0.4);
  EXPECT_DOUBLE_EQ(j["metadata"]["a"].get<double>(), 1.5);
  EXPECT_TRUE(j["metadata"].contains("nodes"));
  EXPECT_TRUE(j["metadata"].contains("trunc"));
  EXPECT_TRUE(j["metadata"].contains("git_describe"));
  EXPECT_EQ(j["columns"].size(), 4u);
  EXPECT_EQ(j["rows"].size(), 3u);
}

TEST(Cli, SpectralAndQuadratureBackendsAgree) {
  const Result q = run({"apply", "--kind", "F", "--a", "1.2", "--f", "cos2x", "--x", "0.3"});
  const Result s = run({"apply", "--kind", "F", "--a", "1.2", "--f", "cos2x", "--x", "0.3", "--backend", "spectral"});
  ASSERT_EQ(q.code, 0) << q.err;
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NEAR(std::stod(parse_csv(q.out)[1].back()), std::stod(parse_csv(s.out)[1].back()), 1e-9);
}

TEST(Cli, GwtRoundTrip) {
  const Result f = run({"gwt", "--coeffs", "1,0.5,-0.25", "--q", "0.5"});
  ASSERT_EQ(f.code, 0) << f.err;
  const auto rows = parse_csv(f.out);
  ASSERT_EQ(rows.size(), 4u);
  std::string g = rows[1][2] + "," + rows[2][2] + "," + rows[3][2];
  const Result b = run({"gwt", "--direction", "invert", "--coeffs", g, "--q", "0.5"});
  ASSERT_EQ(b.code, 0) << b.err;
  const auto back = parse_csv(b.out);
  EXPECT_NEAR(std::stod(back[1][2]), 1.0, 1e-15);
  EXPECT_NEAR(std::stod(back[2][2]), 0.5, 1e-15);
  EXPECT_NEAR(std::stod(back[3][2]), -0.25, 1e-15);
}

TEST(Cli, ContractionThreshold) {
  const Result r = run({"contraction", "--find-c", "--q", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 2u);
  const double a0 = std::stod(rows[1][2]);
  const qfrac::QContext ctx(0.5);
  EXPECT_NEAR(qfrac::contraction_profile(a0, ctx), 0.0, 1e-8);
}

TEST(Cli, DualFromTables) {
  const qfrac::QContext ctx(0.5);
  const double a = 1.5, b = 1.5;
  const auto psi = [&](double x) { return qfrac::g_eval(x, ctx) * (1.0 + 0.3 * x); };
  const auto ia = qfrac::apply_quadrature(qfrac::Kind::T, a, psi, ctx);
  const double sa = qfrac::dual_scale(a, ctx);
  const auto fp = temp_file("F.csv"), gp = temp_file("G.csv");
  {
    std::ofstream F(fp), G(gp);
    F << "x,value\n";
    F.precision(17);
    G.precision(17);
    for (int i = 0; i <= 200; ++i) {
      const double x = -1.0 + i / 200.0;
      F << x << "," << ia(x) / sa << "\n";
      G << x + 1.0 << "," << ia(x + 1.0) / sa << "\n";
    }
  }
  const Result r = run({"dual", "--F", fp.string(), "--G", gp.string(), "--a", "1.5", "--b", "1.5", "--q", "0.5",
                        "--points", "11"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 12u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][1]), psi(x), 1e-5) << "x=" << x;
    EXPECT_EQ(rows[i][2], "b");
  }
  std::filesystem::remove(fp);
  std::filesystem::remove(gp);
}

TEST(Cli, DualRejectsMalformedTable) {
  const auto fp = temp_file("bad.csv");
  {
    std::ofstream F(fp);
    F << "x,value\n-0.5,1\n-0.7,2\n";
  }
  const Result r = run({"dual", "--F", fp.string(), "--G", fp.string(), "--a", "1", "--b", "1"});
  EXPECT_EQ(r.code, 2);
  std::filesystem::remove(fp);
}

TEST(CliBinary, ExampleThroughProcess) {
  const std::string cmd = std::string(QFRAC_CLI_PATH) + " eval hermite --n 2 --x 0.5 --q 0.5";
  FILE* p = popen(cmd.c_str(), "r");
  ASSERT_NE(p, nullptr);
  std::string out;
  std::array<char, 256> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int status = pclose(p);
  EXPECT_EQ(WEXITSTATUS(status), 0);
  const auto rows = parse_csv(out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(std::stod(rows[1].back()), 0.5);
}

TEST(CliBinary, BadBaseExitsTwo) {
  const std::string cmd = std::string(QFRAC_CLI_PATH) + " eval hermite --n 2 --x 0.5 --q 1.2 2>/dev/null";
  const int status = std::system(cmd.c_str());
  EXPECT_EQ(WEXITSTATUS(status), 2);
}
