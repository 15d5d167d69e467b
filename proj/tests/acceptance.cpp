#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "qfrac/qfrac.hpp"

using namespace qfrac;

namespace {

struct Criterion {
  int id;
  const char* title;
  std::vector<std::string> suites;
};

const std::vector<Criterion> criteria{
    {1, "orthogonality and normalization", {"orthogonality"}},
    {2, "kernel identities", {"kernels"}},
    {3, "semigroup laws", {"semigroup"}},
    {4, "eigenstructure", {"eigen"}},
    {5, "order lowering and commutation", {"lowering", "operators"}},
    {6, "closed-form moments", {"moments"}},
    {7, "approximation rate", {"rate"}},
    {8, "contraction", {"contraction"}},
    {9, "connection relation and Hilbert-Schmidt identity", {"awpoly", "aw_identities"}},
    {10, "transform round trip", {"transform"}},
    {11, "resolvent limit", {"resolvent"}},
    {12, "dual integral equations", {"dual", "dual_mirror"}},
};

}  // namespace

int main() {
  const double qs[] = {0.3, 0.5, 0.8};
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t n = 0, bad = 0;
    std::string first_bad;
    for (double q : qs) {
      const QContext ctx(q);
      for (const auto& s : c.suites) {
        std::vector<VerifyRow> rows;
        try {
          rows = run_suite(s, ctx);
        } catch (const std::exception& e) {
          rows.push_back({s, std::string("suite threw: ") + e.what(), "q=" + std::to_string(q), 0.0, 0.0, false});
        }
        for (const auto& r : rows) {
          ++n;
          if (!r.pass) {
            ++bad;
            if (first_bad.empty())
              first_bad = r.suite + ": " + r.name + " (" + r.params + ") value " + std::to_string(r.value) +
                          " tol " + std::to_string(r.tolerance);
          }
        }
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %2d: %s [%zu/%zu rows, %.1f s]\n", bad ? "FAIL" : "PASS", c.id, c.title, n - bad, n,
                secs);
    if (bad) {
      std::printf("     first failure: %s\n", first_bad.c_str());
      ++failed;
    }
  }
  std::fflush(stdout);
  return failed ? 1 : 0;
}
