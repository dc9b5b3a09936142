// Acceptance gate. Runs the full validation suite plus a determinism check
// of the CLI, printing exactly one PASS/FAIL line per criterion. Exit 0 iff
// every line is PASS.
//
// Criteria 1-3 also carry wall-clock budgets (5 s, 120 s, 600 s); a correct
// result that arrives late fails the line.

#include <pong/validate.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef PONG_CLI_PATH
#error "PONG_CLI_PATH must point at the pong executable"
#endif

namespace {

constexpr std::uint64_t kSeed = 20240817ull;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string temp_path(const char* leaf) {
  const char* base = std::getenv("TMPDIR");
  std::string dir = base && *base ? base : "/tmp";
  if (!dir.empty() && dir.back() == '/') dir.pop_back();
  return dir + "/" + leaf;
}

}  // namespace

int main() {
  int failures = 0;

  // Criteria 1-9: library-level validation at full sample counts.
  pong::ValidationReport rep = pong::run_validation(kSeed, /*quick=*/false);

  // Wall-clock budget per criterion id; 0 means unbounded.
  const double budget[10] = {0, 5.0, 120.0, 600.0, 0, 0, 0, 0, 0, 0};

  for (const pong::CriterionResult& c : rep.criteria) {
    bool ok = c.passed;
    std::string note = c.details;
    const double cap = c.id >= 1 && c.id <= 9 ? budget[c.id] : 0.0;
    if (cap > 0.0 && c.seconds > cap) {
      ok = false;
      char buf[64];
      std::snprintf(buf, sizeof(buf), "; exceeded %.0f s budget (%.1f s)", cap,
                    c.seconds);
      note += buf;
    }
    std::printf("[%s] criterion %2d: %s -- %s (%.2f s)\n", ok ? "PASS" : "FAIL",
                c.id, c.name.c_str(), note.c_str(), c.seconds);
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }

  // Criterion 10: the validate subcommand is a pure function of its seed.
  // Run the installed CLI twice with one seed and require byte-identical
  // report files.
  {
    const std::string bin = PONG_CLI_PATH;
    const std::string a = temp_path("pong_accept_rep_a.json");
    const std::string b = temp_path("pong_accept_rep_b.json");
    const std::string common =
        std::string(" validate --quick --seed 99 >/dev/null 2>&1");
    const int rc1 =
        std::system((bin + common + " --out " + a).c_str());
    const int rc2 =
        std::system((bin + common + " --out " + b).c_str());
    const std::string text_a = slurp(a);
    const std::string text_b = slurp(b);
    const bool ok = rc1 == 0 && rc2 == 0 && !text_a.empty() && text_a == text_b;
    std::string note;
    if (ok) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "two runs, %zu bytes each, identical",
                    text_a.size());
      note = buf;
    } else if (rc1 != 0 || rc2 != 0) {
      note = "validate exited nonzero";
    } else if (text_a.empty()) {
      note = "empty report";
    } else {
      note = "reports differ";
    }
    std::printf("[%s] criterion 10: repeated validation is byte-identical -- %s\n",
                ok ? "PASS" : "FAIL", note.c_str());
    failures += ok ? 0 : 1;
    std::remove(a.c_str());
    std::remove(b.c_str());
  }

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
