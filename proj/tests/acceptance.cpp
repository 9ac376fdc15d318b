// Acceptance battery: runs the seven end-to-end criteria at full scale and
// prints one line per criterion. Exit code 0 only if every criterion passes.

#include "cabm/verify.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

int main(int argc, char** argv) {
  cabm::AcceptanceOptions opt;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      opt.quick = true;
    } else if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) {
      opt.seed = std::strtoull(argv[++i], nullptr, 10);
    } else {
      std::fprintf(stderr, "usage: %s [--quick] [--seed N]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<cabm::CriterionResult> results = cabm::runAcceptance(opt);
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    std::printf("[%s] %d %s (%.1f s): %s\n", r.pass ? "PASS" : "FAIL", r.index,
                r.name.c_str(), r.seconds, r.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%s\n", all ? "acceptance: all criteria passed"
                          : "acceptance: FAILURES above");
  return all ? 0 : 1;
}
