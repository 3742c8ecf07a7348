#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "degen/acceptance.hpp"

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const auto results = degen::run_acceptance(
      degen::AcceptanceTolerances{}, 0,
      [](const degen::CriterionResult& r) {
        std::printf("%s\n", degen::format_result(r).c_str());
        std::fflush(stdout);
      },
      only);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed,
              results.size());
  return failed == 0 ? 0 : 1;
}
