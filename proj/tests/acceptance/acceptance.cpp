// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
//
//   acceptance            all twelve
//   acceptance 3 8        selected criteria
//   acceptance --strict   halved tolerances
//
// Exit status is 0 iff every selected criterion passes.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "smcflow/validation.hpp"

int main(int argc, char** argv) {
  using namespace smc::validation;
  Options opts;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0) {
      opts.profile = TolProfile::Strict;
      continue;
    }
    try {
      ids.push_back(std::stoi(argv[i]));
    } catch (const std::exception&) {
      std::fprintf(stderr, "usage: acceptance [--strict] [criterion ...]\n");
      return 2;
    }
  }
  if (ids.empty())
    for (int id = 1; id <= kCriterionCount; ++id) ids.push_back(id);

  bool all = true;
  for (int id : ids) {
    const CriterionResult r = run_criterion(id, opts);
    std::printf("%s\n", format_result(r).c_str());
    std::fflush(stdout);
    all = all && r.pass;
  }
  return all ? 0 : 1;
}
