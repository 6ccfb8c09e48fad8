// Acceptance criteria: one PASS/FAIL line per criterion.
// Usage: acceptance [suite-name ...]

#include <cstdio>
#include <vector>

#include <fmt/format.h>

#include "rmtail/verify.hpp"

int main(int argc, char** argv) {
  std::vector<const rmtail::Suite*> selected;
  try {
    for (int i = 1; i < argc; ++i) selected.push_back(&rmtail::find_suite(argv[i]));
  } catch (const std::exception& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 2;
  }
  if (selected.empty())
    for (const auto& s : rmtail::acceptance_suites()) selected.push_back(&s);

  int failures = 0;
  for (const auto* suite : selected) {
    const auto rep = rmtail::run_suite(*suite);
    fmt::print("{}\n", rmtail::format_report(rep));
    std::fflush(stdout);
    failures += !rep.passed();
  }
  fmt::print("{} of {} criteria passed\n", selected.size() - failures, selected.size());
  return failures == 0 ? 0 : 1;
}
