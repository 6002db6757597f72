// Acceptance suite: one line per criterion, then the property checks.
// Exit status is 0 only when every gated criterion passes.

#include <cstdio>
#include <exception>
#include <string>

#include "altstand/config.hpp"
#include "altstand/validation.hpp"

int main(int argc, char** argv) {
  using namespace altstand::harness;
  try {
    const SimConfig base = argc > 1 ? load_config(argv[1]) : default_config();
    auto results = acceptance_checks(base);
    const auto props = property_checks(base);
    results.insert(results.end(), props.begin(), props.end());
    std::size_t gated = 0, failed = 0;
    for (const auto& r : results) {
      std::puts(format_check(r).c_str());
      if (!r.supplementary) {
        ++gated;
        failed += r.passed ? 0 : 1;
      }
    }
    std::printf("%zu/%zu gated checks passed\n", gated - failed, gated);
    return all_passed(results) ? 0 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance: %s\n", e.what());
    return 2;
  }
}
