#pragma once

#include <string>
#include <vector>

#include "altstand/config.hpp"

namespace altstand::harness {

struct CheckResult {
  std::string id;
  std::string description;
  bool passed = false;
  std::string detail;
  bool supplementary = false;  // reported, but not part of the pass/fail gate
};

/// The numbered acceptance criteria, evaluated on `base` (scenario replaced
/// per criterion), followed by supplementary lines that repeat the
/// closed-loop criteria on the pressure-consistent presets.
std::vector<CheckResult> acceptance_checks(const SimConfig& base);

/// Invariants beyond the acceptance list: conservation, metric identities,
/// noise bounds, controller-independence of the plant inputs, config round
/// trip.
std::vector<CheckResult> property_checks(const SimConfig& base);

/// "PASS|FAIL|INFO <id> <description>: <detail>"
std::string format_check(const CheckResult& r);

/// True when every non-supplementary check passed.
bool all_passed(const std::vector<CheckResult>& results);

}  // namespace altstand::harness
