#pragma once

// The acceptance suite: one callable check per criterion, shared between the
// test runner and the selftest command.

#include <string>
#include <vector>

namespace zyg {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// run all criteria (1..10); prints one pass/fail line per criterion to stdout
std::vector<CriterionResult> run_acceptance();

}  // namespace zyg
