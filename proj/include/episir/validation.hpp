#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace episir {

// One end-to-end correctness criterion with its tolerance pinned in code.
struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;   // measured quantity against its bound
  double seconds = 0;
};

// Runs the full battery in order, streaming one PASS/FAIL line per criterion
// to log, and returns every result.  A thrown exception fails the criterion
// it came from without stopping the battery.
std::vector<CriterionResult> run_acceptance(std::ostream& log);

bool all_pass(const std::vector<CriterionResult>& results);

}  // namespace episir
