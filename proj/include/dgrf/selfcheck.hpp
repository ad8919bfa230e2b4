#pragma once

#include <string>
#include <vector>

namespace dgrf {

struct CheckResult
{
  std::string name;
  bool passed = false;
  double value = 0.0;     // measured quantity
  double threshold = 0.0; // pass when value <= threshold
  std::string note;
};

//! Deterministic invariants that run in a few seconds: ellipse algebra,
//! catalog identities, alignment, Bergman projection, the plane solver with
//! zero coefficient, exact-injection reconstruction, dump round trips and the
//! bandwidth validator.
std::vector<CheckResult> run_selfcheck();

} // namespace dgrf
