// Named invariant and oracle checks over the whole library. Each check draws
// its own seeded cases and reports the worst residual against its tolerance.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rotgrad/rpmg.hpp"

namespace rotgrad::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  bool asserted = true;  // informational checks always pass and only report
  double residual = 0.0;
  double tolerance = 0.0;
  long cases = 0;
  std::string detail;
};

using InverseProjectFn = std::function<AmbientVector(const RawOutput&, const Rotation&)>;

struct Options {
  std::string filter;  // substring of the check name; empty runs everything
  std::uint64_t seed = 0;
  long cases = 1000;   // scales the larger checks; small ones use cases / 10
  InverseProjectFn inverse_project = [](const RawOutput& x, const Rotation& r) {
    return rotgrad::inverse_project(x, r);
  };
};

std::vector<std::string> check_names();

/// Runs every check whose name contains options.filter.
std::vector<CheckResult> run_checks(const Options& options);

/// "PASS name  residual=... tol=... cases=N  detail"
std::string format(const CheckResult& r);

/// Minimum of ||x - y|| over the relaxed inverse image of the goal, found by
/// gradient descent over an explicit parameterization of that family
/// (10^4 steps of size 1e-3). Independent of inverse_project.
double oracle_min_distance(const RawOutput& x, const AmbientVector& goal, const Rotation& r_goal);

}  // namespace rotgrad::verify
