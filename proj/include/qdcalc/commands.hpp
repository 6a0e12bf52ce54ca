#pragma once

#include <string>

#include "qdcalc/problem.hpp"
#include "qdcalc/report.hpp"

namespace qdc {

enum ExitCode : int {
  kExitOk = 0,
  kExitFails = 1,        // check: the condition fails at the point
  kExitSchema = 2,       // unreadable file, malformed JSON, schema violation, bad flag value
  kExitDimension = 3,    // inconsistent dimensions
  kExitInfeasible = 4,   // g(x) ≤ 0 violated at the point
  kExitUnsupported = 5,  // minimize: m ≠ 1 or constraints present
  kExitEvaluation = 6,   // any other evaluation failure (bound violation, size caps)
};

/// Quasidifferentials of the objective and every constraint at the point
/// (override, else `point`, else every generalized point) plus the
/// finite-difference residual along seeded random directions.
Report cmd_qd(const ProblemFile& p, const Overrides& o = {}, const std::string& source = "");

/// Dispatches on the fields present: generalized points, constraints, set cone.
Report cmd_check(const ProblemFile& p, const Overrides& o = {}, const std::string& source = "");

/// Descent from `point`, then the unconstrained verdict at the final point.
Report cmd_minimize(const ProblemFile& p, const Overrides& o = {}, const std::string& source = "");

/// Maps an exception thrown by the commands or the loader to its exit code.
int exit_code_for(const std::exception& e);

}  // namespace qdc
