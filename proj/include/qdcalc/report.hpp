#pragma once

// Reports produced by the qd / check / minimize commands. Every field maps to
// JSON one to one, so report_from_json(report_to_json(r)) reproduces r.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qdcalc/optimality.hpp"
#include "qdcalc/problem.hpp"
#include "qdcalc/solver.hpp"

namespace qdc {

inline constexpr int kReportVersion = 1;

struct MapQd {
  std::string name;  // "objective" or "constraint[i]"
  Eigen::VectorXd value;
  std::vector<LinOp> subd;
  std::vector<LinOp> supd;
};

struct PointQd {
  Eigen::VectorXd x;
  std::vector<MapQd> maps;
};

/// Agreement between the quasidifferential and forward differences.
struct FdResidual {
  std::size_t directions = 0;  // per point and map
  std::uint64_t seed = 0;
  bool piecewise_linear = false;
  double max_abs = 0.0;
  double max_rel = 0.0;     // |qd − fd| / (1 + |fd|)
  double max_spread = 0.0;  // worst convergence gauge of the difference quotients
};

struct CheckRecord {
  std::string condition;  // unconstrained, inequality, set, combined, generalized, generalized_constrained, slackened
  Verdict verdict;
};

struct Report {
  std::string command;  // qd, check, minimize
  std::string source;   // input path as given
  RunSettings settings;
  nlohmann::json problem;  // the problem as run, command-line overrides folded in
  std::vector<PointQd> points;
  std::optional<FdResidual> fd_residual;
  std::vector<CheckRecord> checks;  // the first one decides the exit code of `check`
  std::vector<QuasiregularityReport> quasiregularity;  // one per examined point, when constrained
  std::string curvature;     // of the whole program; empty when not assessed
  bool sufficient = false;   // convex program: the checked condition is also sufficient
  std::optional<SolverTrace> solver;
  int exit_code = 0;
};

nlohmann::json report_to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);

nlohmann::json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

/// Human-readable summary.
std::string render_text(const Report& r);

}  // namespace qdc
