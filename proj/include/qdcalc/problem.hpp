#pragma once

// Problem files: a program over ℝⁿ with an objective in ℝᵐ, optional
// inequality constraints g(x) ≤ 0, an optional cone of feasible directions
// and the point (or points) to examine. Loading is strict: unknown fields,
// wrong types and inconsistent dimensions are all rejected.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qdcalc/expr.hpp"
#include "qdcalc/optimality.hpp"
#include "qdcalc/solver.hpp"

namespace qdc {

struct ProblemOptions {
  std::optional<double> tol_geom;
  std::optional<double> tol_active;
  std::optional<double> tol_prune;
  std::optional<std::size_t> max_iters;
  std::optional<double> step_init;
  std::optional<double> armijo_c;
  std::optional<double> shrink;
  std::optional<double> stop_dist;
  std::optional<std::uint64_t> seed;
};

using Generators = std::vector<Eigen::VectorXd>;

struct ProblemFile {
  Eigen::Index n;
  Eigen::Index m;
  Expr objective;
  std::vector<Expr> constraints;
  std::optional<Generators> set_cone;  // generators of K ⊂ ℝⁿ
  std::optional<Eigen::VectorXd> point;
  std::vector<Eigen::VectorXd> generalized_points;
  // One optional cone per generalized point; replaces set_cone for those checks.
  std::optional<std::vector<std::optional<Generators>>> generalized_cones;
  ProblemOptions options;
};

/// Accepts a problem object, or a report object carrying the problem it ran under "problem".
ProblemFile problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const ProblemFile& p);

/// Reads and parses a file. Unreadable files and malformed JSON are SchemaErrors.
nlohmann::json read_json_file(const std::string& path);
ProblemFile load_problem(const std::string& path);

/// Values given on the command line; each one wins over the file's options.
struct Overrides {
  std::optional<Eigen::VectorXd> point;
  std::optional<double> tol_geom;
  std::optional<double> tol_active;
  std::optional<std::size_t> max_iters;
  std::optional<double> step_init;
  std::optional<std::uint64_t> seed;
};

struct RunSettings {
  Tolerance tol{};
  double eps_active = 1e-9;
  SolverParams solver{};
  std::uint64_t seed = 0;
  std::size_t fd_directions = 20;

  CalcOptions calc() const;
  CheckOptions check() const;
};

RunSettings resolve_settings(const ProblemOptions& file, const Overrides& cli);

/// Parses "v1,v2,..." into a vector; SchemaError on junk.
Eigen::VectorXd parse_point(const std::string& text);

// JSON helpers shared by problems and reports.
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const char* what);
nlohmann::json matrix_to_json(const LinOp& a);
LinOp matrix_from_json(const nlohmann::json& j, const char* what);

}  // namespace qdc
