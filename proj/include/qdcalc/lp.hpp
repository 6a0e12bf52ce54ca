#pragma once

#include <Eigen/Dense>

namespace qdc::lp {

// Dense two-phase simplex for the small feasibility problems the geometry
// layer builds. Not a general-purpose solver: a few dozen rows, a few
// hundred columns at most.
//
//   minimize    c'x
//   subject to  A_eq x  = b_eq
//               A_ub x <= b_ub
//               x >= 0

struct Problem {
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::VectorXd c;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::infeasible;
  Eigen::VectorXd x;
  double objective = 0.0;
  int pivots = 0;
};

struct Settings {
  double pivot_tol = 1e-11;
  double cost_tol = 1e-11;
  double feas_tol = 1e-9;
  int max_pivots = 20000;
};

Result solve(const Problem& problem, const Settings& settings = {});

const char* to_string(Status s);

}  // namespace qdc::lp
