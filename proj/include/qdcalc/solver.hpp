#pragma once

// Descent for scalar objectives. Directions come from the quasidifferential:
// the superdifferential generator farthest from the subdifferential gives the
// steepest available decrease. Ties between max/min operands are detected
// with an enlarged threshold that shrinks as the iterates settle, so the
// method sees kinks before it reaches them.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdcalc/expr.hpp"

namespace qdc {

struct SolverParams {
  std::size_t max_iters = 500;
  double step_init = 1.0;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double stop_dist = 1e-8;
  double eps_active_init = 1e-3;  // starting tie threshold
  double eps_active_min = 1e-9;   // final tie threshold (the checker's)
  double eps_active_shrink = 0.1;
  bool refine_steps = true;       // locate the breakpoint along the ray after Armijo
  Tolerance tol{};
};

struct Descent {
  Eigen::VectorXd direction;  // unit vector
  double rate = 0.0;          // f′(x₀)h
  double distance = 0.0;      // distance from the chosen supd generator to subd
  std::size_t generator = 0;  // that generator's index in supd
};

/// None when every generator of supd is within stop_dist of subd. Scalar maps only.
std::optional<Descent> steepest_descent_direction(const QuasiDiff& q, double stop_dist = 1e-8,
                                                  const Tolerance& tol = {});

struct SolverIterate {
  Eigen::VectorXd x;
  double f = 0.0;
  double distance = 0.0;  // descent distance at x (0 once stationary)
  double step = 0.0;      // step taken from x (0 for the last iterate)
  double eps_active = 0.0;
};

enum class SolverStatus { stationary, max_iters, line_search_failure };
const char* to_string(SolverStatus s);

struct SolverTrace {
  std::vector<SolverIterate> iterates;
  SolverStatus status = SolverStatus::max_iters;
  std::size_t iterations = 0;  // accepted steps
  Eigen::VectorXd x;           // final point
  double f = 0.0;
};

SolverTrace minimize(const Expr& e, const Eigen::VectorXd& x0, const SolverParams& params = {});

}  // namespace qdc
