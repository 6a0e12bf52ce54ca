#pragma once

// Shared builders and random generators for the test suites.

#include <initializer_list>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qdcalc/geometry.hpp"
#include "qdcalc/qdcore.hpp"

namespace qdc::testing {

inline LinOp scalar(double v) { return LinOp::Constant(1, 1, v); }

inline LinOp row(std::initializer_list<double> vals) {
  LinOp op(1, static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double v : vals) op(0, i++) = v;
  return op;
}

inline Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

/// Polytope of 1×1 operators.
inline OperatorPolytope interval(std::initializer_list<double> vals) {
  std::vector<LinOp> g;
  for (double v : vals) g.push_back(scalar(v));
  return OperatorPolytope(std::move(g));
}

/// Polytope of 1×n row operators.
inline OperatorPolytope rows(std::initializer_list<std::initializer_list<double>> vals) {
  std::vector<LinOp> g;
  for (auto r : vals) g.push_back(row(r));
  return OperatorPolytope(std::move(g));
}

inline QuasiDiff qd(OperatorPolytope sub, OperatorPolytope sup) { return QuasiDiff(std::move(sub), std::move(sup)); }

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(eng_); }

  Eigen::VectorXd vector(Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }
  Eigen::VectorXd gaussian(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }
  LinOp matrix(Eigen::Index r, Eigen::Index c, double lo = -1.0, double hi = 1.0) {
    LinOp m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }
  OperatorPolytope polytope(Eigen::Index r, Eigen::Index c, int max_gens = 4) {
    std::vector<LinOp> g;
    const int k = integer(1, max_gens);
    for (int i = 0; i < k; ++i) g.push_back(matrix(r, c));
    return OperatorPolytope(std::move(g));
  }
  QuasiDiff quasidiff(Eigen::Index r, Eigen::Index c, int max_gens = 3) {
    return QuasiDiff(polytope(r, c, max_gens), polytope(r, c, max_gens));
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace qdc::testing
