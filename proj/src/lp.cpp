#include "qdcalc/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "qdcalc/errors.hpp"

namespace qdc::lp {
namespace {

class Tableau {
 public:
  Tableau(const Problem& p, const Settings& s) : settings_(s) {
    nx_ = static_cast<int>(p.c.size());
    const int n_eq = static_cast<int>(p.b_eq.size());
    const int n_ub = static_cast<int>(p.b_ub.size());
    if (p.a_eq.rows() != n_eq || (n_eq > 0 && p.a_eq.cols() != nx_) ||
        p.a_ub.rows() != n_ub || (n_ub > 0 && p.a_ub.cols() != nx_)) {
      throw DimensionError("lp: constraint matrix shape does not match c/b");
    }
    rows_ = n_eq + n_ub;
    n_slack_ = n_ub;
    first_art_ = nx_ + n_slack_;
    cols_ = first_art_ + rows_;
    t_ = Eigen::MatrixXd::Zero(rows_ + 1, cols_ + 1);
    basis_.assign(rows_, -1);

    for (int i = 0; i < n_eq; ++i) {
      const double sign = p.b_eq(i) < 0 ? -1.0 : 1.0;
      t_.row(i).head(nx_) = sign * p.a_eq.row(i);
      t_(i, cols_) = sign * p.b_eq(i);
      t_(i, first_art_ + i) = 1.0;
      basis_[i] = first_art_ + i;
    }
    for (int k = 0; k < n_ub; ++k) {
      const int i = n_eq + k;
      const double sign = p.b_ub(k) < 0 ? -1.0 : 1.0;
      t_.row(i).head(nx_) = sign * p.a_ub.row(k);
      t_(i, nx_ + k) = sign;
      t_(i, cols_) = sign * p.b_ub(k);
      if (sign > 0) {
        basis_[i] = nx_ + k;
      } else {
        t_(i, first_art_ + i) = 1.0;
        basis_[i] = first_art_ + i;
      }
    }
    rhs_scale_ = 1.0;
    for (int i = 0; i < rows_; ++i) rhs_scale_ = std::max(rhs_scale_, std::abs(t_(i, cols_)));
  }

  Result run(const Eigen::VectorXd& c) {
    Result result;
    // phase 1: minimize the sum of basic artificials
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols_);
    bool any_art = false;
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] >= first_art_) {
        phase1(basis_[i]) = 1.0;
        any_art = true;
      }
    }
    if (any_art) {
      load_objective(phase1);
      const Status st = iterate(/*allow_art=*/true);
      if (st == Status::iteration_limit) {
        result.status = st;
        result.pivots = pivots_;
        return result;
      }
      if (-t_(rows_, cols_) > settings_.feas_tol * rhs_scale_) {
        result.status = Status::infeasible;
        result.pivots = pivots_;
        return result;
      }
      drive_out_artificials();
    }

    Eigen::VectorXd full = Eigen::VectorXd::Zero(cols_);
    full.head(nx_) = c;
    load_objective(full);
    result.status = iterate(/*allow_art=*/false);
    result.pivots = pivots_;
    result.x = Eigen::VectorXd::Zero(nx_);
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < nx_) result.x(basis_[i]) = std::max(0.0, t_(i, cols_));
    }
    result.objective = c.dot(result.x);
    return result;
  }

 private:
  void load_objective(const Eigen::VectorXd& cost) {
    t_.row(rows_).setZero();
    t_.row(rows_).head(cols_) = cost.transpose();
    for (int i = 0; i < rows_; ++i) {
      const double cb = cost(basis_[i]);
      if (cb != 0.0) t_.row(rows_) -= cb * t_.row(i);
    }
  }

  void pivot(int r, int s) {
    t_.row(r) /= t_(r, s);
    for (int i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, s);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    t_(r, s) = 1.0;
    basis_[r] = s;
    ++pivots_;
  }

  Status iterate(bool allow_art) {
    const int limit_cols = allow_art ? cols_ : first_art_;
    // Dantzig pricing, falling back to Bland's rule once degeneracy drags on.
    const int bland_after = 50 + 4 * (rows_ + cols_);
    int local = 0;
    while (true) {
      if (pivots_ >= settings_.max_pivots) return Status::iteration_limit;
      const bool bland = local > bland_after;
      int s = -1;
      double best = -settings_.cost_tol;
      for (int j = 0; j < limit_cols; ++j) {
        const double rc = t_(rows_, j);
        if (rc < best) {
          s = j;
          if (bland) break;
          best = rc;
        }
      }
      if (s < 0) return Status::optimal;

      int r = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        const double a = t_(i, s);
        if (a <= settings_.pivot_tol) continue;
        const double ratio = std::max(0.0, t_(i, cols_)) / a;
        if (ratio < best_ratio - 1e-14 ||
            (std::abs(ratio - best_ratio) <= 1e-14 && r >= 0 && basis_[i] < basis_[r])) {
          best_ratio = ratio;
          r = i;
        }
      }
      if (r < 0) return Status::unbounded;
      pivot(r, s);
      ++local;
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < first_art_) continue;
      int best = -1;
      double mag = settings_.pivot_tol;
      for (int j = 0; j < first_art_; ++j) {
        if (std::abs(t_(i, j)) > mag) {
          mag = std::abs(t_(i, j));
          best = j;
        }
      }
      // A row with no usable column is redundant; its artificial stays at zero.
      if (best >= 0) pivot(i, best);
    }
  }

  Settings settings_;
  int nx_ = 0, rows_ = 0, cols_ = 0, n_slack_ = 0, first_art_ = 0;
  int pivots_ = 0;
  double rhs_scale_ = 1.0;
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
};

}  // namespace

Result solve(const Problem& problem, const Settings& settings) {
  Tableau tableau(problem, settings);
  return tableau.run(problem.c);
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal:
      return "optimal";
    case Status::infeasible:
      return "infeasible";
    case Status::unbounded:
      return "unbounded";
    case Status::iteration_limit:
      return "iteration_limit";
  }
  return "unknown";
}

}  // namespace qdc::lp
