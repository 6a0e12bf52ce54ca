#include "qdcalc/solver.hpp"

#include <algorithm>
#include <cmath>

#include "qdcalc/errors.hpp"

namespace qdc {

namespace {

// φ(t) = f(x + t h) with exact one-sided slopes from the quasidifferential.
class RayProbe {
 public:
  RayProbe(const Expr& e, const Eigen::VectorXd& x, const Eigen::VectorXd& h, const SolverParams& p)
      : e_(e), x_(x), h_(h) {
    opts_.tol = p.tol;
    opts_.eps_active = p.eps_active_min;
  }
  double value(double t) const { return eval(e_, x_ + t * h_)(0); }
  double right_slope(double t) const { return qd_eval_dir(qd_at(e_, x_ + t * h_, opts_), h_)(0); }
  double left_slope(double t) const { return -qd_eval_dir(qd_at(e_, x_ + t * h_, opts_), -h_)(0); }

 private:
  const Expr& e_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& h_;
  CalcOptions opts_;
};

struct Step {
  double t;
  double f;
};

// Moves an accepted step to a breakpoint of φ where the one-sided slopes change
// sign. Bracketing pieces are intersected as lines, which is exact when a
// single kink separates them. Never returns a worse value than `accepted`.
Step refine_step(const RayProbe& ray, double f0, Step accepted) {
  Step best = accepted;
  auto consider = [&](double t, double f) {
    if (f < best.f) best = {t, f};
  };

  double lo, flo, slo, hi, fhi, shi;
  const double sr = ray.right_slope(accepted.t);
  if (sr < 0.0) {
    lo = accepted.t, flo = accepted.f, slo = sr;
    bool bracketed = false;
    hi = lo;
    for (int k = 0; k < 10 && !bracketed; ++k) {
      hi = 2.0 * lo;
      fhi = ray.value(hi);
      shi = ray.left_slope(hi);
      consider(hi, fhi);
      if (fhi > flo || shi > 0.0) {
        bracketed = shi > 0.0;
        if (!bracketed) break;
      } else {
        lo = hi, flo = fhi, slo = ray.right_slope(hi);
        if (slo >= 0.0) return best;
      }
    }
    if (!bracketed) return best;
  } else {
    const double sl = ray.left_slope(accepted.t);
    if (sl <= 0.0) return best;
    lo = 0.0, flo = f0, slo = ray.right_slope(0.0);
    hi = accepted.t, fhi = accepted.f, shi = sl;
    if (slo >= 0.0) return best;
  }

  for (int it = 0; it < 60; ++it) {
    double t = (fhi - flo + slo * lo - shi * hi) / (slo - shi);
    const double width = hi - lo;
    if (!(t > lo + 1e-3 * width && t < hi - 1e-3 * width)) t = 0.5 * (lo + hi);
    const double ft = ray.value(t);
    consider(t, ft);
    const double r = ray.right_slope(t), l = ray.left_slope(t);
    if (l <= 0.0 && r >= 0.0) break;
    if (r < 0.0) {
      lo = t, flo = ft, slo = r;
    } else {
      hi = t, fhi = ft, shi = l;
    }
    if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
  }
  return best;
}

}  // namespace

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::stationary: return "stationary";
    case SolverStatus::max_iters: return "max_iters";
    case SolverStatus::line_search_failure: return "line_search_failure";
  }
  return "?";
}

std::optional<Descent> steepest_descent_direction(const QuasiDiff& q, double stop_dist, const Tolerance& tol) {
  if (q.rows() != 1) throw DimensionError("steepest_descent_direction: scalar maps only");
  Descent best;
  best.distance = -1.0;
  LinOp nearest;
  for (std::size_t k = 0; k < q.supd().size(); ++k) {
    const auto np = nearest_point(q.subd(), q.supd()[k], tol);
    if (np.distance > best.distance) {
      best.distance = np.distance;
      best.generator = k;
      nearest = np.point;
    }
  }
  if (best.distance <= stop_dist) return std::nullopt;
  best.direction = ((q.supd()[best.generator] - nearest) / best.distance).transpose();
  best.rate = qd_eval_dir(q, best.direction)(0);
  return best;
}

SolverTrace minimize(const Expr& e, const Eigen::VectorXd& x0, const SolverParams& params) {
  if (e.out_dim() != 1) throw DimensionError("minimize: scalar objectives only");
  if (x0.size() != e.in_dim()) throw DimensionError("minimize: start point has the wrong length");
  if (params.max_iters < 1 || !(params.step_init > 0.0) || !(params.armijo_c > 0.0 && params.armijo_c < 1.0) ||
      !(params.shrink > 0.0 && params.shrink < 1.0) || !(params.stop_dist > 0.0))
    throw std::invalid_argument("minimize: solver parameters out of range");

  SolverTrace trace;
  Eigen::VectorXd x = x0;
  double f = eval(e, x)(0);
  double delta = std::max(params.eps_active_init, params.eps_active_min);
  trace.status = SolverStatus::max_iters;
  bool done = false;

  for (std::size_t pass = 0; pass < params.max_iters && !done; ++pass) {
    CalcOptions co;
    co.tol = params.tol;
    co.eps_active = delta;
    const auto dir = steepest_descent_direction(qd_at(e, x, co), params.stop_dist, params.tol);
    const bool at_floor = delta <= params.eps_active_min;

    if (!dir) {
      if (at_floor) {
        trace.status = SolverStatus::stationary;
        done = true;
      } else {
        delta = std::max(delta * params.eps_active_shrink, params.eps_active_min);
      }
      continue;
    }

    // Armijo backtracking on the model rate.
    std::optional<Step> step;
    for (double t = params.step_init; t >= 1e-16; t *= params.shrink) {
      const double ft = eval(e, x + t * dir->direction)(0);
      if (ft <= f + params.armijo_c * t * dir->rate && ft < f) {
        step = Step{t, ft};
        break;
      }
    }
    if (!step) {
      if (at_floor) {
        trace.status = SolverStatus::line_search_failure;
        done = true;
      } else {
        delta = std::max(delta * params.eps_active_shrink, params.eps_active_min);
      }
      continue;
    }
    if (params.refine_steps) *step = refine_step(RayProbe(e, x, dir->direction, params), f, *step);

    trace.iterates.push_back({x, f, dir->distance, step->t, delta});
    x += step->t * dir->direction;
    f = step->f;
    ++trace.iterations;
  }

  trace.iterates.push_back({x, f, 0.0, 0.0, delta});
  trace.x = x;
  trace.f = f;
  return trace;
}

}  // namespace qdc
