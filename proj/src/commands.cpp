#include "qdcalc/commands.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "qdcalc/errors.hpp"

namespace qdc {

namespace {

// Folds command-line overrides into the problem and re-validates it through
// the loader, so flag values obey the same rules as file values.
ProblemFile as_run(const ProblemFile& p, const Overrides& o) {
  ProblemFile q = p;
  if (o.point) q.point = *o.point;
  ProblemOptions& opt = q.options;
  if (o.tol_geom) opt.tol_geom = *o.tol_geom;
  if (o.tol_active) opt.tol_active = *o.tol_active;
  if (o.max_iters) opt.max_iters = *o.max_iters;
  if (o.step_init) opt.step_init = *o.step_init;
  if (o.seed) opt.seed = *o.seed;
  return problem_from_json(problem_to_json(q));
}

Report start(const char* command, const ProblemFile& run, const std::string& source) {
  Report r;
  r.command = command;
  r.source = source;
  r.settings = resolve_settings(run.options, {});
  r.problem = problem_to_json(run);
  return r;
}

std::string constraint_name(std::size_t i) { return "constraint[" + std::to_string(i) + "]"; }

struct Evaluated {
  PointQd record;
  ValueAndQd objective;
  std::vector<ValueAndQd> constraints;
};

MapQd map_record(std::string name, const ValueAndQd& vq) {
  return {std::move(name), vq.value, vq.qd.subd().generators(), vq.qd.supd().generators()};
}

Evaluated evaluate(const ProblemFile& p, const Eigen::VectorXd& x, const CalcOptions& co) {
  Evaluated ev{{x, {}}, qd_with_value(p.objective, x, co), {}};
  ev.record.maps.push_back(map_record("objective", ev.objective));
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    ev.constraints.push_back(qd_with_value(p.constraints[i], x, co));
    ev.record.maps.push_back(map_record(constraint_name(i), ev.constraints.back()));
  }
  return ev;
}

ConstraintSystem system_of(const Evaluated& ev, const std::optional<Generators>& cone, Eigen::Index n) {
  ConstraintSystem cs;
  for (const auto& c : ev.constraints) {
    cs.qds.push_back(c.qd);
    cs.values.push_back(c.value);
  }
  if (cone) cs.set_cone = PolyCone::from_directions(n, *cone);
  return cs;
}

std::string program_curvature(const ProblemFile& p) {
  auto convex = [](const Expr& e) {
    const Curvature c = curvature(e);
    return c == Curvature::affine || c == Curvature::convex;
  };
  bool all = convex(p.objective);
  for (const auto& g : p.constraints) all = all && convex(g);
  return all ? "convex" : "unknown";
}

std::vector<Eigen::VectorXd> qd_points(const ProblemFile& p) {
  if (p.point) return {*p.point};
  return p.generalized_points;
}

}  // namespace

Report cmd_qd(const ProblemFile& p, const Overrides& o, const std::string& source) {
  const ProblemFile run = as_run(p, o);
  Report r = start("qd", run, source);
  const CalcOptions co = r.settings.calc();

  bool pl = is_piecewise_linear(run.objective);
  for (const auto& g : run.constraints) pl = pl && is_piecewise_linear(g);
  FdResidual fd;
  fd.directions = r.settings.fd_directions;
  fd.seed = r.settings.seed;
  fd.piecewise_linear = pl;

  std::mt19937_64 rng(r.settings.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto direction = [&] {
    Eigen::VectorXd h(run.n);
    do {
      for (Eigen::Index i = 0; i < run.n; ++i) h(i) = normal(rng);
    } while (h.norm() == 0.0);
    return Eigen::VectorXd(h / h.norm());
  };
  auto probe = [&](const Expr& e, const QuasiDiff& q, const Eigen::VectorXd& x) {
    for (std::size_t k = 0; k < fd.directions; ++k) {
      const Eigen::VectorXd h = direction();
      const Eigen::VectorXd model = qd_eval_dir(q, h);
      const DiniEstimate est = dini_fd(e, x, h);
      const Eigen::VectorXd diff = (model - est.value).cwiseAbs();
      const Eigen::VectorXd rel = diff.cwiseQuotient((1.0 + est.value.array().abs()).matrix());
      fd.max_abs = std::max(fd.max_abs, diff.maxCoeff());
      fd.max_rel = std::max(fd.max_rel, rel.maxCoeff());
      fd.max_spread = std::max(fd.max_spread, est.spread.maxCoeff());
    }
  };

  for (const auto& x : qd_points(run)) {
    const Evaluated ev = evaluate(run, x, co);
    probe(run.objective, ev.objective.qd, x);
    for (std::size_t i = 0; i < run.constraints.size(); ++i) probe(run.constraints[i], ev.constraints[i].qd, x);
    r.points.push_back(ev.record);
  }
  r.fd_residual = fd;
  r.exit_code = kExitOk;
  return r;
}

Report cmd_check(const ProblemFile& p, const Overrides& o, const std::string& source) {
  const ProblemFile run = as_run(p, o);
  Report r = start("check", run, source);
  const CalcOptions co = r.settings.calc();
  const CheckOptions ck = r.settings.check();
  const bool constrained = !run.constraints.empty();

  if (!run.generalized_points.empty()) {
    std::vector<QuasiDiff> qfs;
    std::vector<Eigen::VectorXd> values;
    std::vector<ConstraintSystem> systems;
    std::vector<std::optional<PolyCone>> cones;
    for (std::size_t i = 0; i < run.generalized_points.size(); ++i) {
      const Evaluated ev = evaluate(run, run.generalized_points[i], co);
      r.points.push_back(ev.record);
      qfs.push_back(ev.objective.qd);
      values.push_back(ev.objective.value);
      const std::optional<Generators> cone = run.generalized_cones ? (*run.generalized_cones)[i] : run.set_cone;
      systems.push_back(system_of(ev, cone, run.n));
      cones.push_back(systems.back().set_cone);
      if (constrained) r.quasiregularity.push_back(quasiregularity_diagnostic(systems.back().qds, run.m, {}, ck.tol));
    }
    if (constrained)
      r.checks.push_back({"generalized_constrained", check_generalized_constrained(qfs, systems, ck)});
    else
      r.checks.push_back({"generalized", check_generalized(qfs, values, cones, ck)});
  } else {
    const Evaluated ev = evaluate(run, *run.point, co);
    r.points.push_back(ev.record);
    const ConstraintSystem cs = system_of(ev, run.set_cone, run.n);
    const QuasiDiff& qf = ev.objective.qd;
    if (constrained && cs.set_cone) {
      r.checks.push_back({"combined", check_combined(qf, cs, ck)});
    } else if (constrained) {
      r.checks.push_back({"inequality", check_inequality_constrained(qf, cs, ck)});
      if (run.m == 1) r.checks.push_back({"slackened", check_slackened(qf, cs, ck)});
    } else if (cs.set_cone) {
      r.checks.push_back({"set", check_set_constrained(qf, *cs.set_cone, ck)});
    } else {
      r.checks.push_back({"unconstrained", check_unconstrained(qf, ck)});
    }
    if (constrained) r.quasiregularity.push_back(quasiregularity_diagnostic(cs.qds, run.m, {}, ck.tol));
    r.curvature = program_curvature(run);
    r.sufficient = r.curvature == "convex";
  }
  r.exit_code = r.checks.front().verdict.holds ? kExitOk : kExitFails;
  return r;
}

Report cmd_minimize(const ProblemFile& p, const Overrides& o, const std::string& source) {
  if (p.m != 1) throw UnsupportedProblem("minimize: the objective must be scalar (m = 1)");
  if (!p.constraints.empty() || p.set_cone || p.generalized_cones)
    throw UnsupportedProblem("minimize: constrained problems are not supported");
  const ProblemFile run = as_run(p, o);
  if (!run.point) throw SchemaError("minimize: a start 'point' is required");
  Report r = start("minimize", run, source);

  r.solver = minimize(run.objective, *run.point, r.settings.solver);
  const Evaluated ev = evaluate(run, r.solver->x, r.settings.calc());
  r.points.push_back(ev.record);
  r.checks.push_back({"unconstrained", check_unconstrained(ev.objective.qd, r.settings.check())});
  r.curvature = program_curvature(run);
  r.sufficient = r.curvature == "convex";
  r.exit_code = kExitOk;
  return r;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e)) return kExitSchema;
  if (dynamic_cast<const DimensionError*>(&e)) return kExitDimension;
  if (dynamic_cast<const InfeasiblePoint*>(&e)) return kExitInfeasible;
  if (dynamic_cast<const UnsupportedProblem*>(&e)) return kExitUnsupported;
  return kExitEvaluation;
}

}  // namespace qdc
