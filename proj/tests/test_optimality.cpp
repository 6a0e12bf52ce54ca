#include <doctest.h>

#include "expr_gen.hpp"
#include "qdcalc/errors.hpp"
#include "qdcalc/expr.hpp"
#include "qdcalc/optimality.hpp"
#include "support.hpp"

using namespace qdc;
using namespace qdc::testing;

namespace {

Expr coord(Eigen::Index n, Eigen::Index i, double shift = 0.0) {
  LinOp a = LinOp::Zero(1, n);
  a(0, i) = 1.0;
  return Expr::affine(a, vec({shift}));
}

Expr x1() { return Expr::var(1); }
Expr lin1(double a, double b) { return Expr::affine(scalar(a), vec({b})); }

ConstraintSystem constraints_at(const std::vector<Expr>& gs, const Eigen::VectorXd& x) {
  ConstraintSystem cs;
  for (const auto& g : gs) {
    auto vq = qd_with_value(g, x);
    cs.qds.push_back(vq.qd);
    cs.values.push_back(vq.value);
  }
  return cs;
}

PolyCone half_line() { return PolyCone::from_directions(1, {vec({1})}); }

// s − Σ wₖ Pₖ − λ must lie in Σ_i γ_i (conv subd g_i − S_i); checked with an independent membership LP.
void verify_certificate(const QuasiDiff& qf, const ConstraintSystem& cs, const PairCertificate& pc,
                        const std::vector<std::size_t>& active) {
  const auto sub = row_polytope(qf.subd(), pc.coordinate);
  REQUIRE(pc.weights.size() == static_cast<Eigen::Index>(sub.size()));
  CHECK(pc.weights.minCoeff() >= -1e-12);
  CHECK(std::abs(pc.weights.sum() - 1.0) <= 1e-9);
  LinOp rest = pc.s - pc.lambda.transpose();
  for (std::size_t k = 0; k < sub.size(); ++k) rest -= pc.weights(static_cast<Eigen::Index>(k)) * sub[k];
  CHECK(pc.gamma.minCoeff() >= -1e-12);
  std::vector<OperatorPolytope> terms{OperatorPolytope::zero(1, qf.cols())};
  std::size_t row = 0, a = 0;
  for (std::size_t l = 0; l < cs.qds.size(); ++l) {
    for (Eigen::Index r = 0; r < cs.qds[l].rows(); ++r, ++row) {
      const double g = pc.gamma(static_cast<Eigen::Index>(row));
      const bool is_active = std::find(active.begin(), active.end(), row) != active.end();
      if (!is_active) {
        CHECK(g == 0.0);
        continue;
      }
      const auto rows = row_polytope(cs.qds[l].subd(), r);
      std::vector<LinOp> gens;
      for (const auto& v : rows.generators()) gens.push_back(g * (v - pc.S[a]));
      terms.emplace_back(std::move(gens));
      ++a;
    }
  }
  CHECK(contains_point(minkowski_sum(terms), rest, Tolerance{1e-7, 1e-9}));
}

// Scalar ideal-optimality by sampling: any sampled coordinate value below f(x₀) refutes it.
bool sampled_local_min(const Expr& f, const Eigen::VectorXd& x0, Rng& rng, double radius = 1e-3, int samples = 2000) {
  const Eigen::VectorXd f0 = eval(f, x0);
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd d = rng.gaussian(x0.size());
    d *= radius * std::pow(rng.uniform(0, 1), 1.0 / static_cast<double>(x0.size())) / d.norm();
    if (((eval(f, x0 + d) - f0).array() < -1e-13).any()) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("check_unconstrained: worked values") {
  const Eigen::VectorXd o = vec({0, 0});
  const auto sum = Expr::add({Expr::abs(coord(2, 0)), Expr::abs(coord(2, 1))});
  auto v = check_unconstrained(qd_at(sum, o));
  CHECK(v.holds);
  CHECK_FALSE(v.witness);
  REQUIRE(v.certificate);

  const auto saddle = Expr::add({Expr::abs(coord(2, 0)), Expr::neg(Expr::abs(coord(2, 1)))});
  const auto qs = qd_at(saddle, o);
  v = check_unconstrained(qs);
  CHECK_FALSE(v.holds);
  REQUIRE(v.witness);
  CHECK(v.witness->coordinate == 0);
  CHECK(std::abs(v.witness->generator_row(0, 0)) == 0.0);
  CHECK(std::abs(v.witness->generator_row(0, 1)) == 1.0);
  CHECK(v.witness->rate <= -1.0 + 1e-9);
  CHECK(std::abs(v.witness->direction(1)) == doctest::Approx(1.0));
  CHECK(dini_fd(saddle, o, v.witness->direction).value(0) < 0.0);
  CHECK((qs.supd()[v.witness->generator].row(0) - v.witness->generator_row).isZero(0.0));

  v = check_unconstrained(qd_linear(row({1, -2})));
  CHECK_FALSE(v.holds);
  CHECK(v.witness->rate < 0.0);
}

TEST_CASE("check_inequality_constrained: worked values") {
  const auto z = vec({0});
  // f = x, g = −x ≤ 0
  const auto cs1 = constraints_at({Expr::neg(x1())}, z);
  auto v = check_inequality_constrained(qd_at(x1(), z), cs1);
  CHECK(v.holds);
  REQUIRE(v.certificate);
  REQUIRE(v.certificate->pairs.size() == 1);
  CHECK(v.certificate->pairs[0].gamma(0) == doctest::Approx(1.0).epsilon(1e-12));
  verify_certificate(qd_at(x1(), z), cs1, v.certificate->pairs[0], {0});

  // f = x, g = x − 1 ≤ 0 (inactive)
  v = check_inequality_constrained(qd_at(x1(), z), constraints_at({lin1(1, -1)}, z));
  CHECK_FALSE(v.holds);
  REQUIRE(v.witness);
  CHECK(v.witness->direction(0) < 0.0);
  CHECK(v.witness->rate < 0.0);

  // f = |x|, g ≡ −1
  const auto absx = Expr::abs(x1());
  v = check_inequality_constrained(qd_at(absx, z), constraints_at({Expr::constant(1, vec({-1}))}, z));
  CHECK(v.holds);
  CHECK(check_unconstrained(qd_at(absx, z)).holds);

  CHECK_THROWS_AS(check_inequality_constrained(qd_at(x1(), z), constraints_at({lin1(1, 1)}, z)), InfeasiblePoint);
}

TEST_CASE("check_set_constrained: worked values") {
  const auto z = vec({0});
  auto v = check_set_constrained(qd_at(x1(), z), half_line());
  CHECK(v.holds);
  REQUIRE(v.certificate);
  CHECK(v.certificate->pairs[0].lambda(0) == doctest::Approx(-1.0).epsilon(1e-12));

  v = check_set_constrained(qd_at(Expr::neg(x1()), z), half_line());
  CHECK_FALSE(v.holds);
  REQUIRE(v.witness);
  CHECK(v.witness->direction(0) > 0.0);  // moves into C
  CHECK(v.witness->rate < 0.0);

  // K = {0}: N is everything
  v = check_set_constrained(qd_linear(row({3, -1})), PolyCone::from_directions(2, {}));
  CHECK(v.holds);
}

TEST_CASE("check_combined: worked values") {
  const auto z = vec({0});
  auto cs = constraints_at({Expr::neg(x1())}, z);
  cs.set_cone = half_line();
  const auto qf = qd_at(x1(), z);
  const auto v = check_combined(qf, cs);
  CHECK(v.holds);
  REQUIRE(v.certificate);
  const auto& pc = v.certificate->pairs.at(0);
  const bool first = std::abs(pc.gamma(0)) <= 1e-12 && std::abs(pc.lambda(0) + 1.0) <= 1e-12;
  const bool second = std::abs(pc.gamma(0) - 1.0) <= 1e-12 && std::abs(pc.lambda(0)) <= 1e-12;
  CHECK((first || second));
  verify_certificate(qf, cs, pc, {0});

  // degenerations
  ConstraintSystem only_cone;
  only_cone.set_cone = half_line();
  CHECK(check_combined(qd_at(Expr::neg(x1()), z), only_cone).holds ==
        check_set_constrained(qd_at(Expr::neg(x1()), z), half_line()).holds);
  auto whole = constraints_at({lin1(1, -1)}, z);
  whole.set_cone = PolyCone::from_directions(1, {vec({1}), vec({-1})});
  CHECK(check_combined(qf, whole).holds == check_inequality_constrained(qf, whole).holds);
}

TEST_CASE("check_generalized: worked values") {
  // f(x) = (|x − 1|, |x + 1|) at {1, −1}
  const auto fx = Expr::add({Expr::abs(Expr::affine((LinOp(2, 1) << 1, 0).finished(), vec({-1, 0}))),
                             Expr::abs(Expr::affine((LinOp(2, 1) << 0, 1).finished(), vec({0, 1})))});
  const std::vector<QuasiDiff> qs{qd_at(fx, vec({1})), qd_at(fx, vec({-1}))};
  const std::vector<Eigen::VectorXd> vals{eval(fx, vec({1})), eval(fx, vec({-1}))};
  auto v = check_generalized(qs, vals);
  CHECK(v.holds);
  REQUIRE(v.certificate);
  for (const auto& p : v.certificate->pairs) CHECK(p.point == static_cast<std::size_t>(p.coordinate));

  // a single point: same as the unconstrained / set-constrained checks
  const auto saddle = Expr::add({Expr::abs(coord(2, 0)), Expr::neg(Expr::abs(coord(2, 1)))});
  const std::vector<QuasiDiff> one{qd_at(saddle, vec({0, 0}))};
  const std::vector<Eigen::VectorXd> one_val{vec({0})};
  CHECK_FALSE(check_generalized(one, one_val).holds);
  const std::vector<std::optional<PolyCone>> cone{PolyCone::from_directions(2, {vec({1, 0}), vec({-1, 0})})};
  CHECK(check_generalized(one, one_val, cone).holds ==
        check_set_constrained(one[0], *cone[0]).holds);

  // one point attains the meet everywhere: only its inclusion matters
  const std::vector<QuasiDiff> dominated{qd_at(Expr::abs(x1()), vec({0})), qd_linear(scalar(1))};
  const std::vector<Eigen::VectorXd> dv{vec({0}), vec({5})};
  CHECK(check_generalized(dominated, dv).holds);
  const std::vector<Eigen::VectorXd> tie{vec({0}), vec({0})};
  CHECK_FALSE(check_generalized(dominated, tie).holds);
}

TEST_CASE("check_generalized_constrained") {
  // f = x at two points; g(x) = −x active at 0, inactive at 1
  const std::vector<QuasiDiff> qs{qd_at(x1(), vec({0})), qd_at(x1(), vec({1}))};
  const std::vector<ConstraintSystem> sys{constraints_at({Expr::neg(x1())}, vec({0})),
                                          constraints_at({Expr::neg(x1())}, vec({1}))};
  auto v = check_generalized_constrained(qs, sys);
  CHECK(v.holds);
  CHECK_FALSE(v.notes.empty());
  const std::vector<QuasiDiff> q2{qd_at(x1(), vec({1})), qd_at(x1(), vec({2}))};
  const std::vector<ConstraintSystem> s2{constraints_at({Expr::neg(x1())}, vec({1})),
                                         constraints_at({Expr::neg(x1())}, vec({2}))};
  v = check_generalized_constrained(q2, s2);
  CHECK_FALSE(v.holds);
  REQUIRE(v.witness);
  CHECK(v.witness->rate < 0.0);
}

TEST_CASE("quasiregularity_diagnostic: worked values") {
  const std::vector<QuasiDiff> g{qd_at(Expr::neg(x1()), vec({0}))};
  auto r = quasiregularity_diagnostic(g, 1);
  CHECK(r.regular);
  REQUIRE(r.entries.size() == 1);
  CHECK_FALSE(r.entries[0].intersects);

  const std::vector<QuasiDiff> flat{qd_zero(1, 1)};
  CHECK_FALSE(quasiregularity_diagnostic(flat, 1).regular);
  CHECK(quasiregularity_diagnostic(std::vector<QuasiDiff>{}, 1).regular);

  // vector objective: every nonzero mask is sampled
  r = quasiregularity_diagnostic(g, 2);
  CHECK(r.entries.size() == 3);
  CHECK(r.regular);
}

TEST_CASE("check_slackened: worked values") {
  const auto z = vec({0});
  CHECK(check_slackened(qd_at(x1(), z), constraints_at({Expr::neg(x1())}, z)).holds);
  CHECK_FALSE(check_slackened(qd_at(x1(), z), ConstraintSystem{}).holds);
  CHECK_THROWS_AS(check_slackened(qd_linear(LinOp::Ones(2, 1)), ConstraintSystem{}), DimensionError);
}

TEST_CASE("monotonicity under enlargement") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index m = rng.integer(1, 2), n = rng.integer(1, 3);
    const auto q = rng.quasidiff(m, n, 4);
    auto more = q.subd().generators();
    more.push_back(rng.matrix(m, n, -2, 2));
    auto sup_more = q.supd().generators();
    sup_more.push_back(rng.matrix(m, n, -2, 2));
    const bool base = check_unconstrained(q).holds;
    if (base) CHECK(check_unconstrained(QuasiDiff(OperatorPolytope(more), q.supd())).holds);
    if (!base) CHECK_FALSE(check_unconstrained(QuasiDiff(q.subd(), OperatorPolytope(sup_more))).holds);
  }
}

TEST_CASE("combined check degenerates to its special cases") {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = rng.integer(1, 2), n = rng.integer(1, 3);
    const auto qf = rng.quasidiff(m, n);
    ConstraintSystem cs;
    const int k = rng.integer(0, 2);
    for (int i = 0; i < k; ++i) {
      cs.qds.push_back(rng.quasidiff(1, n));
      cs.values.push_back(vec({rng.coin() ? 0.0 : -1.0}));
    }
    std::vector<Eigen::VectorXd> dirs;
    for (int i = rng.integer(0, 3); i > 0; --i) dirs.push_back(rng.gaussian(n));
    const auto kc = PolyCone::from_directions(n, dirs);

    ConstraintSystem cone_only;
    cone_only.set_cone = kc;
    CHECK(check_combined(qf, cone_only).holds == check_set_constrained(qf, kc).holds);

    std::vector<Eigen::VectorXd> both;
    for (Eigen::Index i = 0; i < n; ++i) {
      both.push_back(Eigen::VectorXd::Unit(n, i));
      both.push_back(-Eigen::VectorXd::Unit(n, i));
    }
    ConstraintSystem whole = cs;
    whole.set_cone = PolyCone::from_directions(n, both);
    CHECK(check_combined(qf, whole).holds == check_inequality_constrained(qf, cs).holds);
  }
}

TEST_CASE("inequality check implies the slackened check") {
  Rng rng(33);
  int holds = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = rng.integer(1, 3);
    const auto qf = rng.quasidiff(1, n);
    ConstraintSystem cs;
    for (int i = rng.integer(0, 3); i > 0; --i) {
      cs.qds.push_back(rng.quasidiff(1, n));
      cs.values.push_back(vec({rng.coin() ? 0.0 : -rng.uniform(0.1, 1)}));
    }
    if (check_inequality_constrained(qf, cs).holds) {
      ++holds;
      CHECK(check_slackened(qf, cs).holds);
    }
  }
  CHECK(holds > 10);
}

TEST_CASE("generalized check with one point agrees with the set-constrained check") {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index m = rng.integer(1, 2), n = rng.integer(1, 3);
    const std::vector<QuasiDiff> q{rng.quasidiff(m, n)};
    const std::vector<Eigen::VectorXd> val{rng.vector(m)};
    std::vector<Eigen::VectorXd> dirs;
    for (int i = rng.integer(0, 3); i > 0; --i) dirs.push_back(rng.gaussian(n));
    const std::vector<std::optional<PolyCone>> cones{PolyCone::from_directions(n, dirs)};
    CHECK(check_generalized(q, val, cones).holds == check_set_constrained(q[0], *cones[0]).holds);
    CHECK(check_generalized(q, val).holds == check_unconstrained(q[0]).holds);
  }
}

TEST_CASE("constrained certificates verify independently") {
  Rng rng(35);
  int verified = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Eigen::Index m = rng.integer(1, 2), n = rng.integer(1, 3);
    const auto qf = rng.quasidiff(m, n);
    ConstraintSystem cs;
    for (int i = rng.integer(1, 3); i > 0; --i) {
      cs.qds.push_back(rng.quasidiff(1, n));
      cs.values.push_back(vec({rng.coin(0.7) ? 0.0 : -0.5}));
    }
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < cs.values.size(); ++i)
      if (cs.values[i](0) == 0.0) active.push_back(i);
    const auto v = check_inequality_constrained(qf, cs);
    if (!v.holds) continue;
    for (const auto& pc : v.certificate->pairs) verify_certificate(qf, cs, pc, active);
    ++verified;
  }
  CHECK(verified > 10);
}

TEST_CASE("witness directions are real descent directions") {
  Rng rng(36);
  ExprGenConfig cfg;
  cfg.piecewise_linear = true;
  ExprGen gen(rng, cfg);
  int failures = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index n = rng.integer(1, 3), m = rng.integer(1, 2);
    const Eigen::VectorXd x = gen.dyadic_vector(n);
    const Expr f = gen.make(n, m, 4, x);
    const auto v = check_unconstrained(qd_at(f, x));
    if (v.holds) continue;
    ++failures;
    const auto& w = *v.witness;
    CHECK(w.rate < 0.0);
    const double f0 = eval(f, x)(w.coordinate);
    bool descended = false;
    for (double t : {1e-3, 1e-4})
      if (eval(f, x + t * w.direction)(w.coordinate) < f0 - t * 1e-2 * std::abs(w.rate)) descended = true;
    CHECK(descended);
  }
  CHECK(failures > 50);
}

TEST_CASE("verdicts match the sampling oracle on piecewise-linear maps") {
  Rng rng(37);
  ExprGenConfig cfg;
  cfg.piecewise_linear = true;
  cfg.max_dim = 2;
  ExprGen gen(rng, cfg);
  int compared = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Eigen::VectorXd x = gen.dyadic_vector(2);
    const Expr f = gen.make(2, 1, 4, x);
    const double gap = min_kink_gap(f, x);
    if (gap > 0.0 && gap < 1e-2) continue;
    const bool verdict = check_unconstrained(qd_at(f, x)).holds;
    CHECK(verdict == sampled_local_min(f, x, rng));
    ++compared;
  }
  CHECK(compared > 100);
}
