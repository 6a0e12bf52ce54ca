#include <doctest.h>

#include "convex_gen.hpp"
#include "qdcalc/errors.hpp"
#include "qdcalc/optimality.hpp"
#include "qdcalc/solver.hpp"
#include "support.hpp"

using namespace qdc;
using namespace qdc::testing;

TEST_CASE("steepest_descent_direction: worked values") {
  CHECK_FALSE(steepest_descent_direction(qd_at(Expr::abs(Expr::var(1)), vec({0}))));

  LinOp e1(1, 2), e2(1, 2);
  e1 << 1, 0;
  e2 << 0, 1;
  const auto saddle = Expr::add({Expr::abs(Expr::affine(e1, vec({0}))), Expr::neg(Expr::abs(Expr::affine(e2, vec({0}))))});
  const auto d = steepest_descent_direction(qd_at(saddle, vec({0, 0})));
  REQUIRE(d);
  CHECK(d->distance == doctest::Approx(1.0));
  CHECK(std::abs(d->direction(0)) <= 1e-12);
  CHECK(std::abs(d->direction(1)) == doctest::Approx(1.0));
  CHECK(d->rate <= -1.0 + 1e-9);

  const auto lin = steepest_descent_direction(qd_linear(scalar(2)));
  REQUIRE(lin);
  CHECK(lin->direction(0) == doctest::Approx(-1.0));
  CHECK(lin->rate == doctest::Approx(-2.0));
  CHECK(lin->distance == doctest::Approx(2.0));

  CHECK_THROWS_AS(steepest_descent_direction(qd_linear(LinOp::Ones(2, 1))), DimensionError);
}

TEST_CASE("minimize: worked values") {
  const auto x = Expr::var(1);
  auto tr = minimize(Expr::abs(x), vec({5}));
  CHECK(tr.status == SolverStatus::stationary);
  CHECK(std::abs(tr.x(0)) <= 1e-6);

  tr = minimize(Expr::max({x, Expr::scale(vec({-2}), x)}), vec({1}));
  CHECK(tr.status == SolverStatus::stationary);
  CHECK(std::abs(tr.x(0)) <= 1e-6);

  SolverParams p;
  p.max_iters = 50;
  tr = minimize(x, vec({0}), p);
  CHECK(tr.status == SolverStatus::max_iters);
  for (std::size_t i = 1; i < tr.iterates.size(); ++i) CHECK(tr.iterates[i].f < tr.iterates[i - 1].f);

  tr = minimize(Expr::abs(x), vec({0}));
  CHECK(tr.status == SolverStatus::stationary);
  CHECK(tr.iterations == 0);

  CHECK_THROWS_AS(minimize(Expr::var(2), vec({0, 0})), DimensionError);
}

TEST_CASE("accepted steps decrease f and directions descend") {
  Rng rng(41);
  ExprGen gen(rng, {});
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index n = rng.integer(1, 3);
    const Eigen::VectorXd x = gen.dyadic_vector(n);
    // bounded below: |g| + |x|₁
    std::vector<Expr> terms{Expr::abs(gen.make(n, 1, 3, x))};
    for (Eigen::Index j = 0; j < n; ++j) {
      LinOp r = LinOp::Zero(1, n);
      r(0, j) = 1;
      terms.push_back(Expr::abs(Expr::affine(r, vec({0}))));
    }
    const Expr f = Expr::add(std::move(terms));
    SolverParams p;
    p.max_iters = 60;
    const auto tr = minimize(f, x, p);
    for (std::size_t i = 0; i + 1 < tr.iterates.size(); ++i) {
      CHECK(tr.iterates[i + 1].f < tr.iterates[i].f);
      const auto q = qd_at(f, tr.iterates[i].x, CalcOptions{Tolerance{}, tr.iterates[i].eps_active});
      const auto d = steepest_descent_direction(q);
      REQUIRE(d);
      CHECK(qd_eval_dir(q, d->direction)(0) < 0.0);
    }
  }
}

TEST_CASE("convex instances end at a certified minimum") {
  Rng rng(42);
  ExprGen gen(rng, {});
  for (int trial = 0; trial < 12; ++trial) {
    const Eigen::Index n = rng.integer(1, 3);
    const auto inst = random_convex(gen, rng, n);
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd x = gen.dyadic_vector(n);
      CHECK(inst.value(x) == eval(inst.expr, x)(0));
    }
    const auto tr = minimize(inst.expr, rng.vector(n, -2, 2));
    CAPTURE(trial);
    CHECK(tr.status == SolverStatus::stationary);
    CHECK(check_unconstrained(qd_at(inst.expr, tr.x)).holds);
    CHECK(std::abs(tr.f - inst.grid_min()) <= 1e-6);
  }
}
