#include <doctest.h>

#include <chrono>
#include <map>

#include "expr_gen.hpp"
#include "qdcalc/errors.hpp"
#include "qdcalc/expr.hpp"
#include "support.hpp"

using namespace qdc;
using namespace qdc::testing;

namespace {

Expr x1_of_2() { return Expr::affine(row({1, 0}), vec({0})); }
Expr x2_of_2() { return Expr::affine(row({0, 1}), vec({0})); }

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("eval: worked values") {
  CHECK(eval(Expr::abs(Expr::var(1)), vec({-3}))(0) == 3.0);
  CHECK(eval(Expr::max({Expr::var(1), Expr::neg(Expr::var(1))}), vec({2}))(0) == 2.0);
  CHECK(eval(Expr::affine(row({1, 1}), vec({1})), vec({2, 3}))(0) == 6.0);
  CHECK_THROWS_AS(eval(Expr::var(2), vec({1})), DimensionError);
}

TEST_CASE("builders validate dims") {
  CHECK_THROWS_AS(Expr::add({Expr::var(1), Expr::var(2)}), DimensionError);
  CHECK_THROWS_AS(Expr::max({Expr::var(2), Expr::affine(row({1, 1}), vec({0}))}), DimensionError);
  CHECK_THROWS_AS(Expr::mul(Expr::affine(row({1, 1}), vec({0})), Expr::var(2)), DimensionError);
  CHECK_THROWS_AS(Expr::compose(Expr::var(3), Expr::var(2)), DimensionError);
  CHECK_THROWS_AS(Expr::scale(vec({1, 2}), Expr::var(1)), DimensionError);
  CHECK_THROWS_AS(Expr::affine(row({1, 1}), vec({0, 0})), DimensionError);
  const auto c = Expr::compose(Expr::abs(Expr::var(1)), Expr::affine(row({1, -1}), vec({0})));
  CHECK(c.in_dim() == 2);
  CHECK(c.out_dim() == 1);
}

TEST_CASE("qd_at: worked values") {
  const auto a = qd_at(Expr::abs(Expr::var(1)), vec({0}));
  CHECK(support(a.subd(), vec({1})).value(0) == 1.0);
  CHECK(support(a.subd(), vec({-1})).value(0) == 1.0);
  CHECK(support(a.supd(), vec({1})).value(0) == 0.0);
  CHECK(support(a.supd(), vec({-1})).value(0) == 0.0);

  const auto e = Expr::add({Expr::abs(x1_of_2()), Expr::neg(Expr::abs(x2_of_2()))});
  const auto q = qd_at(e, vec({0, 0}));
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd h = rng.gaussian(2);
    CHECK(support(q.subd(), h).value(0) == doctest::Approx(std::abs(h(0))).epsilon(1e-12));
    CHECK(support(q.supd(), h).value(0) == doctest::Approx(std::abs(h(1))).epsilon(1e-12));
  }

  const LinOp a2 = (LinOp(2, 2) << 1, 2, 3, 4).finished();
  const auto lin = qd_at(Expr::affine(a2, vec({1, 1})), vec({7, -1}));
  REQUIRE(lin.subd().size() == 1);
  CHECK(lin.subd()[0] == a2);
  CHECK(lin.supd()[0].isZero(0.0));
}

TEST_CASE("dini_fd: worked values") {
  const auto absx = Expr::abs(Expr::var(1));
  CHECK(std::abs(dini_fd(absx, vec({0}), vec({1})).value(0) - 1.0) <= 1e-6);
  const auto sq = Expr::smooth(SmoothFn::sqr, Expr::var(1));
  CHECK(std::abs(dini_fd(sq, vec({1}), vec({1})).value(0) - 2.0) <= 1e-4);
  const auto v = Expr::max({Expr::var(1), Expr::neg(Expr::var(1))});
  CHECK(std::abs(dini_fd(v, vec({0}), vec({-1})).value(0) - 1.0) <= 1e-9);
  // a kink inside the larger steps shows up in the spread
  const auto shifted = Expr::abs(Expr::affine(scalar(1), vec({-1e-3})));
  const auto est = dini_fd(shifted, vec({0}), vec({1}));
  CHECK(est.value(0) == doctest::Approx(-1.0));
  CHECK(est.spread(0) > 1.0);
  CHECK_THROWS(dini_fd(absx, vec({0}), vec({1}), {1e-2, 1e-3, 1e-4}));
  CHECK_THROWS(dini_fd(absx, vec({0}), vec({1}), {1e-2, 1e-3, 1e-3, 1e-5}));
}

TEST_CASE("smooth primitives carry exact derivatives") {
  const std::map<SmoothFn, double (*)(double)> deriv{
      {SmoothFn::sin, [](double u) { return std::cos(u); }},
      {SmoothFn::cos, [](double u) { return -std::sin(u); }},
      {SmoothFn::exp, [](double u) { return std::exp(u); }},
      {SmoothFn::sqr, [](double u) { return 2 * u; }},
      {SmoothFn::tanh, [](double u) { return 1 - std::tanh(u) * std::tanh(u); }}};
  for (const auto& [fn, d] : deriv) {
    for (double u : {-1.3, 0.0, 0.7}) {
      const auto q = qd_at(Expr::smooth(fn, Expr::var(1)), vec({u}));
      CHECK(qd_eval_dir(q, vec({1}))(0) == doctest::Approx(d(u)).epsilon(1e-14));
      CHECK(qd_eval_dir(q, vec({-2}))(0) == doctest::Approx(-2 * d(u)).epsilon(1e-14));
    }
  }
}

TEST_CASE("oracle agreement for every node kind") {
  Rng rng(2024);
  const char* names[] = {"abs", "neg", "add", "scale", "max", "min", "compose", "smooth", "mul"};
  for (int root = 0; root < ExprGen::kRootKinds; ++root) {
    CAPTURE(names[root]);
    ExprGenConfig cfg;
    cfg.max_dim = 3;
    ExprGen gen(rng, cfg);
    int done = 0, tries = 0;
    while (done < 200 && tries < 2000) {
      ++tries;
      const Eigen::Index n = rng.integer(1, 3), m = rng.integer(1, 3);
      const Eigen::VectorXd x = gen.dyadic_vector(n);
      const Expr e = gen.make(n, m, 4, x, root);
      const double gap = min_kink_gap(e, x);
      if (gap > 1e-12 && gap < 1e-3) continue;  // a kink just off x would spoil the finite differences
      if (!eval(e, x).allFinite() || max_abs(eval(e, x)) > 1e3) continue;
      ++done;
      const auto q = qd_at(e, x);
      const bool pl = is_piecewise_linear(e);
      for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd h = rng.gaussian(n);
        const Eigen::VectorXd d = dini_fd(e, x, h).value;
        const Eigen::VectorXd r = qd_eval_dir(q, h) - d;
        for (Eigen::Index j = 0; j < m; ++j) {
          const double tol = pl ? 1e-9 : 1e-5 * (1 + std::abs(d(j)));
          if (std::abs(r(j)) > tol) {
            MESSAGE(expr_to_json(e).dump());
            MESSAGE("x = " << x.transpose() << "  h = " << h.transpose());
          }
          CHECK(std::abs(r(j)) <= tol);
        }
      }
    }
    CHECK(done == 200);
  }
}

TEST_CASE("negation flips the derivative") {
  Rng rng(5);
  ExprGen gen(rng, {});
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index n = rng.integer(1, 3), m = rng.integer(1, 3);
    const Eigen::VectorXd x = gen.dyadic_vector(n);
    const Expr e = gen.make(n, m, 3, x);
    const auto q = qd_at(e, x);
    const auto qn = qd_at(Expr::neg(e), x);
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd h = rng.gaussian(n);
      CHECK(max_abs(qd_eval_dir(qn, h) + qd_eval_dir(q, h)) <= 1e-9 * (1 + max_abs(qd_eval_dir(q, h))));
    }
  }
}

TEST_CASE("qd_at is deterministic") {
  Rng rng(6);
  ExprGen gen(rng, {});
  for (int i = 0; i < 30; ++i) {
    const Eigen::Index n = rng.integer(1, 3), m = rng.integer(1, 3);
    const Eigen::VectorXd x = gen.dyadic_vector(n);
    const Expr e = gen.make(n, m, 4, x);
    const auto a = qd_at(e, x), b = qd_at(e, x);
    REQUIRE(a.subd().size() == b.subd().size());
    REQUIRE(a.supd().size() == b.supd().size());
    for (int k = 0; k < 10; ++k) {
      const Eigen::VectorXd h = rng.gaussian(n);
      CHECK(max_abs(support(a.subd(), h).value - support(b.subd(), h).value) <= 1e-12);
      CHECK(max_abs(support(a.supd(), h).value - support(b.supd(), h).value) <= 1e-12);
    }
  }
}

TEST_CASE("syntactic classification") {
  const auto x = Expr::var(1);
  CHECK(is_piecewise_linear(Expr::max({x, Expr::neg(x)})));
  CHECK_FALSE(is_piecewise_linear(Expr::smooth(SmoothFn::sin, x)));
  CHECK_FALSE(is_piecewise_linear(Expr::mul(x, x)));
  CHECK(curvature(Expr::add({Expr::abs(x), Expr::affine(scalar(2), vec({1}))})) == Curvature::convex);
  CHECK(curvature(Expr::neg(Expr::abs(x))) == Curvature::concave);
  CHECK(curvature(Expr::add({Expr::abs(x), Expr::neg(Expr::abs(x))})) == Curvature::unknown);
  CHECK(curvature(Expr::max({Expr::abs(x), Expr::affine(scalar(-1), vec({3}))})) == Curvature::convex);
  CHECK(curvature(Expr::scale(vec({-2}), Expr::abs(x))) == Curvature::concave);
  CHECK(curvature(Expr::compose(Expr::abs(Expr::var(1)), Expr::affine(row({1, -1}), vec({0})))) ==
        Curvature::convex);
  CHECK(curvature(Expr::abs(Expr::abs(x))) == Curvature::unknown);
  CHECK(depth(Expr::abs(Expr::max({x, Expr::neg(x)}))) == 4);
}

TEST_CASE("min_kink_gap") {
  const auto x = Expr::var(1);
  CHECK(min_kink_gap(Expr::abs(x), vec({0})) == std::numeric_limits<double>::infinity());
  CHECK(min_kink_gap(Expr::abs(x), vec({0.25})) == 0.5);
  CHECK(min_kink_gap(Expr::max({x, Expr::constant(1, vec({1}))}), vec({0.75})) == 0.25);
  CHECK(min_kink_gap(Expr::compose(Expr::abs(Expr::var(1)), Expr::affine(scalar(2), vec({0}))), vec({1})) == 4.0);
}

TEST_CASE("json round trip and schema errors") {
  Rng rng(9);
  ExprGen gen(rng, {});
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index n = rng.integer(1, 3), m = rng.integer(1, 3);
    const Eigen::VectorXd x = gen.dyadic_vector(n);
    const Expr e = gen.make(n, m, 4, x);
    const auto j = expr_to_json(e);
    const Expr back = expr_from_json(nlohmann::json::parse(j.dump()), n);
    CHECK(expr_to_json(back) == j);
    CHECK(eval(back, x) == eval(e, x));
  }
  using nlohmann::json;
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"nope"})"), 1), SchemaError);
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"var","extra":1})"), 1), SchemaError);
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"abs"})"), 1), SchemaError);
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"const","value":["a"]})"), 1), SchemaError);
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"affine","a":[[1,2],[3]],"b":[0,0]})"), 2), SchemaError);
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"smooth","fn":"log","arg":{"op":"var"}})"), 1), SchemaError);
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"affine","a":[[1,2]],"b":[0]})"), 3), DimensionError);
  CHECK_THROWS_AS(expr_from_json(json::parse(R"({"op":"add","args":[{"op":"var"},{"op":"const","value":[1,2]}]})"), 1),
                  DimensionError);
  const auto c = expr_from_json(
      json::parse(R"({"op":"compose","outer":{"op":"abs","arg":{"op":"var"}},"inner":{"op":"affine","a":[[1,-1]],"b":[0]}})"),
      2);
  CHECK(c.in_dim() == 2);
  CHECK(eval(c, vec({1, 3}))(0) == 2.0);
}
