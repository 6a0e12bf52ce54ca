#include "qdcalc/expr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "qdcalc/errors.hpp"

namespace qdc {

namespace {

using nlohmann::json;

std::shared_ptr<Expr::Node> make_node(ExprKind kind, Eigen::Index in, Eigen::Index out) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = kind;
  n->in_dim = in;
  n->out_dim = out;
  return n;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

void require_list(const std::vector<Expr>& args, const char* what) {
  require(!args.empty(), std::string(what) + ": needs at least one operand");
  for (const auto& a : args) {
    require(a.in_dim() == args.front().in_dim() && a.out_dim() == args.front().out_dim(),
            std::string(what) + ": operands must share input and output dims");
  }
}

Eigen::VectorXd apply_smooth(SmoothFn fn, const Eigen::VectorXd& u) {
  switch (fn) {
    case SmoothFn::sin: return u.array().sin().matrix();
    case SmoothFn::cos: return u.array().cos().matrix();
    case SmoothFn::exp: return u.array().exp().matrix();
    case SmoothFn::sqr: return u.array().square().matrix();
    case SmoothFn::tanh: return u.array().tanh().matrix();
  }
  throw std::logic_error("unknown smooth primitive");
}

Eigen::VectorXd smooth_derivative(SmoothFn fn, const Eigen::VectorXd& u) {
  switch (fn) {
    case SmoothFn::sin: return u.array().cos().matrix();
    case SmoothFn::cos: return (-u.array().sin()).matrix();
    case SmoothFn::exp: return u.array().exp().matrix();
    case SmoothFn::sqr: return (2.0 * u.array()).matrix();
    case SmoothFn::tanh: return (1.0 - u.array().tanh().square()).matrix();
  }
  throw std::logic_error("unknown smooth primitive");
}

Curvature flip(Curvature c) {
  switch (c) {
    case Curvature::convex: return Curvature::concave;
    case Curvature::concave: return Curvature::convex;
    default: return c;
  }
}

// Curvature of a sum (or of a max/min when `allowed` restricts the outcome).
Curvature combine(const std::vector<Curvature>& cs) {
  bool convex_ok = true, concave_ok = true, all_affine = true;
  for (auto c : cs) {
    if (c != Curvature::affine) all_affine = false;
    if (c != Curvature::affine && c != Curvature::convex) convex_ok = false;
    if (c != Curvature::affine && c != Curvature::concave) concave_ok = false;
  }
  if (all_affine) return Curvature::affine;
  if (convex_ok) return Curvature::convex;
  if (concave_ok) return Curvature::concave;
  return Curvature::unknown;
}

Curvature scaled(const Eigen::VectorXd& d, Curvature c) {
  if (c == Curvature::affine || (d.array() == 0.0).all()) return Curvature::affine;
  if ((d.array() >= 0.0).all()) return c;
  if ((d.array() <= 0.0).all()) return flip(c);
  return Curvature::unknown;
}

// ---- JSON ----

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("expression: missing field '") + key + "'");
  return *it;
}

void only_fields(const json& j, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
      throw SchemaError("expression: unknown field '" + it.key() + "'");
  }
}

double number(const json& j) {
  if (!j.is_number()) throw SchemaError("expression: expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SchemaError("expression: non-finite number");
  return v;
}

Eigen::VectorXd vector_of(const json& j) {
  if (!j.is_array() || j.empty()) throw SchemaError("expression: expected a non-empty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i]);
  return v;
}

LinOp matrix_of(const json& j) {
  if (!j.is_array() || j.empty()) throw SchemaError("expression: expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  LinOp a;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = vector_of(j[static_cast<std::size_t>(r)]);
    if (cols < 0) {
      cols = row.size();
      a.resize(rows, cols);
    } else if (row.size() != cols) {
      throw SchemaError("expression: ragged matrix rows");
    }
    a.row(r) = row.transpose();
  }
  return a;
}

json json_of(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json json_of(const LinOp& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(json_of(Eigen::VectorXd(m.row(r).transpose())));
  return a;
}

std::vector<Expr> list_of(const json& j, Eigen::Index n) {
  if (!j.is_array() || j.empty()) throw SchemaError("expression: 'args' must be a non-empty array");
  std::vector<Expr> out;
  for (const auto& c : j) out.push_back(expr_from_json(c, n));
  return out;
}

SmoothFn smooth_from(const json& j) {
  if (!j.is_string()) throw SchemaError("expression: 'fn' must be a string");
  const auto s = j.get<std::string>();
  for (auto f : {SmoothFn::sin, SmoothFn::cos, SmoothFn::exp, SmoothFn::sqr, SmoothFn::tanh})
    if (s == to_string(f)) return f;
  throw SchemaError("expression: unknown smooth primitive '" + s + "'");
}

}  // namespace

const char* to_string(ExprKind k) {
  switch (k) {
    case ExprKind::var: return "var";
    case ExprKind::constant: return "const";
    case ExprKind::affine: return "affine";
    case ExprKind::smooth: return "smooth";
    case ExprKind::abs: return "abs";
    case ExprKind::neg: return "neg";
    case ExprKind::add: return "add";
    case ExprKind::scale: return "scale";
    case ExprKind::mul: return "mul";
    case ExprKind::max: return "max";
    case ExprKind::min: return "min";
    case ExprKind::compose: return "compose";
  }
  return "?";
}

const char* to_string(SmoothFn f) {
  switch (f) {
    case SmoothFn::sin: return "sin";
    case SmoothFn::cos: return "cos";
    case SmoothFn::exp: return "exp";
    case SmoothFn::sqr: return "sqr";
    case SmoothFn::tanh: return "tanh";
  }
  return "?";
}

ExprKind Expr::kind() const { return node_->kind; }
Eigen::Index Expr::in_dim() const { return node_->in_dim; }
Eigen::Index Expr::out_dim() const { return node_->out_dim; }
const std::vector<Expr>& Expr::children() const { return node_->children; }

Expr Expr::var(Eigen::Index n) {
  require(n >= 1, "var: dimension must be positive");
  return Expr(make_node(ExprKind::var, n, n));
}

Expr Expr::constant(Eigen::Index n, Eigen::VectorXd value) {
  require(n >= 1 && value.size() >= 1, "const: dimensions must be positive");
  require(value.allFinite(), "const: non-finite entry");
  auto node = make_node(ExprKind::constant, n, value.size());
  node->data = std::move(value);
  return Expr(node);
}

Expr Expr::affine(LinOp a, Eigen::VectorXd b) {
  require(a.rows() >= 1 && a.cols() >= 1, "affine: empty matrix");
  require(b.size() == a.rows(), "affine: offset length must equal the number of rows");
  require(a.allFinite() && b.allFinite(), "affine: non-finite entry");
  auto node = make_node(ExprKind::affine, a.cols(), a.rows());
  node->matrix = std::move(a);
  node->data = std::move(b);
  return Expr(node);
}

Expr Expr::smooth(SmoothFn fn, Expr arg) {
  auto node = make_node(ExprKind::smooth, arg.in_dim(), arg.out_dim());
  node->fn = fn;
  node->children = {std::move(arg)};
  return Expr(node);
}

Expr Expr::abs(Expr arg) {
  auto node = make_node(ExprKind::abs, arg.in_dim(), arg.out_dim());
  node->children = {std::move(arg)};
  return Expr(node);
}

Expr Expr::neg(Expr arg) {
  auto node = make_node(ExprKind::neg, arg.in_dim(), arg.out_dim());
  node->children = {std::move(arg)};
  return Expr(node);
}

Expr Expr::add(std::vector<Expr> args) {
  require_list(args, "add");
  auto node = make_node(ExprKind::add, args.front().in_dim(), args.front().out_dim());
  node->children = std::move(args);
  return Expr(node);
}

Expr Expr::scale(Eigen::VectorXd diag, Expr arg) {
  require(diag.size() == arg.out_dim(), "scale: diagonal length must equal the operand's output dim");
  require(diag.allFinite(), "scale: non-finite entry");
  auto node = make_node(ExprKind::scale, arg.in_dim(), arg.out_dim());
  node->data = std::move(diag);
  node->children = {std::move(arg)};
  return Expr(node);
}

Expr Expr::mul(Expr factor, Expr arg) {
  require(factor.in_dim() == arg.in_dim(), "mul: operands must share the input dim");
  require(factor.out_dim() == arg.out_dim(), "mul: factor output dim must equal the operand's output dim");
  auto node = make_node(ExprKind::mul, arg.in_dim(), arg.out_dim());
  node->children = {std::move(factor), std::move(arg)};
  return Expr(node);
}

Expr Expr::max(std::vector<Expr> args) {
  require_list(args, "max");
  auto node = make_node(ExprKind::max, args.front().in_dim(), args.front().out_dim());
  node->children = std::move(args);
  return Expr(node);
}

Expr Expr::min(std::vector<Expr> args) {
  require_list(args, "min");
  auto node = make_node(ExprKind::min, args.front().in_dim(), args.front().out_dim());
  node->children = std::move(args);
  return Expr(node);
}

Expr Expr::compose(Expr outer, Expr inner) {
  require(outer.in_dim() == inner.out_dim(), "compose: outer input dim " + std::to_string(outer.in_dim()) +
                                                 " does not match inner output dim " +
                                                 std::to_string(inner.out_dim()));
  auto node = make_node(ExprKind::compose, inner.in_dim(), outer.out_dim());
  node->children = {std::move(outer), std::move(inner)};
  return Expr(node);
}

Eigen::VectorXd eval(const Expr& e, const Eigen::VectorXd& x) {
  if (x.size() != e.in_dim())
    throw DimensionError("eval: point has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(e.in_dim()));
  const auto& n = e.node();
  switch (n.kind) {
    case ExprKind::var: return x;
    case ExprKind::constant: return n.data;
    case ExprKind::affine: return n.matrix * x + n.data;
    case ExprKind::smooth: return apply_smooth(n.fn, eval(n.children[0], x));
    case ExprKind::abs: return eval(n.children[0], x).cwiseAbs();
    case ExprKind::neg: return -eval(n.children[0], x);
    case ExprKind::add: {
      Eigen::VectorXd s = eval(n.children[0], x);
      for (std::size_t k = 1; k < n.children.size(); ++k) s += eval(n.children[k], x);
      return s;
    }
    case ExprKind::scale: return n.data.cwiseProduct(eval(n.children[0], x));
    case ExprKind::mul: return eval(n.children[0], x).cwiseProduct(eval(n.children[1], x));
    case ExprKind::max:
    case ExprKind::min: {
      Eigen::VectorXd s = eval(n.children[0], x);
      for (std::size_t k = 1; k < n.children.size(); ++k) {
        const Eigen::VectorXd v = eval(n.children[k], x);
        s = n.kind == ExprKind::max ? Eigen::VectorXd(s.cwiseMax(v)) : Eigen::VectorXd(s.cwiseMin(v));
      }
      return s;
    }
    case ExprKind::compose: return eval(n.children[0], eval(n.children[1], x));
  }
  throw std::logic_error("eval: unknown node");
}

namespace {

ValueAndQd propagate(const Expr& e, const Eigen::VectorXd& x, const CalcOptions& opts);

}  // namespace

ValueAndQd qd_with_value(const Expr& e, const Eigen::VectorXd& x, const CalcOptions& opts) {
  auto out = propagate(e, x, opts);
  out.qd = qd_reduce(out.qd);
  return out;
}

namespace {

ValueAndQd propagate(const Expr& e, const Eigen::VectorXd& x, const CalcOptions& opts) {
  if (x.size() != e.in_dim())
    throw DimensionError("qd_at: point has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(e.in_dim()));
  const auto& n = e.node();
  switch (n.kind) {
    case ExprKind::var:
      return {x, qd_linear(LinOp::Identity(x.size(), x.size()))};
    case ExprKind::constant:
      return {n.data, qd_zero(n.out_dim, n.in_dim)};
    case ExprKind::affine:
      return {n.matrix * x + n.data, qd_linear(n.matrix)};
    case ExprKind::smooth: {
      auto u = qd_with_value(n.children[0], x, opts);
      return {apply_smooth(n.fn, u.value), qd_scale(Orthomorphism(smooth_derivative(n.fn, u.value)), u.qd, opts)};
    }
    case ExprKind::abs: {
      // |u| = max(u, −u)
      auto u = qd_with_value(n.children[0], x, opts);
      const std::vector<QuasiDiff> qs{u.qd, qd_scale(Orthomorphism::constant(u.value.size(), -1.0), u.qd, opts)};
      const std::vector<Eigen::VectorXd> vals{u.value, -u.value};
      return {u.value.cwiseAbs(), qd_sup(qs, vals, opts)};
    }
    case ExprKind::neg: {
      auto u = qd_with_value(n.children[0], x, opts);
      return {-u.value, qd_scale(Orthomorphism::constant(u.value.size(), -1.0), u.qd, opts)};
    }
    case ExprKind::add: {
      std::vector<QuasiDiff> qs;
      Eigen::VectorXd s = Eigen::VectorXd::Zero(n.out_dim);
      for (const auto& c : n.children) {
        auto u = qd_with_value(c, x, opts);
        s += u.value;
        qs.push_back(std::move(u.qd));
      }
      return {s, qd_add(qs, opts)};
    }
    case ExprKind::scale: {
      auto u = qd_with_value(n.children[0], x, opts);
      return {n.data.cwiseProduct(u.value), qd_scale(Orthomorphism(n.data), u.qd, opts)};
    }
    case ExprKind::mul: {
      auto g = qd_with_value(n.children[0], x, opts);
      auto f = qd_with_value(n.children[1], x, opts);
      return {g.value.cwiseProduct(f.value), qd_product(g.qd, g.value, f.qd, f.value, opts)};
    }
    case ExprKind::max:
    case ExprKind::min: {
      std::vector<QuasiDiff> qs;
      std::vector<Eigen::VectorXd> vals;
      for (const auto& c : n.children) {
        auto u = qd_with_value(c, x, opts);
        vals.push_back(std::move(u.value));
        qs.push_back(std::move(u.qd));
      }
      Eigen::VectorXd s = vals.front();
      for (const auto& v : vals) s = n.kind == ExprKind::max ? Eigen::VectorXd(s.cwiseMax(v)) : Eigen::VectorXd(s.cwiseMin(v));
      return {s, n.kind == ExprKind::max ? qd_sup(qs, vals, opts) : qd_inf(qs, vals, opts)};
    }
    case ExprKind::compose: {
      auto inner = qd_with_value(n.children[1], x, opts);
      auto outer = qd_with_value(n.children[0], inner.value, opts);
      return {outer.value, qd_compose(outer.qd, inner.qd, std::nullopt, opts)};
    }
  }
  throw std::logic_error("qd_at: unknown node");
}

}  // namespace

QuasiDiff qd_at(const Expr& e, const Eigen::VectorXd& x, const CalcOptions& opts) {
  return qd_with_value(e, x, opts).qd;
}

DiniEstimate dini_fd(const Expr& e, const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                     const std::vector<double>& steps) {
  if (h.size() != e.in_dim()) throw DimensionError("dini_fd: direction length does not match input dim");
  if (steps.size() < 4) throw std::invalid_argument("dini_fd: at least four steps are required");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (!(steps[k] > 0.0) || (k > 0 && !(steps[k] < steps[k - 1])))
      throw std::invalid_argument("dini_fd: steps must be positive and strictly decreasing");
  }
  const Eigen::VectorXd f0 = eval(e, x);
  std::vector<Eigen::VectorXd> q;
  for (double a : steps) q.push_back((eval(e, x + a * h) - f0) / a);

  DiniEstimate out;
  out.spread = Eigen::VectorXd::Zero(f0.size());
  for (std::size_t k = 1; k < q.size(); ++k) out.spread = out.spread.cwiseMax((q[k] - q[k - 1]).cwiseAbs());
  // q(a) ≈ d + c·a: eliminate the linear term using the two smallest steps.
  const double a1 = steps[steps.size() - 2], a2 = steps.back();
  out.value = (a1 * q.back() - a2 * q[q.size() - 2]) / (a1 - a2);
  return out;
}

bool is_piecewise_linear(const Expr& e) {
  const auto& n = e.node();
  if (n.kind == ExprKind::smooth || n.kind == ExprKind::mul) return false;
  return std::all_of(n.children.begin(), n.children.end(), [](const Expr& c) { return is_piecewise_linear(c); });
}

Curvature curvature(const Expr& e) {
  const auto& n = e.node();
  std::vector<Curvature> cs;
  for (const auto& c : n.children) cs.push_back(curvature(c));
  switch (n.kind) {
    case ExprKind::var:
    case ExprKind::constant:
    case ExprKind::affine: return Curvature::affine;
    case ExprKind::smooth:
      if (n.fn == SmoothFn::sqr && cs[0] == Curvature::affine) return Curvature::convex;
      if (n.fn == SmoothFn::exp && (cs[0] == Curvature::affine || cs[0] == Curvature::convex))
        return Curvature::convex;
      return Curvature::unknown;
    case ExprKind::abs: return cs[0] == Curvature::affine ? Curvature::convex : Curvature::unknown;
    case ExprKind::neg: return flip(cs[0]);
    case ExprKind::add: return combine(cs);
    case ExprKind::scale: return scaled(n.data, cs[0]);
    case ExprKind::mul:
      if (n.children[0].kind() == ExprKind::constant) return scaled(n.children[0].node().data, cs[1]);
      return Curvature::unknown;
    case ExprKind::max: {
      const auto c = combine(cs);
      if (cs.size() == 1) return c;
      return (c == Curvature::affine || c == Curvature::convex) ? Curvature::convex : Curvature::unknown;
    }
    case ExprKind::min: {
      const auto c = combine(cs);
      if (cs.size() == 1) return c;
      return (c == Curvature::affine || c == Curvature::concave) ? Curvature::concave : Curvature::unknown;
    }
    case ExprKind::compose:
      if (cs[1] == Curvature::affine) return cs[0];
      if (n.children[0].kind() == ExprKind::var) return cs[1];
      return Curvature::unknown;
  }
  return Curvature::unknown;
}

double min_kink_gap(const Expr& e, const Eigen::VectorXd& x) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto& n = e.node();
  double gap = inf;
  switch (n.kind) {
    case ExprKind::abs: {
      const Eigen::VectorXd u = eval(n.children[0], x);
      for (Eigen::Index j = 0; j < u.size(); ++j)
        if (u(j) != 0.0) gap = std::min(gap, 2.0 * std::abs(u(j)));
      break;
    }
    case ExprKind::max:
    case ExprKind::min: {
      std::vector<Eigen::VectorXd> vals;
      for (const auto& c : n.children) vals.push_back(eval(c, x));
      for (std::size_t a = 0; a < vals.size(); ++a)
        for (std::size_t b = a + 1; b < vals.size(); ++b)
          for (Eigen::Index j = 0; j < vals[a].size(); ++j) {
            const double d = std::abs(vals[a](j) - vals[b](j));
            if (d != 0.0) gap = std::min(gap, d);
          }
      break;
    }
    case ExprKind::compose:
      return std::min(min_kink_gap(n.children[1], x), min_kink_gap(n.children[0], eval(n.children[1], x)));
    default:
      break;
  }
  for (const auto& c : n.children) gap = std::min(gap, min_kink_gap(c, x));
  return gap;
}

std::size_t depth(const Expr& e) {
  std::size_t d = 0;
  for (const auto& c : e.children()) d = std::max(d, depth(c));
  return d + 1;
}

Expr expr_from_json(const json& j, Eigen::Index n) {
  if (!j.is_object()) throw SchemaError("expression: expected an object");
  const json& op_field = field(j, "op");
  if (!op_field.is_string()) throw SchemaError("expression: 'op' must be a string");
  const auto op = op_field.get<std::string>();
  if (op == "var") {
    only_fields(j, {"op"});
    return Expr::var(n);
  }
  if (op == "const") {
    only_fields(j, {"op", "value"});
    return Expr::constant(n, vector_of(field(j, "value")));
  }
  if (op == "affine") {
    only_fields(j, {"op", "a", "b"});
    LinOp a = matrix_of(field(j, "a"));
    if (a.cols() != n)
      throw DimensionError("affine: matrix has " + std::to_string(a.cols()) + " columns, expected " +
                           std::to_string(n));
    return Expr::affine(std::move(a), vector_of(field(j, "b")));
  }
  if (op == "smooth") {
    only_fields(j, {"op", "fn", "arg"});
    return Expr::smooth(smooth_from(field(j, "fn")), expr_from_json(field(j, "arg"), n));
  }
  if (op == "abs") {
    only_fields(j, {"op", "arg"});
    return Expr::abs(expr_from_json(field(j, "arg"), n));
  }
  if (op == "neg") {
    only_fields(j, {"op", "arg"});
    return Expr::neg(expr_from_json(field(j, "arg"), n));
  }
  if (op == "add" || op == "max" || op == "min") {
    only_fields(j, {"op", "args"});
    auto args = list_of(field(j, "args"), n);
    if (op == "add") return Expr::add(std::move(args));
    if (op == "max") return Expr::max(std::move(args));
    return Expr::min(std::move(args));
  }
  if (op == "scale") {
    only_fields(j, {"op", "diag", "arg"});
    return Expr::scale(vector_of(field(j, "diag")), expr_from_json(field(j, "arg"), n));
  }
  if (op == "mul") {
    only_fields(j, {"op", "factor", "arg"});
    return Expr::mul(expr_from_json(field(j, "factor"), n), expr_from_json(field(j, "arg"), n));
  }
  if (op == "compose") {
    only_fields(j, {"op", "outer", "inner"});
    Expr inner = expr_from_json(field(j, "inner"), n);
    Expr outer = expr_from_json(field(j, "outer"), inner.out_dim());
    return Expr::compose(std::move(outer), std::move(inner));
  }
  throw SchemaError("expression: unknown op '" + op + "'");
}

json expr_to_json(const Expr& e) {
  const auto& n = e.node();
  json j;
  j["op"] = to_string(n.kind);
  switch (n.kind) {
    case ExprKind::var: break;
    case ExprKind::constant: j["value"] = json_of(n.data); break;
    case ExprKind::affine:
      j["a"] = json_of(n.matrix);
      j["b"] = json_of(n.data);
      break;
    case ExprKind::smooth:
      j["fn"] = to_string(n.fn);
      j["arg"] = expr_to_json(n.children[0]);
      break;
    case ExprKind::abs:
    case ExprKind::neg: j["arg"] = expr_to_json(n.children[0]); break;
    case ExprKind::add:
    case ExprKind::max:
    case ExprKind::min: {
      json args = json::array();
      for (const auto& c : n.children) args.push_back(expr_to_json(c));
      j["args"] = std::move(args);
      break;
    }
    case ExprKind::scale:
      j["diag"] = json_of(n.data);
      j["arg"] = expr_to_json(n.children[0]);
      break;
    case ExprKind::mul:
      j["factor"] = expr_to_json(n.children[0]);
      j["arg"] = expr_to_json(n.children[1]);
      break;
    case ExprKind::compose:
      j["outer"] = expr_to_json(n.children[0]);
      j["inner"] = expr_to_json(n.children[1]);
      break;
  }
  return j;
}

}  // namespace qdc
