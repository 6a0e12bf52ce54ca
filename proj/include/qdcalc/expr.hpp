#pragma once

// Expression trees for maps ℝⁿ → ℝᵐ built from affine pieces, coordinatewise
// smooth primitives, abs, sums, diagonal scalings, products, max/min and
// composition. Trees are immutable and shared; every builder validates dims.

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "qdcalc/qdcore.hpp"

namespace qdc {

enum class ExprKind { var, constant, affine, smooth, abs, neg, add, scale, mul, max, min, compose };
enum class SmoothFn { sin, cos, exp, sqr, tanh };

const char* to_string(ExprKind k);
const char* to_string(SmoothFn f);

class Expr {
 public:
  struct Node;

  ExprKind kind() const;
  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;
  const std::vector<Expr>& children() const;
  const Node& node() const { return *node_; }

  // Builders. Each throws DimensionError on inconsistent input.
  static Expr var(Eigen::Index n);
  static Expr constant(Eigen::Index n, Eigen::VectorXd value);
  static Expr affine(LinOp a, Eigen::VectorXd b);
  static Expr smooth(SmoothFn fn, Expr arg);
  static Expr abs(Expr arg);
  static Expr neg(Expr arg);
  static Expr add(std::vector<Expr> args);
  static Expr scale(Eigen::VectorXd diag, Expr arg);
  /// Coordinatewise product factor_j(x) · arg_j(x).
  static Expr mul(Expr factor, Expr arg);
  static Expr max(std::vector<Expr> args);
  static Expr min(std::vector<Expr> args);
  /// outer ∘ inner; outer's input dim is inner's output dim.
  static Expr compose(Expr outer, Expr inner);

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  ExprKind kind;
  Eigen::Index in_dim;
  Eigen::Index out_dim;
  std::vector<Expr> children;
  LinOp matrix;          // affine
  Eigen::VectorXd data;  // constant value, affine offset, scale diagonal
  SmoothFn fn = SmoothFn::sin;
};

Eigen::VectorXd eval(const Expr& e, const Eigen::VectorXd& x);

struct ValueAndQd {
  Eigen::VectorXd value;
  QuasiDiff qd;
};

/// Forward propagation of (value, quasidifferential) through the tree.
ValueAndQd qd_with_value(const Expr& e, const Eigen::VectorXd& x, const CalcOptions& opts = {});
QuasiDiff qd_at(const Expr& e, const Eigen::VectorXd& x, const CalcOptions& opts = {});

struct DiniEstimate {
  Eigen::VectorXd value;   // extrapolated one-sided derivative
  Eigen::VectorXd spread;  // max successive difference of the raw quotients
};

/// Forward-difference estimate of the one-sided derivative along h.
/// Quotients at consecutive steps are Richardson-extrapolated; the last pair is reported.
DiniEstimate dini_fd(const Expr& e, const Eigen::VectorXd& x, const Eigen::VectorXd& h,
                     const std::vector<double>& steps = {1e-2, 1e-3, 1e-4, 1e-5});

/// No smooth primitives and no products: the map is piecewise affine.
bool is_piecewise_linear(const Expr& e);

enum class Curvature { affine, convex, concave, unknown };
/// Conservative syntactic curvature of every coordinate.
Curvature curvature(const Expr& e);

/// Smallest positive distance between competing operand values at a max/min/abs
/// node (a gauge of how close x sits to a kink it is not on). +inf if none.
double min_kink_gap(const Expr& e, const Eigen::VectorXd& x);

std::size_t depth(const Expr& e);

/// Loads an expression acting on ℝⁿ; throws SchemaError or DimensionError.
Expr expr_from_json(const nlohmann::json& j, Eigen::Index n);
nlohmann::json expr_to_json(const Expr& e);

}  // namespace qdc
