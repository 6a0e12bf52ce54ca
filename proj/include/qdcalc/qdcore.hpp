#pragma once

// Quasidifferentials of maps ℝⁿ → ℝᵐ (coordinatewise order on ℝᵐ) and the
// calculus rules that propagate them: scaling by orthomorphisms, sums,
// pointwise sup/inf, products and composition.
//
// A QuasiDiff [subd, supd] stands for the directional derivative
//     f′(x₀)h = sup_{S ∈ subd} S h − sup_{T ∈ supd} T h,
// both suprema taken coordinatewise. Many pairs represent the same f′(x₀);
// two QuasiDiffs are compared only through their support functions.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qdcalc/geometry.hpp"

namespace qdc {

/// Multiplication operator on ℝᵐ by a diagonal.
class Orthomorphism {
 public:
  explicit Orthomorphism(Eigen::VectorXd diag);
  static Orthomorphism constant(Eigen::Index m, double value);

  Eigen::Index size() const { return diag_.size(); }
  const Eigen::VectorXd& diag() const { return diag_; }
  Eigen::VectorXd positive_part() const { return diag_.cwiseMax(0.0); }
  Eigen::VectorXd negative_part() const { return (-diag_).cwiseMax(0.0); }

 private:
  Eigen::VectorXd diag_;
};

/// Band projection on ℝᵐ: a 0/1 coordinate mask.
class BandMask {
 public:
  explicit BandMask(std::vector<bool> mask) : mask_(std::move(mask)) {}
  static BandMask full(std::size_t m) { return BandMask(std::vector<bool>(m, true)); }

  std::size_t size() const { return mask_.size(); }
  bool operator[](std::size_t j) const { return mask_[j]; }
  bool any() const;
  Eigen::VectorXd as_diag() const;
  /// All nonzero masks of length m, in increasing bit order.
  static std::vector<BandMask> all_nonzero(std::size_t m);

 private:
  std::vector<bool> mask_;
};

class QuasiDiff {
 public:
  QuasiDiff(OperatorPolytope subd, OperatorPolytope supd);

  Eigen::Index rows() const { return subd_.rows(); }
  Eigen::Index cols() const { return subd_.cols(); }
  const OperatorPolytope& subd() const { return subd_; }
  const OperatorPolytope& supd() const { return supd_; }

 private:
  OperatorPolytope subd_;
  OperatorPolytope supd_;
};

struct CalcOptions {
  Tolerance tol{};
  double eps_active = 1e-9;                  // tie threshold for max/min operands
  std::size_t max_selections = 1u << 14;     // cap on enumerated active-weight systems
  std::size_t max_generators = 1u << 18;     // cap on generators of a stacked max/min result
  Eigen::Index max_compose_dim = 8;          // cap on the inner dimension in qd_compose
};

/// One extreme point of Γ/Δ: coordinate j takes operand choice[j].
struct ActiveWeightSelection {
  std::vector<std::size_t> choice;
};

enum class Extremum { max, min };

/// Operands attaining the coordinatewise max (or min) of `values`, per coordinate.
std::vector<std::vector<std::size_t>> active_indices(std::span<const Eigen::VectorXd> values, Extremum kind,
                                                     double eps_active);

/// Enumerates every selection drawn from `active` (lexicographic, first coordinate slowest).
std::vector<ActiveWeightSelection> enumerate_selections(const std::vector<std::vector<std::size_t>>& active,
                                                        std::size_t cap);

QuasiDiff qd_linear(const LinOp& t);
QuasiDiff qd_zero(Eigen::Index m, Eigen::Index n);

QuasiDiff qd_add(std::span<const QuasiDiff> qs, const CalcOptions& opts = {});
QuasiDiff qd_add(const QuasiDiff& a, const QuasiDiff& b, const CalcOptions& opts = {});

/// 𝒟(αl) = [α⁺ subd + α⁻ supd, α⁻ subd + α⁺ supd].
QuasiDiff qd_scale(const Orthomorphism& alpha, const QuasiDiff& q, const CalcOptions& opts = {});

/// Pointwise maximum of f₁…f_r given their quasidifferentials and values at x₀.
QuasiDiff qd_sup(std::span<const QuasiDiff> qs, std::span<const Eigen::VectorXd> values,
                 const CalcOptions& opts = {});
/// Pointwise minimum, dual to qd_sup.
QuasiDiff qd_inf(std::span<const QuasiDiff> qs, std::span<const Eigen::VectorXd> values,
                 const CalcOptions& opts = {});

/// x ↦ g(x) f(x) with g diagonal-valued (g_j multiplies f_j).
QuasiDiff qd_product(const QuasiDiff& qg, const Eigen::VectorXd& g0, const QuasiDiff& qf,
                     const Eigen::VectorXd& f0, const CalcOptions& opts = {});

/// Operator interval [Λ₁, Λ₂] enclosing the outer quasidifferential in qd_compose.
struct CompositionBounds {
  LinOp lower;
  LinOp upper;
};

/// Entrywise min/max over all generators of qg.subd ∪ qg.supd.
CompositionBounds default_bounds(const QuasiDiff& qg);

/// Quasidifferential of g∘f at x₀ from 𝒟g(f(x₀)) (l×m) and 𝒟f(x₀) (m×n).
QuasiDiff qd_compose(const QuasiDiff& qg, const QuasiDiff& qf, const std::optional<CompositionBounds>& bounds = {},
                     const CalcOptions& opts = {});

/// Equivalent pair with a singleton side shifted to zero: [P, {T}] ↦ [P − T, {0}]
/// and [{S}, Q] ↦ [{0}, Q − S]. Other pairs are returned unchanged.
QuasiDiff qd_reduce(const QuasiDiff& q);

/// f′(x₀)h = support(subd, h) − support(supd, h).
Eigen::VectorXd qd_eval_dir(const QuasiDiff& q, const Eigen::VectorXd& h);

}  // namespace qdc
