#pragma once

// Convex geometry over spaces of m×n operators. Polytopes and cones are kept
// in V-representation (generator lists); every membership question is a
// small LP solved by qdc::lp.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qdc {

/// A linear operator ℝⁿ → ℝᵐ, stored as a dense m×n matrix.
using LinOp = Eigen::MatrixXd;

struct Tolerance {
  double eps_geom = 1e-9;   // max-norm slack accepted by membership LPs
  double eps_prune = 1e-9;  // redundancy slack used when pruning generators
};

/// Finite generator set of m×n operators. The represented set is the convex hull.
class OperatorPolytope {
 public:
  explicit OperatorPolytope(std::vector<LinOp> generators);

  static OperatorPolytope singleton(LinOp op);
  static OperatorPolytope zero(Eigen::Index rows, Eigen::Index cols);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  std::size_t size() const { return generators_.size(); }
  const std::vector<LinOp>& generators() const { return generators_; }
  const LinOp& operator[](std::size_t i) const { return generators_[i]; }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<LinOp> generators_;
};

/// Finitely generated convex cone of m×n operators. No generators means {0}.
class PolyCone {
 public:
  PolyCone(Eigen::Index rows, Eigen::Index cols, std::vector<LinOp> generators = {});

  /// Cone in ℝⁿ spanned by direction vectors, stored as n×1 operators.
  static PolyCone from_directions(Eigen::Index n, const std::vector<Eigen::VectorXd>& dirs);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  std::size_t size() const { return generators_.size(); }
  bool trivial() const { return generators_.empty(); }
  const std::vector<LinOp>& generators() const { return generators_; }

 private:
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<LinOp> generators_;
};

struct SupportValue {
  Eigen::VectorXd value;            // value_j = max_S (S h)_j
  std::vector<std::size_t> argmax;  // maximizing generator per coordinate
};

/// Componentwise support function sup_{S ∈ conv P} S h. Ties go to the lowest index.
SupportValue support(const OperatorPolytope& p, const Eigen::VectorXd& h);

/// Drops generators lying in the hull of the rest (and near-duplicates).
OperatorPolytope prune(const OperatorPolytope& p, const Tolerance& tol = {});

OperatorPolytope minkowski_sum(const OperatorPolytope& p, const OperatorPolytope& q,
                               const Tolerance& tol = {});
OperatorPolytope minkowski_sum(std::span<const OperatorPolytope> ps, const Tolerance& tol = {});

/// conv(⋃ conv Pᵢ).
OperatorPolytope convex_union(std::span<const OperatorPolytope> ps, const Tolerance& tol = {});

/// diag(d)·P, i.e. row j of every generator scaled by d_j.
OperatorPolytope row_scale(const OperatorPolytope& p, const Eigen::VectorXd& d,
                           const Tolerance& tol = {});

/// Row j of P as a polytope of 1×n operators.
OperatorPolytope row_polytope(const OperatorPolytope& p, Eigen::Index j, const Tolerance& tol = {});

/// Stacks row polytopes (each 1×n) into their Cartesian product, an m×n polytope.
/// Throws UnsupportedDimension when the product would exceed `cap` generators.
OperatorPolytope row_product(std::span<const OperatorPolytope> rows, std::size_t cap);

bool contains_point(const OperatorPolytope& p, const LinOp& t, const Tolerance& tol = {});

struct SubsetResult {
  bool holds = true;
  std::optional<std::size_t> witness_index;
  std::optional<LinOp> witness;
};

/// conv P ⊆ conv Q, generator by generator.
SubsetResult subset(const OperatorPolytope& p, const OperatorPolytope& q, const Tolerance& tol = {});

/// Certificate for T = Σ λᵢ Pᵢ + Σ_k Σ_j μ_kj K_kj.
struct ConeSumCertificate {
  Eigen::VectorXd weights;                    // convex weights over P's generators
  std::vector<Eigen::VectorXd> cone_coeffs;   // one nonnegative vector per cone
  double residual = 0.0;                      // max-norm residual of the identity
};

struct ConeSumResult {
  bool feasible = false;
  std::optional<ConeSumCertificate> certificate;
  double residual = 0.0;
};

/// T ∈ conv P + Σ Kᵢ, decided by LP within eps_geom.
ConeSumResult contains_in_sum_with_cone(const LinOp& t, const OperatorPolytope& p,
                                        std::span<const PolyCone> cones, const Tolerance& tol = {});

/// If T ∉ conv P + Σ Kᵢ, a unit (max-norm) H with ⟨H, y − T⟩ ≥ margin > 0 on the
/// whole set; ⟨·,·⟩ is the Frobenius product.
struct Separation {
  LinOp direction;
  double margin = 0.0;
};
std::optional<Separation> separate(const LinOp& t, const OperatorPolytope& p,
                                   std::span<const PolyCone> cones, const Tolerance& tol = {});

/// conv P ∩ conv Q ≠ ∅.
bool intersects(const OperatorPolytope& p, const OperatorPolytope& q, const Tolerance& tol = {});

struct NearestPoint {
  LinOp point;
  double distance = 0.0;
  Eigen::VectorXd weights;
};

/// Frobenius projection of T onto conv P (Wolfe's minimum-norm-point method).
NearestPoint nearest_point(const OperatorPolytope& p, const LinOp& t, const Tolerance& tol = {});

/// Generators of {v ∈ ℝⁿ : ⟨v, k⟩ ≤ 0 for all k ∈ K} for K spanned by `dirs`.
std::vector<Eigen::VectorXd> polar_directions(Eigen::Index n, const std::vector<Eigen::VectorXd>& dirs,
                                              const Tolerance& tol = {});

/// {T ∈ L(ℝⁿ,ℝᵐ) : T k ≤ 0 for k ∈ K}: operators whose rows lie in the vector polar.
/// K must come from PolyCone::from_directions. Throws UnsupportedDimension for n > 8.
PolyCone polar_cone(const PolyCone& k, Eigen::Index m, const Tolerance& tol = {});

inline constexpr Eigen::Index kMaxPolarDim = 8;

}  // namespace qdc
