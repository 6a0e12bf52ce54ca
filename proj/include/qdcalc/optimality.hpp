#pragma once

// Necessary optimality conditions for vector programs with objectives in ℝᵐ
// (coordinatewise order). Every check is decided row by row: the support sets
// in play are products of their coordinate rows, so a band condition splits
// into one scalar condition per coordinate.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qdcalc/qdcore.hpp"

namespace qdc {

struct CheckOptions {
  Tolerance tol{};
  double eps_active = 1e-9;       // |g_i(x₀)| at or below this counts as active
  std::size_t max_pairs = 1u << 14;  // cap on (s, S) generator tuples per coordinate
};

/// Quasidifferentials of the constraints g_l(x) ≤ 0 at x₀ and an optional cone of
/// feasible directions K ⊂ ℝⁿ for a set constraint (C assumed K-regular at x₀).
struct ConstraintSystem {
  std::vector<QuasiDiff> qds;           // one per constraint map, k_l × n
  std::vector<Eigen::VectorXd> values;  // g_l(x₀), length k_l
  std::optional<PolyCone> set_cone;     // generated by direction vectors (n × 1)

  /// Number of scalar constraints after splitting every map into its rows.
  Eigen::Index scalar_count() const;
};

struct Witness {
  std::size_t point = 0;          // index of the base point (generalized checks)
  Eigen::Index coordinate = 0;    // objective coordinate j that can be decreased
  std::size_t generator = 0;      // index of the violating generator of supd f
  LinOp generator_row;            // its row j (1 × n)
  Eigen::VectorXd direction;      // h with f′(x₀)h_j < 0
  double rate = 0.0;              // f′(x₀)h_j
};

/// One feasible system for a fixed coordinate and generator tuple:
/// s = Σ wₖ Pₖ + Σ_i γ_i (v_i − S_i) + λ with v_i ∈ subd g_i and λ ∈ N(C, x₀).
struct PairCertificate {
  std::size_t point = 0;
  Eigen::Index coordinate = 0;
  LinOp s;                    // generator row of supd f (1 × n)
  std::vector<LinOp> S;       // chosen generator rows of supd g_i, one per active constraint
  Eigen::VectorXd weights;    // convex weights over the rows of subd f
  Eigen::VectorXd gamma;      // one multiplier per scalar constraint; zero off the active set
  Eigen::VectorXd lambda;     // normal-cone element in ℝⁿ
  double residual = 0.0;
};

struct MultiplierCertificate {
  std::vector<PairCertificate> pairs;
};

struct Verdict {
  bool holds = false;
  std::optional<Witness> witness;
  std::optional<MultiplierCertificate> certificate;
  std::vector<std::string> notes;
};

/// supd f ⊆ subd f, row by row.
Verdict check_unconstrained(const QuasiDiff& qf, const CheckOptions& opts = {});

/// Inequality constraints only; `cs.set_cone` is ignored.
Verdict check_inequality_constrained(const QuasiDiff& qf, const ConstraintSystem& cs,
                                     const CheckOptions& opts = {});

/// supd f ⊆ subd f + N(C, x₀) with N the polar of K.
Verdict check_set_constrained(const QuasiDiff& qf, const PolyCone& k, const CheckOptions& opts = {});

/// Inequality constraints and the set constraint together.
Verdict check_combined(const QuasiDiff& qf, const ConstraintSystem& cs, const CheckOptions& opts = {});

/// Generalized optimum of (C, f) at a finite point set. `cones`, when given, holds one
/// optional feasible-direction cone per point.
Verdict check_generalized(std::span<const QuasiDiff> qfs, std::span<const Eigen::VectorXd> values,
                          const std::vector<std::optional<PolyCone>>& cones = {}, const CheckOptions& opts = {});

/// Generalized optimum of (C, g, f): per coordinate, some point must satisfy the
/// constrained condition for all of its generator tuples.
Verdict check_generalized_constrained(std::span<const QuasiDiff> qfs, std::span<const ConstraintSystem> systems,
                                      const CheckOptions& opts = {});

/// Scalar objective: 0 ∈ (subd f − s) + cone(subd g − S) for all pairs, every
/// constraint contributing whether active or not.
Verdict check_slackened(const QuasiDiff& qf, const ConstraintSystem& cs, const CheckOptions& opts = {});

struct QuasiregularityEntry {
  LinOp t;                 // sampled T : ℝᵏ → ℝᵐ
  std::vector<bool> mask;  // coordinate projection π on ℝᵐ
  bool intersects = false;
};

struct QuasiregularityReport {
  bool regular = true;  // no sampled (T, π) gave intersecting images
  std::vector<QuasiregularityEntry> entries;
};

/// Tests πT∘supd g ∩ πT∘subd g = ∅ over a finite sample of T and all nonzero masks π.
/// The default sample broadcasts each scalar constraint to every objective coordinate.
QuasiregularityReport quasiregularity_diagnostic(std::span<const QuasiDiff> qgs, Eigen::Index m,
                                                 const std::optional<std::vector<LinOp>>& t_sample = {},
                                                 const Tolerance& tol = {});

}  // namespace qdc
