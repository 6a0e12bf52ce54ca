#include "qdcalc/qdcore.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qdcalc/errors.hpp"

namespace qdc {
namespace {

void require_dims(const QuasiDiff& a, const QuasiDiff& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": quasidifferential dims " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

QuasiDiff qd_extremum(std::span<const QuasiDiff> qs, std::span<const Eigen::VectorXd> values, Extremum kind,
                      const CalcOptions& opts) {
  const char* name = kind == Extremum::max ? "qd_sup" : "qd_inf";
  if (qs.empty()) throw DimensionError(std::string(name) + ": needs at least one operand");
  if (values.size() != qs.size()) throw DimensionError(std::string(name) + ": one value per operand required");
  for (std::size_t k = 0; k < qs.size(); ++k) {
    require_dims(qs.front(), qs[k], name);
    if (values[k].size() != qs.front().rows()) throw DimensionError(std::string(name) + ": value length mismatch");
  }
  if (qs.size() == 1) return qs.front();

  // For sup the subdifferential is assembled from selections and the
  // superdifferential is the plain sum; inf swaps the two roles.
  auto primary = [&](const QuasiDiff& q) -> const OperatorPolytope& {
    return kind == Extremum::max ? q.subd() : q.supd();
  };
  auto secondary = [&](const QuasiDiff& q) -> const OperatorPolytope& {
    return kind == Extremum::max ? q.supd() : q.subd();
  };

  std::vector<OperatorPolytope> seconds;
  seconds.reserve(qs.size());
  for (const auto& q : qs) seconds.push_back(secondary(q));
  const OperatorPolytope secondary_total = minkowski_sum(seconds, opts.tol);

  // The selections act coordinate by coordinate, so row j of the assembled set
  // is the hull of row j of X_k = primary(f_k) + Σ_{l≠k} secondary(f_l) over
  // the operands active in j; the rows are then stacked.
  const auto active = active_indices(values, kind, opts.eps_active);
  const auto m = qs.front().rows();
  std::vector<OperatorPolytope> rows;
  rows.reserve(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    std::vector<OperatorPolytope> candidates;
    for (std::size_t k : active[static_cast<std::size_t>(j)]) {
      std::vector<OperatorPolytope> terms{row_polytope(primary(qs[k]), j, opts.tol)};
      for (std::size_t l = 0; l < qs.size(); ++l) {
        if (l != k) terms.push_back(row_polytope(secondary(qs[l]), j, opts.tol));
      }
      candidates.push_back(minkowski_sum(terms, opts.tol));
    }
    rows.push_back(convex_union(candidates, opts.tol));
  }
  OperatorPolytope assembled = row_product(rows, opts.max_generators);
  if (kind == Extremum::max) return QuasiDiff(std::move(assembled), secondary_total);
  return QuasiDiff(secondary_total, std::move(assembled));
}

// {a sᵀ : s ∈ rows} for a column a ∈ ℝˡ and a polytope of 1×n rows.
OperatorPolytope outer_products(const Eigen::VectorXd& a, const OperatorPolytope& rows, const Tolerance& tol) {
  std::vector<LinOp> gens;
  gens.reserve(rows.size());
  for (const auto& r : rows.generators()) gens.emplace_back(a * r);
  return prune(OperatorPolytope(std::move(gens)), tol);
}

}  // namespace

// ---------------------------------------------------------------------------

Orthomorphism::Orthomorphism(Eigen::VectorXd diag) : diag_(std::move(diag)) {
  if (diag_.size() < 1) throw DimensionError("Orthomorphism: empty diagonal");
  if (!diag_.allFinite()) throw std::invalid_argument("Orthomorphism: non-finite diagonal entry");
}

Orthomorphism Orthomorphism::constant(Eigen::Index m, double value) {
  return Orthomorphism(Eigen::VectorXd::Constant(m, value));
}

bool BandMask::any() const { return std::any_of(mask_.begin(), mask_.end(), [](bool b) { return b; }); }

Eigen::VectorXd BandMask::as_diag() const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(mask_.size()));
  for (std::size_t j = 0; j < mask_.size(); ++j) d(static_cast<Eigen::Index>(j)) = mask_[j] ? 1.0 : 0.0;
  return d;
}

std::vector<BandMask> BandMask::all_nonzero(std::size_t m) {
  if (m > 16) throw UnsupportedDimension("BandMask::all_nonzero: too many coordinates");
  std::vector<BandMask> out;
  for (std::size_t bits = 1; bits < (std::size_t{1} << m); ++bits) {
    std::vector<bool> mask(m);
    for (std::size_t j = 0; j < m; ++j) mask[j] = (bits >> j) & 1u;
    out.emplace_back(std::move(mask));
  }
  return out;
}

QuasiDiff::QuasiDiff(OperatorPolytope subd, OperatorPolytope supd) : subd_(std::move(subd)), supd_(std::move(supd)) {
  if (subd_.rows() != supd_.rows() || subd_.cols() != supd_.cols()) {
    throw DimensionError("QuasiDiff: subdifferential and superdifferential dims differ");
  }
}

std::vector<std::vector<std::size_t>> active_indices(std::span<const Eigen::VectorXd> values, Extremum kind,
                                                     double eps_active) {
  if (values.empty()) return {};
  const Eigen::Index m = values.front().size();
  std::vector<std::vector<std::size_t>> active(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j) {
    double extreme = values.front()(j);
    for (const auto& v : values) extreme = kind == Extremum::max ? std::max(extreme, v(j)) : std::min(extreme, v(j));
    for (std::size_t k = 0; k < values.size(); ++k) {
      if (std::abs(values[k](j) - extreme) <= eps_active) active[static_cast<std::size_t>(j)].push_back(k);
    }
  }
  return active;
}

std::vector<ActiveWeightSelection> enumerate_selections(const std::vector<std::vector<std::size_t>>& active,
                                                        std::size_t cap) {
  std::size_t total = 1;
  for (const auto& a : active) {
    if (a.empty()) throw DimensionError("enumerate_selections: coordinate without an active operand");
    if (total > cap / a.size()) {
      throw UnsupportedDimension("enumerate_selections: more than " + std::to_string(cap) + " active-weight systems");
    }
    total *= a.size();
  }
  std::vector<ActiveWeightSelection> out;
  out.reserve(total);
  std::vector<std::size_t> cursor(active.size(), 0);
  for (std::size_t t = 0; t < total; ++t) {
    ActiveWeightSelection sel;
    sel.choice.resize(active.size());
    for (std::size_t j = 0; j < active.size(); ++j) sel.choice[j] = active[j][cursor[j]];
    out.push_back(std::move(sel));
    for (std::size_t j = active.size(); j-- > 0;) {
      if (++cursor[j] < active[j].size()) break;
      cursor[j] = 0;
    }
  }
  return out;
}

QuasiDiff qd_linear(const LinOp& t) {
  return QuasiDiff(OperatorPolytope::singleton(t), OperatorPolytope::zero(t.rows(), t.cols()));
}

QuasiDiff qd_zero(Eigen::Index m, Eigen::Index n) {
  return QuasiDiff(OperatorPolytope::zero(m, n), OperatorPolytope::zero(m, n));
}

QuasiDiff qd_add(std::span<const QuasiDiff> qs, const CalcOptions& opts) {
  if (qs.empty()) throw DimensionError("qd_add: needs at least one operand");
  std::vector<OperatorPolytope> subs, sups;
  for (const auto& q : qs) {
    require_dims(qs.front(), q, "qd_add");
    subs.push_back(q.subd());
    sups.push_back(q.supd());
  }
  return QuasiDiff(minkowski_sum(subs, opts.tol), minkowski_sum(sups, opts.tol));
}

QuasiDiff qd_add(const QuasiDiff& a, const QuasiDiff& b, const CalcOptions& opts) {
  const std::vector<QuasiDiff> both{a, b};
  return qd_add(both, opts);
}

QuasiDiff qd_scale(const Orthomorphism& alpha, const QuasiDiff& q, const CalcOptions& opts) {
  if (alpha.size() != q.rows()) throw DimensionError("qd_scale: orthomorphism size does not match output dim");
  const Eigen::VectorXd pos = alpha.positive_part();
  const Eigen::VectorXd neg = alpha.negative_part();
  OperatorPolytope sub = minkowski_sum(row_scale(q.subd(), pos, opts.tol), row_scale(q.supd(), neg, opts.tol), opts.tol);
  OperatorPolytope sup = minkowski_sum(row_scale(q.subd(), neg, opts.tol), row_scale(q.supd(), pos, opts.tol), opts.tol);
  return QuasiDiff(std::move(sub), std::move(sup));
}

QuasiDiff qd_sup(std::span<const QuasiDiff> qs, std::span<const Eigen::VectorXd> values, const CalcOptions& opts) {
  return qd_extremum(qs, values, Extremum::max, opts);
}

QuasiDiff qd_inf(std::span<const QuasiDiff> qs, std::span<const Eigen::VectorXd> values, const CalcOptions& opts) {
  return qd_extremum(qs, values, Extremum::min, opts);
}

QuasiDiff qd_product(const QuasiDiff& qg, const Eigen::VectorXd& g0, const QuasiDiff& qf, const Eigen::VectorXd& f0,
                     const CalcOptions& opts) {
  require_dims(qg, qf, "qd_product");
  if (g0.size() != qf.rows() || f0.size() != qf.rows()) throw DimensionError("qd_product: value length mismatch");
  const Eigen::VectorXd gp = g0.cwiseMax(0.0), gm = (-g0).cwiseMax(0.0);
  const Eigen::VectorXd fp = f0.cwiseMax(0.0), fm = (-f0).cwiseMax(0.0);
  const auto& t = opts.tol;
  const std::vector<OperatorPolytope> sub{row_scale(qf.subd(), gp, t), row_scale(qf.supd(), gm, t),
                                          row_scale(qg.subd(), fp, t), row_scale(qg.supd(), fm, t)};
  const std::vector<OperatorPolytope> sup{row_scale(qf.supd(), gp, t), row_scale(qf.subd(), gm, t),
                                          row_scale(qg.supd(), fp, t), row_scale(qg.subd(), fm, t)};
  return QuasiDiff(minkowski_sum(sub, t), minkowski_sum(sup, t));
}

CompositionBounds default_bounds(const QuasiDiff& qg) {
  LinOp lo = qg.subd()[0], hi = qg.subd()[0];
  for (const auto* p : {&qg.subd(), &qg.supd()}) {
    for (const auto& c : p->generators()) {
      lo = lo.cwiseMin(c);
      hi = hi.cwiseMax(c);
    }
  }
  return {lo, hi};
}

QuasiDiff qd_compose(const QuasiDiff& qg, const QuasiDiff& qf, const std::optional<CompositionBounds>& bounds,
                     const CalcOptions& opts) {
  if (qg.cols() != qf.rows()) {
    throw DimensionError("qd_compose: outer map expects input dim " + std::to_string(qg.cols()) + ", inner map has " +
                         std::to_string(qf.rows()) + " outputs");
  }
  const Eigen::Index m = qf.rows();
  if (m > opts.max_compose_dim) {
    throw UnsupportedDimension("qd_compose: inner output dim " + std::to_string(m) + " exceeds the cap of " +
                               std::to_string(opts.max_compose_dim));
  }
  const CompositionBounds box = bounds ? *bounds : default_bounds(qg);
  if (box.lower.rows() != qg.rows() || box.lower.cols() != m || box.upper.rows() != qg.rows() ||
      box.upper.cols() != m) {
    throw DimensionError("qd_compose: bound operators have the wrong shape");
  }
  constexpr double slack = 1e-12;
  for (const auto* p : {&qg.subd(), &qg.supd()}) {
    for (const auto& c : p->generators()) {
      if (((c - box.lower).array() < -slack).any() || ((box.upper - c).array() < -slack).any()) {
        throw BoundViolation("qd_compose: an outer generator lies outside [lower, upper]");
      }
    }
  }

  std::vector<OperatorPolytope> sub_rows, sup_rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    sub_rows.push_back(row_polytope(qf.subd(), i, opts.tol));
    sup_rows.push_back(row_polytope(qf.supd(), i, opts.tol));
  }

  // ∂P_C for P_C(h) = (C − Λ₁) p(h) + (Λ₂ − C) q(h): columns of the two
  // nonnegative weights act on independent per-row selections of 𝒟f.
  auto support_set_of = [&](const LinOp& c) {
    const LinOp a = (c - box.lower).cwiseMax(0.0);
    const LinOp b = (box.upper - c).cwiseMax(0.0);
    std::vector<OperatorPolytope> terms;
    for (Eigen::Index i = 0; i < m; ++i) {
      terms.push_back(outer_products(a.col(i), sub_rows[static_cast<std::size_t>(i)], opts.tol));
      terms.push_back(outer_products(b.col(i), sup_rows[static_cast<std::size_t>(i)], opts.tol));
    }
    return minkowski_sum(terms, opts.tol);
  };

  auto union_over = [&](const OperatorPolytope& gens) {
    std::vector<OperatorPolytope> sets;
    sets.reserve(gens.size());
    for (const auto& c : gens.generators()) sets.push_back(support_set_of(c));
    return convex_union(sets, opts.tol);
  };
  return QuasiDiff(union_over(qg.subd()), union_over(qg.supd()));
}

QuasiDiff qd_reduce(const QuasiDiff& q) {
  auto shifted = [](const OperatorPolytope& p, const LinOp& t) {
    std::vector<LinOp> g;
    g.reserve(p.size());
    for (const auto& c : p.generators()) g.push_back(c - t);
    return OperatorPolytope(std::move(g));
  };
  const auto zero = OperatorPolytope::zero(q.rows(), q.cols());
  if (q.supd().size() == 1 && !q.supd()[0].isZero(0.0)) return QuasiDiff(shifted(q.subd(), q.supd()[0]), zero);
  if (q.subd().size() == 1 && q.supd().size() > 1 && !q.subd()[0].isZero(0.0))
    return QuasiDiff(zero, shifted(q.supd(), q.subd()[0]));
  return q;
}

Eigen::VectorXd qd_eval_dir(const QuasiDiff& q, const Eigen::VectorXd& h) {
  if (h.size() != q.cols()) throw DimensionError("qd_eval_dir: direction length does not match input dim");
  return support(q.subd(), h).value - support(q.supd(), h).value;
}

}  // namespace qdc
