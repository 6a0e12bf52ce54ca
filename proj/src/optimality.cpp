#include "qdcalc/optimality.hpp"

#include <algorithm>
#include <limits>

#include "qdcalc/errors.hpp"

namespace qdc {

namespace {

// A scalar constraint g_r(x) ≤ 0: one row of a constraint map.
struct ScalarConstraint {
  OperatorPolytope subd;
  OperatorPolytope supd;
  double value;
};

std::vector<ScalarConstraint> split_rows(const ConstraintSystem& cs, Eigen::Index n, const Tolerance& tol) {
  if (cs.values.size() != cs.qds.size()) throw DimensionError("constraints: one value vector per constraint map");
  std::vector<ScalarConstraint> out;
  for (std::size_t l = 0; l < cs.qds.size(); ++l) {
    const auto& q = cs.qds[l];
    if (q.cols() != n) throw DimensionError("constraints: quasidifferential input dim differs from the objective's");
    if (cs.values[l].size() != q.rows()) throw DimensionError("constraints: value length differs from output dim");
    for (Eigen::Index r = 0; r < q.rows(); ++r)
      out.push_back({row_polytope(q.subd(), r, tol), row_polytope(q.supd(), r, tol), cs.values[l](r)});
  }
  return out;
}

void require_feasible(const std::vector<ScalarConstraint>& rows, double eps_active) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].value > eps_active)
      throw InfeasiblePoint("constraint row " + std::to_string(i) + " has value " + std::to_string(rows[i].value) +
                            " > 0 at the base point");
  }
}

std::optional<PolyCone> normal_cone(const std::optional<PolyCone>& k, Eigen::Index n, const Tolerance& tol) {
  if (!k) return std::nullopt;
  if (k->rows() != n || k->cols() != 1) throw DimensionError("set cone: generators must be vectors in ℝⁿ");
  return polar_cone(*k, 1, tol);
}

std::size_t matching_generator(const OperatorPolytope& supd, Eigen::Index j, const LinOp& row) {
  std::size_t best = 0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < supd.size(); ++k) {
    const double d = (supd[k].row(j) - row).cwiseAbs().maxCoeff();
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  return best;
}

struct CoordinateResult {
  bool holds = true;
  std::optional<Witness> witness;
  std::vector<PairCertificate> certificates;
};

// Coordinate j of the objective at one base point:
// every s ∈ row_j(supd f) and every tuple (S_i) over `active` must satisfy
//   s ∈ conv row_j(subd f) + Σ_i cone(subd g_i − S_i) + N.
CoordinateResult check_coordinate(std::size_t point, const QuasiDiff& qf, Eigen::Index j,
                                  const std::vector<ScalarConstraint>& rows, const std::vector<std::size_t>& active,
                                  const std::optional<PolyCone>& normal, const CheckOptions& opts) {
  const Eigen::Index n = qf.cols();
  const auto& tol = opts.tol;
  const OperatorPolytope sub = row_polytope(qf.subd(), j, tol);
  const OperatorPolytope sup = row_polytope(qf.supd(), j, tol);

  std::size_t tuples = 1;
  for (auto i : active) {
    tuples *= rows[i].supd.size();
    if (tuples * sup.size() > opts.max_pairs)
      throw UnsupportedDimension("optimality check: more than " + std::to_string(opts.max_pairs) +
                                 " generator tuples for one coordinate");
  }

  CoordinateResult out;
  std::vector<std::size_t> cursor(active.size(), 0);
  const bool plain = active.empty() && !normal;

  for (std::size_t si = 0; si < sup.size(); ++si) {
    std::fill(cursor.begin(), cursor.end(), 0);
    for (std::size_t t = 0; t < tuples; ++t) {
      std::vector<PolyCone> cones;
      std::vector<LinOp> chosen;
      for (std::size_t a = 0; a < active.size(); ++a) {
        const auto& c = rows[active[a]];
        const LinOp& s_row = c.supd[cursor[a]];
        chosen.push_back(s_row);
        std::vector<LinOp> gens;
        for (const auto& v : c.subd.generators()) gens.push_back(v - s_row);
        cones.emplace_back(1, n, std::move(gens));
      }
      if (normal) cones.push_back(*normal);

      const auto res = contains_in_sum_with_cone(sup[si], sub, cones, tol);
      if (res.feasible) {
        PairCertificate pc;
        pc.point = point;
        pc.coordinate = j;
        pc.s = sup[si];
        pc.S = chosen;
        pc.weights = res.certificate->weights;
        pc.gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t a = 0; a < active.size(); ++a)
          pc.gamma(static_cast<Eigen::Index>(active[a])) = res.certificate->cone_coeffs[a].sum();
        pc.lambda = Eigen::VectorXd::Zero(n);
        if (normal) {
          const auto& mu = res.certificate->cone_coeffs.back();
          for (std::size_t k = 0; k < normal->size(); ++k)
            pc.lambda += mu(static_cast<Eigen::Index>(k)) * normal->generators()[k].row(0).transpose();
        }
        pc.residual = res.certificate->residual;
        out.certificates.push_back(std::move(pc));
      } else {
        out.holds = false;
        Witness w;
        w.point = point;
        w.coordinate = j;
        if (plain) {
          // steepest direction: the supd row farthest from conv row_j(subd f)
          double best = -1.0;
          for (std::size_t k = 0; k < sup.size(); ++k) {
            const auto np = nearest_point(sub, sup[k], tol);
            if (np.distance > best) {
              best = np.distance;
              w.generator_row = sup[k];
              w.direction = best > 0.0 ? Eigen::VectorXd(((sup[k] - np.point) / best).transpose())
                                       : Eigen::VectorXd::Zero(n);
            }
          }
        } else {
          w.generator_row = sup[si];
          const auto sep = separate(sup[si], sub, cones, tol);
          w.direction = sep ? Eigen::VectorXd(-sep->direction.row(0).transpose()) : Eigen::VectorXd::Zero(n);
          const double norm = w.direction.norm();
          if (norm > 0.0) w.direction /= norm;
        }
        w.generator = matching_generator(qf.supd(), j, w.generator_row);
        w.rate = qd_eval_dir(qf, w.direction)(j);
        out.witness = std::move(w);
        out.certificates.clear();
        return out;
      }
      for (std::size_t a = active.size(); a-- > 0;) {
        if (++cursor[a] < rows[active[a]].supd.size()) break;
        cursor[a] = 0;
      }
    }
  }
  return out;
}

std::vector<std::size_t> active_rows(const std::vector<ScalarConstraint>& rows, double eps_active) {
  std::vector<std::size_t> a;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (std::abs(rows[i].value) <= eps_active) a.push_back(i);
  return a;
}

Verdict run_single(const QuasiDiff& qf, const std::vector<ScalarConstraint>& rows, const std::vector<std::size_t>& active,
                   const std::optional<PolyCone>& normal, const CheckOptions& opts) {
  Verdict v;
  v.holds = true;
  MultiplierCertificate cert;
  for (Eigen::Index j = 0; j < qf.rows(); ++j) {
    auto r = check_coordinate(0, qf, j, rows, active, normal, opts);
    if (!r.holds) {
      v.holds = false;
      v.witness = std::move(r.witness);
      return v;
    }
    for (auto& p : r.certificates) cert.pairs.push_back(std::move(p));
  }
  v.certificate = std::move(cert);
  return v;
}

}  // namespace

Eigen::Index ConstraintSystem::scalar_count() const {
  Eigen::Index k = 0;
  for (const auto& q : qds) k += q.rows();
  return k;
}

Verdict check_unconstrained(const QuasiDiff& qf, const CheckOptions& opts) {
  return run_single(qf, {}, {}, std::nullopt, opts);
}

Verdict check_inequality_constrained(const QuasiDiff& qf, const ConstraintSystem& cs, const CheckOptions& opts) {
  const auto rows = split_rows(cs, qf.cols(), opts.tol);
  require_feasible(rows, opts.eps_active);
  return run_single(qf, rows, active_rows(rows, opts.eps_active), std::nullopt, opts);
}

Verdict check_set_constrained(const QuasiDiff& qf, const PolyCone& k, const CheckOptions& opts) {
  return run_single(qf, {}, {}, normal_cone(k, qf.cols(), opts.tol), opts);
}

Verdict check_combined(const QuasiDiff& qf, const ConstraintSystem& cs, const CheckOptions& opts) {
  const auto rows = split_rows(cs, qf.cols(), opts.tol);
  require_feasible(rows, opts.eps_active);
  return run_single(qf, rows, active_rows(rows, opts.eps_active), normal_cone(cs.set_cone, qf.cols(), opts.tol),
                    opts);
}

Verdict check_slackened(const QuasiDiff& qf, const ConstraintSystem& cs, const CheckOptions& opts) {
  if (qf.rows() != 1) throw DimensionError("check_slackened: scalar objectives only");
  const auto rows = split_rows(cs, qf.cols(), opts.tol);
  require_feasible(rows, opts.eps_active);
  std::vector<std::size_t> all(rows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return run_single(qf, rows, all, std::nullopt, opts);
}

Verdict check_generalized(std::span<const QuasiDiff> qfs, std::span<const Eigen::VectorXd> values,
                          const std::vector<std::optional<PolyCone>>& cones, const CheckOptions& opts) {
  if (qfs.empty()) throw DimensionError("check_generalized: needs at least one point");
  if (values.size() != qfs.size()) throw DimensionError("check_generalized: one value per point required");
  if (!cones.empty() && cones.size() != qfs.size())
    throw DimensionError("check_generalized: one (optional) cone per point required");
  const Eigen::Index m = qfs.front().rows(), n = qfs.front().cols();
  for (std::size_t k = 0; k < qfs.size(); ++k) {
    if (qfs[k].rows() != m || qfs[k].cols() != n || values[k].size() != m)
      throw DimensionError("check_generalized: points disagree on dims");
  }
  std::vector<std::optional<PolyCone>> normals(qfs.size());
  for (std::size_t k = 0; k < cones.size(); ++k) normals[k] = normal_cone(cones[k], n, opts.tol);

  // Extreme weight systems pick one meet-attaining point per coordinate; ranging
  // over all of them means every attaining point is checked on that coordinate.
  const auto active = active_indices(values, Extremum::min, opts.eps_active);
  Verdict v;
  v.holds = true;
  MultiplierCertificate cert;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (std::size_t k : active[static_cast<std::size_t>(j)]) {
      auto r = check_coordinate(k, qfs[k], j, {}, {}, normals[k], opts);
      if (!r.holds) {
        v.holds = false;
        v.witness = std::move(r.witness);
        return v;
      }
      for (auto& p : r.certificates) cert.pairs.push_back(std::move(p));
    }
  }
  v.certificate = std::move(cert);
  return v;
}

Verdict check_generalized_constrained(std::span<const QuasiDiff> qfs, std::span<const ConstraintSystem> systems,
                                      const CheckOptions& opts) {
  if (qfs.empty()) throw DimensionError("check_generalized_constrained: needs at least one point");
  if (systems.size() != qfs.size()) throw DimensionError("check_generalized_constrained: one system per point");
  const Eigen::Index m = qfs.front().rows(), n = qfs.front().cols();
  std::vector<std::vector<ScalarConstraint>> rows;
  std::vector<std::vector<std::size_t>> active;
  std::vector<std::optional<PolyCone>> normals;
  for (std::size_t k = 0; k < qfs.size(); ++k) {
    if (qfs[k].rows() != m || qfs[k].cols() != n)
      throw DimensionError("check_generalized_constrained: points disagree on dims");
    rows.push_back(split_rows(systems[k], n, opts.tol));
    require_feasible(rows.back(), opts.eps_active);
    active.push_back(active_rows(rows.back(), opts.eps_active));
    normals.push_back(normal_cone(systems[k].set_cone, n, opts.tol));
  }

  Verdict v;
  v.holds = true;
  v.notes.push_back("normal cones are taken at each base point");
  MultiplierCertificate cert;
  for (Eigen::Index j = 0; j < m; ++j) {
    std::optional<Witness> first_failure;
    bool found = false;
    for (std::size_t k = 0; k < qfs.size() && !found; ++k) {
      auto r = check_coordinate(k, qfs[k], j, rows[k], active[k], normals[k], opts);
      if (r.holds) {
        found = true;
        for (auto& p : r.certificates) cert.pairs.push_back(std::move(p));
      } else if (!first_failure) {
        first_failure = std::move(r.witness);
      }
    }
    if (!found) {
      v.holds = false;
      v.witness = std::move(first_failure);
      return v;
    }
  }
  v.certificate = std::move(cert);
  return v;
}

QuasiregularityReport quasiregularity_diagnostic(std::span<const QuasiDiff> qgs, Eigen::Index m,
                                                 const std::optional<std::vector<LinOp>>& t_sample,
                                                 const Tolerance& tol) {
  QuasiregularityReport rep;
  if (qgs.empty()) return rep;
  const Eigen::Index n = qgs.front().cols();
  std::vector<OperatorPolytope> sub_rows, sup_rows;
  for (const auto& q : qgs) {
    if (q.cols() != n) throw DimensionError("quasiregularity_diagnostic: constraints disagree on input dim");
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
      sub_rows.push_back(row_polytope(q.subd(), r, tol));
      sup_rows.push_back(row_polytope(q.supd(), r, tol));
    }
  }
  const auto k = static_cast<Eigen::Index>(sub_rows.size());

  std::vector<LinOp> sample;
  if (t_sample) {
    sample = *t_sample;
  } else {
    for (Eigen::Index i = 0; i < k; ++i) {
      LinOp t = LinOp::Zero(m, k);
      t.col(i).setOnes();
      sample.push_back(std::move(t));
    }
  }

  // πT∘P for P a product of rows: Σ_i (πT)_{:,i} ⊗ row_i(P).
  auto image = [&](const LinOp& pt, const std::vector<OperatorPolytope>& prows) {
    std::vector<OperatorPolytope> terms;
    for (Eigen::Index i = 0; i < k; ++i) {
      if (pt.col(i).isZero(0.0)) continue;
      std::vector<LinOp> gens;
      for (const auto& r : prows[static_cast<std::size_t>(i)].generators()) gens.push_back(pt.col(i) * r);
      terms.emplace_back(std::move(gens));
    }
    if (terms.empty()) return OperatorPolytope::zero(m, n);
    return minkowski_sum(terms, tol);
  };

  for (const auto& t : sample) {
    if (t.rows() != m || t.cols() != k) throw DimensionError("quasiregularity_diagnostic: sampled T has wrong shape");
    for (const auto& mask : BandMask::all_nonzero(static_cast<std::size_t>(m))) {
      const LinOp pt = mask.as_diag().asDiagonal() * t;
      QuasiregularityEntry e;
      e.t = t;
      for (std::size_t j = 0; j < mask.size(); ++j) e.mask.push_back(mask[j]);
      e.intersects = intersects(image(pt, sup_rows), image(pt, sub_rows), tol);
      if (e.intersects) rep.regular = false;
      rep.entries.push_back(std::move(e));
    }
  }
  return rep;
}

}  // namespace qdc
