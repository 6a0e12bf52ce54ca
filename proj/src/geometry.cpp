#include "qdcalc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "qdcalc/errors.hpp"
#include "qdcalc/lp.hpp"

namespace qdc {
namespace {

Eigen::VectorXd flat(const LinOp& op) {
  return Eigen::Map<const Eigen::VectorXd>(op.data(), op.size());
}

LinOp unflat(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

Eigen::MatrixXd flat_columns(const std::vector<LinOp>& ops, Eigen::Index dim) {
  Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(ops.size()));
  for (std::size_t i = 0; i < ops.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = flat(ops[i]);
  return out;
}

void require_same_dims(Eigen::Index r1, Eigen::Index c1, Eigen::Index r2, Eigen::Index c2,
                       const char* what) {
  if (r1 != r2 || c1 != c2) {
    throw DimensionError(std::string(what) + ": operand dims " + std::to_string(r1) + "x" +
                         std::to_string(c1) + " vs " + std::to_string(r2) + "x" + std::to_string(c2));
  }
}

// Minimax-residual membership:  T ≈ Σ_b (Σ λ_b = 1 combos of block b) + Σ μ K.
struct MembershipOutcome {
  double residual = 0.0;
  std::vector<Eigen::VectorXd> block_weights;
  Eigen::VectorXd cone_coeffs;
};

MembershipOutcome solve_membership(const Eigen::VectorXd& target,
                                   const std::vector<Eigen::MatrixXd>& blocks,
                                   const Eigen::MatrixXd& cone) {
  const Eigen::Index dim = target.size();
  Eigen::Index n_hull = 0;
  for (const auto& b : blocks) n_hull += b.cols();
  const Eigen::Index n_cone = cone.cols();
  const Eigen::Index n_var = n_hull + n_cone + 1;

  MembershipOutcome out;
  if (n_hull == 0 && n_cone == 0) {
    out.residual = target.size() ? target.cwiseAbs().maxCoeff() : 0.0;
    return out;
  }

  lp::Problem p;
  p.c = Eigen::VectorXd::Zero(n_var);
  p.c(n_var - 1) = 1.0;
  const auto n_blocks = static_cast<Eigen::Index>(blocks.size());
  p.a_eq = Eigen::MatrixXd::Zero(n_blocks, n_var);
  p.b_eq = Eigen::VectorXd::Ones(n_blocks);
  Eigen::MatrixXd combined(dim, n_hull + n_cone);
  Eigen::Index col = 0;
  for (Eigen::Index b = 0; b < n_blocks; ++b) {
    const auto& blk = blocks[static_cast<std::size_t>(b)];
    p.a_eq.block(b, col, 1, blk.cols()).setOnes();
    combined.middleCols(col, blk.cols()) = blk;
    col += blk.cols();
  }
  if (n_cone > 0) combined.rightCols(n_cone) = cone;

  p.a_ub = Eigen::MatrixXd::Zero(2 * dim, n_var);
  p.b_ub = Eigen::VectorXd::Zero(2 * dim);
  p.a_ub.topLeftCorner(dim, n_hull + n_cone) = combined;
  p.a_ub.bottomLeftCorner(dim, n_hull + n_cone) = -combined;
  p.a_ub.col(n_var - 1).setConstant(-1.0);
  p.b_ub.head(dim) = target;
  p.b_ub.tail(dim) = -target;

  const lp::Result r = lp::solve(p);
  if (r.status != lp::Status::optimal) {
    out.residual = std::numeric_limits<double>::infinity();
    return out;
  }
  col = 0;
  for (const auto& blk : blocks) {
    out.block_weights.emplace_back(r.x.segment(col, blk.cols()));
    col += blk.cols();
  }
  out.cone_coeffs = r.x.segment(n_hull, n_cone);
  // Recompute the residual from the recovered weights rather than trusting t.
  const Eigen::VectorXd recon = combined * r.x.head(n_hull + n_cone);
  out.residual = dim ? (recon - target).cwiseAbs().maxCoeff() : 0.0;
  return out;
}

Eigen::MatrixXd cone_columns(std::span<const PolyCone> cones, Eigen::Index rows, Eigen::Index cols) {
  Eigen::Index total = 0;
  for (const auto& k : cones) {
    require_same_dims(rows, cols, k.rows(), k.cols(), "cone sum");
    total += static_cast<Eigen::Index>(k.size());
  }
  Eigen::MatrixXd out(rows * cols, total);
  Eigen::Index c = 0;
  for (const auto& k : cones) {
    for (const auto& g : k.generators()) out.col(c++) = flat(g);
  }
  return out;
}

bool all_finite(const LinOp& op) { return op.allFinite(); }

}  // namespace

// ---------------------------------------------------------------------------

OperatorPolytope::OperatorPolytope(std::vector<LinOp> generators) : generators_(std::move(generators)) {
  if (generators_.empty()) throw DimensionError("OperatorPolytope: empty generator list");
  rows_ = generators_.front().rows();
  cols_ = generators_.front().cols();
  if (rows_ < 1 || cols_ < 1) throw DimensionError("OperatorPolytope: operators must be at least 1x1");
  for (const auto& g : generators_) {
    require_same_dims(rows_, cols_, g.rows(), g.cols(), "OperatorPolytope");
    if (!all_finite(g)) throw std::invalid_argument("OperatorPolytope: non-finite generator entry");
  }
}

OperatorPolytope OperatorPolytope::singleton(LinOp op) { return OperatorPolytope({std::move(op)}); }

OperatorPolytope OperatorPolytope::zero(Eigen::Index rows, Eigen::Index cols) {
  return singleton(LinOp::Zero(rows, cols));
}

PolyCone::PolyCone(Eigen::Index rows, Eigen::Index cols, std::vector<LinOp> generators)
    : rows_(rows), cols_(cols), generators_(std::move(generators)) {
  if (rows_ < 1 || cols_ < 1) throw DimensionError("PolyCone: operators must be at least 1x1");
  for (const auto& g : generators_) {
    require_same_dims(rows_, cols_, g.rows(), g.cols(), "PolyCone");
    if (!all_finite(g)) throw std::invalid_argument("PolyCone: non-finite generator entry");
  }
}

PolyCone PolyCone::from_directions(Eigen::Index n, const std::vector<Eigen::VectorXd>& dirs) {
  std::vector<LinOp> gens;
  gens.reserve(dirs.size());
  for (const auto& d : dirs) {
    if (d.size() != n) throw DimensionError("PolyCone::from_directions: direction length mismatch");
    gens.emplace_back(d);
  }
  return PolyCone(n, 1, std::move(gens));
}

// ---------------------------------------------------------------------------

SupportValue support(const OperatorPolytope& p, const Eigen::VectorXd& h) {
  if (h.size() != p.cols()) throw DimensionError("support: direction length does not match operator columns");
  SupportValue out;
  out.value = p[0] * h;
  out.argmax.assign(static_cast<std::size_t>(p.rows()), 0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    const Eigen::VectorXd v = p[i] * h;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      if (v(j) > out.value(j)) {
        out.value(j) = v(j);
        out.argmax[static_cast<std::size_t>(j)] = i;
      }
    }
  }
  return out;
}

OperatorPolytope prune(const OperatorPolytope& p, const Tolerance& tol) {
  const Eigen::Index dim = p.rows() * p.cols();
  std::vector<LinOp> kept;
  kept.reserve(p.size());
  for (const auto& g : p.generators()) {
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const LinOp& k) {
      return (k - g).cwiseAbs().maxCoeff() <= tol.eps_prune;
    });
    if (!dup) kept.push_back(g);
  }
  const std::size_t k = kept.size();
  if (k <= 2) return OperatorPolytope(std::move(kept));

  const Eigen::MatrixXd pts = flat_columns(kept, dim);

  // A generator that strictly wins some linear functional is a vertex.
  std::vector<char> vertex(k, 0);
  std::mt19937_64 rng(0x5eed1234ULL + k);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n_dirs = std::min<std::size_t>(4 * k + 2 * static_cast<std::size_t>(dim), 400);
  const double scale = std::max(1.0, pts.cwiseAbs().maxCoeff());
  for (std::size_t t = 0; t < n_dirs; ++t) {
    Eigen::VectorXd dir(dim);
    for (Eigen::Index d = 0; d < dim; ++d) dir(d) = normal(rng);
    const Eigen::VectorXd score = pts.transpose() * dir;
    Eigen::Index best = 0;
    score.maxCoeff(&best);
    double second = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < score.size(); ++i) {
      if (i != best) second = std::max(second, score(i));
    }
    if (score(best) - second > 1e-9 * scale * dir.cwiseAbs().sum()) vertex[static_cast<std::size_t>(best)] = 1;
  }

  std::vector<char> alive(k, 1);
  for (std::size_t i = 0; i < k; ++i) {
    if (vertex[i]) continue;
    std::vector<Eigen::Index> others;
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i && alive[j]) others.push_back(static_cast<Eigen::Index>(j));
    }
    if (others.empty()) continue;
    Eigen::MatrixXd block(dim, static_cast<Eigen::Index>(others.size()));
    for (std::size_t c = 0; c < others.size(); ++c) block.col(static_cast<Eigen::Index>(c)) = pts.col(others[c]);
    const auto m = solve_membership(pts.col(static_cast<Eigen::Index>(i)), {block}, Eigen::MatrixXd(dim, 0));
    if (m.residual <= tol.eps_prune) alive[i] = 0;
  }
  std::vector<LinOp> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (alive[i]) out.push_back(std::move(kept[i]));
  }
  return OperatorPolytope(std::move(out));
}

OperatorPolytope minkowski_sum(const OperatorPolytope& p, const OperatorPolytope& q, const Tolerance& tol) {
  require_same_dims(p.rows(), p.cols(), q.rows(), q.cols(), "minkowski_sum");
  std::vector<LinOp> gens;
  gens.reserve(p.size() * q.size());
  for (const auto& a : p.generators()) {
    for (const auto& b : q.generators()) gens.emplace_back(a + b);
  }
  return prune(OperatorPolytope(std::move(gens)), tol);
}

OperatorPolytope minkowski_sum(std::span<const OperatorPolytope> ps, const Tolerance& tol) {
  if (ps.empty()) throw DimensionError("minkowski_sum: empty operand list");
  OperatorPolytope acc = prune(ps.front(), tol);
  for (std::size_t i = 1; i < ps.size(); ++i) acc = minkowski_sum(acc, ps[i], tol);
  return acc;
}

OperatorPolytope convex_union(std::span<const OperatorPolytope> ps, const Tolerance& tol) {
  if (ps.empty()) throw DimensionError("convex_union: empty operand list");
  std::vector<LinOp> gens;
  for (const auto& p : ps) {
    require_same_dims(ps.front().rows(), ps.front().cols(), p.rows(), p.cols(), "convex_union");
    gens.insert(gens.end(), p.generators().begin(), p.generators().end());
  }
  return prune(OperatorPolytope(std::move(gens)), tol);
}

OperatorPolytope row_scale(const OperatorPolytope& p, const Eigen::VectorXd& d, const Tolerance& tol) {
  if (d.size() != p.rows()) throw DimensionError("row_scale: diagonal length does not match operator rows");
  std::vector<LinOp> gens;
  gens.reserve(p.size());
  for (const auto& g : p.generators()) gens.emplace_back(d.asDiagonal() * g);
  return prune(OperatorPolytope(std::move(gens)), tol);
}

OperatorPolytope row_polytope(const OperatorPolytope& p, Eigen::Index j, const Tolerance& tol) {
  if (j < 0 || j >= p.rows()) throw DimensionError("row_polytope: row index out of range");
  std::vector<LinOp> gens;
  gens.reserve(p.size());
  for (const auto& g : p.generators()) gens.emplace_back(g.row(j));
  return prune(OperatorPolytope(std::move(gens)), tol);
}

OperatorPolytope row_product(std::span<const OperatorPolytope> rows, std::size_t cap) {
  if (rows.empty()) throw DimensionError("row_product: no rows");
  const Eigen::Index n = rows.front().cols();
  std::size_t total = 1;
  for (const auto& r : rows) {
    if (r.rows() != 1 || r.cols() != n) throw DimensionError("row_product: rows must all be 1×n");
    if (total > cap / r.size()) throw UnsupportedDimension("row_product: more than " + std::to_string(cap) + " generators");
    total *= r.size();
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  std::vector<LinOp> gens;
  gens.reserve(total);
  std::vector<std::size_t> idx(rows.size(), 0);
  for (std::size_t g = 0; g < total; ++g) {
    LinOp op(m, n);
    for (Eigen::Index j = 0; j < m; ++j) op.row(j) = rows[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
    gens.push_back(std::move(op));
    for (std::size_t j = rows.size(); j-- > 0;) {
      if (++idx[j] < rows[j].size()) break;
      idx[j] = 0;
    }
  }
  return OperatorPolytope(std::move(gens));
}

bool contains_point(const OperatorPolytope& p, const LinOp& t, const Tolerance& tol) {
  require_same_dims(p.rows(), p.cols(), t.rows(), t.cols(), "contains_point");
  const Eigen::Index dim = p.rows() * p.cols();
  const auto m = solve_membership(flat(t), {flat_columns(p.generators(), dim)}, Eigen::MatrixXd(dim, 0));
  return m.residual <= tol.eps_geom;
}

SubsetResult subset(const OperatorPolytope& p, const OperatorPolytope& q, const Tolerance& tol) {
  require_same_dims(p.rows(), p.cols(), q.rows(), q.cols(), "subset");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!contains_point(q, p[i], tol)) return {false, i, p[i]};
  }
  return {};
}

ConeSumResult contains_in_sum_with_cone(const LinOp& t, const OperatorPolytope& p,
                                        std::span<const PolyCone> cones, const Tolerance& tol) {
  require_same_dims(p.rows(), p.cols(), t.rows(), t.cols(), "contains_in_sum_with_cone");
  const Eigen::Index dim = p.rows() * p.cols();
  const Eigen::MatrixXd cone = cone_columns(cones, p.rows(), p.cols());
  const auto m = solve_membership(flat(t), {flat_columns(p.generators(), dim)}, cone);

  ConeSumResult out;
  out.residual = m.residual;
  out.feasible = m.residual <= tol.eps_geom;
  if (out.feasible) {
    ConeSumCertificate cert;
    cert.weights = m.block_weights.front();
    cert.residual = m.residual;
    Eigen::Index off = 0;
    for (const auto& k : cones) {
      const auto len = static_cast<Eigen::Index>(k.size());
      cert.cone_coeffs.emplace_back(m.cone_coeffs.segment(off, len));
      off += len;
    }
    out.certificate = std::move(cert);
  }
  return out;
}

std::optional<Separation> separate(const LinOp& t, const OperatorPolytope& p,
                                   std::span<const PolyCone> cones, const Tolerance& tol) {
  require_same_dims(p.rows(), p.cols(), t.rows(), t.cols(), "separate");
  const Eigen::Index dim = p.rows() * p.cols();
  const Eigen::MatrixXd pts = flat_columns(p.generators(), dim);
  const Eigen::MatrixXd cone = cone_columns(cones, p.rows(), p.cols());
  const Eigen::VectorXd target = flat(t);

  // variables: H⁺ (dim), H⁻ (dim), z⁺, z⁻, δ ; maximize δ
  const Eigen::Index iz = 2 * dim, idelta = 2 * dim + 2, n_var = 2 * dim + 3;
  const Eigen::Index k = pts.cols(), c = cone.cols();
  const Eigen::Index n_rows = k + c + 1 + 2 * dim;
  lp::Problem lp_p;
  lp_p.c = Eigen::VectorXd::Zero(n_var);
  lp_p.c(idelta) = -1.0;
  lp_p.a_ub = Eigen::MatrixXd::Zero(n_rows, n_var);
  lp_p.b_ub = Eigen::VectorXd::Zero(n_rows);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < k; ++i, ++r) {  // z ≤ ⟨H, Gᵢ⟩
    lp_p.a_ub(r, iz) = 1.0;
    lp_p.a_ub(r, iz + 1) = -1.0;
    lp_p.a_ub.block(r, 0, 1, dim) = -pts.col(i).transpose();
    lp_p.a_ub.block(r, dim, 1, dim) = pts.col(i).transpose();
  }
  for (Eigen::Index i = 0; i < c; ++i, ++r) {  // ⟨H, K⟩ ≥ 0
    lp_p.a_ub.block(r, 0, 1, dim) = -cone.col(i).transpose();
    lp_p.a_ub.block(r, dim, 1, dim) = cone.col(i).transpose();
  }
  // δ ≤ z − ⟨H, T⟩
  lp_p.a_ub(r, idelta) = 1.0;
  lp_p.a_ub(r, iz) = -1.0;
  lp_p.a_ub(r, iz + 1) = 1.0;
  lp_p.a_ub.block(r, 0, 1, dim) = target.transpose();
  lp_p.a_ub.block(r, dim, 1, dim) = -target.transpose();
  ++r;
  for (Eigen::Index d = 0; d < 2 * dim; ++d, ++r) {
    lp_p.a_ub(r, d) = 1.0;
    lp_p.b_ub(r) = 1.0;
  }
  lp_p.a_eq = Eigen::MatrixXd(0, n_var);
  lp_p.b_eq = Eigen::VectorXd(0);

  const lp::Result res = lp::solve(lp_p);
  if (res.status != lp::Status::optimal) return std::nullopt;
  const double margin = res.x(idelta);
  if (margin <= tol.eps_geom) return std::nullopt;
  const Eigen::VectorXd h = res.x.head(dim) - res.x.segment(dim, dim);
  return Separation{unflat(h, p.rows(), p.cols()), margin};
}

bool intersects(const OperatorPolytope& p, const OperatorPolytope& q, const Tolerance& tol) {
  require_same_dims(p.rows(), p.cols(), q.rows(), q.cols(), "intersects");
  const Eigen::Index dim = p.rows() * p.cols();
  const auto m = solve_membership(Eigen::VectorXd::Zero(dim),
                                  {flat_columns(p.generators(), dim), -flat_columns(q.generators(), dim)},
                                  Eigen::MatrixXd(dim, 0));
  return m.residual <= tol.eps_geom;
}

NearestPoint nearest_point(const OperatorPolytope& p, const LinOp& t, const Tolerance& tol) {
  require_same_dims(p.rows(), p.cols(), t.rows(), t.cols(), "nearest_point");
  const Eigen::Index dim = p.rows() * p.cols();
  const auto k = static_cast<Eigen::Index>(p.size());
  Eigen::MatrixXd y = flat_columns(p.generators(), dim);
  y.colwise() -= flat(t);

  const double scale = std::max(1.0, y.colwise().squaredNorm().maxCoeff());
  const double gap_tol = 1e-14 * scale;
  const double tiny = 1e-12;

  Eigen::Index start = 0;
  y.colwise().squaredNorm().minCoeff(&start);
  std::vector<Eigen::Index> active{start};
  Eigen::VectorXd w = Eigen::VectorXd::Ones(1);
  Eigen::VectorXd x = y.col(start);

  for (int major = 0; major < 200 + 10 * static_cast<int>(k); ++major) {
    Eigen::Index j = 0;
    (y.transpose() * x).minCoeff(&j);
    const double gap = x.squaredNorm() - x.dot(y.col(j));
    if (gap <= gap_tol) break;
    if (std::find(active.begin(), active.end(), j) != active.end()) break;
    active.push_back(j);
    w.conservativeResize(w.size() + 1);
    w(w.size() - 1) = 0.0;

    for (int minor = 0; minor < 4 * static_cast<int>(k) + 8; ++minor) {
      const auto s = static_cast<Eigen::Index>(active.size());
      Eigen::MatrixXd ys(dim, s);
      for (Eigen::Index i = 0; i < s; ++i) ys.col(i) = y.col(active[static_cast<std::size_t>(i)]);
      // affine minimizer: minimize |Y v|² subject to Σv = 1
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
      kkt.topLeftCorner(s, s) = ys.transpose() * ys;
      kkt.block(0, s, s, 1).setOnes();
      kkt.block(s, 0, 1, s).setOnes();
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
      rhs(s) = 1.0;
      const Eigen::VectorXd sol = kkt.completeOrthogonalDecomposition().solve(rhs);
      const Eigen::VectorXd v = sol.head(s);

      if ((v.array() > tiny).all()) {
        w = v;
        break;
      }
      double theta = 1.0;
      for (Eigen::Index i = 0; i < s; ++i) {
        if (v(i) <= tiny) {
          const double denom = w(i) - v(i);
          if (denom > 0) theta = std::min(theta, w(i) / denom);
        }
      }
      w = theta * v + (1.0 - theta) * w;
      std::vector<Eigen::Index> next;
      std::vector<double> next_w;
      for (Eigen::Index i = 0; i < s; ++i) {
        if (w(i) > tiny) {
          next.push_back(active[static_cast<std::size_t>(i)]);
          next_w.push_back(w(i));
        }
      }
      if (next.empty()) {  // numerical breakdown; restart from the newest point
        next.push_back(active.back());
        next_w.push_back(1.0);
      }
      active = std::move(next);
      w = Eigen::Map<Eigen::VectorXd>(next_w.data(), static_cast<Eigen::Index>(next_w.size()));
      w /= w.sum();
    }
    Eigen::VectorXd nx = Eigen::VectorXd::Zero(dim);
    for (std::size_t i = 0; i < active.size(); ++i) nx += w(static_cast<Eigen::Index>(i)) * y.col(active[i]);
    x = nx;
  }

  NearestPoint out;
  out.weights = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < active.size(); ++i) out.weights(active[i]) = w(static_cast<Eigen::Index>(i));
  out.point = unflat(x + flat(t), p.rows(), p.cols());
  out.distance = x.norm();
  if (out.distance <= tol.eps_geom * 1e-3) out.distance = 0.0;
  return out;
}

std::vector<Eigen::VectorXd> polar_directions(Eigen::Index n, const std::vector<Eigen::VectorXd>& dirs,
                                              const Tolerance& tol) {
  if (n > kMaxPolarDim) {
    throw UnsupportedDimension("polar_cone: dimension " + std::to_string(n) + " exceeds the enumeration cap of " +
                               std::to_string(kMaxPolarDim));
  }
  std::vector<Eigen::VectorXd> gens;
  for (Eigen::Index i = 0; i < n; ++i) {
    gens.push_back(Eigen::VectorXd::Unit(n, i));
    gens.push_back(-Eigen::VectorXd::Unit(n, i));
  }

  auto normalize = [](Eigen::VectorXd v) {
    const double s = v.cwiseAbs().maxCoeff();
    if (s > 0) v /= s;
    return v;
  };

  for (const auto& raw : dirs) {
    if (raw.size() != n) throw DimensionError("polar_cone: direction length mismatch");
    const double kn = raw.cwiseAbs().maxCoeff();
    if (kn == 0.0) continue;
    const Eigen::VectorXd a = raw / kn;
    std::vector<Eigen::VectorXd> pos, neg, next;
    for (const auto& g : gens) {
      const double s = a.dot(g);
      if (s > tol.eps_geom) {
        pos.push_back(g);
      } else if (s < -tol.eps_geom) {
        neg.push_back(g);
      } else {
        next.push_back(g);
      }
    }
    for (const auto& g : neg) next.push_back(g);
    for (const auto& pp : pos) {
      for (const auto& nn : neg) {
        next.push_back(normalize(a.dot(pp) * nn - a.dot(nn) * pp));
      }
    }
    // dedupe, then drop generators already in the cone of the others
    std::vector<Eigen::VectorXd> uniq;
    for (auto& g : next) {
      if (g.cwiseAbs().maxCoeff() <= tol.eps_prune) continue;
      const bool dup = std::any_of(uniq.begin(), uniq.end(), [&](const Eigen::VectorXd& u) {
        return (u - g).cwiseAbs().maxCoeff() <= tol.eps_prune;
      });
      if (!dup) uniq.push_back(std::move(g));
    }
    std::vector<char> alive(uniq.size(), 1);
    for (std::size_t i = 0; i < uniq.size(); ++i) {
      Eigen::MatrixXd others(n, 0);
      for (std::size_t j = 0; j < uniq.size(); ++j) {
        if (j == i || !alive[j]) continue;
        others.conservativeResize(n, others.cols() + 1);
        others.col(others.cols() - 1) = uniq[j];
      }
      if (others.cols() == 0) continue;
      const auto m = solve_membership(uniq[i], {}, others);
      if (m.residual <= tol.eps_prune) alive[i] = 0;
    }
    gens.clear();
    for (std::size_t i = 0; i < uniq.size(); ++i) {
      if (alive[i]) gens.push_back(std::move(uniq[i]));
    }
  }
  return gens;
}

PolyCone polar_cone(const PolyCone& k, Eigen::Index m, const Tolerance& tol) {
  if (k.cols() != 1) throw DimensionError("polar_cone: expected a cone of direction vectors (n x 1 generators)");
  if (m < 1) throw DimensionError("polar_cone: output dimension must be positive");
  const Eigen::Index n = k.rows();
  std::vector<Eigen::VectorXd> dirs;
  for (const auto& g : k.generators()) dirs.emplace_back(g.col(0));
  const auto polar = polar_directions(n, dirs, tol);
  std::vector<LinOp> gens;
  for (Eigen::Index j = 0; j < m; ++j) {
    for (const auto& v : polar) {
      LinOp op = LinOp::Zero(m, n);
      op.row(j) = v.transpose();
      gens.push_back(std::move(op));
    }
  }
  return PolyCone(m, n, std::move(gens));
}

}  // namespace qdc
