#include "qdcalc/report.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "qdcalc/errors.hpp"

namespace qdc {

using nlohmann::json;

namespace {

json vec(const Eigen::VectorXd& v) { return vector_to_json(v); }

Eigen::VectorXd vec_of(const json& j) {
  if (!j.is_array()) throw SchemaError("report: expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json mat(const LinOp& a) { return matrix_to_json(a); }

LinOp mat_of(const json& j) {
  if (!j.is_array()) throw SchemaError("report: expected an array of rows");
  if (j.empty()) return LinOp();
  return matrix_from_json(j, "report");
}

json mats(const std::vector<LinOp>& ms) {
  json a = json::array();
  for (const auto& m : ms) a.push_back(mat(m));
  return a;
}

std::vector<LinOp> mats_of(const json& j) {
  std::vector<LinOp> out;
  for (const auto& m : j) out.push_back(mat_of(m));
  return out;
}

json settings_json(const RunSettings& s) {
  const SolverParams& p = s.solver;
  return {{"tol_geom", s.tol.eps_geom},
          {"tol_prune", s.tol.eps_prune},
          {"tol_active", s.eps_active},
          {"seed", s.seed},
          {"fd_directions", s.fd_directions},
          {"solver",
           {{"max_iters", p.max_iters},
            {"step_init", p.step_init},
            {"armijo_c", p.armijo_c},
            {"shrink", p.shrink},
            {"stop_dist", p.stop_dist},
            {"eps_active_init", p.eps_active_init},
            {"eps_active_min", p.eps_active_min},
            {"eps_active_shrink", p.eps_active_shrink},
            {"refine_steps", p.refine_steps}}}};
}

RunSettings settings_of(const json& j) {
  RunSettings s;
  s.tol.eps_geom = j.at("tol_geom").get<double>();
  s.tol.eps_prune = j.at("tol_prune").get<double>();
  s.eps_active = j.at("tol_active").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.fd_directions = j.at("fd_directions").get<std::size_t>();
  const json& p = j.at("solver");
  SolverParams& sp = s.solver;
  sp.max_iters = p.at("max_iters").get<std::size_t>();
  sp.step_init = p.at("step_init").get<double>();
  sp.armijo_c = p.at("armijo_c").get<double>();
  sp.shrink = p.at("shrink").get<double>();
  sp.stop_dist = p.at("stop_dist").get<double>();
  sp.eps_active_init = p.at("eps_active_init").get<double>();
  sp.eps_active_min = p.at("eps_active_min").get<double>();
  sp.eps_active_shrink = p.at("eps_active_shrink").get<double>();
  sp.refine_steps = p.at("refine_steps").get<bool>();
  sp.tol = s.tol;
  return s;
}

json quasireg_json(const QuasiregularityReport& q) {
  json entries = json::array();
  for (const auto& e : q.entries) entries.push_back({{"t", mat(e.t)}, {"mask", e.mask}, {"intersects", e.intersects}});
  return {{"regular", q.regular},
          {"assumption", "a dominating sublinear Maharam operator is assumed to exist; it is not verified"},
          {"entries", entries}};
}

QuasiregularityReport quasireg_of(const json& j) {
  QuasiregularityReport q;
  q.regular = j.at("regular").get<bool>();
  for (const auto& e : j.at("entries"))
    q.entries.push_back({mat_of(e.at("t")), e.at("mask").get<std::vector<bool>>(), e.at("intersects").get<bool>()});
  return q;
}

json trace_json(const SolverTrace& t) {
  json its = json::array();
  for (const auto& it : t.iterates)
    its.push_back({{"x", vec(it.x)},
                   {"f", it.f},
                   {"distance", it.distance},
                   {"step", it.step},
                   {"eps_active", it.eps_active}});
  return {{"status", to_string(t.status)},
          {"iterations", t.iterations},
          {"x", vec(t.x)},
          {"f", t.f},
          {"iterates", its}};
}

SolverStatus status_of(const std::string& s) {
  if (s == "stationary") return SolverStatus::stationary;
  if (s == "max_iters") return SolverStatus::max_iters;
  if (s == "line_search_failure") return SolverStatus::line_search_failure;
  throw SchemaError("report: unknown solver status '" + s + "'");
}

SolverTrace trace_of(const json& j) {
  SolverTrace t;
  t.status = status_of(j.at("status").get<std::string>());
  t.iterations = j.at("iterations").get<std::size_t>();
  t.x = vec_of(j.at("x"));
  t.f = j.at("f").get<double>();
  for (const auto& it : j.at("iterates"))
    t.iterates.push_back({vec_of(it.at("x")), it.at("f").get<double>(), it.at("distance").get<double>(),
                          it.at("step").get<double>(), it.at("eps_active").get<double>()});
  return t;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
  return fmt::format("({})", fmt::join(std::vector<double>(v.data(), v.data() + v.size()), ", "));
}

std::string fmt_mat(const LinOp& a) {
  std::vector<std::string> rows;
  for (Eigen::Index r = 0; r < a.rows(); ++r) rows.push_back(fmt_vec(a.row(r).transpose()));
  return fmt::format("[{}]", fmt::join(rows, "; "));
}

void render_verdict(std::string& out, const CheckRecord& c) {
  const Verdict& v = c.verdict;
  out += fmt::format("{} condition: {}\n", c.condition, v.holds ? "holds" : "fails");
  if (v.witness) {
    const Witness& w = *v.witness;
    out += fmt::format("  witness: point {} coordinate {} direction {} rate {}\n", w.point, w.coordinate,
                       fmt_vec(w.direction), w.rate);
  }
  if (v.certificate) {
    for (const auto& p : v.certificate->pairs) {
      out += fmt::format("  certificate: point {} coordinate {} s {}", p.point, p.coordinate, fmt_mat(p.s));
      if (p.gamma.size() > 0) out += fmt::format(" gamma {}", fmt_vec(p.gamma));
      if (p.lambda.size() > 0 && p.lambda.lpNorm<Eigen::Infinity>() > 0.0)
        out += fmt::format(" lambda {}", fmt_vec(p.lambda));
      out += "\n";
    }
  }
  for (const auto& n : v.notes) out += fmt::format("  note: {}\n", n);
}

}  // namespace

json verdict_to_json(const Verdict& v) {
  json j;
  j["holds"] = v.holds;
  if (v.witness) {
    const Witness& w = *v.witness;
    j["witness"] = {{"point", w.point},
                    {"coordinate", w.coordinate},
                    {"generator", w.generator},
                    {"generator_row", mat(w.generator_row)},
                    {"direction", vec(w.direction)},
                    {"rate", w.rate}};
  } else {
    j["witness"] = nullptr;
  }
  if (v.certificate) {
    json pairs = json::array();
    for (const auto& p : v.certificate->pairs)
      pairs.push_back({{"point", p.point},
                       {"coordinate", p.coordinate},
                       {"s", mat(p.s)},
                       {"S", mats(p.S)},
                       {"weights", vec(p.weights)},
                       {"gamma", vec(p.gamma)},
                       {"lambda", vec(p.lambda)},
                       {"residual", p.residual}});
    j["certificate"] = {{"pairs", pairs}};
  } else {
    j["certificate"] = nullptr;
  }
  j["notes"] = v.notes;
  return j;
}

Verdict verdict_from_json(const json& j) {
  Verdict v;
  v.holds = j.at("holds").get<bool>();
  if (const json& w = j.at("witness"); !w.is_null()) {
    Witness out;
    out.point = w.at("point").get<std::size_t>();
    out.coordinate = w.at("coordinate").get<Eigen::Index>();
    out.generator = w.at("generator").get<std::size_t>();
    out.generator_row = mat_of(w.at("generator_row"));
    out.direction = vec_of(w.at("direction"));
    out.rate = w.at("rate").get<double>();
    v.witness = std::move(out);
  }
  if (const json& c = j.at("certificate"); !c.is_null()) {
    MultiplierCertificate cert;
    for (const auto& p : c.at("pairs")) {
      PairCertificate pc;
      pc.point = p.at("point").get<std::size_t>();
      pc.coordinate = p.at("coordinate").get<Eigen::Index>();
      pc.s = mat_of(p.at("s"));
      pc.S = mats_of(p.at("S"));
      pc.weights = vec_of(p.at("weights"));
      pc.gamma = vec_of(p.at("gamma"));
      pc.lambda = vec_of(p.at("lambda"));
      pc.residual = p.at("residual").get<double>();
      cert.pairs.push_back(std::move(pc));
    }
    v.certificate = std::move(cert);
  }
  v.notes = j.at("notes").get<std::vector<std::string>>();
  return v;
}

json report_to_json(const Report& r) {
  json j;
  j["report_version"] = kReportVersion;
  j["command"] = {{"name", r.command}, {"source", r.source}, {"settings", settings_json(r.settings)}};
  j["problem"] = r.problem;

  json points = json::array();
  for (const auto& p : r.points) {
    json maps = json::array();
    for (const auto& m : p.maps)
      maps.push_back({{"name", m.name}, {"value", vec(m.value)}, {"subd", mats(m.subd)}, {"supd", mats(m.supd)}});
    points.push_back({{"x", vec(p.x)}, {"maps", maps}});
  }
  j["points"] = points;

  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back({{"condition", c.condition}, {"verdict", verdict_to_json(c.verdict)}});
  j["checks"] = checks;

  json diag = json::object();
  if (r.fd_residual) {
    const FdResidual& f = *r.fd_residual;
    diag["fd_residual"] = {{"directions", f.directions},       {"seed", f.seed},
                           {"piecewise_linear", f.piecewise_linear}, {"max_abs", f.max_abs},
                           {"max_rel", f.max_rel},             {"max_spread", f.max_spread}};
  } else {
    diag["fd_residual"] = nullptr;
  }
  json qr = json::array();
  for (const auto& q : r.quasiregularity) qr.push_back(quasireg_json(q));
  diag["quasiregularity"] = qr;
  diag["curvature"] = r.curvature;
  diag["sufficient"] = r.sufficient;
  j["diagnostics"] = diag;

  j["solver"] = r.solver ? trace_json(*r.solver) : json(nullptr);
  j["exit_code"] = r.exit_code;
  return j;
}

Report report_from_json(const json& j) {
  try {
    if (j.at("report_version").get<int>() != kReportVersion) throw SchemaError("report: unsupported report_version");
    Report r;
    const json& cmd = j.at("command");
    r.command = cmd.at("name").get<std::string>();
    r.source = cmd.at("source").get<std::string>();
    r.settings = settings_of(cmd.at("settings"));
    r.problem = j.at("problem");

    for (const auto& p : j.at("points")) {
      PointQd pq;
      pq.x = vec_of(p.at("x"));
      for (const auto& m : p.at("maps"))
        pq.maps.push_back({m.at("name").get<std::string>(), vec_of(m.at("value")), mats_of(m.at("subd")),
                           mats_of(m.at("supd"))});
      r.points.push_back(std::move(pq));
    }
    for (const auto& c : j.at("checks"))
      r.checks.push_back({c.at("condition").get<std::string>(), verdict_from_json(c.at("verdict"))});

    const json& diag = j.at("diagnostics");
    if (const json& f = diag.at("fd_residual"); !f.is_null()) {
      FdResidual fr;
      fr.directions = f.at("directions").get<std::size_t>();
      fr.seed = f.at("seed").get<std::uint64_t>();
      fr.piecewise_linear = f.at("piecewise_linear").get<bool>();
      fr.max_abs = f.at("max_abs").get<double>();
      fr.max_rel = f.at("max_rel").get<double>();
      fr.max_spread = f.at("max_spread").get<double>();
      r.fd_residual = fr;
    }
    for (const auto& q : diag.at("quasiregularity")) r.quasiregularity.push_back(quasireg_of(q));
    r.curvature = diag.at("curvature").get<std::string>();
    r.sufficient = diag.at("sufficient").get<bool>();

    if (const json& s = j.at("solver"); !s.is_null()) r.solver = trace_of(s);
    r.exit_code = j.at("exit_code").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("report: ") + e.what());
  }
}

std::string render_text(const Report& r) {
  std::string out = fmt::format("qdcalc {} {}\n", r.command, r.source);
  for (const auto& p : r.points) {
    out += fmt::format("at x = {}\n", fmt_vec(p.x));
    for (const auto& m : p.maps) {
      out += fmt::format("  {} = {}\n", m.name, fmt_vec(m.value));
      for (const auto& g : m.subd) out += fmt::format("    subd {}\n", fmt_mat(g));
      for (const auto& g : m.supd) out += fmt::format("    supd {}\n", fmt_mat(g));
    }
  }
  if (r.fd_residual) {
    const FdResidual& f = *r.fd_residual;
    out += fmt::format("finite-difference residual over {} directions (seed {}): max abs {:.3g}, max rel {:.3g}{}\n",
                       f.directions, f.seed, f.max_abs, f.max_rel, f.piecewise_linear ? " (piecewise linear)" : "");
  }
  if (r.solver) {
    const SolverTrace& t = *r.solver;
    out += fmt::format("solver: {} after {} steps, f = {}, x = {}\n", to_string(t.status), t.iterations, t.f,
                       fmt_vec(t.x));
  }
  for (const auto& c : r.checks) render_verdict(out, c);
  for (std::size_t i = 0; i < r.quasiregularity.size(); ++i)
    out += fmt::format("quasiregularity at point {}: {}\n", i,
                       r.quasiregularity[i].regular ? "no sampled intersection" : "sampled images intersect");
  if (!r.curvature.empty())
    out += fmt::format("program curvature: {}{}\n", r.curvature,
                       r.sufficient ? " (condition is necessary and sufficient)" : "");
  return out;
}

}  // namespace qdc
