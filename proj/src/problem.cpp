#include "qdcalc/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "qdcalc/errors.hpp"

namespace qdc {

using nlohmann::json;

namespace {

void only_fields(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
      throw SchemaError(std::string(where) + ": unknown field '" + it.key() + "'");
  }
}

const json& required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("problem: missing field '") + key + "'");
  return *it;
}

Eigen::Index dimension(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 1 || j.get<long long>() > 1000)
    throw SchemaError(std::string(what) + " must be a positive integer");
  return static_cast<Eigen::Index>(j.get<long long>());
}

double positive(const json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw SchemaError(std::string(what) + " must be positive");
  return v;
}

double open_unit(const json& j, const char* what) {
  const double v = positive(j, what);
  if (!(v < 1.0)) throw SchemaError(std::string(what) + " must lie in (0, 1)");
  return v;
}

std::uint64_t unsigned_of(const json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  throw SchemaError(std::string(what) + " must be a non-negative integer");
}

Eigen::VectorXd sized(const json& j, Eigen::Index n, const char* what) {
  Eigen::VectorXd v = vector_from_json(j, what);
  if (v.size() != n)
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  return v;
}

Generators generators_of(const json& j, Eigen::Index n, const char* what) {
  if (!j.is_object()) throw SchemaError(std::string(what) + " must be an object");
  only_fields(j, what, {"generators"});
  const json& g = required(j, "generators");
  if (!g.is_array()) throw SchemaError(std::string(what) + ".generators must be an array");
  Generators out;
  for (const auto& v : g) out.push_back(sized(v, n, what));
  return out;
}

json generators_json(const Generators& g) {
  json a = json::array();
  for (const auto& v : g) a.push_back(vector_to_json(v));
  return json{{"generators", a}};
}

ProblemOptions options_of(const json& j) {
  if (!j.is_object()) throw SchemaError("problem: 'options' must be an object");
  only_fields(j, "options",
              {"tol_geom", "tol_active", "tol_prune", "max_iters", "step_init", "armijo_c", "shrink", "stop_dist",
               "seed"});
  ProblemOptions o;
  if (j.contains("tol_geom")) o.tol_geom = positive(j["tol_geom"], "options.tol_geom");
  if (j.contains("tol_active")) o.tol_active = positive(j["tol_active"], "options.tol_active");
  if (j.contains("tol_prune")) o.tol_prune = positive(j["tol_prune"], "options.tol_prune");
  if (j.contains("max_iters")) {
    const auto v = unsigned_of(j["max_iters"], "options.max_iters");
    if (v < 1) throw SchemaError("options.max_iters must be at least 1");
    o.max_iters = static_cast<std::size_t>(v);
  }
  if (j.contains("step_init")) o.step_init = positive(j["step_init"], "options.step_init");
  if (j.contains("armijo_c")) o.armijo_c = open_unit(j["armijo_c"], "options.armijo_c");
  if (j.contains("shrink")) o.shrink = open_unit(j["shrink"], "options.shrink");
  if (j.contains("stop_dist")) o.stop_dist = positive(j["stop_dist"], "options.stop_dist");
  if (j.contains("seed")) o.seed = unsigned_of(j["seed"], "options.seed");
  return o;
}

json options_json(const ProblemOptions& o) {
  json j = json::object();
  if (o.tol_geom) j["tol_geom"] = *o.tol_geom;
  if (o.tol_active) j["tol_active"] = *o.tol_active;
  if (o.tol_prune) j["tol_prune"] = *o.tol_prune;
  if (o.max_iters) j["max_iters"] = *o.max_iters;
  if (o.step_init) j["step_init"] = *o.step_init;
  if (o.armijo_c) j["armijo_c"] = *o.armijo_c;
  if (o.shrink) j["shrink"] = *o.shrink;
  if (o.stop_dist) j["stop_dist"] = *o.stop_dist;
  if (o.seed) j["seed"] = *o.seed;
  return j;
}

}  // namespace

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vector_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw SchemaError(std::string(what) + ": expected a non-empty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SchemaError(std::string(what) + ": expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    if (!std::isfinite(v(static_cast<Eigen::Index>(i)))) throw SchemaError(std::string(what) + ": non-finite number");
  }
  return v;
}

json matrix_to_json(const LinOp& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) rows.push_back(vector_to_json(a.row(r).transpose()));
  return rows;
}

LinOp matrix_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw SchemaError(std::string(what) + ": expected a non-empty array of rows");
  LinOp a;
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vector_from_json(j[r], what);
    if (r == 0) a.resize(static_cast<Eigen::Index>(j.size()), row.size());
    if (row.size() != a.cols()) throw SchemaError(std::string(what) + ": ragged matrix rows");
    a.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return a;
}

ProblemFile problem_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("problem: expected a JSON object");
  if (j.contains("report_version")) {
    if (!j.contains("problem")) throw SchemaError("report: missing field 'problem'");
    return problem_from_json(j["problem"]);
  }
  only_fields(j, "problem",
              {"n", "m", "objective", "constraints", "set_cone", "point", "generalized_points", "generalized_cones",
               "options"});

  const Eigen::Index n = dimension(required(j, "n"), "problem.n");
  const Eigen::Index m = dimension(required(j, "m"), "problem.m");
  Expr objective = expr_from_json(required(j, "objective"), n);
  if (objective.out_dim() != m)
    throw DimensionError("problem: objective has " + std::to_string(objective.out_dim()) + " outputs but m = " +
                         std::to_string(m));

  ProblemFile p{n, m, std::move(objective), {}, {}, {}, {}, {}, {}};

  if (j.contains("constraints")) {
    const json& cs = j["constraints"];
    if (!cs.is_array()) throw SchemaError("problem: 'constraints' must be an array");
    for (const auto& c : cs) p.constraints.push_back(expr_from_json(c, n));
  }
  if (j.contains("set_cone")) p.set_cone = generators_of(j["set_cone"], n, "set_cone");
  if (j.contains("point")) p.point = sized(j["point"], n, "point");
  if (j.contains("generalized_points")) {
    const json& gp = j["generalized_points"];
    if (!gp.is_array() || gp.empty()) throw SchemaError("problem: 'generalized_points' must be a non-empty array");
    for (const auto& v : gp) p.generalized_points.push_back(sized(v, n, "generalized_points"));
  }
  if (j.contains("generalized_cones")) {
    if (p.generalized_points.empty())
      throw SchemaError("problem: 'generalized_cones' requires 'generalized_points'");
    const json& gc = j["generalized_cones"];
    if (!gc.is_array()) throw SchemaError("problem: 'generalized_cones' must be an array");
    if (gc.size() != p.generalized_points.size())
      throw DimensionError("problem: 'generalized_cones' needs one entry per generalized point");
    std::vector<std::optional<Generators>> cones;
    for (const auto& c : gc) {
      if (c.is_null())
        cones.emplace_back();
      else
        cones.emplace_back(generators_of(c, n, "generalized_cones"));
    }
    p.generalized_cones = std::move(cones);
  }
  if (!p.point && p.generalized_points.empty())
    throw SchemaError("problem: missing field 'point'");
  if (j.contains("options")) p.options = options_of(j["options"]);
  return p;
}

json problem_to_json(const ProblemFile& p) {
  json j;
  j["n"] = p.n;
  j["m"] = p.m;
  j["objective"] = expr_to_json(p.objective);
  if (!p.constraints.empty()) {
    json cs = json::array();
    for (const auto& c : p.constraints) cs.push_back(expr_to_json(c));
    j["constraints"] = cs;
  }
  if (p.set_cone) j["set_cone"] = generators_json(*p.set_cone);
  if (p.point) j["point"] = vector_to_json(*p.point);
  if (!p.generalized_points.empty()) {
    json gp = json::array();
    for (const auto& v : p.generalized_points) gp.push_back(vector_to_json(v));
    j["generalized_points"] = gp;
  }
  if (p.generalized_cones) {
    json gc = json::array();
    for (const auto& c : *p.generalized_cones) gc.push_back(c ? generators_json(*c) : json(nullptr));
    j["generalized_cones"] = gc;
  }
  const json opts = options_json(p.options);
  if (!opts.empty()) j["options"] = opts;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
}

ProblemFile load_problem(const std::string& path) { return problem_from_json(read_json_file(path)); }

CalcOptions RunSettings::calc() const {
  CalcOptions o;
  o.tol = tol;
  o.eps_active = eps_active;
  return o;
}

CheckOptions RunSettings::check() const {
  CheckOptions o;
  o.tol = tol;
  o.eps_active = eps_active;
  return o;
}

RunSettings resolve_settings(const ProblemOptions& file, const Overrides& cli) {
  RunSettings s;
  s.tol.eps_geom = cli.tol_geom.value_or(file.tol_geom.value_or(s.tol.eps_geom));
  s.tol.eps_prune = file.tol_prune.value_or(s.tol.eps_prune);
  s.eps_active = cli.tol_active.value_or(file.tol_active.value_or(s.eps_active));
  s.seed = cli.seed.value_or(file.seed.value_or(s.seed));

  SolverParams& sp = s.solver;
  sp.max_iters = cli.max_iters.value_or(file.max_iters.value_or(sp.max_iters));
  sp.step_init = cli.step_init.value_or(file.step_init.value_or(sp.step_init));
  sp.armijo_c = file.armijo_c.value_or(sp.armijo_c);
  sp.shrink = file.shrink.value_or(sp.shrink);
  sp.stop_dist = file.stop_dist.value_or(sp.stop_dist);
  sp.tol = s.tol;
  // The solver's final tie threshold is the checker's, so its stopping test
  // and the closing verdict see the same active sets.
  sp.eps_active_min = s.eps_active;
  sp.eps_active_init = std::max(sp.eps_active_init, s.eps_active);
  return s;
}

Eigen::VectorXd parse_point(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw SchemaError("--point: '" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
      throw SchemaError("--point: '" + item + "' is not a number");
    vals.push_back(v);
  }
  if (vals.empty()) throw SchemaError("--point: expected v1,v2,...");
  return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace qdc
