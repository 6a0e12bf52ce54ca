// qdcalc: quasidifferentials, optimality checks and descent for problems in JSON.
//
//   qdcalc qd <file> [--point v1,v2,...]
//   qdcalc check <file>
//   qdcalc minimize <file>
//
// Exit codes: 0 ok / holds, 1 condition fails, 2 schema, 3 dimension,
// 4 infeasible point, 5 unsupported by minimize, 6 other evaluation error.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "qdcalc/commands.hpp"
#include "qdcalc/errors.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_logger_st("qdcalc");
  logger->set_pattern("qdcalc: [%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::err);
  const char* env = std::getenv("QDCALC_LOG");
  if (!env) return;
  const std::string level = env;
  if (level == "error")
    spdlog::set_level(spdlog::level::err);
  else if (level == "info")
    spdlog::set_level(spdlog::level::info);
  else if (level == "debug")
    spdlog::set_level(spdlog::level::debug);
  else
    spdlog::warn("ignoring QDCALC_LOG={} (expected error, info or debug)", level);
}

struct Flags {
  std::string file;
  std::string point;
  std::string format = "text";
  std::optional<double> tol_geom;
  std::optional<double> tol_active;
  std::optional<std::size_t> max_iters;
  std::optional<double> step_init;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("file", f.file, "Problem file (or a report produced by qdcalc)")->required();
  cmd->add_option("--point", f.point, "Override the point: v1,v2,...");
  cmd->add_option("--tol-geom", f.tol_geom, "Slack accepted by membership tests");
  cmd->add_option("--tol-active", f.tol_active, "Threshold for active constraints and max/min ties");
  cmd->add_option("--max-iters", f.max_iters, "Solver iteration cap");
  cmd->add_option("--step-init", f.step_init, "Solver initial step");
  cmd->add_option("--seed", f.seed, "Seed for random-direction diagnostics");
  cmd->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"json", "text"}));
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Quasidifferential calculus and optimality checks"};
  app.require_subcommand(1);
  Flags flags;
  CLI::App* qd = app.add_subcommand("qd", "Quasidifferentials at the point, with a finite-difference cross-check");
  CLI::App* check = app.add_subcommand("check", "Necessary optimality conditions at the point");
  CLI::App* mini = app.add_subcommand("minimize", "Quasidifferential descent from the point (scalar objectives)");
  for (CLI::App* c : {qd, check, mini}) add_common(c, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? qdc::kExitOk : qdc::kExitSchema;
  }

  try {
    qdc::Overrides o;
    if (!flags.point.empty()) o.point = qdc::parse_point(flags.point);
    o.tol_geom = flags.tol_geom;
    o.tol_active = flags.tol_active;
    o.max_iters = flags.max_iters;
    o.step_init = flags.step_init;
    o.seed = flags.seed;

    spdlog::info("loading {}", flags.file);
    const qdc::ProblemFile problem = qdc::load_problem(flags.file);
    spdlog::debug("n = {}, m = {}, {} constraint(s)", problem.n, problem.m, problem.constraints.size());

    qdc::Report report;
    if (qd->parsed())
      report = qdc::cmd_qd(problem, o, flags.file);
    else if (check->parsed())
      report = qdc::cmd_check(problem, o, flags.file);
    else
      report = qdc::cmd_minimize(problem, o, flags.file);
    spdlog::info("{} finished with exit code {}", report.command, report.exit_code);

    if (flags.format == "json")
      std::cout << qdc::report_to_json(report).dump(2) << "\n";
    else
      std::cout << qdc::render_text(report);
    return report.exit_code;
  } catch (const std::exception& e) {
    const int code = qdc::exit_code_for(e);
    spdlog::error("{}", e.what());
    if (spdlog::get_level() > spdlog::level::err) std::cerr << "qdcalc: " << e.what() << "\n";
    return code;
  }
}
