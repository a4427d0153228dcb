#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "hatp/json_io.hpp"
#include "hatp/parser.hpp"
#include "hatp/planner.hpp"
#include "hatp/printer.hpp"
#include "hatp/registry.hpp"
#include "hatp/social.hpp"
#include "hatp/streams.hpp"
#include "hatp/validate.hpp"
#include "hatp/world.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNoPlan = 1;    // also: validation errors
constexpr int kExitInternal = 2;  // usage problems, bad input files, bugs

std::optional<std::string> read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return std::move(os).str();
}

void print_diagnostics(const std::vector<hatp::Diagnostic> &diags,
                       const std::string &file) {
  for (const auto &d : diags)
    std::cerr << hatp::format_diagnostic(d, file) << "\n";
}

struct Loaded {
  hatp::DomainAst domain;
  hatp::ProblemAst problem;
  hatp::WorldState s0;
  hatp::FunctionRegistry registry;
};

/// Parses, validates and instantiates domain + problem. Returns nullopt after
/// printing diagnostics; sets `exitCode` accordingly.
std::optional<Loaded> load(const std::string &domainPath, const std::string &problemPath,
                           int &exitCode) {
  auto domainText = read_file(domainPath);
  if (!domainText) {
    std::cerr << "error: cannot read domain file '" << domainPath << "'\n";
    exitCode = kExitInternal;
    return std::nullopt;
  }
  auto problemText = read_file(problemPath);
  if (!problemText) {
    std::cerr << "error: cannot read problem file '" << problemPath << "'\n";
    exitCode = kExitInternal;
    return std::nullopt;
  }

  Loaded loaded;
  hatp::DomainParse dp = hatp::parse_domain(*domainText);
  print_diagnostics(dp.diagnostics, domainPath);
  if (!dp.ok()) {
    exitCode = kExitNoPlan;
    return std::nullopt;
  }
  loaded.domain = std::move(dp.domain);

  hatp::ProblemParse pp = hatp::parse_problem(*problemText, loaded.domain);
  print_diagnostics(pp.diagnostics, problemPath);
  if (!pp.ok()) {
    exitCode = kExitNoPlan;
    return std::nullopt;
  }
  loaded.problem = std::move(pp.problem);

  loaded.s0 = hatp::WorldState::init_state(loaded.domain, loaded.problem);
  loaded.registry.load_tables(loaded.problem, loaded.s0);

  auto domainDiags = hatp::validate_domain(loaded.domain, &loaded.registry);
  print_diagnostics(domainDiags, domainPath);
  auto problemDiags = hatp::validate_problem(loaded.domain, loaded.problem);
  print_diagnostics(problemDiags, problemPath);
  if (!hatp::diagnostics_clean(domainDiags) || !hatp::diagnostics_clean(problemDiags)) {
    exitCode = kExitNoPlan;
    return std::nullopt;
  }
  return loaded;
}

bool write_file(const fs::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << path.string() << "'\n";
    return false;
  }
  out << content;
  return true;
}

void print_plan_text(const hatp::PlanResult &result, const hatp::StreamPlan *streams,
                     const std::vector<hatp::FilterReport> &reports) {
  std::cout << "status: " << hatp::status_text(result.status) << "\n";
  if (!result.message.empty()) std::cout << "note: " << result.message << "\n";
  if (result.best) {
    std::cout << "cost: " << result.best->totalCost.str() << "\n";
    for (const auto &step : result.best->steps) {
      std::cout << "  " << step.index << ": " << step.action << "(";
      for (size_t i = 0; i < step.argText.size(); ++i) {
        if (i) std::cout << ",";
        std::cout << step.argText[i];
      }
      std::cout << ") cost=" << step.cost.str();
      if (step.duration) std::cout << " duration=" << step.duration->str();
      for (const auto &att : step.attachments)
        std::cout << " [" << att.predicate << "#" << att.solutionIndex << "]";
      std::cout << "\n";
    }
  }
  if (!result.all.empty())
    std::cout << "plans found: " << result.all.size() << "\n";
  if (streams) {
    std::cout << "streams:\n";
    for (const auto &s : streams->streams) {
      std::cout << "  " << s.agent << ":";
      for (int i : s.steps) std::cout << " " << i;
      std::cout << "\n";
    }
    std::cout << "links: " << streams->links.size()
              << "  joint steps: " << streams->joints.size() << "\n";
  }
  for (size_t i = 0; i < reports.size(); ++i) {
    std::cout << "filters: plan " << i << (reports[i].accepted ? " accepted" : " rejected")
              << "\n";
    for (const auto &v : reports[i].violations)
      std::cout << "  " << v.criterion << ": " << v.detail << " (measured "
                << v.measured.str() << ", threshold " << v.threshold.str() << ")\n";
  }
  const auto &st = result.stats;
  std::cout << "stats: nodes=" << st.nodesExpanded << " backtracks=" << st.backtracks
            << " linearizations=" << st.linearizationsGenerated
            << " externalCalls=" << st.externalCalls << "\n";
}

int run_plan(const std::string &domainPath, const std::string &problemPath,
             const std::string &goalText, hatp::SearchMode mode, uint64_t allLimit,
             const std::string &filtersPath, const std::string &format,
             const std::string &outDir, uint64_t maxNodes, uint64_t maxDepth,
             uint64_t seed) {
  (void)seed;  // reserved for sampling-based checks; search itself is deterministic
  int exitCode = kExitOk;
  auto loaded = load(domainPath, problemPath, exitCode);
  if (!loaded) return exitCode;

  std::vector<hatp::TaskInvocationAst> goalAst = loaded->problem.goal;
  if (!goalText.empty()) {
    std::vector<hatp::Diagnostic> goalDiags;
    goalAst = hatp::parse_goal_list(goalText, goalDiags);
    print_diagnostics(goalDiags, "<goal>");
    if (!hatp::diagnostics_clean(goalDiags)) return kExitInternal;
  }
  if (goalAst.empty()) {
    std::cerr << "error: no goal: the problem file declares none and --goal is empty\n";
    return kExitInternal;
  }

  std::optional<hatp::FilterConfig> filters;
  if (!filtersPath.empty()) {
    auto text = read_file(filtersPath);
    if (!text) {
      std::cerr << "error: cannot read filter config '" << filtersPath << "'\n";
      return kExitInternal;
    }
    filters = hatp::parse_filter_config(*text);
  }

  hatp::SearchOptions opts;
  opts.mode = mode;
  opts.maxNodes = maxNodes;
  opts.maxDepth = maxDepth;
  opts.allSolutionsLimit = allLimit;

  std::vector<hatp::GroundTask> goal = hatp::ground_goal(goalAst, loaded->s0);
  hatp::PlanResult result =
      hatp::plan(loaded->domain, loaded->s0, goal, loaded->registry, opts);

  std::optional<hatp::StreamPlan> streams;
  std::vector<hatp::FilterReport> reports;
  if (result.best) {
    std::string replayError;
    if (!hatp::replay_validate(loaded->domain, loaded->s0, *result.best,
                               loaded->registry, &replayError)) {
      std::cerr << "internal error: plan fails replay validation: " << replayError
                << "\n";
      return kExitInternal;
    }
    streams = hatp::split_streams(*result.best, loaded->domain, loaded->s0,
                                  loaded->registry);
    if (filters) {
      if (!result.all.empty()) {
        for (const auto &p : result.all) {
          hatp::StreamPlan sp =
              hatp::split_streams(p, loaded->domain, loaded->s0, loaded->registry);
          reports.push_back(hatp::apply_filters(p, sp, loaded->domain, *filters));
        }
      } else {
        reports.push_back(
            hatp::apply_filters(*result.best, *streams, loaded->domain, *filters));
      }
    }
  }

  if (format == "json") {
    std::cout << hatp::dump_json(hatp::result_to_json(result));
  } else if (format == "graph") {
    if (streams) std::cout << hatp::streams_to_dot(*streams, *result.best);
  } else {
    print_plan_text(result, streams ? &*streams : nullptr, reports);
  }

  if (!outDir.empty()) {
    fs::create_directories(outDir);
    const fs::path dir(outDir);
    if (!write_file(dir / "plan.json", hatp::dump_json(hatp::result_to_json(result))))
      return kExitInternal;
    if (streams) {
      if (!write_file(dir / "streams.json",
                      hatp::dump_json(hatp::streams_to_json(*streams, *result.best))))
        return kExitInternal;
      if (!write_file(dir / "streams.graph",
                      hatp::streams_to_dot(*streams, *result.best)))
        return kExitInternal;
    }
    if (filters &&
        !write_file(dir / "filters.json",
                    hatp::dump_json(hatp::filter_reports_to_json(reports))))
      return kExitInternal;
  }

  if (result.status != hatp::PlanStatus::Success) return kExitNoPlan;
  if (filters && !reports.empty()) {
    bool anyAccepted = false;
    for (const auto &r : reports) anyAccepted = anyAccepted || r.accepted;
    if (!anyAccepted) {
      std::cerr << "no plan passes the social filters\n";
      return kExitNoPlan;
    }
  }
  return kExitOk;
}

int run_validate(const std::string &domainPath, const std::string &problemPath) {
  auto domainText = read_file(domainPath);
  if (!domainText) {
    std::cerr << "error: cannot read domain file '" << domainPath << "'\n";
    return kExitInternal;
  }
  hatp::DomainParse dp = hatp::parse_domain(*domainText);
  print_diagnostics(dp.diagnostics, domainPath);
  bool clean = dp.ok();

  if (problemPath.empty()) {
    // Without a problem no tables can be loaded, so external-function
    // resolution is skipped.
    if (clean) {
      auto diags = hatp::validate_domain(dp.domain, nullptr);
      print_diagnostics(diags, domainPath);
      clean = hatp::diagnostics_clean(diags);
    }
  } else if (clean) {
    auto problemText = read_file(problemPath);
    if (!problemText) {
      std::cerr << "error: cannot read problem file '" << problemPath << "'\n";
      return kExitInternal;
    }
    hatp::ProblemParse pp = hatp::parse_problem(*problemText, dp.domain);
    print_diagnostics(pp.diagnostics, problemPath);
    clean = pp.ok();
    if (clean) {
      hatp::WorldState s0 = hatp::WorldState::init_state(dp.domain, pp.problem);
      hatp::FunctionRegistry registry;
      registry.load_tables(pp.problem, s0);
      auto domainDiags = hatp::validate_domain(dp.domain, &registry);
      print_diagnostics(domainDiags, domainPath);
      auto problemDiags = hatp::validate_problem(dp.domain, pp.problem);
      print_diagnostics(problemDiags, problemPath);
      clean = hatp::diagnostics_clean(domainDiags) &&
              hatp::diagnostics_clean(problemDiags);
    }
  }
  if (!clean) return kExitNoPlan;
  std::cout << "ok\n";
  return kExitOk;
}

int run_export(const std::string &domainPath, const std::string &problemPath,
               const std::string &outDir) {
  int exitCode = kExitOk;
  auto loaded = load(domainPath, problemPath, exitCode);
  if (!loaded) return exitCode;
  std::string text;
  for (const auto &atom : hatp::to_classical_atoms(loaded->s0)) text += atom + "\n";
  std::cout << text;
  if (!outDir.empty()) {
    fs::create_directories(outDir);
    if (!write_file(fs::path(outDir) / "classical.atoms", text)) return kExitInternal;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"hierarchical agent task planner"};
  app.require_subcommand(1);

  std::string domainPath, problemPath, goalText, filtersPath, outDir;
  std::string format = "text";
  uint64_t seed = 0, maxNodes = 1'000'000, maxDepth = 10'000;
  bool first = false, optimize = false;
  std::vector<std::string> allValues;

  CLI::App *planCmd = app.add_subcommand("plan", "search for a plan");
  planCmd->add_option("--domain", domainPath, "domain file")->required();
  planCmd->add_option("--problem", problemPath, "problem file")->required();
  planCmd->add_option("--goal", goalText, "goal task list, overrides the problem's");
  planCmd->add_flag("--first", first, "stop at the first plan");
  planCmd->add_flag("--optimize", optimize, "find a minimum-cost plan (default)");
  CLI::Option *allOpt =
      planCmd->add_option("--all", allValues, "enumerate all plans, optionally capped")
          ->expected(0, 1);
  planCmd->add_option("--filters", filtersPath, "social filter config (JSON)");
  planCmd->add_option("--format", format, "output format")
      ->check(CLI::IsMember({"text", "json", "graph"}));
  planCmd->add_option("--out", outDir, "directory for artifact files");
  planCmd->add_option("--seed", seed, "seed for sampling-based checks");
  planCmd->add_option("--max-nodes", maxNodes, "search node budget");
  planCmd->add_option("--max-depth", maxDepth, "decomposition depth budget");

  std::string vDomain, vProblem;
  CLI::App *validateCmd = app.add_subcommand("validate", "check domain and problem files");
  validateCmd->add_option("--domain", vDomain, "domain file")->required();
  validateCmd->add_option("--problem", vProblem, "problem file");

  std::string eDomain, eProblem, eOut;
  CLI::App *exportCmd =
      app.add_subcommand("export", "print the initial state as classical atoms");
  exportCmd->add_option("--domain", eDomain, "domain file")->required();
  exportCmd->add_option("--problem", eProblem, "problem file")->required();
  exportCmd->add_option("--out", eOut, "directory for the atoms file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitInternal;
  }

  try {
    if (planCmd->parsed()) {
      const int modes = (first ? 1 : 0) + (optimize ? 1 : 0) + (allOpt->count() ? 1 : 0);
      if (modes > 1) {
        std::cerr << "error: --first, --optimize and --all are mutually exclusive\n";
        return kExitInternal;
      }
      hatp::SearchMode mode = hatp::SearchMode::Optimal;
      uint64_t allLimit = 0;
      if (first) mode = hatp::SearchMode::FirstSolution;
      if (allOpt->count()) {
        mode = hatp::SearchMode::AllSolutions;
        if (!allValues.empty() && !allValues.front().empty()) {
          try {
            size_t used = 0;
            allLimit = std::stoull(allValues.front(), &used);
            if (used != allValues.front().size()) throw std::invalid_argument("");
          } catch (const std::exception &) {
            std::cerr << "error: --all expects a plan count, got '"
                      << allValues.front() << "'\n";
            return kExitInternal;
          }
        }
      }
      return run_plan(domainPath, problemPath, goalText, mode, allLimit, filtersPath,
                      format, outDir, maxNodes, maxDepth, seed);
    }
    if (validateCmd->parsed()) return run_validate(vDomain, vProblem);
    if (exportCmd->parsed()) return run_export(eDomain, eProblem, eOut);
  } catch (const hatp::EvalError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception &e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
