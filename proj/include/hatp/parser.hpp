#pragma once

#include <string_view>
#include <vector>

#include "hatp/ast.hpp"
#include "hatp/diagnostics.hpp"

namespace hatp {

struct DomainParse {
  DomainAst domain;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics_clean(diagnostics); }
};

struct ProblemParse {
  ProblemAst problem;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics_clean(diagnostics); }
};

/// Parses a `.hatp` domain file. Never throws; syntax errors are collected as
/// diagnostics and parsing resynchronizes at the next statement. The returned
/// AST always contains the built-in Agent entity type.
DomainParse parse_domain(std::string_view text);

/// Parses a `.hatpp` problem file against an already parsed domain. Checks
/// that instantiated types exist, assigned attributes are declared, and
/// assigned values match the attribute's declared type.
ProblemParse parse_problem(std::string_view text, const DomainAst &schema);

/// Parses a goal override string: a `;`-separated task invocation list,
/// for example "Transport(C1,P21); Transport(C2,P22)".
std::vector<TaskInvocationAst> parse_goal_list(std::string_view text,
                                               std::vector<Diagnostic> &diags);

}  // namespace hatp
