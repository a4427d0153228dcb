#pragma once

#include <string>

#include "hatp/ast.hpp"

namespace hatp {

/// Renders an AST back to canonical DSL text. Parsing the output yields a
/// structurally equal AST (source positions aside).
std::string print_domain(const DomainAst &domain);
std::string print_problem(const ProblemAst &problem);

std::string print_expr(const Expr &expr);
std::string print_cond(const Cond &cond);

}  // namespace hatp
