#pragma once

#include <vector>

#include "hatp/ast.hpp"
#include "hatp/diagnostics.hpp"
#include "hatp/registry.hpp"

namespace hatp {

/// Static checks beyond the grammar: every variable is a parameter, an
/// in-scope selector or quantifier binding; attribute paths exist and are
/// typed consistently; comparisons and effects respect atom/set arity and
/// staticness; subtask invocations resolve with matching arity and argument
/// types; the first parameter of every action is an Agent; evaluable
/// predicates appear only as top-level conjuncts of action preconditions.
///
/// With a registry, external references are also checked: cost, duration and
/// ordering functions must resolve there (load problem tables first), and
/// predicate names must be registered. Without one, those checks are skipped.
std::vector<Diagnostic> validate_domain(const DomainAst &domain,
                                        const FunctionRegistry *registry = nullptr);

/// Checks a problem against its domain: goal tasks resolve with matching
/// arity and argument types.
std::vector<Diagnostic> validate_problem(const DomainAst &domain,
                                         const ProblemAst &problem);

}  // namespace hatp
