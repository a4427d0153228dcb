#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hatp {

/// Source position, 1-based. Spans are positional metadata only: two spans
/// always compare equal so that AST nodes can use defaulted structural
/// equality without caring where a node was parsed from.
struct SourceSpan {
  uint32_t line = 0;
  uint32_t col = 0;

  friend bool operator==(const SourceSpan &, const SourceSpan &) { return true; }
};

enum class Severity : uint8_t { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string message;
};

/// Renders "file:line:col: severity: message".
std::string format_diagnostic(const Diagnostic &d, std::string_view file);

/// True if no Error-severity entries are present.
bool diagnostics_clean(const std::vector<Diagnostic> &diags);

}  // namespace hatp
