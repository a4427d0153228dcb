#include "hatp/diagnostics.hpp"

namespace hatp {

std::string format_diagnostic(const Diagnostic &d, std::string_view file) {
  std::string out(file);
  out += ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) + ": ";
  out += d.severity == Severity::Error ? "error: " : "warning: ";
  out += d.message;
  return out;
}

bool diagnostics_clean(const std::vector<Diagnostic> &diags) {
  for (const auto &d : diags)
    if (d.severity == Severity::Error) return false;
  return true;
}

}  // namespace hatp
