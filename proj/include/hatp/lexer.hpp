#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hatp/diagnostics.hpp"

namespace hatp {

enum class Tok : uint8_t {
  Ident,
  Int,
  String,
  LBrace,
  RBrace,
  LParen,
  RParen,
  Comma,
  Semi,
  Colon,
  Dot,
  Slash,
  EqEq,     // ==
  NotEq,    // !=
  Assign,   // =
  SetAdd,   // <<=
  SetRem,   // =>>
  In,       // >>
  NotIn,    // !>>
  Less,     // <
  Greater,  // >
  End,
  Error,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;  // identifier spelling, unescaped string body, digit run
  SourceSpan span;
};

/// Tokenizes a whole buffer up front. Lexical errors become Error tokens (and
/// diagnostics); the stream always terminates with an End token.
std::vector<Token> lex(std::string_view src, std::vector<Diagnostic> &diags);

std::string_view token_name(Tok kind);

}  // namespace hatp
