#include "hatp/lexer.hpp"

namespace hatp {

namespace {

bool ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

}  // namespace

std::string_view token_name(Tok kind) {
  switch (kind) {
    case Tok::Ident: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::LBrace: return "'{'";
    case Tok::RBrace: return "'}'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Colon: return "':'";
    case Tok::Dot: return "'.'";
    case Tok::Slash: return "'/'";
    case Tok::EqEq: return "'=='";
    case Tok::NotEq: return "'!='";
    case Tok::Assign: return "'='";
    case Tok::SetAdd: return "'<<='";
    case Tok::SetRem: return "'=>>'";
    case Tok::In: return "'>>'";
    case Tok::NotIn: return "'!>>'";
    case Tok::Less: return "'<'";
    case Tok::Greater: return "'>'";
    case Tok::End: return "end of input";
    case Tok::Error: return "invalid token";
  }
  return "?";
}

std::vector<Token> lex(std::string_view src, std::vector<Diagnostic> &diags) {
  std::vector<Token> out;
  uint32_t line = 1, col = 1;
  size_t i = 0;
  const size_t n = src.size();

  auto peek = [&](size_t k) -> char { return i + k < n ? src[i + k] : '\0'; };
  auto advance = [&](size_t k) {
    for (size_t j = 0; j < k && i < n; ++j, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto push = [&](Tok kind, std::string text, SourceSpan span) {
    out.push_back(Token{kind, std::move(text), span});
  };

  // Typographic double quotes are normalized to '"' so that text lifted from
  // documents with smart quotes still lexes.
  auto smart_quote_len = [&]() -> size_t {
    if (peek(0) == '\xe2' && peek(1) == '\x80' && (peek(2) == '\x9c' || peek(2) == '\x9d'))
      return 3;  // U+201C / U+201D
    return 0;
  };

  while (i < n) {
    const char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && peek(1) == '/') {
      while (i < n && src[i] != '\n') advance(1);
      continue;
    }
    const SourceSpan span{line, col};
    if (ident_start(c)) {
      size_t j = i;
      while (j < n && ident_char(src[j])) ++j;
      std::string text(src.substr(i, j - i));
      advance(j - i);
      push(Tok::Ident, std::move(text), span);
      continue;
    }
    if (c >= '0' && c <= '9') {
      size_t j = i;
      while (j < n && src[j] >= '0' && src[j] <= '9') ++j;
      std::string text(src.substr(i, j - i));
      advance(j - i);
      push(Tok::Int, std::move(text), span);
      continue;
    }
    if (c == '"' || smart_quote_len() > 0) {
      advance(c == '"' ? 1 : smart_quote_len());
      std::string body;
      bool closed = false;
      while (i < n) {
        if (src[i] == '"' || smart_quote_len() > 0) {
          advance(src[i] == '"' ? 1 : smart_quote_len());
          closed = true;
          break;
        }
        if (src[i] == '\\' && i + 1 < n) {
          const char esc = src[i + 1];
          body += (esc == 'n') ? '\n' : (esc == 't') ? '\t' : esc;
          advance(2);
          continue;
        }
        if (src[i] == '\n') break;  // unterminated at end of line
        body += src[i];
        advance(1);
      }
      if (!closed) {
        diags.push_back({Severity::Error, span, "unterminated string literal"});
        push(Tok::Error, body, span);
      } else {
        push(Tok::String, std::move(body), span);
      }
      continue;
    }

    // Punctuation, longest match first.
    struct Punct {
      std::string_view text;
      Tok kind;
    };
    static constexpr Punct kPuncts[] = {
        {"<<=", Tok::SetAdd}, {"=>>", Tok::SetRem}, {"!>>", Tok::NotIn},
        {">>", Tok::In},      {"==", Tok::EqEq},    {"!=", Tok::NotEq},
        {"{", Tok::LBrace},   {"}", Tok::RBrace},   {"(", Tok::LParen},
        {")", Tok::RParen},   {",", Tok::Comma},    {";", Tok::Semi},
        {":", Tok::Colon},    {".", Tok::Dot},      {"/", Tok::Slash},
        {"=", Tok::Assign},   {"<", Tok::Less},     {">", Tok::Greater},
    };
    bool matched = false;
    for (const auto &p : kPuncts) {
      if (src.substr(i, p.text.size()) == p.text) {
        advance(p.text.size());
        push(p.kind, std::string(p.text), span);
        matched = true;
        break;
      }
    }
    if (matched) continue;

    diags.push_back({Severity::Error, span,
                     std::string("unexpected character '") + c + "'"});
    push(Tok::Error, std::string(1, c), span);
    advance(1);
  }

  out.push_back(Token{Tok::End, "", SourceSpan{line, col}});
  return out;
}

}  // namespace hatp
