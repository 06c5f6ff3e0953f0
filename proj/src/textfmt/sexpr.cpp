#include "spacer/textfmt/sexpr.hpp"

#include <cctype>

namespace spacer::textfmt {

std::string to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Lexical: return "lexical error";
    case ErrorKind::Syntax: return "syntax error";
    case ErrorKind::UnknownIdentifier: return "unknown identifier";
    case ErrorKind::SortMismatch: return "sort mismatch";
    case ErrorKind::Validation: return "invalid program";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

ParseError::ParseError(ErrorKind kind, Span span, const std::string& message)
    : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + to_string(kind) +
                         ": " + message),
      kind_(kind),
      span_(span),
      detail_(message) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string_view t) : text_(t) {}

  std::vector<SExpr> all() {
    std::vector<SExpr> out;
    for (;;) {
      skip();
      if (pos_ >= text_.size()) return out;
      out.push_back(read());
    }
  }

 private:
  Span here(size_t len = 1) const { return Span{line_, col_, pos_, len}; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  SExpr read() {
    char c = text_[pos_];
    if (c == ')') throw ParseError(ErrorKind::Syntax, here(), "unexpected ')'");
    if (c == '(') {
      SExpr e;
      e.is_list = true;
      e.span = here();
      advance();
      for (;;) {
        skip();
        if (pos_ >= text_.size()) throw ParseError(ErrorKind::Syntax, e.span, "unclosed '('");
        if (text_[pos_] == ')') {
          advance();
          e.span.length = pos_ - e.span.offset;
          return e;
        }
        e.items.push_back(read());
      }
    }
    SExpr e;
    e.span = here(0);
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
      if (!std::isprint(static_cast<unsigned char>(d)))
        throw ParseError(ErrorKind::Lexical, here(), "unexpected character");
      e.atom.push_back(d);
      advance();
    }
    e.span.length = e.atom.size();
    return e;
  }

  std::string_view text_;
  size_t pos_ = 0;
  size_t line_ = 1;
  size_t col_ = 1;
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) { return Reader(text).all(); }

SExpr parse_sexpr(std::string_view text) {
  auto all = parse_sexprs(text);
  if (all.empty()) throw ParseError(ErrorKind::Syntax, Span{}, "empty input");
  if (all.size() > 1) throw ParseError(ErrorKind::Syntax, all[1].span, "trailing input after the first expression");
  return std::move(all[0]);
}

std::string to_string(const SExpr& e) {
  if (!e.is_list) return e.atom;
  std::string s = "(";
  for (size_t i = 0; i < e.items.size(); ++i) {
    if (i) s += ' ';
    s += to_string(e.items[i]);
  }
  return s + ")";
}

}  // namespace spacer::textfmt
