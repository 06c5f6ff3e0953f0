#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace spacer::textfmt {

struct Span {
  size_t line = 1;
  size_t column = 1;
  size_t offset = 0;
  size_t length = 0;
};

enum class ErrorKind { Lexical, Syntax, UnknownIdentifier, SortMismatch, Validation, Io };

std::string to_string(ErrorKind k);

class ParseError : public std::runtime_error {
 public:
  ParseError(ErrorKind kind, Span span, const std::string& message);
  ErrorKind kind() const { return kind_; }
  const Span& span() const { return span_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  Span span_;
  std::string detail_;
};

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  Span span;

  bool is_atom(std::string_view s) const { return !is_list && atom == s; }
  bool is_head(std::string_view s) const { return is_list && !items.empty() && items[0].is_atom(s); }
};

// ';' starts a comment running to end of line. Atoms are maximal runs of non-space, non-paren characters.
std::vector<SExpr> parse_sexprs(std::string_view text);
SExpr parse_sexpr(std::string_view text);
std::string to_string(const SExpr& e);

}  // namespace spacer::textfmt
