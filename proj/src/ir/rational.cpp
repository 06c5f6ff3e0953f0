#include "spacer/ir/rational.hpp"

#include <cctype>

namespace spacer {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

}  // namespace

std::optional<Rat> parse_rat(std::string_view text) {
  std::string_view body = text;
  bool neg = false;
  if (!body.empty() && body.front() == '-') {
    neg = true;
    body.remove_prefix(1);
  }
  auto slash = body.find('/');
  std::string_view num = body.substr(0, slash);
  std::string_view den = slash == std::string_view::npos ? std::string_view{} : body.substr(slash + 1);
  if (!all_digits(num)) return std::nullopt;
  if (slash != std::string_view::npos && !all_digits(den)) return std::nullopt;
  mpz_class n(std::string(num), 10);
  mpz_class d(1);
  if (slash != std::string_view::npos) {
    d = mpz_class(std::string(den), 10);
    if (d == 0) return std::nullopt;
  }
  Rat r(n, d);
  r.canonicalize();
  if (neg) r = -r;
  return r;
}

std::string to_string(const Rat& r) { return r.get_str(10); }

}  // namespace spacer
