#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <string_view>

namespace spacer {

// Always canonical: GMP keeps num/den reduced with den > 0.
using Rat = mpq_class;

// Accepts [-]DIGITS[/DIGITS]; nullopt on anything else or a zero denominator.
std::optional<Rat> parse_rat(std::string_view text);

std::string to_string(const Rat& r);

inline bool is_integer(const Rat& r) { return r.get_den() == 1; }

}  // namespace spacer
