#pragma once

#include <string>
#include <string_view>

#include "spacer/ir/program.hpp"
#include "spacer/textfmt/sexpr.hpp"

namespace spacer::textfmt {

// [A-Za-z_][A-Za-z0-9_.]*, excluding the keywords true/false/not/and/or.
bool is_identifier(std::string_view s);

// Parses and validates. Throws ParseError.
ir::Program parse_program(std::string_view text);
std::string print_program(const ir::Program& p);

// Formula over the variables of `p`; primed occurrences only when allowed.
ir::Formula parse_formula(const SExpr& e, const ir::Program& p, bool allow_primed);
ir::Formula parse_formula(std::string_view text, const ir::Program& p, bool allow_primed = true);
std::string print_formula(const ir::Formula& f);
std::string print_term(const ir::LinTerm& t);

// (proof (location NAME formula*)*)
ir::Proof parse_proof(std::string_view text, const ir::Program& p);
std::string print_proof(const ir::Proof& pf, const ir::Program& p);

// (cex (path NAME+) (state RAT*)*), values in variable declaration order.
ir::Counterexample parse_cex(std::string_view text, const ir::Program& p);
std::string print_cex(const ir::Counterexample& cex, const ir::Program& p);

std::string read_file(const std::string& path);

}  // namespace spacer::textfmt
