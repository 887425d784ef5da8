#pragma once

#include <string>

#include "cia/ir.hpp"

namespace cia {

// Inverse of parse_program up to whitespace. Every printed program re-parses
// to a structurally equal one; label and variable names are preserved.
std::string print_program(const program& p);

std::string print_expr(const expr& e);
std::string print_stmt(const stmt& s);

}  // namespace cia
