#pragma once

// Text format for programs (.ir files):
//
//   domain x in {0, 1, 2};
//   global g;
//   proc main(x) : (r) {
//     var t, b;
//     n0: t := x + 1; goto n1;
//     n1: b := t > 0; goto n2, n3;
//     n2: assume b;  goto n4;
//     n3: assume !b; goto n4;
//     n4: r := phi(t, t);
//     n5: skip;
//   }
//
// The first listed node is the entry, the last is the exit (a skip with no
// goto). A node without a goto falls through to the next listed node; a bare
// "goto ;" gives a node an empty successor list (used for unreachable nodes).
// `y := f(...)` where f names a procedure is shorthand for `call y := f(...)`.
// The procedure named "main" is the entry procedure (else the first one).
// Comments run from '#' to end of line.

#include <string>

#include "cia/ir.hpp"

namespace cia {

struct parse_error : std::runtime_error {
  int line;
  int column;
  parse_error(const std::string& msg, int line, int column);
};

program parse_program(const std::string& text);

// Convenience: read a file and parse it; io failures throw ir_error.
program parse_program_file(const std::string& path);

expr parse_expr(const std::string& text);

}  // namespace cia
