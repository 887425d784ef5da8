#pragma once

// Lowering pipeline: globals become threaded in/out formals, natural loops
// become tail-recursive procedures, and each procedure is put into SSA form
// (acyclic CFG, every variable written at most once, merges via phi).
//
// The pass is deterministic, including generated names (x$ssa1, f$loop1,
// x$out, ...), so two versions with identical bodies lower identically.
// Irreducible control flow is rejected, as are a few loop shapes the
// extractor does not handle (multiple exit targets, branching latch nodes).

#include "cia/ir.hpp"

namespace cia {

struct lower_error : ir_error {
  using ir_error::ir_error;
};

program lower(const program& p);

}  // namespace cia
