#pragma once

// Version-pair normalization and the partial bijection between node labels.
// After normalize_pair both programs have the same procedure names and, per
// procedure, the same variable vectors and node-label sets; nodes missing in
// one version are added as unreachable skips with no successors.
//
// structural_diff maps every node of a procedure whose lowered body is
// structurally identical in both versions, and nothing in procedures that
// differ anywhere. Labels are the matching key: versions must reuse labels
// for unchanged code.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cia/ir.hpp"
#include "cia/semantics.hpp"

namespace cia {

struct node_map {
  // (proc, from-label in v1) -> to-label in v2; injective, statement-preserving
  std::map<std::pair<std::string, std::string>, std::string> fwd;

  bool maps(const std::string& proc, const std::string& from) const {
    return fwd.count({proc, from}) > 0;
  }
  // mapped node sets, per version
  std::set<std::pair<std::string, std::string>> mapped_v1() const;
  std::set<std::pair<std::string, std::string>> mapped_v2() const;

  bool mapped_in(int version, const std::string& proc, const std::string& label) const;

  // procedures owning at least one unmapped node in either version
  std::set<std::string> procs_delta(const program& p1, const program& p2) const;
};

// Throws ir_error when the versions cannot be reconciled (mismatched formal
// signatures or main procedures).
std::pair<program, program> normalize_pair(const program& p1, const program& p2);

node_map structural_diff(const program& p1, const program& p2);

// External map files: {"map": [{"proc":"f","from":"n3","to":"n3"}, ...]}.
// Loading validates the partial-bijection invariants against the pair.
node_map load_map_json(const std::string& text, const program& p1, const program& p2);
std::string save_map_json(const node_map& m);

struct soundness_report {
  struct finding {
    store witness;        // main input store
    std::string reason;
  };
  std::vector<finding> violations;
  bool bounded_inconclusive = false;  // some trace ran out of fuel
  std::string note;
};

// Bounded falsification of the diff soundness conditions: for every input
// store over the declared domains, if one trace stays inside the mapped sets
// then so must the other, and the two traces must be equal.
soundness_report check_map_soundness(const program& p1, const program& p2,
                                     const node_map& m,
                                     const semantics_config& cfg = {});

// Shared domain enumeration: every combination of declared domain values for
// main's input formals (fallback values for undeclared formals).
std::vector<store> enumerate_input_stores(const program& p);

// Fallback per-formal values when no domain is declared: program constants
// plus {-1, 0, 1}.
std::vector<std::int64_t> fallback_domain(const program& p);

}  // namespace cia
