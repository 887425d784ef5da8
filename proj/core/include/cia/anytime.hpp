#pragma once

// Scope-widening driver: run the impact analysis, harvest equivalences from
// provably non-impacted formals, infer more over a product restricted to
// procedures near the change, re-run the analysis, widen, repeat. Stopping
// after any iteration yields a sound (just less precise) impacted set.

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cia/impact.hpp"
#include "cia/productequiv.hpp"

namespace cia {

// Procedures interacting with the changed set within call-graph distance k:
// those sharing, within k calls in the union call graph of both versions, a
// descendant or an ancestor with a changed procedure. k = 0 gives the changed
// set itself; large k saturates to every procedure connected to it.
std::set<std::string> procs_within(const std::set<std::string>& procs_delta,
                                   const program& p1, const program& p2, int k);

// Scope metadata for the inference: bodies outside the scope are not
// inspected, only whether callsites escape it.
scope_view drop_procs(const program& p1, const program& p2,
                      const std::set<std::string>& scope);

struct anytime_options {
  // loop iterations run k = 0 .. k_max; negative means widen until the scope
  // covers the whole program
  int k_max = -1;
  checker_config checker;
};

struct anytime_iteration {
  int k = 0;
  std::set<std::string> scope;
  equivalence_set eq;      // accumulated facts after this iteration
  impact_result impact;    // analysis result with those facts
};

struct anytime_result {
  impact_result initial;   // no equivalence facts (plain dataflow impact)
  std::vector<anytime_iteration> iterations;
  equivalence_set eq;      // final accumulated facts
  inference_log log;

  const impact_result& final_impact() const {
    return iterations.empty() ? initial : iterations.back().impact;
  }
};

anytime_result sem_dcia_anytime(const program& p1, const program& p2,
                                const node_map& map,
                                const dependency_relation& dep1,
                                const dependency_relation& dep2,
                                const anytime_options& opts = {},
                                const equivalence_set& assumed = {});

}  // namespace cia
