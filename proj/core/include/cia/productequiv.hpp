#pragma once

// Equivalence inference over a product of the two versions. Each in-scope
// procedure yields a product procedure: both bodies run side by side with
// callee calls recorded and their returns havocked; same-callee callsite
// pairs are then constrained through the callee's own live summary
// candidates, and a trailing assertion demands the recorded call sequences
// agree after projecting to callee names.
//
// Candidates (PreEquiv per in-formal where every callsite of the procedure is
// in scope; SummaryEquiv per out-formal of in-scope procedures) start live
// and are refuted Houdini-style:
//   (a) a summary predicate that fails, or whose concrete bodies are not
//       verified to terminate normally on the entry domain, is refuted;
//   (b) a pre candidate whose callsite pairs can pass unequal actuals is
//       refuted;
//   (c) a failed call-sequence assertion refutes the pre candidates of the
//       owning procedure and of everything it can transitively call --
//       diverging call sequences invalidate entry sequences downstream.
// Checker exhaustion (enumeration budget) conservatively refutes whatever the
// exhausted check was responsible for. Facts passed in as assumed are never
// refuted. The fixpoint is the returned equivalence set.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cia/impact.hpp"
#include "cia/ir.hpp"
#include "cia/semantics.hpp"

namespace cia {

struct scope_view {
  std::set<std::string> procs;  // in-scope procedures
  // per in-scope procedure: has callsites in procedures outside the scope
  std::map<std::string, bool> external_callsites;
  // per procedure of either version: all its callsites lie in-scope
  std::map<std::string, bool> all_callsites_in_scope;
};

struct product_callsite {
  std::string label;
  std::string callee;
};

struct product_procedure {
  std::string name;          // underlying procedure
  std::string product_name;  // <name>$prod
  const procedure* v1 = nullptr;
  const procedure* v2 = nullptr;
  bool is_entry = false;                 // entry product: inputs start equal
  std::set<std::string> paired_callees;  // in-scope callees, outputs constrained
  std::vector<product_callsite> calls_v1, calls_v2;
};

std::vector<product_procedure> build_product(const program& p1, const program& p2,
                                             const std::set<std::string>& scope);

struct candidate {
  enum class kind { pre, summ };
  kind k;
  std::string proc;
  std::string formal;
  bool irrefutable = false;  // assumed facts are never refuted
  bool live = true;
  std::string refuted_because;
};

std::vector<candidate> generate_candidates(const program& p1, const program& p2,
                                           const scope_view& view,
                                           const equivalence_set& assumed);

struct checker_config {
  enum class backend_kind { enumerative, smt_stub };
  backend_kind backend = backend_kind::enumerative;
  long enum_budget = 200000;  // executions per product check
  semantics_config sem;
  unsigned shuffle_seed = 0;  // nonzero: randomize check order (fixpoint tests)
};

struct product_context {
  const program* p1 = nullptr;
  const program* p2 = nullptr;
  const scope_view* view = nullptr;
  // DepOf for summary predicates
  const std::map<std::pair<std::string, std::string>, std::set<std::string>>* depof =
      nullptr;
  checker_config cfg;
};

enum class obligation_verdict { holds, fails, unknown };

struct obligation_result {
  std::map<std::string, obligation_verdict> summ;  // per checked out-formal
  bool call_seq_ok = true;
  bool budget_exceeded = false;
  // callee pre candidates observed violated: (callee, formal)
  std::set<std::pair<std::string, std::string>> violated_pres;
};

// One bounded check of a product procedure against the live candidate set.
obligation_result check_product_obligation(const product_procedure& pp,
                                           const std::vector<candidate>& candidates,
                                           const product_context& ctx);

struct inference_log {
  std::vector<std::string> events;
};

equivalence_set houdini_infer(const std::vector<product_procedure>& products,
                              std::vector<candidate> candidates,
                              const product_context& ctx,
                              inference_log* log = nullptr);

}  // namespace cia
