#pragma once

// Brute-force ground truth, by direct enumeration over the declared finite
// domains. A node is impacted when some input store makes the sequence of
// values of one of its read variables differ between the versions' traces
// (or when it is unmapped). The equivalence oracles check the entry-sequence
// and transition-relation definitions the same way. Fuel exhaustion anywhere
// downgrades would-be negative verdicts to unknown; it never flips one.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cia/diffmap.hpp"
#include "cia/ir.hpp"
#include "cia/semantics.hpp"

namespace cia {

enum class verdict { holds, fails, unknown };
enum class impact_verdict { impacted, not_impacted, unknown };

const char* to_string(verdict v);
const char* to_string(impact_verdict v);

struct oracle_config {
  semantics_config sem;
  bool havoc_uninit = false;
};

struct node_verdict {
  int version;  // 1 or 2
  std::string proc;
  std::string label;
  impact_verdict v;
};

// Per-node verdicts for all nodes of both versions.
std::vector<node_verdict> oracle_impacted(const program& p1, const program& p2,
                                          const node_map& m,
                                          const oracle_config& cfg = {});

verdict oracle_preequiv(const program& p1, const program& p2, const node_map& m,
                        const std::string& proc, const std::string& in_formal,
                        const oracle_config& cfg = {});

// dep_set is DepOf(out_formal), supplied by the dependency analysis; entry
// stores range over the shared value universe.
verdict oracle_summaryequiv(const program& p1, const program& p2,
                            const std::string& proc, const std::string& out_formal,
                            const std::set<std::string>& dep_set,
                            const oracle_config& cfg = {});

// Shared finite value universe for procedure-entry enumeration: declared
// domain values, program constants, and {-1, 0, 1}.
std::vector<std::int64_t> value_universe(const program& p1, const program& p2);

}  // namespace cia
