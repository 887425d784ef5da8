#pragma once

// Dataflow change-impact fixpoint, optionally strengthened by equivalence
// facts. Unmapped nodes seed the impact; it propagates through writes, reads,
// call arguments, and procedure summaries. The equivalence-aware variant
// blocks propagation where PreEquiv/SummaryEquiv facts apply:
//
//   - an impacted actual does not impact the callee formal under PreEquiv
//   - an out-formal's summary is not impacted under SummaryEquiv
//   - an impacted actual does not impact the received return under
//     PreEquiv(formal) together with SummaryEquiv(out-formal)
//
// Both versions are analyzed with the same facts and the results unioned.
// With no facts the analysis is plain dataflow impact (dcia).

#include <map>
#include <set>
#include <string>
#include <tuple>

#include "cia/depends.hpp"
#include "cia/diffmap.hpp"
#include "cia/ir.hpp"

namespace cia {

enum class fact_provenance { dataflow, inferred, assumed };

struct equivalence_set {
  // (proc, in-formal) and (proc, out-formal)
  std::map<std::pair<std::string, std::string>, fact_provenance> pre;
  std::map<std::pair<std::string, std::string>, fact_provenance> summ;

  bool pre_holds(const std::string& proc, const std::string& x) const {
    return pre.count({proc, x}) > 0;
  }
  bool summ_holds(const std::string& proc, const std::string& y) const {
    return summ.count({proc, y}) > 0;
  }
  void add_pre(const std::string& proc, const std::string& x, fact_provenance pv);
  void add_summ(const std::string& proc, const std::string& y, fact_provenance pv);
  void merge(const equivalence_set& other);
  std::size_t size() const { return pre.size() + summ.size(); }

  bool operator==(const equivalence_set&) const = default;
};

struct impact_result {
  // indexed by version (0 -> v1, 1 -> v2)
  std::set<std::pair<std::string, std::string>> nodes[2];            // (proc, label)
  std::set<std::pair<std::string, std::string>> vars[2];             // (proc, var)
  std::set<std::pair<std::string, std::string>> summs[2];            // (proc, out)
  std::set<std::tuple<std::string, std::string, int>> exprs[2];      // (proc, label, arg)

  std::set<std::pair<std::string, std::string>> nodes_union() const;
  std::set<std::pair<std::string, std::string>> vars_union() const;
  std::set<std::pair<std::string, std::string>> summs_union() const;

  // impacted nodes that the map covers (the interesting, unchanged ones)
  std::set<std::pair<std::string, std::string>> mapped_nodes(const node_map& m) const;

  bool subset_of(const impact_result& other) const;
};

impact_result sem_dcia(const program& p1, const program& p2, const node_map& map,
                       const dependency_relation& dep1, const dependency_relation& dep2,
                       const equivalence_set& eq);

impact_result dcia(const program& p1, const program& p2, const node_map& map,
                   const dependency_relation& dep1, const dependency_relation& dep2);

}  // namespace cia
