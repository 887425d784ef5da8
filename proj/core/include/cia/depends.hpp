#pragma once

// Dependency relations over one lowered program:
//
//   depends_on_var[f]  : (y, x) -- y is data- or control-dependent on x in f
//   depends_on_node[f] : (y, n) -- y depends on a variable written at node n
//
// Seeded by: (x, x) for input formals; writes depending on same-node reads
// (assign nodes only -- calls are governed by the summary rule); writes in
// control-dependent nodes depending on the branch condition's reads. Closed
// under transitivity and interprocedural summary propagation. A variable
// receiving a call output additionally depends on itself, so summary impacts
// propagate through direct receive-and-return chains.

#include <map>
#include <set>
#include <string>

#include "cia/ir.hpp"

namespace cia {

using var_pair_set = std::set<std::pair<std::string, std::string>>;

struct dependency_relation {
  // per procedure: (y, x) pairs
  std::map<std::string, var_pair_set> depends_on_var;
  // per procedure: (y, node-label) pairs
  std::map<std::string, var_pair_set> depends_on_node;

  bool var_on(const std::string& proc, const std::string& y, const std::string& x) const {
    auto it = depends_on_var.find(proc);
    return it != depends_on_var.end() && it->second.count({y, x}) > 0;
  }
  bool node_on(const std::string& proc, const std::string& y, const std::string& n) const {
    auto it = depends_on_node.find(proc);
    return it != depends_on_node.end() && it->second.count({y, n}) > 0;
  }
};

// Post-dominance sets over an acyclic single-exit CFG. Nodes that cannot
// reach the exit use the full-set convention so meets stay well-defined.
std::map<std::string, std::set<std::string>> postdominators(const procedure& f);

// control_dependence(f)[n1] = nodes control-dependent on branching node n1.
std::map<std::string, std::set<std::string>> control_dependence(const procedure& f);

dependency_relation compute_depends(const program& p);

// DepOf(y) for out-formal y of proc: variables y depends on in either version.
std::map<std::pair<std::string, std::string>, std::set<std::string>> dep_of(
    const program& p1, const dependency_relation& r1, const program& p2,
    const dependency_relation& r2);

}  // namespace cia
