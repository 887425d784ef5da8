#include "cia/depends.hpp"

#include <algorithm>
#include <vector>

namespace cia {

std::map<std::string, std::set<std::string>> postdominators(const procedure& f) {
  std::set<std::string> all;
  for (const auto& n : f.nodes) all.insert(n.label);

  std::map<std::string, std::set<std::string>> pd;
  // iterate to a fixpoint; the CFG is acyclic so this settles quickly, and
  // the iteration also covers nodes the reverse-topological order would miss
  for (const auto& n : f.nodes)
    pd[n.label] = (n.label == f.exit) ? std::set<std::string>{f.exit} : all;

  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& n : f.nodes) {
      if (n.label == f.exit) continue;
      std::set<std::string> next;
      if (n.succ.empty()) {
        next = all;  // cannot reach the exit
      } else {
        bool first = true;
        for (const auto& s : n.succ) {
          if (!f.find_node(s)) continue;
          if (first) {
            next = pd[s];
            first = false;
          } else {
            std::set<std::string> meet;
            std::set_intersection(next.begin(), next.end(), pd[s].begin(), pd[s].end(),
                                  std::inserter(meet, meet.begin()));
            next = std::move(meet);
          }
        }
        if (first) next = all;
        next.insert(n.label);
      }
      if (next != pd[n.label]) {
        pd[n.label] = std::move(next);
        changed = true;
      }
    }
  }
  return pd;
}

std::map<std::string, std::set<std::string>> control_dependence(const procedure& f) {
  auto pd = postdominators(f);
  std::map<std::string, std::set<std::string>> cd;
  for (const auto& n1 : f.nodes) {
    if (n1.succ.size() < 2) continue;  // only branching nodes control anything
    for (const auto& n2 : f.nodes) {
      if (pd[n1.label].count(n2.label)) continue;  // n1 post-dominated by n2
      bool some_succ = false;
      for (const auto& s : n1.succ)
        if (f.find_node(s) && pd[s].count(n2.label)) some_succ = true;
      if (some_succ) cd[n1.label].insert(n2.label);
    }
  }
  return cd;
}

namespace {

struct callsite_info {
  std::string caller;
  std::string label;
  const stmt* st;
};

}  // namespace

dependency_relation compute_depends(const program& p) {
  dependency_relation rel;

  // intra-procedural seeds
  for (const auto& f : p.procs) {
    auto& dv = rel.depends_on_var[f.name];
    for (const auto& x : f.ins) dv.insert({x, x});
    for (const auto& n : f.nodes) {
      if (n.st.kind == stmt_kind::assign) {
        for (const auto& x : read_set(n)) dv.insert({n.st.target, x});
      }
      // every variable depends on itself at the node writing it, so summary
      // impact can reach outputs whose write has no upstream reads
      for (const auto& w : write_set(n)) dv.insert({w, w});
    }
    auto cd = control_dependence(f);
    for (const auto& [n1, deps] : cd) {
      const node* br = f.find_node(n1);
      auto reads = read_set(*br);
      for (const auto& n2 : deps) {
        const node* tgt = f.find_node(n2);
        for (const auto& y : write_set(*tgt))
          for (const auto& x : reads) dv.insert({y, x});
      }
    }
  }

  // call sites, for the interprocedural summary rule
  std::vector<callsite_info> calls;
  for (const auto& f : p.procs)
    for (const auto& n : f.nodes)
      if (n.st.kind == stmt_kind::call) calls.push_back({f.name, n.label, &n.st});

  // close under transitivity and summary propagation
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [proc, dv] : rel.depends_on_var) {
      // transitive: index pairs by middle variable
      std::map<std::string, std::vector<std::string>> by_left;  // x -> z* with (x,z)
      for (const auto& [y, x] : dv) by_left[y].push_back(x);
      std::vector<std::pair<std::string, std::string>> add;
      for (const auto& [y, x] : dv)
        for (const auto& z : by_left[x])
          if (!dv.count({y, z})) add.push_back({y, z});
      for (auto& t : add) {
        dv.insert(std::move(t));
        changed = true;
      }
    }
    for (const auto& cs : calls) {
      const procedure* callee = p.find_proc(cs.st->callee);
      if (!callee) continue;
      auto& callee_dv = rel.depends_on_var[callee->name];
      auto& caller_dv = rel.depends_on_var[cs.caller];
      for (std::size_t i = 0; i < cs.st->rets.size() && i < callee->outs.size(); ++i) {
        const std::string& r = cs.st->rets[i];
        const std::string& y = callee->outs[i];
        for (std::size_t j = 0; j < cs.st->args.size() && j < callee->ins.size(); ++j) {
          if (!callee_dv.count({y, callee->ins[j]})) continue;
          for (const auto& w : vars_of(cs.st->args[j]))
            if (caller_dv.insert({r, w}).second) changed = true;
        }
      }
    }
  }

  // node dependencies from the final variable relation
  for (const auto& f : p.procs) {
    auto& dv = rel.depends_on_var[f.name];
    auto& dn = rel.depends_on_node[f.name];
    for (const auto& n : f.nodes)
      for (const auto& x : write_set(n))
        for (const auto& [y, x2] : dv)
          if (x2 == x) dn.insert({y, n.label});
  }
  return rel;
}

std::map<std::pair<std::string, std::string>, std::set<std::string>> dep_of(
    const program& p1, const dependency_relation& r1, const program& p2,
    const dependency_relation& r2) {
  std::map<std::pair<std::string, std::string>, std::set<std::string>> out;
  auto collect = [&out](const program& p, const dependency_relation& r) {
    for (const auto& f : p.procs) {
      auto it = r.depends_on_var.find(f.name);
      for (const auto& y : f.outs) {
        auto& slot = out[{f.name, y}];
        if (it == r.depends_on_var.end()) continue;
        for (const auto& [yy, x] : it->second)
          if (yy == y) slot.insert(x);
      }
    }
  };
  collect(p1, r1);
  collect(p2, r2);
  return out;
}

}  // namespace cia
