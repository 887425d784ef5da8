#include "cia/anytime.hpp"

#include <deque>

#include "cia/depends.hpp"

namespace cia {

namespace {

using dist_map = std::map<std::string, int>;

std::map<std::string, std::set<std::string>> union_call_graph(const program& p1,
                                                              const program& p2) {
  auto g = call_graph(p1);
  for (const auto& [f, callees] : call_graph(p2)) g[f].insert(callees.begin(), callees.end());
  return g;
}

std::map<std::string, std::set<std::string>> reverse_graph(
    const std::map<std::string, std::set<std::string>>& g) {
  std::map<std::string, std::set<std::string>> r;
  for (const auto& [f, _] : g) r[f];
  for (const auto& [f, callees] : g)
    for (const auto& c : callees) r[c].insert(f);
  return r;
}

dist_map bfs(const std::map<std::string, std::set<std::string>>& g,
             const std::set<std::string>& sources) {
  dist_map d;
  std::deque<std::string> work;
  for (const auto& s : sources) {
    d[s] = 0;
    work.push_back(s);
  }
  while (!work.empty()) {
    std::string f = work.front();
    work.pop_front();
    auto it = g.find(f);
    if (it == g.end()) continue;
    for (const auto& n : it->second)
      if (!d.count(n)) {
        d[n] = d[f] + 1;
        work.push_back(n);
      }
  }
  return d;
}

bool within(const dist_map& d, const std::string& n, int k) {
  auto it = d.find(n);
  return it != d.end() && it->second <= k;
}

}  // namespace

std::set<std::string> procs_within(const std::set<std::string>& procs_delta,
                                   const program& p1, const program& p2, int k) {
  auto fwd = union_call_graph(p1, p2);
  auto bwd = reverse_graph(fwd);

  dist_map delta_fwd = bfs(fwd, procs_delta);  // descendants of the change
  dist_map delta_bwd = bfs(bwd, procs_delta);  // ancestors of the change

  std::set<std::string> names;
  for (const auto& [f, _] : fwd) names.insert(f);

  std::set<std::string> out;
  for (const auto& g : names) {
    dist_map g_fwd = bfs(fwd, {g});
    dist_map g_bwd = bfs(bwd, {g});
    bool in = false;
    for (const auto& h : names) {
      if ((within(delta_fwd, h, k) && within(g_fwd, h, k)) ||   // common descendant
          (within(delta_bwd, h, k) && within(g_bwd, h, k))) {   // common ancestor
        in = true;
        break;
      }
    }
    if (in) out.insert(g);
  }
  return out;
}

scope_view drop_procs(const program& p1, const program& p2,
                      const std::set<std::string>& scope) {
  scope_view view;
  view.procs = scope;
  auto fwd = union_call_graph(p1, p2);
  auto bwd = reverse_graph(fwd);
  for (const auto& [f, callers] : bwd) {
    bool all_in = true;
    for (const auto& c : callers)
      if (!scope.count(c)) all_in = false;
    view.all_callsites_in_scope[f] = all_in;
    if (scope.count(f)) view.external_callsites[f] = !all_in;
  }
  return view;
}

namespace {

// Harvest facts the impact analysis already justifies: a formal it proved
// non-impacted has equal value sequences across the versions. Pre facts are
// additionally gated on all callsites lying in fully mapped procedures of
// both versions, which guards against partial external maps.
void harvest(const program& p1, const program& p2, const node_map& map,
             const impact_result& impact, equivalence_set& eq) {
  auto vars_u = impact.vars_union();
  auto summs_u = impact.summs_union();

  auto proc_fully_mapped = [&](const program& p, int version, const std::string& name) {
    const procedure* f = p.find_proc(name);
    if (!f) return false;
    for (const auto& n : f->nodes)
      if (!map.mapped_in(version, name, n.label)) return false;
    return true;
  };

  auto callsites_admissible = [&](const std::string& callee) {
    const program* ps[2] = {&p1, &p2};
    for (int v = 0; v < 2; ++v)
      for (const auto& f : ps[v]->procs)
        for (const auto& n : f.nodes)
          if (n.st.kind == stmt_kind::call && n.st.callee == callee)
            if (!proc_fully_mapped(*ps[v], v + 1, f.name)) return false;
    return true;
  };

  for (const auto& f : p1.procs) {
    for (const auto& x : f.ins)
      if (!vars_u.count({f.name, x}) && callsites_admissible(f.name))
        eq.add_pre(f.name, x, fact_provenance::dataflow);
    for (const auto& y : f.outs)
      if (!summs_u.count({f.name, y}))
        eq.add_summ(f.name, y, fact_provenance::dataflow);
  }
}

}  // namespace

anytime_result sem_dcia_anytime(const program& p1, const program& p2,
                                const node_map& map, const dependency_relation& dep1,
                                const dependency_relation& dep2,
                                const anytime_options& opts,
                                const equivalence_set& assumed) {
  anytime_result res;
  equivalence_set eq = assumed;
  res.initial = sem_dcia(p1, p2, map, dep1, dep2, eq);
  impact_result current = res.initial;

  std::set<std::string> all_procs;
  for (const auto& f : p1.procs) all_procs.insert(f.name);

  auto delta = map.procs_delta(p1, p2);
  auto depof = dep_of(p1, dep1, p2, dep2);
  std::set<std::string> scope = delta;

  int hard_cap = static_cast<int>(all_procs.size());
  for (int k = 0; scope != all_procs && k <= hard_cap; ++k) {
    if (opts.k_max >= 0 && k > opts.k_max) break;

    harvest(p1, p2, map, current, eq);
    scope = procs_within(delta, p1, p2, k);

    scope_view view = drop_procs(p1, p2, scope);
    auto products = build_product(p1, p2, view.procs);
    auto candidates = generate_candidates(p1, p2, view, eq);
    product_context ctx{&p1, &p2, &view, &depof, opts.checker};
    equivalence_set inferred = houdini_infer(products, candidates, ctx, &res.log);
    eq.merge(inferred);

    current = sem_dcia(p1, p2, map, dep1, dep2, eq);
    res.iterations.push_back({k, scope, eq, current});
  }
  res.eq = eq;
  return res;
}

}  // namespace cia
