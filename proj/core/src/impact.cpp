#include "cia/impact.hpp"

namespace cia {

void equivalence_set::add_pre(const std::string& proc, const std::string& x,
                              fact_provenance pv) {
  pre.emplace(std::make_pair(proc, x), pv);
}

void equivalence_set::add_summ(const std::string& proc, const std::string& y,
                               fact_provenance pv) {
  summ.emplace(std::make_pair(proc, y), pv);
}

void equivalence_set::merge(const equivalence_set& other) {
  for (const auto& [k, v] : other.pre) pre.emplace(k, v);
  for (const auto& [k, v] : other.summ) summ.emplace(k, v);
}

std::set<std::pair<std::string, std::string>> impact_result::nodes_union() const {
  auto out = nodes[0];
  out.insert(nodes[1].begin(), nodes[1].end());
  return out;
}

std::set<std::pair<std::string, std::string>> impact_result::vars_union() const {
  auto out = vars[0];
  out.insert(vars[1].begin(), vars[1].end());
  return out;
}

std::set<std::pair<std::string, std::string>> impact_result::summs_union() const {
  auto out = summs[0];
  out.insert(summs[1].begin(), summs[1].end());
  return out;
}

std::set<std::pair<std::string, std::string>> impact_result::mapped_nodes(
    const node_map& m) const {
  std::set<std::pair<std::string, std::string>> out;
  auto m1 = m.mapped_v1();
  auto m2 = m.mapped_v2();
  for (const auto& n : nodes[0])
    if (m1.count(n)) out.insert(n);
  for (const auto& n : nodes[1])
    if (m2.count(n)) out.insert(n);
  return out;
}

bool impact_result::subset_of(const impact_result& other) const {
  for (int v = 0; v < 2; ++v) {
    for (const auto& x : nodes[v])
      if (!other.nodes[v].count(x)) return false;
    for (const auto& x : vars[v])
      if (!other.vars[v].count(x)) return false;
    for (const auto& x : summs[v])
      if (!other.summs[v].count(x)) return false;
    for (const auto& x : exprs[v])
      if (!other.exprs[v].count(x)) return false;
  }
  return true;
}

namespace {

struct engine {
  const program& p;
  const std::set<std::pair<std::string, std::string>>& mapped;
  const dependency_relation& dep;
  const equivalence_set& eq;

  std::set<std::pair<std::string, std::string>> i_node;
  std::set<std::pair<std::string, std::string>> i_var;
  std::set<std::pair<std::string, std::string>> i_summ;
  std::set<std::tuple<std::string, std::string, int>> i_expr;
  bool changed = false;

  bool is_mapped(const std::string& proc, const std::string& label) const {
    return mapped.count({proc, label}) > 0;
  }
  void add_node(const std::string& proc, const std::string& label) {
    if (i_node.insert({proc, label}).second) changed = true;
  }
  void add_var(const std::string& proc, const std::string& v) {
    if (i_var.insert({proc, v}).second) changed = true;
  }
  void add_summ(const std::string& proc, const std::string& y) {
    if (i_summ.insert({proc, y}).second) changed = true;
  }
  void add_expr(const std::string& proc, const std::string& label, int idx) {
    if (i_expr.insert({proc, label, idx}).second) changed = true;
  }

  void run() {
    do {
      changed = false;
      for (const auto& f : p.procs) apply_rules(f);
    } while (changed);
  }

  void apply_rules(const procedure& f) {
    for (const auto& n : f.nodes) {
      bool node_mapped = is_mapped(f.name, n.label);
      if (!node_mapped) add_node(f.name, n.label);

      if (i_node.count({f.name, n.label}))
        for (const auto& x : write_set(n)) add_var(f.name, x);

      for (const auto& x : read_set(n))
        if (i_var.count({f.name, x})) add_node(f.name, n.label);

      if (n.st.kind != stmt_kind::call) continue;
      const procedure* g = p.find_proc(n.st.callee);
      if (!g) continue;

      for (std::size_t i = 0; i < n.st.args.size(); ++i) {
        // actual expressions at changed call nodes are change sources, like
        // every other part of the unmapped statement
        if (!node_mapped) add_expr(f.name, n.label, static_cast<int>(i));
        for (const auto& w : vars_of(n.st.args[i]))
          if (i_var.count({f.name, w})) add_expr(f.name, n.label, static_cast<int>(i));

        if (i_expr.count({f.name, n.label, static_cast<int>(i)}) &&
            i < g->ins.size()) {
          const std::string& x = g->ins[i];
          if (!eq.pre_holds(g->name, x)) add_var(g->name, x);
        }
      }

      for (std::size_t j = 0; j < n.st.rets.size() && j < g->outs.size(); ++j) {
        const std::string& r = n.st.rets[j];
        const std::string& y = g->outs[j];
        if (i_summ.count({g->name, y})) add_var(f.name, r);

        // impacted actual flowing through the callee to this return
        for (std::size_t i = 0; i < n.st.args.size() && i < g->ins.size(); ++i) {
          const std::string& x = g->ins[i];
          if (!dep.var_on(g->name, y, x)) continue;
          if (!i_expr.count({f.name, n.label, static_cast<int>(i)})) continue;
          if (eq.pre_holds(g->name, x) && eq.summ_holds(g->name, y)) continue;
          add_var(f.name, r);
        }

        // callee summary impact propagating into this procedure's summaries
        if (i_summ.count({g->name, y}))
          for (const auto& yf : f.outs) {
            if (!dep.var_on(f.name, yf, r)) continue;
            if (eq.summ_holds(f.name, yf)) continue;
            add_summ(f.name, yf);
          }
      }
    }

    // out-formals depending on an unmapped node
    for (const auto& y : f.outs) {
      if (eq.summ_holds(f.name, y)) continue;
      auto it = dep.depends_on_node.find(f.name);
      if (it == dep.depends_on_node.end()) continue;
      for (const auto& [yy, lbl] : it->second) {
        if (yy != y) continue;
        if (!is_mapped(f.name, lbl)) add_summ(f.name, y);
      }
    }
  }
};

}  // namespace

impact_result sem_dcia(const program& p1, const program& p2, const node_map& map,
                       const dependency_relation& dep1, const dependency_relation& dep2,
                       const equivalence_set& eq) {
  impact_result out;
  auto m1 = map.mapped_v1();
  auto m2 = map.mapped_v2();
  const program* ps[2] = {&p1, &p2};
  const std::set<std::pair<std::string, std::string>>* ms[2] = {&m1, &m2};
  const dependency_relation* ds[2] = {&dep1, &dep2};
  for (int v = 0; v < 2; ++v) {
    engine e{*ps[v], *ms[v], *ds[v], eq};
    e.run();
    out.nodes[v] = std::move(e.i_node);
    out.vars[v] = std::move(e.i_var);
    out.summs[v] = std::move(e.i_summ);
    out.exprs[v] = std::move(e.i_expr);
  }
  return out;
}

impact_result dcia(const program& p1, const program& p2, const node_map& map,
                   const dependency_relation& dep1, const dependency_relation& dep2) {
  return sem_dcia(p1, p2, map, dep1, dep2, equivalence_set{});
}

}  // namespace cia
