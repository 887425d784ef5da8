#include "cia/diffmap.hpp"

#include <algorithm>
#include <functional>

#include <nlohmann/json.hpp>

namespace cia {

using nlohmann::json;

std::set<std::pair<std::string, std::string>> node_map::mapped_v1() const {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : fwd) out.insert(k);
  return out;
}

std::set<std::pair<std::string, std::string>> node_map::mapped_v2() const {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : fwd) out.insert({k.first, v});
  return out;
}

bool node_map::mapped_in(int version, const std::string& proc,
                         const std::string& label) const {
  if (version == 1) return fwd.count({proc, label}) > 0;
  for (const auto& [k, v] : fwd)
    if (k.first == proc && v == label) return true;
  return false;
}

std::set<std::string> node_map::procs_delta(const program& p1, const program& p2) const {
  std::set<std::string> delta;
  auto m1 = mapped_v1();
  auto m2 = mapped_v2();
  for (const auto& f : p1.procs)
    for (const auto& n : f.nodes)
      if (!m1.count({f.name, n.label})) delta.insert(f.name);
  for (const auto& f : p2.procs)
    for (const auto& n : f.nodes)
      if (!m2.count({f.name, n.label})) delta.insert(f.name);
  return delta;
}

namespace {

procedure empty_counterpart(const procedure& f) {
  procedure g;
  g.name = f.name;
  g.ins = f.ins;
  g.outs = f.outs;
  g.vars = f.vars;
  node n;
  n.label = f.name + "$entry";
  n.st = stmt::mkskip();
  g.nodes.push_back(std::move(n));
  g.entry = g.exit = g.nodes.front().label;
  return g;
}

void merge_vars(procedure& a, procedure& b) {
  std::vector<std::string> merged = a.vars;
  for (const auto& v : b.vars)
    if (std::find(merged.begin(), merged.end(), v) == merged.end())
      merged.push_back(v);
  a.vars = merged;
  b.vars = merged;
}

void add_missing_nodes(procedure& dst, const procedure& src) {
  std::vector<node> added;
  for (const auto& n : src.nodes) {
    if (dst.find_node(n.label)) continue;
    node u;
    u.label = n.label;
    u.st = stmt::mkskip();
    // unreachable, empty successor list
    added.push_back(std::move(u));
  }
  if (added.empty()) return;
  // keep the exit node last
  auto it = std::find_if(dst.nodes.begin(), dst.nodes.end(),
                         [&](const node& x) { return x.label == dst.exit; });
  dst.nodes.insert(it, std::make_move_iterator(added.begin()),
                   std::make_move_iterator(added.end()));
}

}  // namespace

std::pair<program, program> normalize_pair(const program& p1, const program& p2) {
  if (p1.main_name != p2.main_name)
    throw ir_error("normalize: main procedures differ ('" + p1.main_name + "' vs '" +
                   p2.main_name + "')");
  program a = p1, b = p2;

  for (const auto& f : p1.procs) {
    const procedure* g = p2.find_proc(f.name);
    if (!g) continue;
    if (f.ins != g->ins || f.outs != g->outs)
      throw ir_error("normalize: procedure '" + f.name +
                     "' has different formal signatures in the two versions");
  }
  for (const auto& f : p1.procs)
    if (!b.find_proc(f.name)) b.procs.push_back(empty_counterpart(f));
  for (const auto& g : p2.procs)
    if (!a.find_proc(g.name)) a.procs.push_back(empty_counterpart(*p2.find_proc(g.name)));

  for (auto& f : a.procs) {
    procedure* g = b.find_proc(f.name);
    merge_vars(f, *g);
    add_missing_nodes(f, *g);
    add_missing_nodes(*g, f);
  }

  // domains: union of declarations (must agree where both declare)
  for (const auto& [k, dom] : b.domains) {
    auto it = a.domains.find(k);
    if (it == a.domains.end())
      a.domains[k] = dom;
    else if (it->second != dom)
      throw ir_error("normalize: domain for '" + k + "' differs between versions");
  }
  b.domains = a.domains;
  return {a, b};
}

node_map structural_diff(const program& p1, const program& p2) {
  node_map m;
  for (const auto& f : p1.procs) {
    const procedure* g = p2.find_proc(f.name);
    if (!g) continue;
    bool equal = f.entry == g->entry && f.exit == g->exit &&
                 f.nodes.size() == g->nodes.size();
    if (equal) {
      for (const auto& n : f.nodes) {
        const node* n2 = g->find_node(n.label);
        if (!n2 || !(n.st == n2->st) || n.succ != n2->succ) {
          equal = false;
          break;
        }
      }
    }
    if (equal)
      for (const auto& n : f.nodes) m.fwd[{f.name, n.label}] = n.label;
  }
  return m;
}

node_map load_map_json(const std::string& text, const program& p1, const program& p2) {
  json j = json::parse(text);
  node_map m;
  std::set<std::pair<std::string, std::string>> images;
  for (const auto& e : j.at("map")) {
    std::string proc = e.at("proc").get<std::string>();
    std::string from = e.at("from").get<std::string>();
    std::string to = e.at("to").get<std::string>();
    const procedure* f1 = p1.find_proc(proc);
    const procedure* f2 = p2.find_proc(proc);
    if (!f1 || !f2) throw ir_error("map: unknown procedure '" + proc + "'");
    const node* n1 = f1->find_node(from);
    const node* n2 = f2->find_node(to);
    if (!n1) throw ir_error("map: unknown node '" + proc + ":" + from + "' in version 1");
    if (!n2) throw ir_error("map: unknown node '" + proc + ":" + to + "' in version 2");
    if (!(n1->st == n2->st))
      throw ir_error("map: statements differ at '" + proc + ":" + from + "' -> '" + to +
                     "' (map must preserve statements)");
    if (m.fwd.count({proc, from}))
      throw ir_error("map: node '" + proc + ":" + from + "' mapped twice");
    if (!images.insert({proc, to}).second)
      throw ir_error("map: node '" + proc + ":" + to + "' is the image of two nodes");
    m.fwd[{proc, from}] = to;
  }
  return m;
}

std::string save_map_json(const node_map& m) {
  json entries = json::array();
  for (const auto& [k, v] : m.fwd)
    entries.push_back({{"proc", k.first}, {"from", k.second}, {"to", v}});
  json j{{"map", entries}};
  return j.dump(2) + "\n";
}

std::vector<std::int64_t> fallback_domain(const program& p) {
  std::set<std::int64_t> vals{-1, 0, 1};
  std::function<void(const expr&)> walk = [&](const expr& e) {
    if (e.kind == expr_kind::constant) vals.insert(e.value);
    for (const auto& a : e.args) walk(a);
  };
  for (const auto& f : p.procs)
    for (const auto& n : f.nodes) {
      if (n.st.kind == stmt_kind::assign || n.st.kind == stmt_kind::assume)
        walk(n.st.rhs);
      for (const auto& a : n.st.args) walk(a);
    }
  return {vals.begin(), vals.end()};
}

std::vector<store> enumerate_input_stores(const program& p) {
  const procedure& m = p.main();
  std::vector<std::vector<std::int64_t>> doms;
  auto fallback = fallback_domain(p);
  for (const auto& x : m.ins) {
    auto it = p.domains.find(x);
    doms.push_back(it != p.domains.end() ? it->second : fallback);
  }
  std::vector<store> out;
  std::vector<std::size_t> idx(doms.size(), 0);
  while (true) {
    store s;
    for (std::size_t i = 0; i < doms.size(); ++i)
      s.bind(m.ins[i], doms[i][idx[i]]);
    out.push_back(std::move(s));
    std::size_t i = 0;
    for (; i < doms.size(); ++i) {
      if (++idx[i] < doms[i].size()) break;
      idx[i] = 0;
    }
    if (i == doms.size()) break;
  }
  return out;
}

soundness_report check_map_soundness(const program& p1, const program& p2,
                                     const node_map& m, const semantics_config& cfg) {
  soundness_report rep;
  auto m1 = m.mapped_v1();
  auto m2 = m.mapped_v2();
  auto stays_in = [](const trace& t,
                     const std::set<std::pair<std::string, std::string>>& mapped) {
    for (const auto& st : t.states)
      if (!mapped.count({st.proc, st.label})) return false;
    return true;
  };

  for (const auto& inputs : enumerate_input_stores(p1)) {
    trace t1 = run(p1, inputs, cfg);
    trace t2 = run(p2, inputs, cfg);
    if (t1.status == term_status::fuel_exhausted ||
        t2.status == term_status::fuel_exhausted) {
      rep.bounded_inconclusive = true;
      continue;
    }
    bool s1 = stays_in(t1, m1);
    bool s2 = stays_in(t2, m2);
    if (s1 != s2) {
      rep.violations.push_back(
          {inputs, std::string("trace ") + (s1 ? "1" : "2") +
                       " stays inside the mapped set but the other does not"});
      continue;
    }
    if (s1 && !(t1.states == t2.states && t1.status == t2.status))
      rep.violations.push_back({inputs, "traces inside the mapped set differ"});
  }
  rep.note = rep.bounded_inconclusive
                 ? "bounded check; some traces exhausted fuel and were skipped"
                 : "bounded check over the declared domains";
  return rep;
}

}  // namespace cia
