#include "cia/oracles.hpp"

#include <algorithm>

namespace cia {

const char* to_string(verdict v) {
  switch (v) {
    case verdict::holds: return "holds";
    case verdict::fails: return "fails";
    case verdict::unknown: return "unknown";
  }
  return "?";
}

const char* to_string(impact_verdict v) {
  switch (v) {
    case impact_verdict::impacted: return "impacted";
    case impact_verdict::not_impacted: return "not-impacted";
    case impact_verdict::unknown: return "unknown";
  }
  return "?";
}

namespace {

using value_seq = std::vector<std::optional<value>>;

// A definite difference survives truncation: a mismatch at a common index is
// real; a length mismatch is real only when neither trace was truncated.
bool definitely_differ(const value_seq& a, const value_seq& b, bool truncated) {
  std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i)
    if (a[i] != b[i]) return true;
  if (a.size() != b.size() && !truncated) return true;
  return false;
}

std::vector<store> havoc_extension(const program& p1, const program& p2,
                                   const std::string& proc, const store& base,
                                   const oracle_config& cfg) {
  if (!cfg.havoc_uninit) return {base};
  // variables read somewhere but written nowhere (either version)
  std::set<std::string> uninit;
  for (const program* p : {&p1, &p2}) {
    const procedure* f = p->find_proc(proc);
    if (!f) continue;
    std::set<std::string> written;
    for (const auto& n : f->nodes) {
      auto w = write_set(n);
      written.insert(w.begin(), w.end());
    }
    for (const auto& n : f->nodes)
      for (const auto& r : read_set(n))
        if (!written.count(r) && !f->is_in_formal(r)) uninit.insert(r);
  }
  for (const auto& [v, _] : base.m) uninit.erase(v);
  if (uninit.empty()) return {base};
  auto universe = value_universe(p1, p2);
  std::vector<store> out{base};
  for (const auto& v : uninit) {
    std::vector<store> next;
    for (const auto& s : out)
      for (auto val : universe) {
        store s2 = s;
        s2.bind(v, val);
        next.push_back(std::move(s2));
      }
    out = std::move(next);
  }
  return out;
}

}  // namespace

std::vector<std::int64_t> value_universe(const program& p1, const program& p2) {
  std::set<std::int64_t> vals{-1, 0, 1};
  for (const program* p : {&p1, &p2}) {
    for (const auto& [x, dom] : p->domains) vals.insert(dom.begin(), dom.end());
    for (auto c : fallback_domain(*p)) vals.insert(c);
  }
  return {vals.begin(), vals.end()};
}

std::vector<node_verdict> oracle_impacted(const program& p1, const program& p2,
                                          const node_map& m, const oracle_config& cfg) {
  // mapped pairs get one shared verdict; everything unmapped is impacted
  std::map<std::pair<std::string, std::string>, impact_verdict> mapped_verdicts;
  for (const auto& [k, to] : m.fwd) mapped_verdicts[k] = impact_verdict::not_impacted;

  bool any_fuel = false;
  for (const auto& base : enumerate_input_stores(p1)) {
    for (const auto& inputs : havoc_extension(p1, p2, p1.main_name, base, cfg)) {
      trace t1 = run(p1, inputs, cfg.sem);
      trace t2 = run(p2, inputs, cfg.sem);
      bool truncated = t1.status == term_status::fuel_exhausted ||
                       t2.status == term_status::fuel_exhausted;
      if (truncated) any_fuel = true;
      for (auto& [key, v] : mapped_verdicts) {
        if (v == impact_verdict::impacted) continue;
        const auto& [proc, from] = key;
        const std::string& to = m.fwd.at(key);
        const procedure* f1 = p1.find_proc(proc);
        const node* n1 = f1 ? f1->find_node(from) : nullptr;
        if (!n1) continue;
        for (const auto& x : read_set(*n1)) {
          value_seq s1 = project_values(t1, proc, from, x);
          value_seq s2 = project_values(t2, proc, to, x);
          if (definitely_differ(s1, s2, truncated)) {
            v = impact_verdict::impacted;
            break;
          }
        }
      }
    }
  }
  if (any_fuel)
    for (auto& [key, v] : mapped_verdicts)
      if (v == impact_verdict::not_impacted) v = impact_verdict::unknown;

  std::vector<node_verdict> out;
  auto m2 = m.mapped_v2();
  for (const auto& f : p1.procs)
    for (const auto& n : f.nodes) {
      auto it = mapped_verdicts.find({f.name, n.label});
      out.push_back({1, f.name, n.label,
                     it == mapped_verdicts.end() ? impact_verdict::impacted : it->second});
    }
  for (const auto& f : p2.procs)
    for (const auto& n : f.nodes) {
      impact_verdict v = impact_verdict::impacted;
      if (m2.count({f.name, n.label})) {
        for (const auto& [k, to] : m.fwd)
          if (k.first == f.name && to == n.label) {
            v = mapped_verdicts.at(k);
            break;
          }
      }
      out.push_back({2, f.name, n.label, v});
    }
  return out;
}

verdict oracle_preequiv(const program& p1, const program& p2, const node_map& m,
                        const std::string& proc, const std::string& in_formal,
                        const oracle_config& cfg) {
  const procedure* f1 = p1.find_proc(proc);
  const procedure* f2 = p2.find_proc(proc);
  if (!f1 || !f2) throw ir_error("oracle_preequiv: unknown procedure '" + proc + "'");
  // entry-node counterpart: the map where defined, the shared label otherwise
  std::string e1 = f1->entry;
  std::string e2 = m.maps(proc, e1) ? m.fwd.at({proc, e1}) : f2->entry;

  bool any_fuel = false;
  for (const auto& base : enumerate_input_stores(p1)) {
    for (const auto& inputs : havoc_extension(p1, p2, p1.main_name, base, cfg)) {
      trace t1 = run(p1, inputs, cfg.sem);
      trace t2 = run(p2, inputs, cfg.sem);
      bool truncated = t1.status == term_status::fuel_exhausted ||
                       t2.status == term_status::fuel_exhausted;
      if (truncated) any_fuel = true;
      auto s1 = project_values(t1, proc, e1, in_formal);
      auto s2 = project_values(t2, proc, e2, in_formal);
      if (definitely_differ(s1, s2, truncated)) return verdict::fails;
    }
  }
  return any_fuel ? verdict::unknown : verdict::holds;
}

verdict oracle_summaryequiv(const program& p1, const program& p2,
                            const std::string& proc, const std::string& out_formal,
                            const std::set<std::string>& dep_set,
                            const oracle_config& cfg) {
  const procedure* f1 = p1.find_proc(proc);
  const procedure* f2 = p2.find_proc(proc);
  if (!f1 || !f2) throw ir_error("oracle_summaryequiv: unknown procedure '" + proc + "'");

  auto universe = value_universe(p1, p2);
  // entry stores bind the input formals only
  std::vector<store> entries;
  {
    std::vector<std::size_t> idx(f1->ins.size(), 0);
    while (true) {
      store s;
      for (std::size_t i = 0; i < f1->ins.size(); ++i)
        s.bind(f1->ins[i], universe[idx[i]]);
      entries.push_back(std::move(s));
      std::size_t i = 0;
      for (; i < idx.size(); ++i) {
        if (++idx[i] < universe.size()) break;
        idx[i] = 0;
      }
      if (i == idx.size()) break;
    }
  }

  auto dep_key = [&](const store& s) {
    std::string key;
    for (const auto& x : f1->ins) {
      if (!dep_set.count(x)) continue;
      key += format_value(s.lookup(x));
      key += "|";
    }
    return key;
  };

  struct run_info {
    term_status status;
    value out;  // bound-or-zero at exit
  };
  auto run_one = [&](const program& p, const store& entry) {
    trace t = run_proc(p, proc, entry, cfg.sem);
    run_info ri{t.status, std::int64_t{0}};
    if (t.status == term_status::normal) {
      const store& fin = t.states.back().s;
      if (fin.bound(out_formal)) ri.out = fin.lookup(out_formal);
    }
    return ri;
  };

  bool any_fuel = false;
  std::vector<run_info> r1(entries.size()), r2(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    r1[i] = run_one(p1, entries[i]);
    r2[i] = run_one(p2, entries[i]);
    if (r1[i].status == term_status::fuel_exhausted ||
        r2[i].status == term_status::fuel_exhausted)
      any_fuel = true;
  }

  // group entries agreeing on the dependency set
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < entries.size(); ++i)
    groups[dep_key(entries[i])].push_back(i);

  bool failed = false;
  for (const auto& [key, members] : groups) {
    for (std::size_t a : members) {
      for (std::size_t b : members) {
        // direction 1 -> 2 from entry a vs b, and 2 -> 1 symmetrically
        for (int dir = 0; dir < 2 && !failed; ++dir) {
          const run_info& ra = dir == 0 ? r1[a] : r2[a];
          const run_info& rb = dir == 0 ? r2[b] : r1[b];
          if (ra.status == term_status::fuel_exhausted ||
              rb.status == term_status::fuel_exhausted)
            continue;  // counted via any_fuel
          if (ra.status != term_status::normal) continue;  // no transition pair
          if (rb.status != term_status::normal) {
            failed = true;  // the other version has no matching transition
            break;
          }
          if (!(ra.out == rb.out)) failed = true;
        }
        if (failed) break;
      }
      if (failed) break;
    }
    if (failed) break;
  }
  if (failed) return verdict::fails;
  return any_fuel ? verdict::unknown : verdict::holds;
}

}  // namespace cia
