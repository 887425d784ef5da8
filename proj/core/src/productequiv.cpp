#include "cia/productequiv.hpp"

#include <algorithm>
#include <deque>
#include <random>

#include "cia/oracles.hpp"

namespace cia {

std::vector<product_procedure> build_product(const program& p1, const program& p2,
                                             const std::set<std::string>& scope) {
  std::vector<product_procedure> out;
  for (const auto& name : scope) {
    const procedure* f1 = p1.find_proc(name);
    const procedure* f2 = p2.find_proc(name);
    if (!f1 || !f2) continue;
    product_procedure pp;
    pp.name = name;
    pp.product_name = name + "$prod";
    pp.v1 = f1;
    pp.v2 = f2;
    pp.is_entry = (name == p1.main_name);
    for (const auto& n : f1->nodes)
      if (n.st.kind == stmt_kind::call) {
        pp.calls_v1.push_back({n.label, n.st.callee});
        if (scope.count(n.st.callee)) pp.paired_callees.insert(n.st.callee);
      }
    for (const auto& n : f2->nodes)
      if (n.st.kind == stmt_kind::call) {
        pp.calls_v2.push_back({n.label, n.st.callee});
        if (scope.count(n.st.callee)) pp.paired_callees.insert(n.st.callee);
      }
    out.push_back(std::move(pp));
  }
  return out;
}

std::vector<candidate> generate_candidates(const program& p1, const program& p2,
                                           const scope_view& view,
                                           const equivalence_set& assumed) {
  std::vector<candidate> out;
  auto add = [&](candidate::kind k, const std::string& proc, const std::string& formal) {
    candidate c;
    c.k = k;
    c.proc = proc;
    c.formal = formal;
    bool is_assumed = k == candidate::kind::pre ? assumed.pre_holds(proc, formal)
                                                : assumed.summ_holds(proc, formal);
    c.irrefutable = is_assumed;
    out.push_back(std::move(c));
  };
  for (const auto& name : view.procs) {
    const procedure* f = p1.find_proc(name);
    if (!f) continue;
    for (const auto& y : f->outs) add(candidate::kind::summ, name, y);
  }
  // pre candidates exist wherever every callsite of the procedure is in scope
  for (const auto& f : p1.procs) {
    auto it = view.all_callsites_in_scope.find(f.name);
    if (it == view.all_callsites_in_scope.end() || !it->second) continue;
    for (const auto& x : f.ins) add(candidate::kind::pre, f.name, x);
  }
  (void)p2;
  return out;
}

namespace {

struct recorded_call {
  std::string label;
  std::string callee;
  std::vector<value> args;
  std::vector<value> rets;
};

struct body_exec {
  store final_store;
  std::vector<recorded_call> calls;
  bool pruned = false;     // died at an assume: vacuous, dropped
  bool anomalous = false;  // blocked eval or dead end: conservative failure
};

struct budget_exhausted {};

// live summary lookup: callee out-formal index -> dep-set over callee ins
struct summary_pin {
  const procedure* callee;
  std::vector<const std::set<std::string>*> live_dep;  // per out index, null if not live
};

// Runs one version's body with calls havocked; paired calls may pin return
// values against the other version's recorded calls.
struct body_runner {
  const program& p;
  const procedure& f;
  const product_context& ctx;
  const std::vector<std::int64_t>& universe;
  long* budget;
  // pinning context (used when running the second version)
  const std::vector<recorded_call>* other_calls = nullptr;
  const std::map<std::string, summary_pin>* pins = nullptr;
  const std::set<std::string>* paired = nullptr;

  std::vector<body_exec> results;

  void run(const store& entry) { walk(f.entry, entry, {}); }

  void finish(store s, std::vector<recorded_call> calls, bool pruned, bool anomalous) {
    if (--*budget < 0) throw budget_exhausted{};
    results.push_back({std::move(s), std::move(calls), pruned, anomalous});
  }

  void walk(const std::string& label, store s, std::vector<recorded_call> calls) {
    const node* n = f.find_node(label);
    while (n) {
      try {
        switch (n->st.kind) {
          case stmt_kind::assign:
            s.bind(n->st.target, eval(n->st.rhs, s, ctx.cfg.sem));
            break;
          case stmt_kind::assume: {
            value v = eval(n->st.rhs, s, ctx.cfg.sem);
            if (!std::holds_alternative<std::int64_t>(v) ||
                std::get<std::int64_t>(v) == 0) {
              finish(std::move(s), std::move(calls), true, false);
              return;
            }
            break;
          }
          case stmt_kind::skip:
            break;
          case stmt_kind::call: {
            const procedure* g = p.find_proc(n->st.callee);
            recorded_call rc;
            rc.label = n->label;
            rc.callee = n->st.callee;
            for (const auto& a : n->st.args) rc.args.push_back(eval(a, s, ctx.cfg.sem));

            std::size_t nrets = n->st.rets.size();
            // allowed values per return position
            std::vector<std::vector<value>> allowed(nrets);
            for (std::size_t i = 0; i < nrets; ++i)
              for (auto v : universe) allowed[i].push_back(value{v});
            if (other_calls && paired && paired->count(rc.callee) && pins) {
              auto pin_it = pins->find(rc.callee);
              if (pin_it != pins->end()) {
                for (const auto& oc : *other_calls) {
                  if (oc.callee != rc.callee) continue;
                  const summary_pin& sp = pin_it->second;
                  for (std::size_t i = 0; i < nrets && i < oc.rets.size(); ++i) {
                    if (!sp.live_dep[i]) continue;
                    // dep-equal arguments force equal returns
                    bool dep_equal = true;
                    for (std::size_t j = 0; j < sp.callee->ins.size(); ++j) {
                      if (!sp.live_dep[i]->count(sp.callee->ins[j])) continue;
                      if (j >= rc.args.size() || j >= oc.args.size() ||
                          !(rc.args[j] == oc.args[j])) {
                        dep_equal = false;
                        break;
                      }
                    }
                    if (dep_equal) allowed[i] = {oc.rets[i]};
                  }
                }
              }
            }
            // branch over the allowed tuples
            std::vector<std::size_t> idx(nrets, 0);
            if (nrets == 0) {
              calls.push_back(rc);
              break;
            }
            while (true) {
              store s2 = s;
              recorded_call rc2 = rc;
              for (std::size_t i = 0; i < nrets; ++i) {
                s2.bind(n->st.rets[i], allowed[i][idx[i]]);
                rc2.rets.push_back(allowed[i][idx[i]]);
              }
              auto calls2 = calls;
              calls2.push_back(std::move(rc2));
              if (n->succ.empty() || !f.find_node(n->succ[0])) {
                finish(std::move(s2), std::move(calls2), false, n->label != f.exit);
              } else {
                walk(n->succ[0], std::move(s2), std::move(calls2));
              }
              std::size_t i = 0;
              for (; i < nrets; ++i) {
                if (++idx[i] < allowed[i].size()) break;
                idx[i] = 0;
              }
              if (i == nrets) break;
            }
            (void)g;
            return;  // successors handled inside the loop
          }
        }
      } catch (const eval_blocked&) {
        finish(std::move(s), std::move(calls), false, true);
        return;
      }
      if (n->label == f.exit) {
        finish(std::move(s), std::move(calls), false, false);
        return;
      }
      // pick the enabled successor (branches resolve via their assumes)
      const node* next = nullptr;
      if (n->succ.size() == 1) {
        next = f.find_node(n->succ[0]);
      } else if (n->succ.size() >= 2) {
        for (const auto& lbl : n->succ) {
          const node* cand = f.find_node(lbl);
          if (!cand) continue;
          if (cand->st.kind != stmt_kind::assume) {
            next = cand;
            break;
          }
          try {
            value v = eval(cand->st.rhs, s, ctx.cfg.sem);
            if (std::holds_alternative<std::int64_t>(v) && std::get<std::int64_t>(v) != 0) {
              next = cand;
              break;
            }
          } catch (const eval_blocked&) {
          }
        }
      }
      if (!next) {
        finish(std::move(s), std::move(calls), false, true);
        return;
      }
      n = next;
    }
  }
};

std::string seq_key(const std::vector<recorded_call>& calls) {
  std::string k;
  for (const auto& c : calls) {
    k += c.callee;
    k += ';';
  }
  return k;
}

}  // namespace

obligation_result check_product_obligation(const product_procedure& pp,
                                           const std::vector<candidate>& candidates,
                                           const product_context& ctx) {
  obligation_result res;
  if (ctx.cfg.backend == checker_config::backend_kind::smt_stub) {
    // stub backend: every obligation is unknown
    for (const auto& c : candidates)
      if (c.live && c.k == candidate::kind::summ && c.proc == pp.name)
        res.summ[c.formal] = obligation_verdict::unknown;
    res.call_seq_ok = false;
    res.budget_exceeded = true;
    return res;
  }

  auto universe = value_universe(*ctx.p1, *ctx.p2);
  long budget = ctx.cfg.enum_budget;

  auto live_pre = [&](const std::string& proc, const std::string& x) {
    for (const auto& c : candidates)
      if (c.live && c.k == candidate::kind::pre && c.proc == proc && c.formal == x)
        return true;
    return false;
  };

  // summary pins for paired callees
  std::map<std::string, summary_pin> pins;
  for (const auto& g : pp.paired_callees) {
    const procedure* cp = ctx.p1->find_proc(g);
    if (!cp) continue;
    summary_pin sp;
    sp.callee = cp;
    sp.live_dep.resize(cp->outs.size(), nullptr);
    for (std::size_t i = 0; i < cp->outs.size(); ++i) {
      for (const auto& c : candidates) {
        if (!c.live || c.k != candidate::kind::summ) continue;
        if (c.proc != g || c.formal != cp->outs[i]) continue;
        auto it = ctx.depof->find({g, cp->outs[i]});
        if (it != ctx.depof->end()) sp.live_dep[i] = &it->second;
      }
    }
    pins[g] = sp;
  }

  // summary obligations checked for this product
  std::vector<std::pair<std::string, const std::set<std::string>*>> summ_checks;
  for (const auto& c : candidates) {
    if (!c.live || c.irrefutable) continue;
    if (c.k != candidate::kind::summ || c.proc != pp.name) continue;
    auto it = ctx.depof->find({pp.name, c.formal});
    static const std::set<std::string> empty_dep;
    summ_checks.push_back({c.formal, it != ctx.depof->end() ? &it->second : &empty_dep});
    res.summ[c.formal] = obligation_verdict::holds;
  }

  // entry enumeration: each formal over the universe; the entry product and
  // live pre candidates force the two versions' values equal
  const auto& ins = pp.v1->ins;
  std::vector<bool> tied(ins.size(), pp.is_entry);
  if (!pp.is_entry)
    for (std::size_t i = 0; i < ins.size(); ++i)
      if (live_pre(pp.name, ins[i])) tied[i] = true;

  std::size_t dims = 0;
  for (std::size_t i = 0; i < ins.size(); ++i) dims += tied[i] ? 1 : 2;

  std::vector<std::size_t> idx(dims, 0);
  bool done = ins.empty() && dims == 0;
  bool first_round = true;

  try {
    while (!done || first_round) {
      first_round = false;
      store e1, e2;
      std::size_t d = 0;
      for (std::size_t i = 0; i < ins.size(); ++i) {
        if (tied[i]) {
          e1.bind(ins[i], universe[idx[d]]);
          e2.bind(ins[i], universe[idx[d]]);
          d += 1;
        } else {
          e1.bind(ins[i], universe[idx[d]]);
          e2.bind(ins[i], universe[idx[d + 1]]);
          d += 2;
        }
      }

      body_runner r1{*ctx.p1, *pp.v1, ctx, universe, &budget};
      r1.run(e1);
      for (const auto& ex1 : r1.results) {
        if (ex1.pruned) continue;  // assume-false path, vacuous
        if (ex1.anomalous) {
          // a body that blocks outside an assume leaves the call-sequence
          // assertion unverifiable
          res.call_seq_ok = false;
          continue;
        }
        body_runner r2{*ctx.p2, *pp.v2, ctx, universe, &budget};
        r2.other_calls = &ex1.calls;
        r2.pins = &pins;
        r2.paired = &pp.paired_callees;
        r2.run(e2);
        for (const auto& ex2 : r2.results) {
          if (ex2.pruned) continue;
          if (ex2.anomalous) {
            res.call_seq_ok = false;
            continue;
          }
          // (check the pairing constraints exactly; the pinned enumeration
          // already restricted v2 return choices, but unpaired positions and
          // v1-side records still need the filter applied symmetrically)
          bool feasible = true;
          for (const auto& g : pp.paired_callees) {
            auto pin_it = pins.find(g);
            if (pin_it == pins.end()) continue;
            const summary_pin& sp = pin_it->second;
            for (const auto& c1 : ex1.calls) {
              if (c1.callee != g) continue;
              for (const auto& c2 : ex2.calls) {
                if (c2.callee != g) continue;
                for (std::size_t i = 0; i < sp.live_dep.size(); ++i) {
                  if (!sp.live_dep[i]) continue;
                  bool dep_equal = true;
                  for (std::size_t j = 0; j < sp.callee->ins.size(); ++j) {
                    if (!sp.live_dep[i]->count(sp.callee->ins[j])) continue;
                    if (j >= c1.args.size() || j >= c2.args.size() ||
                        !(c1.args[j] == c2.args[j])) {
                      dep_equal = false;
                      break;
                    }
                  }
                  if (dep_equal && i < c1.rets.size() && i < c2.rets.size() &&
                      !(c1.rets[i] == c2.rets[i]))
                    feasible = false;
                }
              }
            }
          }
          if (!feasible) continue;

          // (b) pre candidates of callees: any pair with unequal actuals
          for (const auto& c1 : ex1.calls)
            for (const auto& c2 : ex2.calls) {
              if (c1.callee != c2.callee) continue;
              const procedure* cp = ctx.p1->find_proc(c1.callee);
              if (!cp) continue;
              for (std::size_t i = 0; i < cp->ins.size(); ++i) {
                if (!live_pre(c1.callee, cp->ins[i])) continue;
                if (i >= c1.args.size() || i >= c2.args.size()) continue;
                if (!(c1.args[i] == c2.args[i]))
                  res.violated_pres.insert({c1.callee, cp->ins[i]});
              }
            }

          // trailing assertion: call sequences agree modulo callee names
          if (seq_key(ex1.calls) != seq_key(ex2.calls)) res.call_seq_ok = false;

          // summary predicates for this procedure's out formals
          for (auto& [y, dep] : summ_checks) {
            bool antecedent = true;
            for (std::size_t i = 0; i < ins.size(); ++i) {
              if (!dep->count(ins[i])) continue;
              if (!(e1.lookup(ins[i]) == e2.lookup(ins[i]))) {
                antecedent = false;
                break;
              }
            }
            if (!antecedent) continue;
            value o1 = ex1.final_store.bound(y) ? ex1.final_store.lookup(y)
                                                : value{std::int64_t{0}};
            value o2 = ex2.final_store.bound(y) ? ex2.final_store.lookup(y)
                                                : value{std::int64_t{0}};
            if (!(o1 == o2)) res.summ[y] = obligation_verdict::fails;
          }
        }
      }

      // advance entry enumeration
      if (dims == 0) break;
      std::size_t i = 0;
      for (; i < dims; ++i) {
        if (++idx[i] < universe.size()) break;
        idx[i] = 0;
      }
      if (i == dims) done = true;
    }
  } catch (const budget_exhausted&) {
    res.budget_exceeded = true;
    for (auto& [y, v] : res.summ) v = obligation_verdict::unknown;
    res.call_seq_ok = false;
  }
  return res;
}

namespace {

std::set<std::string> callee_closure(const program& p1, const program& p2,
                                     const std::string& root) {
  auto g1 = call_graph(p1);
  auto g2 = call_graph(p2);
  std::set<std::string> out{root};
  std::deque<std::string> work{root};
  while (!work.empty()) {
    std::string f = work.front();
    work.pop_front();
    for (const auto* g : {&g1, &g2}) {
      auto it = g->find(f);
      if (it == g->end()) continue;
      for (const auto& callee : it->second)
        if (out.insert(callee).second) work.push_back(callee);
    }
  }
  return out;
}

// (a) side condition: both concrete versions must terminate normally on the
// whole entry domain; out-of-scope callees make the check impossible.
bool summ_termination_ok(const product_context& ctx, const std::string& proc,
                         std::string& reason) {
  auto closure = callee_closure(*ctx.p1, *ctx.p2, proc);
  for (const auto& g : closure)
    if (!ctx.view->procs.count(g)) {
      reason = "callee '" + g + "' outside the inference scope";
      return false;
    }
  auto universe = value_universe(*ctx.p1, *ctx.p2);
  const procedure* f = ctx.p1->find_proc(proc);
  if (!f) {
    reason = "procedure missing";
    return false;
  }
  double combos = 1;
  for (std::size_t i = 0; i < f->ins.size(); ++i) combos *= universe.size();
  if (combos > static_cast<double>(ctx.cfg.enum_budget)) {
    reason = "entry enumeration exceeds budget";
    return false;
  }
  std::vector<std::size_t> idx(f->ins.size(), 0);
  while (true) {
    store entry;
    for (std::size_t i = 0; i < f->ins.size(); ++i)
      entry.bind(f->ins[i], universe[idx[i]]);
    for (const program* p : {ctx.p1, ctx.p2}) {
      trace t = run_proc(*p, proc, entry, ctx.cfg.sem);
      if (t.status == term_status::fuel_exhausted) {
        reason = "fuel exhausted (possible non-termination)";
        return false;
      }
      if (t.status == term_status::blocked) {
        reason = "blocked execution";
        return false;
      }
    }
    std::size_t i = 0;
    for (; i < idx.size(); ++i) {
      if (++idx[i] < universe.size()) break;
      idx[i] = 0;
    }
    if (i == idx.size()) break;
  }
  return true;
}

}  // namespace

equivalence_set houdini_infer(const std::vector<product_procedure>& products,
                              std::vector<candidate> candidates,
                              const product_context& ctx, inference_log* log) {
  auto note = [&](const std::string& s) {
    if (log) log->events.push_back(s);
  };
  auto refute = [&](candidate::kind k, const std::string& proc,
                    const std::string& formal, const std::string& why) {
    bool any = false;
    for (auto& c : candidates) {
      if (c.k != k || c.proc != proc || c.formal != formal) continue;
      if (c.irrefutable || !c.live) continue;
      c.live = false;
      c.refuted_because = why;
      any = true;
      note(std::string(k == candidate::kind::pre ? "pre" : "summ") + "(" + formal +
           ", " + proc + ") refuted: " + why);
    }
    return any;
  };

  // (a) termination side condition, once: scope and domain do not change
  // across rounds
  for (auto& c : candidates) {
    if (c.k != candidate::kind::summ || !c.live || c.irrefutable) continue;
    std::string reason;
    if (!summ_termination_ok(ctx, c.proc, reason))
      refute(candidate::kind::summ, c.proc, c.formal, reason);
  }

  std::vector<std::size_t> order(products.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (ctx.cfg.shuffle_seed != 0) {
    std::mt19937 rng(ctx.cfg.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t oi : order) {
      const product_procedure& pp = products[oi];
      obligation_result res = check_product_obligation(pp, candidates, ctx);
      if (res.budget_exceeded)
        note("checker budget exceeded on " + pp.product_name);
      for (const auto& [y, v] : res.summ)
        if (v != obligation_verdict::holds)
          changed |= refute(candidate::kind::summ, pp.name, y,
                            v == obligation_verdict::fails
                                ? "summary predicate fails in " + pp.product_name
                                : "checker could not verify " + pp.product_name);
      for (const auto& [callee, x] : res.violated_pres)
        changed |= refute(candidate::kind::pre, callee, x,
                          "unequal actuals at a callsite pair in " + pp.product_name);
      if (!res.call_seq_ok) {
        // (c): the owner's and its transitive callees' entry sequences are
        // no longer justified
        for (const auto& g : callee_closure(*ctx.p1, *ctx.p2, pp.name)) {
          const procedure* gp = ctx.p1->find_proc(g);
          if (!gp) continue;
          for (const auto& x : gp->ins)
            changed |= refute(candidate::kind::pre, g, x,
                              "call-sequence assertion fails in " + pp.product_name);
        }
      }
    }
  }

  equivalence_set out;
  for (const auto& c : candidates) {
    if (!c.live) continue;
    fact_provenance pv = c.irrefutable ? fact_provenance::assumed : fact_provenance::inferred;
    if (c.k == candidate::kind::pre)
      out.add_pre(c.proc, c.formal, pv);
    else
      out.add_summ(c.proc, c.formal, pv);
  }
  return out;
}

}  // namespace cia
