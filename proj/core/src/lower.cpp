#include "cia/lower.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace cia {

namespace {

// --- globals -> formals -----------------------------------------------------

std::set<std::string> direct_global_uses(const procedure& f,
                                         const std::vector<std::string>& globals) {
  std::set<std::string> gset(globals.begin(), globals.end());
  std::set<std::string> used;
  for (const auto& n : f.nodes) {
    for (const auto& v : read_set(n))
      if (gset.count(v)) used.insert(v);
    for (const auto& v : write_set(n))
      if (gset.count(v)) used.insert(v);
  }
  return used;
}

program thread_globals(const program& p) {
  if (p.globals.empty()) return p;
  program out = p;

  // which globals each procedure needs: direct uses closed under calls
  std::map<std::string, std::set<std::string>> need;
  for (const auto& f : out.procs) need[f.name] = direct_global_uses(f, out.globals);
  auto cg = call_graph(out);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [caller, callees] : cg)
      for (const auto& callee : callees)
        for (const auto& g : need[callee])
          if (need[caller].insert(g).second) changed = true;
  }
  // main threads every global so initial values are program inputs
  for (const auto& g : out.globals) need[out.main_name].insert(g);

  auto ordered_need = [&](const std::string& proc) {
    std::vector<std::string> gs;
    for (const auto& g : out.globals)
      if (need[proc].count(g)) gs.push_back(g);
    return gs;
  };

  for (auto& f : out.procs) {
    auto gs = ordered_need(f.name);
    for (const auto& g : gs) {
      f.ins.push_back(g);
      f.outs.push_back(g + "$out");
      if (!f.has_var(g)) f.vars.push_back(g);
      f.vars.push_back(g + "$out");
    }
    for (auto& n : f.nodes) {
      if (n.st.kind != stmt_kind::call) continue;
      for (const auto& g : ordered_need(n.st.callee)) {
        n.st.args.push_back(expr::mkvar(g));
        n.st.rets.push_back(g);
        if (!f.has_var(g)) f.vars.push_back(g);
      }
    }
    // final value of each threaded global flows out through its own formal
    if (!gs.empty()) {
      std::vector<node> copies;
      for (std::size_t i = 0; i < gs.size(); ++i) {
        node c;
        c.label = f.exit + "$g" + std::to_string(i);
        c.st = stmt::mkassign(gs[i] + "$out", expr::mkvar(gs[i]));
        c.succ = {i + 1 < gs.size() ? f.exit + "$g" + std::to_string(i + 1) : f.exit};
        copies.push_back(std::move(c));
      }
      for (auto& m : f.nodes) {
        if (m.label == f.exit) continue;
        for (auto& s : m.succ)
          if (s == f.exit) s = copies.front().label;
      }
      auto it = std::find_if(f.nodes.begin(), f.nodes.end(),
                             [&](const node& x) { return x.label == f.exit; });
      f.nodes.insert(it, std::make_move_iterator(copies.begin()),
                     std::make_move_iterator(copies.end()));
    }
  }
  out.globals.clear();
  return out;
}

// --- loop extraction ---------------------------------------------------------

struct back_edge {
  std::string from;
  std::string to;  // header
};

// Back edges discovered by DFS from the entry, in discovery order.
std::vector<back_edge> find_back_edges(const procedure& f) {
  std::vector<back_edge> out;
  std::map<std::string, int> color;  // 0 white 1 gray 2 black
  std::vector<std::pair<std::string, std::size_t>> stack;
  if (!f.find_node(f.entry)) return out;
  stack.push_back({f.entry, 0});
  color[f.entry] = 1;
  while (!stack.empty()) {
    auto& [label, idx] = stack.back();
    const node* n = f.find_node(label);
    if (n && idx < n->succ.size()) {
      const std::string& next = n->succ[idx++];
      if (!f.find_node(next)) continue;
      int c = color[next];
      if (c == 1) {
        out.push_back({label, next});
      } else if (c == 0) {
        color[next] = 1;
        stack.push_back({next, 0});
      }
    } else {
      color[label] = 2;
      stack.pop_back();
    }
  }
  return out;
}

// Natural loop of the back edges targeting `header`.
std::set<std::string> natural_loop(const procedure& f, const std::string& header,
                                   const std::vector<back_edge>& edges) {
  std::set<std::string> loop{header};
  auto preds = predecessors(f);
  std::deque<std::string> work;
  for (const auto& e : edges)
    if (e.to == header && loop.insert(e.from).second) work.push_back(e.from);
  while (!work.empty()) {
    std::string n = work.front();
    work.pop_front();
    if (n == header) continue;
    for (const auto& p : preds[n])
      if (loop.insert(p).second) work.push_back(p);
  }
  return loop;
}

// Extract one loop out of f, appending the new tail-recursive procedure to
// new_procs. Returns true if a loop was extracted.
bool extract_one_loop(procedure& f, std::map<std::string, int>& loop_counters,
                      std::vector<procedure>& new_procs) {
  auto backs = find_back_edges(f);
  if (backs.empty()) {
    if (!is_acyclic(f))
      throw lower_error("procedure '" + f.name +
                        "': irreducible or unreachable cyclic control flow");
    return false;
  }
  const std::string header = backs.front().to;
  std::set<std::string> loop = natural_loop(f, header, backs);

  // classify edges leaving the loop; all must share one target
  std::string exit_target;
  bool have_exit = false;
  for (const auto& lbl : loop) {
    const node* n = f.find_node(lbl);
    for (const auto& s : n->succ) {
      if (loop.count(s)) continue;
      if (have_exit && s != exit_target)
        throw lower_error("procedure '" + f.name + "': loop at '" + header +
                          "' has multiple exit targets (unsupported)");
      exit_target = s;
      have_exit = true;
    }
  }

  // latches (in-loop edges into the header) must be single-successor nodes,
  // and so must preheader edges into a non-assume call replacement
  for (const auto& lbl : loop) {
    const node* n = f.find_node(lbl);
    if (std::find(n->succ.begin(), n->succ.end(), header) != n->succ.end() &&
        n->succ.size() != 1)
      throw lower_error("procedure '" + f.name + "': back edge from branching node '" +
                        lbl + "' (unsupported)");
  }
  auto preds = predecessors(f);
  for (const auto& p : preds[header]) {
    if (loop.count(p)) continue;
    const node* pn = f.find_node(p);
    if (pn->succ.size() != 1)
      throw lower_error("procedure '" + f.name + "': loop header '" + header +
                        "' entered from branching node '" + p + "' (unsupported)");
  }

  // exit target re-executes inside the extracted procedure, so it must be
  // side-effect free
  const node* tnode = have_exit ? f.find_node(exit_target) : nullptr;
  if (tnode && tnode->st.kind != stmt_kind::assume && tnode->st.kind != stmt_kind::skip)
    throw lower_error("procedure '" + f.name + "': loop exit target '" + exit_target +
                      "' is not an assume or skip (unsupported)");

  int k = ++loop_counters[f.name];
  const std::string lname = f.name + "$loop" + std::to_string(k);
  const std::string exit_label = lname + "$exit";

  // thread only the variables the loop touches; the rest keep their caller
  // values across the call. Inputs are further restricted to variables live
  // at the header (read before any in-loop write).
  std::set<std::string> touched;
  for (const auto& lbl : loop) {
    const node* n = f.find_node(lbl);
    auto r = read_set(*n);
    auto w = write_set(*n);
    touched.insert(r.begin(), r.end());
    touched.insert(w.begin(), w.end());
  }
  if (tnode) {
    auto r = read_set(*tnode);
    touched.insert(r.begin(), r.end());
  }
  std::vector<std::string> carried;
  for (const auto& v : f.vars)
    if (touched.count(v)) carried.push_back(v);

  // backward liveness over the loop subgraph (the copied exit guard counts
  // as a read of its condition)
  std::map<std::string, std::set<std::string>> live_in;
  {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const auto& lbl : loop) {
        const node* n = f.find_node(lbl);
        std::set<std::string> out;
        for (const auto& s : n->succ) {
          if (loop.count(s)) {
            // back edges re-enter through the recursive call's arguments,
            // which are exactly the header's live-ins; approximating with
            // live_in(header) is a fixpoint of the same system
            const auto& li = live_in[s];
            out.insert(li.begin(), li.end());
          } else if (tnode && s == exit_target) {
            auto r = read_set(*tnode);
            out.insert(r.begin(), r.end());
          }
        }
        std::set<std::string> in = read_set(*n);
        auto w = write_set(*n);
        for (const auto& v : out)
          if (!w.count(v)) in.insert(v);
        if (in != live_in[lbl]) {
          live_in[lbl] = std::move(in);
          changed = true;
        }
      }
    }
  }
  std::vector<std::string> live_ins;
  for (const auto& v : carried)
    if (live_in[header].count(v)) live_ins.push_back(v);

  procedure nl;
  nl.name = lname;
  nl.ins = live_ins;
  for (const auto& v : carried) nl.outs.push_back(v + "$out");
  nl.vars = carried;
  for (const auto& v : nl.outs) nl.vars.push_back(v);

  auto all_var_exprs = [&live_ins]() {
    std::vector<expr> es;
    for (const auto& v : live_ins) es.push_back(expr::mkvar(v));
    return es;
  };

  // copy loop nodes in listing order, header first
  std::vector<node> body;
  for (const auto& n : f.nodes) {
    if (!loop.count(n.label)) continue;
    if (n.label == header)
      body.insert(body.begin(), n);
    else
      body.push_back(n);
  }
  std::vector<node> tails;
  for (auto& n : body) {
    for (auto& s : n.succ) {
      if (s == header) {
        // tail-recursive call carrying the current variable values
        node tail;
        tail.label = n.label + "$tail";
        tail.st = stmt::mkcall(lname, all_var_exprs(), nl.outs);
        tail.succ = {exit_label};
        s = tail.label;
        tails.push_back(std::move(tail));
      } else if (have_exit && s == exit_target) {
        s = exit_target;  // points at the copied guard below
      }
    }
  }
  if (have_exit) {
    node guard = *tnode;
    guard.succ = {exit_label};
    body.push_back(std::move(guard));
  }
  // normal-exit copies of the out formals
  std::vector<node> copies;
  for (std::size_t i = 0; i < carried.size(); ++i) {
    node c;
    c.label = lname + "$copy" + std::to_string(i);
    c.st = stmt::mkassign(nl.outs[i], expr::mkvar(carried[i]));
    c.succ = {i + 1 < carried.size() ? lname + "$copy" + std::to_string(i + 1)
                                     : exit_label};
    copies.push_back(std::move(c));
  }
  if (have_exit) {
    // guard flows through the copies
    body.back().succ = {copies.front().label};
  }

  nl.nodes = std::move(body);
  for (auto& c : copies) nl.nodes.push_back(std::move(c));
  for (auto& t : tails) nl.nodes.push_back(std::move(t));
  node ex;
  ex.label = exit_label;
  ex.st = stmt::mkskip();
  nl.nodes.push_back(std::move(ex));
  nl.entry = header;
  nl.exit = exit_label;

  // replace the loop in f by a single call node reusing the header label
  node call_node;
  call_node.label = header;
  call_node.st = stmt::mkcall(lname, all_var_exprs(), carried);
  call_node.succ = have_exit ? std::vector<std::string>{exit_target}
                             : std::vector<std::string>{f.exit};

  std::vector<node> remaining;
  for (auto& n : f.nodes) {
    if (n.label == header) {
      remaining.push_back(call_node);
      continue;
    }
    if (loop.count(n.label)) continue;
    remaining.push_back(std::move(n));
  }
  f.nodes = std::move(remaining);

  new_procs.push_back(std::move(nl));
  return true;
}

program extract_loops(const program& p) {
  program out = p;
  std::map<std::string, int> loop_counters;
  std::deque<std::string> work;
  for (const auto& f : out.procs) work.push_back(f.name);
  while (!work.empty()) {
    std::string name = work.front();
    work.pop_front();
    std::vector<procedure> fresh;
    while (extract_one_loop(*out.find_proc(name), loop_counters, fresh)) {
      for (auto& nf : fresh) {
        work.push_back(nf.name);
        out.procs.push_back(std::move(nf));
      }
      fresh.clear();
    }
  }
  return out;
}

// --- join binarization + SSA --------------------------------------------------

struct ssa_builder {
  procedure& f;
  std::map<std::string, int> version_counter;  // per original var
  int funnel_counter = 0;
  int phi_counter = 0;
  std::vector<std::string> new_vars;

  explicit ssa_builder(procedure& proc) : f(proc) {}

  std::string fresh_version(const std::string& v) {
    int k = ++version_counter[v];
    std::string name = v + "$ssa" + std::to_string(k);
    new_vars.push_back(name);
    return name;
  }

  std::string fresh_aux(const std::string& v, const char* tag, int k) {
    std::string name = v + "$" + tag + std::to_string(k);
    new_vars.push_back(name);
    return name;
  }

  // nodes with more than two predecessors get skip funnels until every join
  // is binary (phi is a two-way merge)
  void binarize() {
    bool changed = true;
    while (changed) {
      changed = false;
      auto preds = predecessors(f);
      for (const auto& n : f.nodes) {
        auto& ps = preds[n.label];
        if (ps.size() <= 2) continue;
        node funnel;
        funnel.label = n.label + "$f" + std::to_string(++funnel_counter);
        funnel.st = stmt::mkskip();
        funnel.succ = {n.label};
        const std::string p1 = ps[0], p2 = ps[1], target = n.label;
        for (auto& m : f.nodes) {
          if (m.label != p1 && m.label != p2) continue;
          for (auto& s : m.succ)
            if (s == target) s = funnel.label;
        }
        // insert before the join
        auto it = std::find_if(f.nodes.begin(), f.nodes.end(),
                               [&](const node& x) { return x.label == target; });
        f.nodes.insert(it, std::move(funnel));
        changed = true;
        break;
      }
    }
  }

  static expr rewrite_expr(const expr& e, const std::map<std::string, std::string>& env) {
    switch (e.kind) {
      case expr_kind::constant:
        return e;
      case expr_kind::variable: {
        auto it = env.find(e.var);
        return it == env.end() ? e : expr::mkvar(it->second);
      }
      case expr_kind::apply: {
        expr out = e;
        for (auto& a : out.args) a = rewrite_expr(a, env);
        return out;
      }
    }
    return e;
  }

  void run() {
    binarize();

    // variables that need renaming: written at >1 node, or written input formals
    std::map<std::string, int> writers;
    for (const auto& n : f.nodes)
      for (const auto& v : write_set(n)) writers[v]++;
    std::set<std::string> renamed;
    for (const auto& [v, cnt] : writers)
      if (cnt > 1 || f.is_in_formal(v)) renamed.insert(v);

    // reverse post order from entry; unreachable nodes appended in listing order
    std::vector<std::string> order;
    {
      std::set<std::string> visited;
      std::vector<std::pair<std::string, std::size_t>> stack;
      std::vector<std::string> post;
      if (f.find_node(f.entry)) {
        stack.push_back({f.entry, 0});
        visited.insert(f.entry);
      }
      while (!stack.empty()) {
        auto& [label, idx] = stack.back();
        const node* n = f.find_node(label);
        if (n && idx < n->succ.size()) {
          const std::string& next = n->succ[idx++];
          if (f.find_node(next) && visited.insert(next).second)
            stack.push_back({next, 0});
        } else {
          post.push_back(label);
          stack.pop_back();
        }
      }
      order.assign(post.rbegin(), post.rend());
      for (const auto& n : f.nodes)
        if (!visited.count(n.label)) order.push_back(n.label);
    }

    auto preds = predecessors(f);
    // in/out variable-version environments per node
    std::map<std::string, std::map<std::string, std::string>> in_env, out_env;

    struct insertion {
      std::string before;         // insert directly before this label
      std::vector<node> nodes;
    };
    std::vector<insertion> insertions;

    for (const auto& label : order) {
      node* n = f.find_node(label);
      std::map<std::string, std::string> env;
      const auto& ps = preds[label];
      if (ps.size() == 1) {
        env = out_env[ps[0]];
      } else if (ps.size() >= 2) {
        const auto& e1 = out_env[ps[0]];
        const auto& e2 = out_env[ps[1]];
        std::map<std::string, std::string> merged;
        std::vector<std::string> phi_vars;
        for (const auto& v : f.vars) {
          auto get = [&](const std::map<std::string, std::string>& e) {
            auto it = e.find(v);
            return it == e.end() ? v : it->second;
          };
          std::string a = get(e1), b = get(e2);
          if (a == b) {
            if (a != v) merged[v] = a;
          } else {
            phi_vars.push_back(v);
          }
        }
        if (!phi_vars.empty()) {
          insertion ins;
          ins.before = label;
          int group = ++phi_counter;
          // per-edge copies into fresh names, so the phi sees exactly one
          // bound argument at runtime
          std::vector<node> left, right, phis;
          int i = 0;
          for (const auto& v : phi_vars) {
            auto get = [&](const std::map<std::string, std::string>& e) {
              auto it = e.find(v);
              return it == e.end() ? v : it->second;
            };
            std::string la = fresh_aux(v, "phl", group);
            std::string rb = fresh_aux(v, "phr", group);
            std::string w = fresh_version(v);
            node cl, cr, ph;
            cl.label = label + "$l" + std::to_string(group) + "_" + std::to_string(i);
            cl.st = stmt::mkassign(la, expr::mkvar(get(e1)));
            cr.label = label + "$r" + std::to_string(group) + "_" + std::to_string(i);
            cr.st = stmt::mkassign(rb, expr::mkvar(get(e2)));
            ph.label = label + "$phi" + std::to_string(group) + "_" + std::to_string(i);
            ph.st = stmt::mkassign(w, expr::apply("phi", {expr::mkvar(la), expr::mkvar(rb)}));
            left.push_back(std::move(cl));
            right.push_back(std::move(cr));
            phis.push_back(std::move(ph));
            merged[v] = w;
            ++i;
          }
          // chain: left copies -> phi head; right copies -> phi head; phis -> n
          for (std::size_t j = 0; j + 1 < left.size(); ++j)
            left[j].succ = {left[j + 1].label};
          left.back().succ = {phis.front().label};
          for (std::size_t j = 0; j + 1 < right.size(); ++j)
            right[j].succ = {right[j + 1].label};
          right.back().succ = {phis.front().label};
          for (std::size_t j = 0; j + 1 < phis.size(); ++j)
            phis[j].succ = {phis[j + 1].label};
          phis.back().succ = {label};

          // repoint the two incoming edges
          for (int side = 0; side < 2; ++side) {
            const std::string& p = ps[side];
            node* pn = f.find_node(p);
            if (pn->succ.size() > 1)
              throw lower_error("procedure '" + f.name + "': phi insertion on branch edge '" +
                                p + "' -> '" + label + "' (unsupported)");
            for (auto& s : pn->succ)
              if (s == label) s = (side == 0 ? left.front().label : right.front().label);
          }
          for (auto& m : left) ins.nodes.push_back(std::move(m));
          for (auto& m : right) ins.nodes.push_back(std::move(m));
          for (auto& m : phis) ins.nodes.push_back(std::move(m));
          insertions.push_back(std::move(ins));
        }
        env = std::move(merged);
      }

      in_env[label] = env;
      // rewrite reads
      switch (n->st.kind) {
        case stmt_kind::assign:
        case stmt_kind::assume:
          n->st.rhs = rewrite_expr(n->st.rhs, env);
          break;
        case stmt_kind::call:
          for (auto& a : n->st.args) a = rewrite_expr(a, env);
          break;
        case stmt_kind::skip:
          break;
      }
      // rewrite writes
      auto rename_write = [&](std::string& target) {
        if (renamed.count(target)) {
          std::string w = fresh_version(target);
          env[target] = w;
          target = w;
        } else {
          env.erase(target);  // back to its own single name
        }
      };
      if (n->st.kind == stmt_kind::assign) rename_write(n->st.target);
      if (n->st.kind == stmt_kind::call)
        for (auto& r : n->st.rets) rename_write(r);
      out_env[label] = std::move(env);
    }

    for (auto& ins : insertions) {
      auto it = std::find_if(f.nodes.begin(), f.nodes.end(),
                             [&](const node& x) { return x.label == ins.before; });
      f.nodes.insert(it, std::make_move_iterator(ins.nodes.begin()),
                     std::make_move_iterator(ins.nodes.end()));
    }

    // final copies for renamed output formals, inserted in front of the exit
    {
      const auto& env = in_env[f.exit];
      std::vector<node> copies;
      int i = 0;
      for (const auto& y : f.outs) {
        auto it = env.find(y);
        if (it == env.end() || it->second == y) continue;
        node c;
        c.label = f.exit + "$out" + std::to_string(i++);
        c.st = stmt::mkassign(y, expr::mkvar(it->second));
        copies.push_back(std::move(c));
      }
      if (!copies.empty()) {
        for (std::size_t j = 0; j + 1 < copies.size(); ++j)
          copies[j].succ = {copies[j + 1].label};
        copies.back().succ = {f.exit};
        for (auto& m : f.nodes) {
          if (m.label == f.exit) continue;
          for (auto& s : m.succ)
            if (s == f.exit) s = copies.front().label;
        }
        auto it = std::find_if(f.nodes.begin(), f.nodes.end(),
                               [&](const node& x) { return x.label == f.exit; });
        f.nodes.insert(it, std::make_move_iterator(copies.begin()),
                       std::make_move_iterator(copies.end()));
      }
    }
    for (const auto& v : new_vars)
      if (!f.has_var(v)) f.vars.push_back(v);
  }
};

}  // namespace

namespace {

// the parser reconstructs vars as ins ++ outs ++ locals, so lowered output
// keeps the same shape for clean round trips
void canonicalize_vars(procedure& f) {
  std::vector<std::string> ordered;
  auto add = [&](const std::string& v) {
    if (std::find(ordered.begin(), ordered.end(), v) == ordered.end())
      ordered.push_back(v);
  };
  for (const auto& v : f.ins) add(v);
  for (const auto& v : f.outs) add(v);
  for (const auto& v : f.vars) add(v);
  f.vars = std::move(ordered);
}

}  // namespace

program lower(const program& p) {
  {
    auto pre = validate_pre_lowering(p);
    if (!pre.empty())
      throw lower_error("lower: input invalid: " + pre.front().proc + "/" +
                        pre.front().label + ": " + pre.front().message);
  }
  program out = thread_globals(p);
  out = extract_loops(out);
  for (auto& f : out.procs) {
    ssa_builder b(f);
    b.run();
    canonicalize_vars(f);
  }
  return out;
}

}  // namespace cia
