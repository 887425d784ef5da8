#include "cia/ir.hpp"

#include <algorithm>

namespace cia {

expr expr::cst(std::int64_t v) {
  expr e;
  e.kind = expr_kind::constant;
  e.value = v;
  return e;
}

expr expr::mkvar(std::string name) {
  expr e;
  e.kind = expr_kind::variable;
  e.var = std::move(name);
  return e;
}

expr expr::apply(std::string op, std::vector<expr> args) {
  expr e;
  e.kind = expr_kind::apply;
  e.op = std::move(op);
  e.args = std::move(args);
  return e;
}

std::optional<int> operator_arity(const std::string& op) {
  static const std::map<std::string, int> table = {
      {"+", 2},  {"-", 2},  {"*", 2},  {"/", 2},  {"%", 2},
      {"==", 2}, {"!=", 2}, {"<", 2},  {"<=", 2}, {">", 2},
      {">=", 2}, {"&&", 2}, {"||", 2}, {"!", 1},  {"neg", 1},
      {"select", 2}, {"update", 3}, {"phi", 2},
  };
  auto it = table.find(op);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool is_boolean_operator(const std::string& op) {
  static const std::set<std::string> table = {"==", "!=", "<", "<=", ">",
                                              ">=", "&&", "||", "!"};
  return table.count(op) > 0;
}

void collect_vars(const expr& e, std::set<std::string>& out) {
  switch (e.kind) {
    case expr_kind::constant:
      return;
    case expr_kind::variable:
      out.insert(e.var);
      return;
    case expr_kind::apply:
      for (const auto& a : e.args) collect_vars(a, out);
      return;
  }
}

std::set<std::string> vars_of(const expr& e) {
  std::set<std::string> out;
  collect_vars(e, out);
  return out;
}

stmt stmt::mkskip() { return stmt{}; }

stmt stmt::mkassign(std::string target, expr rhs) {
  stmt s;
  s.kind = stmt_kind::assign;
  s.target = std::move(target);
  s.rhs = std::move(rhs);
  return s;
}

stmt stmt::mkassume(expr cond) {
  stmt s;
  s.kind = stmt_kind::assume;
  s.rhs = std::move(cond);
  return s;
}

stmt stmt::mkcall(std::string callee, std::vector<expr> args,
                  std::vector<std::string> rets) {
  stmt s;
  s.kind = stmt_kind::call;
  s.callee = std::move(callee);
  s.args = std::move(args);
  s.rets = std::move(rets);
  return s;
}

const node* procedure::find_node(const std::string& label) const {
  for (const auto& n : nodes)
    if (n.label == label) return &n;
  return nullptr;
}

node* procedure::find_node(const std::string& label) {
  for (auto& n : nodes)
    if (n.label == label) return &n;
  return nullptr;
}

bool procedure::has_var(const std::string& v) const {
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

bool procedure::is_in_formal(const std::string& v) const {
  return std::find(ins.begin(), ins.end(), v) != ins.end();
}

bool procedure::is_out_formal(const std::string& v) const {
  return std::find(outs.begin(), outs.end(), v) != outs.end();
}

const procedure* program::find_proc(const std::string& name) const {
  for (const auto& f : procs)
    if (f.name == name) return &f;
  return nullptr;
}

procedure* program::find_proc(const std::string& name) {
  for (auto& f : procs)
    if (f.name == name) return &f;
  return nullptr;
}

const procedure& program::main() const {
  const procedure* f = find_proc(main_name);
  if (!f) throw ir_error("program has no main procedure '" + main_name + "'");
  return *f;
}

std::set<std::string> read_set(const node& n) {
  std::set<std::string> out;
  switch (n.st.kind) {
    case stmt_kind::assign:
    case stmt_kind::assume:
      collect_vars(n.st.rhs, out);
      break;
    case stmt_kind::skip:
      break;
    case stmt_kind::call:
      for (const auto& a : n.st.args) collect_vars(a, out);
      break;
  }
  return out;
}

std::set<std::string> write_set(const node& n) {
  std::set<std::string> out;
  switch (n.st.kind) {
    case stmt_kind::assign:
      out.insert(n.st.target);
      break;
    case stmt_kind::call:
      out.insert(n.st.rets.begin(), n.st.rets.end());
      break;
    default:
      break;
  }
  return out;
}

std::map<std::string, std::vector<std::string>> predecessors(const procedure& f) {
  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& n : f.nodes) preds[n.label];  // ensure every node is present
  for (const auto& n : f.nodes)
    for (const auto& s : n.succ) preds[s].push_back(n.label);
  return preds;
}

bool is_acyclic(const procedure& f) {
  // Iterative three-color DFS over all nodes.
  std::map<std::string, int> color;  // 0 white, 1 gray, 2 black
  for (const auto& n : f.nodes) color[n.label] = 0;
  for (const auto& start : f.nodes) {
    if (color[start.label] != 0) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{start.label, 0}};
    color[start.label] = 1;
    while (!stack.empty()) {
      auto& [label, idx] = stack.back();
      const node* n = f.find_node(label);
      if (idx < n->succ.size()) {
        const std::string& next = n->succ[idx++];
        if (!f.find_node(next)) continue;  // dangling edges caught by validate
        int c = color[next];
        if (c == 1) return false;
        if (c == 0) {
          color[next] = 1;
          stack.push_back({next, 0});
        }
      } else {
        color[label] = 2;
        stack.pop_back();
      }
    }
  }
  return true;
}

std::map<std::string, std::set<std::string>> call_graph(const program& p) {
  std::map<std::string, std::set<std::string>> g;
  for (const auto& f : p.procs) {
    g[f.name];
    for (const auto& n : f.nodes)
      if (n.st.kind == stmt_kind::call) g[f.name].insert(n.st.callee);
  }
  return g;
}

std::vector<std::string> callsites_of(const procedure& f, const std::string& callee) {
  std::vector<std::string> out;
  for (const auto& n : f.nodes)
    if (n.st.kind == stmt_kind::call && n.st.callee == callee)
      out.push_back(n.label);
  return out;
}

namespace {

void check_expr(const program& p, const procedure& f, const node& n,
                const expr& e, std::vector<violation>& out) {
  switch (e.kind) {
    case expr_kind::constant:
      return;
    case expr_kind::variable: {
      bool known = f.has_var(e.var) ||
                   std::find(p.globals.begin(), p.globals.end(), e.var) !=
                       p.globals.end();
      if (!known)
        out.push_back({violation_kind::name, f.name, n.label,
                       "undeclared variable '" + e.var + "'"});
      return;
    }
    case expr_kind::apply: {
      auto ar = operator_arity(e.op);
      if (!ar)
        out.push_back({violation_kind::arity, f.name, n.label,
                       "unknown operator '" + e.op + "'"});
      else if (static_cast<int>(e.args.size()) != *ar)
        out.push_back({violation_kind::arity, f.name, n.label,
                       "operator '" + e.op + "' expects " +
                           std::to_string(*ar) + " arguments, got " +
                           std::to_string(e.args.size())});
      if (e.op == "phi")
        for (const auto& a : e.args)
          if (a.kind != expr_kind::variable)
            out.push_back({violation_kind::structure, f.name, n.label,
                           "phi arguments must be variables"});
      for (const auto& a : e.args) check_expr(p, f, n, a, out);
      return;
    }
  }
}

// assume conditions must be boolean-shaped: a variable, a 0/1 constant, or a
// boolean operator application.
bool boolean_shaped(const expr& e) {
  switch (e.kind) {
    case expr_kind::constant:
      return e.value == 0 || e.value == 1;
    case expr_kind::variable:
      return true;
    case expr_kind::apply:
      return is_boolean_operator(e.op);
  }
  return false;
}

// Complementary pair over a single variable: assume b / assume !b.
bool complementary_assumes(const stmt& a, const stmt& b) {
  auto pos_var = [](const expr& e) -> const std::string* {
    return e.kind == expr_kind::variable ? &e.var : nullptr;
  };
  auto neg_var = [](const expr& e) -> const std::string* {
    if (e.kind == expr_kind::apply && e.op == "!" && e.args.size() == 1 &&
        e.args[0].kind == expr_kind::variable)
      return &e.args[0].var;
    return nullptr;
  };
  const std::string* p = pos_var(a.rhs);
  const std::string* n = neg_var(b.rhs);
  if (p && n && *p == *n) return true;
  p = pos_var(b.rhs);
  n = neg_var(a.rhs);
  return p && n && *p == *n;
}

void check_ssa(const procedure& f, std::vector<violation>& out) {
  std::map<std::string, std::vector<std::string>> writers;
  for (const auto& n : f.nodes)
    for (const auto& v : write_set(n)) writers[v].push_back(n.label);
  for (const auto& [v, at] : writers) {
    if (at.size() > 1)
      out.push_back({violation_kind::ssa, f.name, at[1],
                     "variable '" + v + "' written at " +
                         std::to_string(at.size()) + " nodes"});
    if (f.is_in_formal(v))
      out.push_back({violation_kind::ssa, f.name, at[0],
                     "input formal '" + v + "' is written"});
  }
}

}  // namespace

std::vector<violation> validate(const program& p) {
  std::vector<violation> out;
  if (!p.find_proc(p.main_name))
    out.push_back({violation_kind::name, p.main_name, "",
                   "main procedure '" + p.main_name + "' not found"});
  for (const auto& f : p.procs) {
    // label uniqueness
    std::set<std::string> labels;
    for (const auto& n : f.nodes)
      if (!labels.insert(n.label).second)
        out.push_back({violation_kind::name, f.name, n.label,
                       "duplicate label '" + n.label + "'"});

    if (f.nodes.empty()) {
      out.push_back({violation_kind::structure, f.name, "", "procedure has no nodes"});
      continue;
    }
    const node* exit = f.find_node(f.exit);
    if (!f.find_node(f.entry))
      out.push_back({violation_kind::structure, f.name, "",
                     "entry label '" + f.entry + "' not present"});
    if (!exit)
      out.push_back({violation_kind::structure, f.name, "",
                     "exit label '" + f.exit + "' not present"});
    else {
      if (exit->st.kind != stmt_kind::skip)
        out.push_back({violation_kind::structure, f.name, f.exit,
                       "exit node must hold skip"});
      if (!exit->succ.empty())
        out.push_back({violation_kind::structure, f.name, f.exit,
                       "exit node must have no successors"});
    }

    for (const auto& fv : f.ins)
      if (!f.has_var(fv))
        out.push_back({violation_kind::name, f.name, "",
                       "input formal '" + fv + "' missing from vars"});
    for (const auto& fv : f.outs)
      if (!f.has_var(fv))
        out.push_back({violation_kind::name, f.name, "",
                       "output formal '" + fv + "' missing from vars"});

    for (const auto& n : f.nodes) {
      if (n.succ.size() > 2)
        out.push_back({violation_kind::structure, f.name, n.label,
                       "node has more than 2 successors"});
      for (const auto& s : n.succ)
        if (!f.find_node(s))
          out.push_back({violation_kind::name, f.name, n.label,
                         "goto target '" + s + "' not present"});

      if (n.succ.size() == 2) {
        const node* a = f.find_node(n.succ[0]);
        const node* b = f.find_node(n.succ[1]);
        if (a && b) {
          if (a->st.kind != stmt_kind::assume || b->st.kind != stmt_kind::assume)
            out.push_back({violation_kind::structure, f.name, n.label,
                           "branching node successors must be assume nodes"});
          else if (!complementary_assumes(a->st, b->st))
            out.push_back({violation_kind::structure, f.name, n.label,
                           "branching node successors must assume complementary "
                           "conditions over a single variable"});
        }
      }

      switch (n.st.kind) {
        case stmt_kind::assign:
          if (!f.has_var(n.st.target) &&
              std::find(p.globals.begin(), p.globals.end(), n.st.target) ==
                  p.globals.end())
            out.push_back({violation_kind::name, f.name, n.label,
                           "undeclared assignment target '" + n.st.target + "'"});
          check_expr(p, f, n, n.st.rhs, out);
          break;
        case stmt_kind::assume:
          check_expr(p, f, n, n.st.rhs, out);
          if (!boolean_shaped(n.st.rhs))
            out.push_back({violation_kind::structure, f.name, n.label,
                           "assume condition is not boolean-shaped"});
          break;
        case stmt_kind::skip:
          break;
        case stmt_kind::call: {
          if (n.st.callee == p.main_name)
            out.push_back({violation_kind::structure, f.name, n.label,
                           "calls to main are not allowed"});
          const procedure* callee = p.find_proc(n.st.callee);
          if (!callee) {
            out.push_back({violation_kind::name, f.name, n.label,
                           "unresolved callee '" + n.st.callee + "'"});
          } else {
            if (n.st.args.size() != callee->ins.size())
              out.push_back({violation_kind::arity, f.name, n.label,
                             "call to '" + n.st.callee + "' passes " +
                                 std::to_string(n.st.args.size()) +
                                 " actuals, callee has " +
                                 std::to_string(callee->ins.size()) +
                                 " input formals"});
            if (n.st.rets.size() != callee->outs.size())
              out.push_back({violation_kind::arity, f.name, n.label,
                             "call to '" + n.st.callee + "' receives " +
                                 std::to_string(n.st.rets.size()) +
                                 " returns, callee has " +
                                 std::to_string(callee->outs.size()) +
                                 " output formals"});
            if (n.succ.size() != 1)
              out.push_back({violation_kind::structure, f.name, n.label,
                             "call node must have exactly one successor"});
          }
          for (const auto& a : n.st.args) check_expr(p, f, n, a, out);
          for (const auto& r : n.st.rets)
            if (!f.has_var(r) &&
                std::find(p.globals.begin(), p.globals.end(), r) ==
                    p.globals.end())
              out.push_back({violation_kind::name, f.name, n.label,
                             "undeclared return variable '" + r + "'"});
          break;
        }
      }
    }

    if (!is_acyclic(f))
      out.push_back({violation_kind::acyclicity, f.name, "", "CFG has a cycle"});
    check_ssa(f, out);
  }

  // domain declarations must name main input formals (or globals pre-lowering)
  const procedure* mainp = p.find_proc(p.main_name);
  for (const auto& [v, dom] : p.domains) {
    bool ok = (mainp && mainp->is_in_formal(v)) ||
              std::find(p.globals.begin(), p.globals.end(), v) != p.globals.end();
    if (!ok)
      out.push_back({violation_kind::name, p.main_name, "",
                     "domain declared for '" + v +
                         "' which is not a main input formal or global"});
    if (dom.empty())
      out.push_back({violation_kind::structure, p.main_name, "",
                     "domain for '" + v + "' is empty"});
  }
  return out;
}

std::vector<violation> validate_pre_lowering(const program& p) {
  std::vector<violation> out;
  for (auto& v : validate(p))
    if (v.kind != violation_kind::acyclicity && v.kind != violation_kind::ssa)
      out.push_back(std::move(v));
  return out;
}

}  // namespace cia
