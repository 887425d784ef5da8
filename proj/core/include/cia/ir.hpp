#pragma once

// Core IR: programs are sets of procedures, each a control-flow graph whose
// nodes carry a single assign/assume/skip/call statement. Node labels are the
// identity used by version maps, so both versions of a program must reuse
// labels for unchanged code.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cia {

enum class expr_kind { constant, variable, apply };

struct expr {
  expr_kind kind = expr_kind::constant;
  std::int64_t value = 0;       // constant
  std::string var;              // variable
  std::string op;               // apply: operator symbol ("+", "!", "select", ...)
  std::vector<expr> args;       // apply

  static expr cst(std::int64_t v);
  static expr mkvar(std::string name);
  static expr apply(std::string op, std::vector<expr> args);

  bool operator==(const expr&) const = default;
};

// Operator arity table. Unary minus uses the distinct symbol "neg".
// Returns nullopt for unknown operators.
std::optional<int> operator_arity(const std::string& op);

// true for operators whose result is 0/1 (comparisons, logic).
bool is_boolean_operator(const std::string& op);

// Free variables of an expression.
void collect_vars(const expr& e, std::set<std::string>& out);
std::set<std::string> vars_of(const expr& e);

enum class stmt_kind { assign, assume, skip, call };

struct stmt {
  stmt_kind kind = stmt_kind::skip;
  std::string target;             // assign
  expr rhs;                       // assign rhs / assume condition
  std::string callee;             // call
  std::vector<expr> args;         // call actuals
  std::vector<std::string> rets;  // call return actuals

  static stmt mkskip();
  static stmt mkassign(std::string target, expr rhs);
  static stmt mkassume(expr cond);
  static stmt mkcall(std::string callee, std::vector<expr> args,
                     std::vector<std::string> rets);

  bool operator==(const stmt&) const = default;
};

struct node {
  std::string label;
  stmt st;
  std::vector<std::string> succ;  // ordered successor labels

  bool operator==(const node&) const = default;
};

struct procedure {
  std::string name;
  std::vector<std::string> ins;
  std::vector<std::string> outs;
  std::vector<std::string> vars;  // superset of ins and outs, declaration order
  std::vector<node> nodes;        // listing order; entry first, exit last by convention
  std::string entry;
  std::string exit;

  bool operator==(const procedure&) const = default;

  const node* find_node(const std::string& label) const;
  node* find_node(const std::string& label);
  bool has_var(const std::string& v) const;
  bool is_in_formal(const std::string& v) const;
  bool is_out_formal(const std::string& v) const;
};

struct program {
  std::vector<procedure> procs;
  std::string main_name;
  std::vector<std::string> globals;  // emptied by lowering
  // Declared finite domains for main's input formals (and globals before
  // lowering). Used by the bounded oracles and the enumerative checker.
  std::map<std::string, std::vector<std::int64_t>> domains;

  bool operator==(const program&) const = default;

  const procedure* find_proc(const std::string& name) const;
  procedure* find_proc(const std::string& name);
  const procedure& main() const;
};

// readset/writeset of the statement at a node.
std::set<std::string> read_set(const node& n);
std::set<std::string> write_set(const node& n);

// ---------------------------------------------------------------------------
// Validation. Violations are data, not errors; lowering establishes the
// acyclicity and ssa categories, so pre-lowering validation ignores them.

enum class violation_kind {
  structure,    // entry/exit/successor shape, branching discipline
  arity,        // operator or call arity
  name,         // undeclared variable, unresolved callee, duplicate label
  acyclicity,   // CFG has a cycle
  ssa,          // variable written at more than one node, or an input formal written
};

struct violation {
  violation_kind kind;
  std::string proc;
  std::string label;  // may be empty for procedure-level violations
  std::string message;
};

std::vector<violation> validate(const program& p);

// Violations other than acyclicity/ssa (lower's precondition).
std::vector<violation> validate_pre_lowering(const program& p);

// Per-procedure predecessor map (label -> ordered predecessor labels).
std::map<std::string, std::vector<std::string>> predecessors(const procedure& f);

// true if the procedure's CFG has no cycle.
bool is_acyclic(const procedure& f);

// Call graph edges caller -> set of callees, over one program.
std::map<std::string, std::set<std::string>> call_graph(const program& p);

// Labels of call nodes in f that call `callee`.
std::vector<std::string> callsites_of(const procedure& f, const std::string& callee);

struct ir_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cia
