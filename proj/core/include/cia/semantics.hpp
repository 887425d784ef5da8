#pragma once

// Reference interpreter. Values are wrapping signed integers of configurable
// width plus integer->integer maps with default 0. Execution is deterministic;
// division by zero and unsatisfiable assumes block the trace. Traces carry a
// step budget (fuel); exhaustion is reported as its own status so callers can
// distinguish "ran out" from a real verdict.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cia/ir.hpp"

namespace cia {

// Maps store only non-default entries so equal maps compare equal.
using map_value = std::map<std::int64_t, std::int64_t>;
using value = std::variant<std::int64_t, map_value>;

struct eval_blocked : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct semantics_config {
  int int_width = 8;        // signed, wrapping
  long fuel = 100000;       // steps per run
};

std::int64_t wrap_int(std::int64_t v, int width);

// Partial map variable -> value. Lookup of an unbound variable is an error;
// eval applies the uninitialized-reads-as-zero rule itself.
struct store {
  std::map<std::string, value> m;

  bool bound(const std::string& x) const { return m.count(x) > 0; }
  const value& lookup(const std::string& x) const;
  void bind(const std::string& x, value v) { m[x] = std::move(v); }

  // union; the right operand wins on common variables
  static store merge(const store& s1, const store& s2);
  // restrict domain to the given variables
  static store project(const store& s, const std::vector<std::string>& vars);

  bool operator==(const store&) const = default;
};

// Declared-but-unbound variables read as integer 0. phi(a, b) picks whichever
// argument is bound; evaluating a phi with both arguments bound blocks (it
// indicates malformed SSA input).
value eval(const expr& e, const store& s, const semantics_config& cfg = {});

struct frame {
  std::string proc;                   // caller procedure
  std::string return_label;           // node to resume at
  std::vector<std::string> ret_vars;  // receiving variables
  store saved;                        // caller store at the call

  bool operator==(const frame&) const = default;
};

// Call stacks are persistent (shared tails), so long traces stay linear in
// memory even under deep recursion.
struct stack_cell;
using stack_ptr = std::shared_ptr<const stack_cell>;
struct stack_cell {
  frame fr;
  stack_ptr parent;
};

std::size_t stack_depth(const stack_ptr& s);
bool stack_equal(const stack_ptr& a, const stack_ptr& b);

struct state {
  std::string proc;
  std::string label;
  store s;
  stack_ptr stack;  // nullptr at main entry/exit

  bool operator==(const state& o) const {
    return proc == o.proc && label == o.label && s == o.s &&
           stack_equal(stack, o.stack);
  }
};

enum class term_status { normal, blocked, fuel_exhausted };

struct trace {
  std::vector<state> states;
  term_status status = term_status::normal;
};

struct step_result {
  bool terminal = false;
  term_status status = term_status::normal;  // when terminal
  state next;                                // when not terminal
};

state initial_state(const program& p, const store& inputs);

// Single transition. Branching nodes resolve their successor by evaluating the
// successors' complementary assumes, which keeps the relation deterministic.
step_result step(const state& st, const program& p, const semantics_config& cfg = {});

// Maximal trace from main's entry with the given input store, up to fuel.
trace run(const program& p, const store& inputs, const semantics_config& cfg = {});

// Maximal trace of an arbitrary procedure from an entry store (used by the
// bounded equivalence oracles; main traces are the Definition-oriented ones).
trace run_proc(const program& p, const std::string& proc, const store& entry,
               const semantics_config& cfg = {});

// Sequence of values of x over the states of t at node (proc, label);
// nullopt marks states where x is unbound.
std::vector<std::optional<value>> project_values(const trace& t,
                                                 const std::string& proc,
                                                 const std::string& label,
                                                 const std::string& x);

// One line per state: "proc:label {x=1,m=[0:3,2:1]} depth".
std::string format_state(const state& st);
std::string format_trace(const trace& t);
std::string format_value(const value& v);

}  // namespace cia
