#include "cia/semantics.hpp"

#include <sstream>

namespace cia {

std::int64_t wrap_int(std::int64_t v, int width) {
  if (width >= 64) return v;
  const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
  std::uint64_t u = static_cast<std::uint64_t>(v) & mask;
  const std::uint64_t sign = std::uint64_t{1} << (width - 1);
  if (u & sign) return static_cast<std::int64_t>(u) - static_cast<std::int64_t>(mask + 1);
  return static_cast<std::int64_t>(u);
}

const value& store::lookup(const std::string& x) const {
  auto it = m.find(x);
  if (it == m.end()) throw ir_error("store lookup of unbound variable '" + x + "'");
  return it->second;
}

store store::merge(const store& s1, const store& s2) {
  store out = s1;
  for (const auto& [k, v] : s2.m) out.m[k] = v;
  return out;
}

store store::project(const store& s, const std::vector<std::string>& vars) {
  store out;
  for (const auto& v : vars) {
    auto it = s.m.find(v);
    if (it != s.m.end()) out.m[v] = it->second;
  }
  return out;
}

std::size_t stack_depth(const stack_ptr& s) {
  std::size_t d = 0;
  for (const stack_cell* c = s.get(); c; c = c->parent.get()) d++;
  return d;
}

bool stack_equal(const stack_ptr& a, const stack_ptr& b) {
  const stack_cell* x = a.get();
  const stack_cell* y = b.get();
  while (x && y) {
    if (x == y) return true;  // shared tail
    if (!(x->fr == y->fr)) return false;
    x = x->parent.get();
    y = y->parent.get();
  }
  return x == y;
}

namespace {

std::int64_t as_int(const value& v, const char* what) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw eval_blocked(std::string("expected integer operand in ") + what);
}

const map_value& as_map(const value& v, const char* what) {
  if (const auto* m = std::get_if<map_value>(&v)) return *m;
  throw eval_blocked(std::string("expected map operand in ") + what);
}

std::int64_t truth(std::int64_t v) { return v != 0 ? 1 : 0; }

}  // namespace

value eval(const expr& e, const store& s, const semantics_config& cfg) {
  switch (e.kind) {
    case expr_kind::constant:
      return wrap_int(e.value, cfg.int_width);
    case expr_kind::variable:
      if (s.bound(e.var)) return s.lookup(e.var);
      return std::int64_t{0};  // uninitialized reads as 0
    case expr_kind::apply: {
      const std::string& op = e.op;
      if (op == "phi") {
        const expr& a = e.args[0];
        const expr& b = e.args[1];
        bool ba = a.kind == expr_kind::variable && s.bound(a.var);
        bool bb = b.kind == expr_kind::variable && s.bound(b.var);
        if (ba && bb) throw eval_blocked("phi with both arguments bound");
        if (ba) return s.lookup(a.var);
        if (bb) return s.lookup(b.var);
        return std::int64_t{0};
      }
      if (op == "select") {
        value m = eval(e.args[0], s, cfg);
        std::int64_t i = as_int(eval(e.args[1], s, cfg), "select");
        const auto& mv = as_map(m, "select");
        auto it = mv.find(i);
        return it == mv.end() ? std::int64_t{0} : it->second;
      }
      if (op == "update") {
        value m = eval(e.args[0], s, cfg);
        std::int64_t i = as_int(eval(e.args[1], s, cfg), "update");
        std::int64_t v = as_int(eval(e.args[2], s, cfg), "update");
        map_value mv;
        if (const auto* pm = std::get_if<map_value>(&m)) mv = *pm;
        // a fresh integer-valued variable used as a map starts empty
        if (v == 0)
          mv.erase(i);
        else
          mv[i] = v;
        return mv;
      }
      if (op == "!") return truth(as_int(eval(e.args[0], s, cfg), "!")) ^ 1;
      if (op == "neg")
        return wrap_int(-as_int(eval(e.args[0], s, cfg), "neg"), cfg.int_width);
      if (op == "==" || op == "!=") {
        // structural equality, defined for maps as well
        value va = eval(e.args[0], s, cfg);
        value vb = eval(e.args[1], s, cfg);
        bool eq = va == vb;
        return std::int64_t{(op == "==") == eq ? 1 : 0};
      }

      std::int64_t a = as_int(eval(e.args[0], s, cfg), op.c_str());
      std::int64_t b = as_int(eval(e.args[1], s, cfg), op.c_str());
      auto w = [&](std::int64_t v) { return wrap_int(v, cfg.int_width); };
      if (op == "+") return w(a + b);
      if (op == "-") return w(a - b);
      if (op == "*") return w(a * b);
      if (op == "/") {
        if (b == 0) throw eval_blocked("division by zero");
        return w(a / b);
      }
      if (op == "%") {
        if (b == 0) throw eval_blocked("division by zero");
        return w(a % b);
      }
      if (op == "<") return std::int64_t{a < b ? 1 : 0};
      if (op == "<=") return std::int64_t{a <= b ? 1 : 0};
      if (op == ">") return std::int64_t{a > b ? 1 : 0};
      if (op == ">=") return std::int64_t{a >= b ? 1 : 0};
      if (op == "&&") return std::int64_t{truth(a) && truth(b) ? 1 : 0};
      if (op == "||") return std::int64_t{truth(a) || truth(b) ? 1 : 0};
      throw ir_error("eval: unknown operator '" + op + "'");
    }
  }
  throw ir_error("eval: malformed expression");
}

state initial_state(const program& p, const store& inputs) {
  const procedure& m = p.main();
  state st;
  st.proc = m.name;
  st.label = m.entry;
  st.s = inputs;
  return st;
}

namespace {

// Pick the unique enabled successor. For two-successor nodes the successors
// are complementary assumes; for one successor it is taken unconditionally.
const node* enabled_successor(const procedure& f, const node& n, const store& s,
                              const semantics_config& cfg) {
  if (n.succ.empty()) return nullptr;
  if (n.succ.size() == 1) return f.find_node(n.succ[0]);
  for (const auto& lbl : n.succ) {
    const node* cand = f.find_node(lbl);
    if (!cand) continue;
    if (cand->st.kind != stmt_kind::assume) return cand;  // malformed; be lenient
    if (as_int(eval(cand->st.rhs, s, cfg), "assume") != 0) return cand;
  }
  return nullptr;  // both assumes false: blocked
}

}  // namespace

step_result step(const state& st, const program& p, const semantics_config& cfg) {
  step_result out;
  const procedure* f = p.find_proc(st.proc);
  if (!f) throw ir_error("step: unknown procedure '" + st.proc + "'");
  const node* n = f->find_node(st.label);
  if (!n) throw ir_error("step: unknown label '" + st.proc + ":" + st.label + "'");

  try {
    switch (n->st.kind) {
      case stmt_kind::assign: {
        store s2 = st.s;
        s2.bind(n->st.target, eval(n->st.rhs, st.s, cfg));
        const node* next = enabled_successor(*f, *n, s2, cfg);
        if (!next) {
          out.terminal = true;
          out.status = term_status::blocked;
          return out;
        }
        out.next = {st.proc, next->label, std::move(s2), st.stack};
        return out;
      }
      case stmt_kind::assume: {
        if (as_int(eval(n->st.rhs, st.s, cfg), "assume") == 0) {
          out.terminal = true;
          out.status = term_status::blocked;
          return out;
        }
        const node* next = enabled_successor(*f, *n, st.s, cfg);
        if (!next) {
          out.terminal = true;
          out.status = term_status::blocked;
          return out;
        }
        out.next = {st.proc, next->label, st.s, st.stack};
        return out;
      }
      case stmt_kind::skip: {
        if (n->label == f->exit) {
          if (!st.stack) {
            out.terminal = true;
            out.status = term_status::normal;
            return out;
          }
          // return: write outputs into the caller's receiving vars, then
          // project to the caller's variables
          const frame& fr = st.stack->fr;
          store with_rets = fr.saved;
          for (std::size_t i = 0; i < fr.ret_vars.size(); ++i) {
            const std::string& y = f->outs[i];
            value v = st.s.bound(y) ? st.s.lookup(y) : value{std::int64_t{0}};
            with_rets.bind(fr.ret_vars[i], std::move(v));
          }
          const procedure* caller = p.find_proc(fr.proc);
          store projected = store::project(with_rets, caller->vars);
          out.next = {fr.proc, fr.return_label, std::move(projected), st.stack->parent};
          return out;
        }
        const node* next = enabled_successor(*f, *n, st.s, cfg);
        if (!next) {
          out.terminal = true;
          out.status = term_status::blocked;
          return out;
        }
        out.next = {st.proc, next->label, st.s, st.stack};
        return out;
      }
      case stmt_kind::call: {
        const procedure* callee = p.find_proc(n->st.callee);
        if (!callee) throw ir_error("step: unresolved callee '" + n->st.callee + "'");
        if (n->succ.size() != 1)
          throw ir_error("step: call node without unique successor");
        store entry;
        for (std::size_t i = 0; i < callee->ins.size(); ++i)
          entry.bind(callee->ins[i], eval(n->st.args[i], st.s, cfg));
        frame fr{st.proc, n->succ[0], n->st.rets, st.s};
        auto stack2 = std::make_shared<const stack_cell>(
            stack_cell{std::move(fr), st.stack});
        out.next = {callee->name, callee->entry, std::move(entry), std::move(stack2)};
        return out;
      }
    }
  } catch (const eval_blocked&) {
    out.terminal = true;
    out.status = term_status::blocked;
    return out;
  }
  throw ir_error("step: malformed statement");
}

namespace {

trace run_from(const program& p, state st, const semantics_config& cfg) {
  trace t;
  t.states.push_back(st);
  for (long i = 0; i < cfg.fuel; ++i) {
    step_result r = step(t.states.back(), p, cfg);
    if (r.terminal) {
      t.status = r.status;
      return t;
    }
    t.states.push_back(std::move(r.next));
  }
  t.status = term_status::fuel_exhausted;
  return t;
}

}  // namespace

trace run(const program& p, const store& inputs, const semantics_config& cfg) {
  return run_from(p, initial_state(p, inputs), cfg);
}

trace run_proc(const program& p, const std::string& proc, const store& entry,
               const semantics_config& cfg) {
  const procedure* f = p.find_proc(proc);
  if (!f) throw ir_error("run_proc: unknown procedure '" + proc + "'");
  state st;
  st.proc = proc;
  st.label = f->entry;
  st.s = entry;
  return run_from(p, std::move(st), cfg);
}

std::vector<std::optional<value>> project_values(const trace& t,
                                                 const std::string& proc,
                                                 const std::string& label,
                                                 const std::string& x) {
  std::vector<std::optional<value>> out;
  for (const auto& st : t.states) {
    if (st.proc != proc || st.label != label) continue;
    if (st.s.bound(x))
      out.push_back(st.s.lookup(x));
    else
      out.push_back(std::nullopt);
  }
  return out;
}

std::string format_value(const value& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  const auto& m = std::get<map_value>(v);
  std::ostringstream os;
  os << "[";
  bool first = true;
  for (const auto& [k, val] : m) {
    if (!first) os << ",";
    first = false;
    os << k << ":" << val;
  }
  os << "]";
  return os.str();
}

std::string format_state(const state& st) {
  std::ostringstream os;
  os << st.proc << ":" << st.label << " {";
  bool first = true;
  for (const auto& [k, v] : st.s.m) {
    if (!first) os << ",";
    first = false;
    os << k << "=" << format_value(v);
  }
  os << "} " << stack_depth(st.stack);
  return os.str();
}

std::string format_trace(const trace& t) {
  std::ostringstream os;
  for (const auto& st : t.states) os << format_state(st) << "\n";
  switch (t.status) {
    case term_status::normal:
      os << "-- normal\n";
      break;
    case term_status::blocked:
      os << "-- blocked\n";
      break;
    case term_status::fuel_exhausted:
      os << "-- fuel exhausted\n";
      break;
  }
  return os.str();
}

}  // namespace cia
