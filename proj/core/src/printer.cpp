#include "cia/printer.hpp"

#include <algorithm>
#include <sstream>

namespace cia {

namespace {

int precedence(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  if (op == "*" || op == "/" || op == "%") return 6;
  if (op == "!" || op == "neg") return 7;
  return 8;  // atoms and call-style builtins
}

void print_expr_rec(std::ostream& os, const expr& e, int parent_prec) {
  switch (e.kind) {
    case expr_kind::constant:
      os << e.value;
      return;
    case expr_kind::variable:
      os << e.var;
      return;
    case expr_kind::apply: {
      if (e.op == "select" || e.op == "update" || e.op == "phi") {
        os << e.op << "(";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          if (i) os << ", ";
          print_expr_rec(os, e.args[i], 0);
        }
        os << ")";
        return;
      }
      int prec = precedence(e.op);
      bool parens = prec < parent_prec;
      if (parens) os << "(";
      if (e.op == "!") {
        os << "!";
        print_expr_rec(os, e.args[0], prec);
      } else if (e.op == "neg") {
        os << "-";
        print_expr_rec(os, e.args[0], prec);
      } else {
        print_expr_rec(os, e.args[0], prec);
        os << " " << e.op << " ";
        // right child needs a higher bar to keep left associativity
        print_expr_rec(os, e.args[1], prec + 1);
      }
      if (parens) os << ")";
      return;
    }
  }
}

}  // namespace

std::string print_expr(const expr& e) {
  std::ostringstream os;
  print_expr_rec(os, e, 0);
  return os.str();
}

std::string print_stmt(const stmt& s) {
  std::ostringstream os;
  switch (s.kind) {
    case stmt_kind::skip:
      os << "skip";
      break;
    case stmt_kind::assume:
      os << "assume " << print_expr(s.rhs);
      break;
    case stmt_kind::assign:
      os << s.target << " := " << print_expr(s.rhs);
      break;
    case stmt_kind::call: {
      os << "call ";
      for (std::size_t i = 0; i < s.rets.size(); ++i) {
        if (i) os << ", ";
        os << s.rets[i];
      }
      if (!s.rets.empty()) os << " := ";
      os << s.callee << "(";
      for (std::size_t i = 0; i < s.args.size(); ++i) {
        if (i) os << ", ";
        os << print_expr(s.args[i]);
      }
      os << ")";
      break;
    }
  }
  return os.str();
}

std::string print_program(const program& p) {
  std::ostringstream os;
  for (const auto& [v, dom] : p.domains) {
    os << "domain " << v << " in {";
    for (std::size_t i = 0; i < dom.size(); ++i) {
      if (i) os << ", ";
      os << dom[i];
    }
    os << "};\n";
  }
  for (const auto& g : p.globals) os << "global " << g << ";\n";
  if (!p.domains.empty() || !p.globals.empty()) os << "\n";

  for (const auto& f : p.procs) {
    os << "proc " << f.name << "(";
    for (std::size_t i = 0; i < f.ins.size(); ++i) {
      if (i) os << ", ";
      os << f.ins[i];
    }
    os << ")";
    if (!f.outs.empty()) {
      os << " : (";
      for (std::size_t i = 0; i < f.outs.size(); ++i) {
        if (i) os << ", ";
        os << f.outs[i];
      }
      os << ")";
    }
    os << " {\n";

    std::vector<std::string> locals;
    for (const auto& v : f.vars)
      if (!f.is_in_formal(v) && !f.is_out_formal(v)) locals.push_back(v);
    if (!locals.empty()) {
      os << "  var ";
      for (std::size_t i = 0; i < locals.size(); ++i) {
        if (i) os << ", ";
        os << locals[i];
      }
      os << ";\n";
    }

    // entry first and exit last, so the printed form re-parses with the same
    // entry/exit designations.
    std::vector<const node*> order;
    const node* exit_node = nullptr;
    for (const auto& n : f.nodes) {
      if (n.label == f.exit) {
        exit_node = &n;
        continue;
      }
      order.push_back(&n);
    }
    std::stable_partition(order.begin(), order.end(),
                          [&](const node* n) { return n->label == f.entry; });
    if (exit_node) order.push_back(exit_node);

    for (const node* n : order) {
      os << "  " << n->label << ": " << print_stmt(n->st) << ";";
      if (n->label == f.exit) {
        // exit: no goto
      } else if (n->succ.empty()) {
        os << " goto ;";
      } else {
        os << " goto ";
        for (std::size_t i = 0; i < n->succ.size(); ++i) {
          if (i) os << ", ";
          os << n->succ[i];
        }
        os << ";";
      }
      os << "\n";
    }
    os << "}\n\n";
  }
  return os.str();
}

}  // namespace cia
