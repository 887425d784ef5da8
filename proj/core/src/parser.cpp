#include "cia/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace cia {

parse_error::parse_error(const std::string& msg, int line, int column)
    : std::runtime_error(msg + " at line " + std::to_string(line) + ", column " +
                         std::to_string(column)),
      line(line),
      column(column) {}

namespace {

enum class tok_kind { ident, number, punct, end };

struct token {
  tok_kind kind = tok_kind::end;
  std::string text;
  std::int64_t number = 0;
  int line = 1;
  int col = 1;
};

struct lexer {
  const std::string& src;
  std::size_t pos = 0;
  int line = 1;
  int col = 1;

  explicit lexer(const std::string& s) : src(s) {}

  void advance() {
    if (pos < src.size()) {
      if (src[pos] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
      pos++;
    }
  }

  void skip_ws() {
    while (pos < src.size()) {
      char c = src[pos];
      if (c == '#') {
        while (pos < src.size() && src[pos] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  token next() {
    skip_ws();
    token t;
    t.line = line;
    t.col = col;
    if (pos >= src.size()) return t;
    char c = src[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) ||
              src[pos] == '_' || src[pos] == '$')) {
        s.push_back(src[pos]);
        advance();
      }
      t.kind = tok_kind::ident;
      t.text = std::move(s);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
        v = v * 10 + (src[pos] - '0');
        advance();
      }
      t.kind = tok_kind::number;
      t.number = v;
      return t;
    }
    // multi-char punctuation first
    static const char* two[] = {":=", "==", "!=", "<=", ">=", "&&", "||"};
    for (const char* p : two) {
      if (src.compare(pos, 2, p) == 0) {
        t.kind = tok_kind::punct;
        t.text = p;
        advance();
        advance();
        return t;
      }
    }
    t.kind = tok_kind::punct;
    t.text = std::string(1, c);
    advance();
    return t;
  }
};

struct parser {
  lexer lex;
  token cur;

  explicit parser(const std::string& src) : lex(src) { cur = lex.next(); }

  [[noreturn]] void fail(const std::string& msg) const {
    throw parse_error(msg, cur.line, cur.col);
  }

  void bump() { cur = lex.next(); }

  bool at_punct(const std::string& p) const {
    return cur.kind == tok_kind::punct && cur.text == p;
  }
  bool at_ident(const std::string& s) const {
    return cur.kind == tok_kind::ident && cur.text == s;
  }

  void expect_punct(const std::string& p) {
    if (!at_punct(p)) fail("expected '" + p + "'");
    bump();
  }

  std::string expect_ident() {
    if (cur.kind != tok_kind::ident) fail("expected identifier");
    std::string s = cur.text;
    bump();
    return s;
  }

  std::int64_t expect_int() {
    bool neg = false;
    if (at_punct("-")) {
      neg = true;
      bump();
    }
    if (cur.kind != tok_kind::number) fail("expected integer");
    std::int64_t v = cur.number;
    bump();
    return neg ? -v : v;
  }

  // --- expressions -------------------------------------------------------

  expr parse_expression() { return parse_or(); }

  expr parse_or() {
    expr e = parse_and();
    while (at_punct("||")) {
      bump();
      e = expr::apply("||", {e, parse_and()});
    }
    return e;
  }

  expr parse_and() {
    expr e = parse_equality();
    while (at_punct("&&")) {
      bump();
      e = expr::apply("&&", {e, parse_equality()});
    }
    return e;
  }

  expr parse_equality() {
    expr e = parse_relational();
    while (at_punct("==") || at_punct("!=")) {
      std::string op = cur.text;
      bump();
      e = expr::apply(op, {e, parse_relational()});
    }
    return e;
  }

  expr parse_relational() {
    expr e = parse_additive();
    while (at_punct("<") || at_punct("<=") || at_punct(">") || at_punct(">=")) {
      std::string op = cur.text;
      bump();
      e = expr::apply(op, {e, parse_additive()});
    }
    return e;
  }

  expr parse_additive() {
    expr e = parse_multiplicative();
    while (at_punct("+") || at_punct("-")) {
      std::string op = cur.text;
      bump();
      e = expr::apply(op, {e, parse_multiplicative()});
    }
    return e;
  }

  expr parse_multiplicative() {
    expr e = parse_unary();
    while (at_punct("*") || at_punct("/") || at_punct("%")) {
      std::string op = cur.text;
      bump();
      e = expr::apply(op, {e, parse_unary()});
    }
    return e;
  }

  expr parse_unary() {
    if (at_punct("!")) {
      bump();
      return expr::apply("!", {parse_unary()});
    }
    if (at_punct("-")) {
      bump();
      if (cur.kind == tok_kind::number) {
        std::int64_t v = cur.number;
        bump();
        return expr::cst(-v);
      }
      return expr::apply("neg", {parse_unary()});
    }
    return parse_atom();
  }

  expr parse_atom() {
    if (cur.kind == tok_kind::number) {
      std::int64_t v = cur.number;
      bump();
      return expr::cst(v);
    }
    if (at_punct("(")) {
      bump();
      expr e = parse_expression();
      expect_punct(")");
      return e;
    }
    if (cur.kind == tok_kind::ident) {
      if (cur.text == "true") {
        bump();
        return expr::cst(1);
      }
      if (cur.text == "false") {
        bump();
        return expr::cst(0);
      }
      std::string name = cur.text;
      bump();
      if (at_punct("(")) {
        // builtin application (select/update/phi); procedure calls in
        // expression position are handled by the statement parser.
        bump();
        std::vector<expr> args;
        if (!at_punct(")")) {
          args.push_back(parse_expression());
          while (at_punct(",")) {
            bump();
            args.push_back(parse_expression());
          }
        }
        expect_punct(")");
        return expr::apply(name, args);
      }
      return expr::mkvar(name);
    }
    fail("expected expression");
  }

  // --- statements / nodes -------------------------------------------------

  static bool is_builtin_fn(const std::string& name) {
    return name == "select" || name == "update" || name == "phi";
  }

  stmt parse_statement() {
    if (at_ident("skip")) {
      bump();
      return stmt::mkskip();
    }
    if (at_ident("assume")) {
      bump();
      return stmt::mkassume(parse_expression());
    }
    if (at_ident("call")) {
      bump();
      // call [r1, r2 :=] callee(args)
      std::vector<std::string> rets;
      std::string first = expect_ident();
      if (at_punct(",") || at_punct(":=")) {
        rets.push_back(first);
        while (at_punct(",")) {
          bump();
          rets.push_back(expect_ident());
        }
        expect_punct(":=");
        first = expect_ident();
      }
      expect_punct("(");
      std::vector<expr> args;
      if (!at_punct(")")) {
        args.push_back(parse_expression());
        while (at_punct(",")) {
          bump();
          args.push_back(parse_expression());
        }
      }
      expect_punct(")");
      return stmt::mkcall(first, std::move(args), std::move(rets));
    }
    // assignment or call shorthand: x := rhs
    std::string target = expect_ident();
    expect_punct(":=");
    // lookahead: ident '(' with non-builtin name means a call
    if (cur.kind == tok_kind::ident && !is_builtin_fn(cur.text) &&
        cur.text != "true" && cur.text != "false") {
      std::string name = cur.text;
      // peek one token ahead for '('
      std::size_t saved_pos = lex.pos;
      int saved_line = lex.line, saved_col = lex.col;
      token saved_cur = cur;
      bump();
      if (at_punct("(")) {
        bump();
        std::vector<expr> args;
        if (!at_punct(")")) {
          args.push_back(parse_expression());
          while (at_punct(",")) {
            bump();
            args.push_back(parse_expression());
          }
        }
        expect_punct(")");
        return stmt::mkcall(name, std::move(args), {target});
      }
      lex.pos = saved_pos;
      lex.line = saved_line;
      lex.col = saved_col;
      cur = saved_cur;
    }
    return stmt::mkassign(target, parse_expression());
  }

  // --- procedures / program ----------------------------------------------

  std::vector<std::string> parse_formal_list() {
    std::vector<std::string> out;
    expect_punct("(");
    if (!at_punct(")")) {
      out.push_back(expect_ident());
      while (at_punct(",")) {
        bump();
        out.push_back(expect_ident());
      }
    }
    expect_punct(")");
    return out;
  }

  procedure parse_procedure() {
    procedure f;
    f.name = expect_ident();
    f.ins = parse_formal_list();
    if (at_punct(":")) {
      bump();
      f.outs = parse_formal_list();
    }
    expect_punct("{");

    auto add_var = [&f](const std::string& v) {
      if (!f.has_var(v)) f.vars.push_back(v);
    };
    for (const auto& v : f.ins) add_var(v);
    for (const auto& v : f.outs) add_var(v);

    while (at_ident("var")) {
      bump();
      add_var(expect_ident());
      while (at_punct(",")) {
        bump();
        add_var(expect_ident());
      }
      expect_punct(";");
    }

    struct raw_node {
      node n;
      bool had_goto = false;
    };
    std::vector<raw_node> raw;
    while (!at_punct("}")) {
      raw_node rn;
      rn.n.label = expect_ident();
      expect_punct(":");
      rn.n.st = parse_statement();
      expect_punct(";");
      if (at_ident("goto")) {
        bump();
        rn.had_goto = true;
        if (!at_punct(";")) {
          rn.n.succ.push_back(expect_ident());
          while (at_punct(",")) {
            bump();
            rn.n.succ.push_back(expect_ident());
          }
        }
        expect_punct(";");
      }
      raw.push_back(std::move(rn));
    }
    expect_punct("}");
    if (raw.empty()) fail("procedure '" + f.name + "' has no nodes");

    // fallthrough resolution: a node without goto continues at the next
    // listed node; the last node must be the exit.
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (!raw[i].had_goto && i + 1 < raw.size())
        raw[i].n.succ.push_back(raw[i + 1].n.label);
      f.nodes.push_back(std::move(raw[i].n));
    }
    f.entry = f.nodes.front().label;
    f.exit = f.nodes.back().label;

    // infer assigned locals into the variable list, in first-write order
    for (const auto& n : f.nodes)
      for (const auto& w : write_set(n)) add_var(w);
    return f;
  }

  program parse() {
    program p;
    while (true) {
      if (at_ident("domain")) {
        bump();
        std::string v = expect_ident();
        if (!at_ident("in")) fail("expected 'in'");
        bump();
        expect_punct("{");
        std::vector<std::int64_t> values;
        values.push_back(expect_int());
        while (at_punct(",")) {
          bump();
          values.push_back(expect_int());
        }
        expect_punct("}");
        expect_punct(";");
        p.domains[v] = std::move(values);
        continue;
      }
      if (at_ident("global")) {
        bump();
        p.globals.push_back(expect_ident());
        while (at_punct(",")) {
          bump();
          p.globals.push_back(expect_ident());
        }
        expect_punct(";");
        continue;
      }
      break;
    }
    while (at_ident("proc")) {
      bump();
      p.procs.push_back(parse_procedure());
    }
    if (cur.kind != tok_kind::end) fail("expected 'proc' or end of input");
    if (p.procs.empty()) fail("program has no procedures");
    p.main_name = p.procs.front().name;
    for (const auto& f : p.procs)
      if (f.name == "main") p.main_name = "main";
    return p;
  }
};

}  // namespace

program parse_program(const std::string& text) {
  parser ps(text);
  program p = ps.parse();
  // hard errors the parser itself cannot shape-check
  for (const auto& v : validate_pre_lowering(p)) {
    if (v.kind == violation_kind::name &&
        v.message.rfind("unresolved callee", 0) == 0)
      throw ir_error("parse: " + v.proc + "/" + v.label + ": " + v.message);
    if (v.kind == violation_kind::name &&
        v.message.rfind("duplicate label", 0) == 0)
      throw ir_error("parse: " + v.proc + "/" + v.label + ": " + v.message);
    if (v.kind == violation_kind::arity)
      throw ir_error("parse: " + v.proc + "/" + v.label + ": " + v.message);
  }
  return p;
}

program parse_program_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ir_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

expr parse_expr(const std::string& text) {
  parser ps(text);
  expr e = ps.parse_expression();
  if (ps.cur.kind != tok_kind::end) ps.fail("trailing input after expression");
  return e;
}

}  // namespace cia
