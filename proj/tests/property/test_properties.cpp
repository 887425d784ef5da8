#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "../test_util.hpp"

using namespace cia;

// Randomized program-pair generator: small acyclic call graphs, straight-line
// and diamond-shaped bodies, an optional counting loop in main, and a
// mutation knob producing the second version.

namespace {

struct generator {
  std::mt19937_64 rng;
  explicit generator(std::uint64_t seed) : rng(seed) {}

  int irange(int lo, int hi) {  // inclusive
    return static_cast<int>(std::uniform_int_distribution<int>(lo, hi)(rng));
  }
  bool chance(double p) {
    return std::uniform_real_distribution<double>(0, 1)(rng) < p;
  }
  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(irange(0, static_cast<int>(xs.size()) - 1))];
  }

  expr rand_expr(const std::vector<std::string>& vars, int depth = 0) {
    int c = irange(0, depth > 1 ? 1 : 3);
    switch (c) {
      case 0:
        return expr::cst(irange(-2, 2));
      case 1:
        return vars.empty() ? expr::cst(irange(0, 1)) : expr::mkvar(pick(vars));
      default: {
        static const std::vector<std::string> ops = {"+", "-", "*"};
        return expr::apply(pick(ops), {rand_expr(vars, depth + 1),
                                       rand_expr(vars, depth + 1)});
      }
    }
  }

  expr rand_bool_expr(const std::vector<std::string>& vars) {
    static const std::vector<std::string> rel = {"<", "<=", ">", "==", "!="};
    return expr::apply(pick(rel), {rand_expr(vars, 1), rand_expr(vars, 1)});
  }

  // a procedure body: blocks of assigns, maybe one diamond, maybe calls to
  // later procedures (acyclic call graph)
  procedure rand_proc(const std::string& name, int n_ins, int n_outs,
                      const std::vector<const procedure*>& callees) {
    procedure f;
    f.name = name;
    for (int i = 0; i < n_ins; ++i) f.ins.push_back("x" + std::to_string(i));
    for (int i = 0; i < n_outs; ++i) f.outs.push_back("r" + std::to_string(i));
    std::vector<std::string> locals;
    int n_locals = irange(1, 2);
    for (int i = 0; i < n_locals; ++i) locals.push_back("t" + std::to_string(i));
    f.vars = f.ins;
    for (const auto& v : f.outs) f.vars.push_back(v);
    for (const auto& v : locals) f.vars.push_back(v);

    std::vector<std::string> writable = f.outs;
    for (const auto& v : locals) writable.push_back(v);
    std::vector<std::string> readable = f.vars;

    int label_counter = 0;
    auto fresh = [&] { return name.substr(0, 1) + std::to_string(label_counter++); };

    auto assign_node = [&]() {
      node n;
      n.label = fresh();
      n.st = stmt::mkassign(pick(writable), rand_expr(readable, 1));
      return n;
    };
    auto call_node = [&]() {
      const procedure* g = pick(callees);
      node n;
      n.label = fresh();
      std::vector<expr> args;
      for (std::size_t i = 0; i < g->ins.size(); ++i) args.push_back(rand_expr(readable, 1));
      std::vector<std::string> rets;
      std::set<std::string> used;
      for (std::size_t i = 0; i < g->outs.size(); ++i) {
        std::string r = pick(writable);
        while (used.count(r)) r += "_";
        used.insert(r);
        if (!f.has_var(r)) f.vars.push_back(r);
        if (std::find(writable.begin(), writable.end(), r) == writable.end())
          writable.push_back(r);
        rets.push_back(r);
      }
      n.st = stmt::mkcall(g->name, std::move(args), std::move(rets));
      return n;
    };
    auto body_node = [&]() {
      if (!callees.empty() && chance(0.35)) return call_node();
      return assign_node();
    };

    // straight prefix
    int prefix = irange(1, 3);
    for (int i = 0; i < prefix; ++i) f.nodes.push_back(body_node());
    // optional diamond
    if (chance(0.6)) {
      std::string bvar = "b" + std::to_string(label_counter);
      f.vars.push_back(bvar);
      node br;
      br.label = fresh();
      br.st = stmt::mkassign(bvar, rand_bool_expr(readable));
      node at, af;
      at.label = fresh();
      at.st = stmt::mkassume(expr::mkvar(bvar));
      af.label = fresh();
      af.st = stmt::mkassume(expr::apply("!", {expr::mkvar(bvar)}));
      node bt = body_node();
      node bf = body_node();
      std::string join_label = name.substr(0, 1) + std::to_string(label_counter++);
      br.succ = {at.label, af.label};
      at.succ = {bt.label};
      af.succ = {bf.label};
      node join;
      join.label = join_label;
      join.st = body_node().st;
      bt.succ = {join.label};
      bf.succ = {join.label};
      f.nodes.push_back(br);
      f.nodes.push_back(at);
      f.nodes.push_back(bt);
      f.nodes.push_back(af);
      f.nodes.push_back(bf);
      f.nodes.push_back(join);
    }
    // straight suffix
    int suffix = irange(0, 2);
    for (int i = 0; i < suffix; ++i) f.nodes.push_back(body_node());

    node ex;
    ex.label = fresh();
    ex.st = stmt::mkskip();
    f.nodes.push_back(ex);

    // wire the fallthrough chain for everything not already wired
    for (std::size_t i = 0; i + 1 < f.nodes.size(); ++i)
      if (f.nodes[i].succ.empty()) f.nodes[i].succ = {f.nodes[i + 1].label};
    f.entry = f.nodes.front().label;
    f.exit = f.nodes.back().label;
    return f;
  }

  program rand_program(bool with_loop) {
    program p;
    int n_helpers = irange(0, 4);
    // helpers first (callees), then main; helper i may call helpers > i
    std::vector<procedure> helpers(n_helpers);
    for (int i = n_helpers - 1; i >= 0; --i) {
      std::vector<const procedure*> callees;
      for (int j = i + 1; j < n_helpers; ++j) callees.push_back(&helpers[j]);
      helpers[i] = rand_proc("h" + std::to_string(i), irange(1, 2), irange(1, 2), callees);
    }
    std::vector<const procedure*> callees;
    for (auto& h : helpers) callees.push_back(&h);
    procedure m = rand_proc("main", irange(1, 2), 1, callees);

    if (with_loop) {
      // prepend a bounded counting loop writing a local accumulator
      std::vector<node> loop_nodes;
      std::string acc = "acc", ctr = "ctr", lb = "lb";
      for (const auto* v : {&acc, &ctr, &lb})
        if (!m.has_var(*v)) m.vars.push_back(*v);
      node i0{.label = "L0", .st = stmt::mkassign(acc, expr::cst(0)), .succ = {"L1"}};
      node i1{.label = "L1",
              .st = stmt::mkassign(ctr, expr::mkvar(m.ins[0])),
              .succ = {"L2"}};
      node h{.label = "L2",
             .st = stmt::mkassign(lb, expr::apply(">", {expr::mkvar(ctr), expr::cst(0)})),
             .succ = {"L3", "L4"}};
      node at{.label = "L3", .st = stmt::mkassume(expr::mkvar(lb)), .succ = {"L3a"}};
      node body{.label = "L3a",
                .st = stmt::mkassign(
                    acc, expr::apply("+", {expr::mkvar(acc), expr::mkvar(ctr)})),
                .succ = {"L3b"}};
      node dec{.label = "L3b",
               .st = stmt::mkassign(ctr, expr::apply("-", {expr::mkvar(ctr), expr::cst(1)})),
               .succ = {"L2"}};
      node af{.label = "L4",
              .st = stmt::mkassume(expr::apply("!", {expr::mkvar(lb)})),
              .succ = {m.entry}};
      for (auto& n : {i0, i1, h, at, body, dec, af}) loop_nodes.push_back(n);
      m.nodes.insert(m.nodes.begin(), loop_nodes.begin(), loop_nodes.end());
      m.entry = "L0";
    }

    for (auto& h : helpers) p.procs.push_back(std::move(h));
    p.procs.push_back(std::move(m));
    p.main_name = "main";
    for (const auto& x : p.main().ins) p.domains[x] = {-1, 0, 1};
    return p;
  }

  // second version: mutate one procedure (or none)
  program mutate(const program& base) {
    program out = base;
    if (chance(0.15)) return out;  // identical pair
    auto& f = out.procs[static_cast<std::size_t>(
        irange(0, static_cast<int>(out.procs.size()) - 1))];
    std::vector<node*> assigns;
    for (auto& n : f.nodes)
      if (n.st.kind == stmt_kind::assign) assigns.push_back(&n);
    if (assigns.empty()) return out;
    node* n = assigns[static_cast<std::size_t>(
        irange(0, static_cast<int>(assigns.size()) - 1))];
    switch (irange(0, 2)) {
      case 0:  // perturb with a constant
        n->st.rhs = expr::apply("+", {n->st.rhs, expr::cst(irange(0, 1))});
        break;
      case 1:  // harmless algebraic rewrite
        n->st.rhs = expr::apply("+", {expr::cst(0), n->st.rhs});
        break;
      case 2:  // swap operands when binary
        if (n->st.rhs.kind == expr_kind::apply && n->st.rhs.args.size() == 2)
          std::swap(n->st.rhs.args[0], n->st.rhs.args[1]);
        else
          n->st.rhs = expr::apply("*", {n->st.rhs, expr::cst(1)});
        break;
    }
    return out;
  }

  equivalence_set rand_facts(const program& p, double keep) {
    equivalence_set eq;
    for (const auto& f : p.procs) {
      for (const auto& x : f.ins)
        if (chance(keep)) eq.add_pre(f.name, x, fact_provenance::assumed);
      for (const auto& y : f.outs)
        if (chance(keep)) eq.add_summ(f.name, y, fact_provenance::assumed);
    }
    return eq;
  }
};

constexpr int kCases = 200;

struct prepared_pair {
  program p1, p2;
  node_map map;
  dependency_relation d1, d2;
};

prepared_pair prepare(generator& gen, bool with_loop) {
  program base = gen.rand_program(with_loop);
  program mut = gen.mutate(base);
  program l1 = lower(base);
  program l2 = lower(mut);
  auto [n1, n2] = normalize_pair(l1, l2);
  prepared_pair pp;
  pp.p1 = std::move(n1);
  pp.p2 = std::move(n2);
  pp.map = structural_diff(pp.p1, pp.p2);
  pp.d1 = compute_depends(pp.p1);
  pp.d2 = compute_depends(pp.p2);
  return pp;
}

}  // namespace

TEST_CASE("property: parse/print round trip") {
  for (int i = 0; i < kCases; ++i) {
    generator gen(1000 + i);
    program p = gen.rand_program(i % 3 == 0);
    REQUIRE_MESSAGE(validate_pre_lowering(p).empty(), "seed " << i);
    program q = parse_program(print_program(p));
    CHECK_MESSAGE(p == q, "seed " << i);
    // lowered programs round-trip as well
    program low = lower(p);
    CHECK_MESSAGE(low == parse_program(print_program(low)), "seed " << i);
  }
}

TEST_CASE("property: lowering is idempotent and semantics-preserving") {
  for (int i = 0; i < kCases; ++i) {
    generator gen(2000 + i);
    program p = gen.rand_program(i % 2 == 0);
    program low = lower(p);
    CHECK_MESSAGE(validate(low).empty(), "seed " << i);
    CHECK_MESSAGE(lower(low) == low, "seed " << i);
    for (const auto& in : enumerate_input_stores(p)) {
      trace t1 = run(p, in);
      trace t2 = run(low, in);
      REQUIRE_MESSAGE(t1.status == t2.status, "seed " << i);
      if (t1.status != term_status::normal) continue;
      for (const auto& y : p.main().outs) {
        const store& s1 = t1.states.back().s;
        const store& s2 = t2.states.back().s;
        value v1 = s1.bound(y) ? s1.lookup(y) : value{std::int64_t{0}};
        value v2 = s2.bound(y) ? s2.lookup(y) : value{std::int64_t{0}};
        CHECK_MESSAGE(v1 == v2, "seed " << i << " out " << y);
      }
    }
  }
}

TEST_CASE("property: depends and impact fixpoints are stable") {
  for (int i = 0; i < kCases; ++i) {
    generator gen(3000 + i);
    prepared_pair pp = prepare(gen, false);
    auto d_again = compute_depends(pp.p1);
    CHECK_MESSAGE(d_again.depends_on_var == pp.d1.depends_on_var, "seed " << i);
    impact_result a = dcia(pp.p1, pp.p2, pp.map, pp.d1, pp.d2);
    impact_result b = dcia(pp.p1, pp.p2, pp.map, pp.d1, pp.d2);
    bool same = a.subset_of(b) && b.subset_of(a);
    CHECK_MESSAGE(same, "seed " << i);
  }
}

TEST_CASE("property: impact is anti-monotone in the equivalence facts") {
  for (int i = 0; i < kCases; ++i) {
    generator gen(4000 + i);
    prepared_pair pp = prepare(gen, false);
    equivalence_set small = gen.rand_facts(pp.p1, 0.3);
    equivalence_set big = small;
    big.merge(gen.rand_facts(pp.p1, 0.5));
    impact_result rs = sem_dcia(pp.p1, pp.p2, pp.map, pp.d1, pp.d2, small);
    impact_result rb = sem_dcia(pp.p1, pp.p2, pp.map, pp.d1, pp.d2, big);
    CHECK_MESSAGE(rb.subset_of(rs), "seed " << i);
  }
}

TEST_CASE("property: anytime iterations shrink monotonically") {
  for (int i = 0; i < kCases; ++i) {
    generator gen(5000 + i);
    prepared_pair pp = prepare(gen, false);
    anytime_options opts;
    opts.k_max = 2;
    opts.checker.enum_budget = 20000;  // exhaustion only costs precision
    anytime_result res =
        sem_dcia_anytime(pp.p1, pp.p2, pp.map, pp.d1, pp.d2, opts);
    const impact_result* prev = &res.initial;
    for (const auto& it : res.iterations) {
      CHECK_MESSAGE(it.impact.subset_of(*prev), "seed " << i << " k=" << it.k);
      prev = &it.impact;
    }
  }
}
