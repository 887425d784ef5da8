#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../test_util.hpp"

using namespace cia;

namespace {

struct inference_fixture {
  cia_test::pair_fixture pair;
  std::map<std::pair<std::string, std::string>, std::set<std::string>> depof;

  explicit inference_fixture(const std::string& base)
      : pair(cia_test::load_pair(base)) {
    depof = dep_of(pair.p1, pair.dep1, pair.p2, pair.dep2);
  }

  equivalence_set infer(const std::set<std::string>& scope,
                        const equivalence_set& assumed = {},
                        unsigned shuffle_seed = 0, inference_log* log = nullptr) {
    scope_view view = drop_procs(pair.p1, pair.p2, scope);
    auto products = build_product(pair.p1, pair.p2, scope);
    auto candidates = generate_candidates(pair.p1, pair.p2, view, assumed);
    checker_config cfg;
    cfg.shuffle_seed = shuffle_seed;
    product_context ctx{&pair.p1, &pair.p2, &view, &depof, cfg};
    return houdini_infer(products, candidates, ctx, log);
  }

  std::set<std::string> all_procs() const {
    std::set<std::string> out;
    for (const auto& f : pair.p1.procs) out.insert(f.name);
    return out;
  }
};

}  // namespace

TEST_CASE("product structure: single shared callee pairs one-by-one") {
  auto fx = cia_test::load_pair("refactor_equiv");
  auto products = build_product(fx.p1, fx.p2, {"main", "u"});
  REQUIRE(products.size() == 2);
  const product_procedure* mp = nullptr;
  for (const auto& pp : products)
    if (pp.name == "main") mp = &pp;
  REQUIRE(mp != nullptr);
  CHECK(mp->is_entry);
  CHECK(mp->paired_callees == std::set<std::string>{"u"});
  REQUIRE(mp->calls_v1.size() == 1);
  REQUIRE(mp->calls_v2.size() == 1);
  CHECK(mp->calls_v1[0].callee == "u");
}

TEST_CASE("product structure: the running example's entry pairs all five callees") {
  auto fx = cia_test::load_pair("coreutils_like");
  std::set<std::string> scope;
  for (const auto& f : fx.p1.procs) scope.insert(f.name);
  auto products = build_product(fx.p1, fx.p2, scope);
  for (const auto& pp : products) {
    if (pp.name != "print_product_info") continue;
    CHECK(pp.paired_callees ==
          std::set<std::string>{"print_header", "locale_ok", "print_name",
                                "print_major_version", "print_minor_version"});
    CHECK(pp.calls_v1.size() == 5);
    CHECK(pp.calls_v2.size() == 5);
  }
}

TEST_CASE("out-of-scope callees are left unpaired") {
  auto fx = cia_test::load_pair("anytime_chain");
  auto products = build_product(fx.p1, fx.p2, {"main"});
  REQUIRE(products.size() == 1);
  CHECK(products[0].name == "main");
  CHECK(products[0].paired_callees.empty());  // f1 is outside the scope
  CHECK(products[0].calls_v1.size() == 1);    // but the callsite is still recorded
}

TEST_CASE("chain pair: scope {main} suffices to infer the f1 precondition") {
  inference_fixture fx("anytime_chain");
  equivalence_set eq = fx.infer({"main"});
  CHECK(eq.pre_holds("f1", "x"));
  // f2's callsites live in f1, outside the scope: no candidate, no fact
  CHECK(!eq.pre_holds("f2", "x"));
}

TEST_CASE("running example: full-scope inference matches the claimed facts") {
  inference_fixture fx("coreutils_like");
  equivalence_set eq = fx.infer(fx.all_procs());
  CHECK(eq.pre_holds("print_header", "delim"));
  CHECK(eq.pre_holds("print_name", "locale"));
  CHECK(eq.pre_holds("print_major_version", "locale"));
  CHECK(eq.pre_holds("print_minor_version", "locale"));
  CHECK(!eq.pre_holds("print_minor_version", "delim"));
  CHECK(eq.summ_holds("locale_ok", "ret"));
  CHECK(eq.summ_holds("print_name", "ret"));
  CHECK(eq.summ_holds("print_minor_version", "ret"));
  CHECK(eq.summ_holds("print_product_info", "printed"));
  // the extracted delimiter's summary must not survive
  CHECK(!eq.summ_holds("print_product_info", "line_delim"));
}

TEST_CASE("pathological pair: partial scopes cannot justify the f1 precondition") {
  inference_fixture fx("patho_chain_n2");
  // k = 0 scope: f1's callsite in f4 is outside, so no candidate exists
  CHECK(!fx.infer({"main"}).pre_holds("f1", "x"));
  // k = 1 scope: the candidate exists but f4's unconstrained entries admit
  // callsite pairs with unequal actuals
  CHECK(!fx.infer({"main", "f1", "f4"}).pre_holds("f1", "x"));
  // full scope: all entries tied, the fact is inferred
  CHECK(fx.infer(fx.all_procs()).pre_holds("f1", "x"));
}

TEST_CASE("non-termination trap: both candidate kinds are refuted") {
  inference_fixture fx("nonterm_trap");
  inference_log log;
  equivalence_set eq = fx.infer(fx.all_procs(), {}, 0, &log);
  CHECK(!eq.summ_holds("f", "r"));
  CHECK(!eq.pre_holds("f", "x"));
  CHECK(!eq.pre_holds("f", "y"));
  bool fuel_refutation = false, callseq_refutation = false;
  for (const auto& e : log.events) {
    if (e.find("summ(r, f)") != std::string::npos &&
        e.find("non-termination") != std::string::npos)
      fuel_refutation = true;
    if (e.find("pre(x, f)") != std::string::npos &&
        e.find("call-sequence") != std::string::npos)
      callseq_refutation = true;
  }
  CHECK(fuel_refutation);
  CHECK(callseq_refutation);
}

TEST_CASE("branch-condition change: the constant-argument precondition is refuted") {
  // the callsite pairs always pass equal actuals (7 vs 7); only the
  // call-sequence assertion exposes that g is called different numbers of
  // times, which must refute the precondition of the callee
  inference_fixture fx("branch_cond_change");
  equivalence_set eq = fx.infer(fx.all_procs());
  CHECK(!eq.pre_holds("g", "d"));
  CHECK(eq.summ_holds("g", "e"));
  CHECK(!eq.summ_holds("h", "r"));
}

TEST_CASE("trivially equal bodies: all obligations hold") {
  program p = lower(parse_program_file(cia_test::corpus_path("refactor_equiv_v1.ir")));
  auto [a, b] = normalize_pair(p, p);
  auto d = compute_depends(a);
  auto depof = dep_of(a, d, b, d);
  std::set<std::string> scope{"main", "u"};
  scope_view view = drop_procs(a, b, scope);
  auto products = build_product(a, b, scope);
  auto candidates = generate_candidates(a, b, view, {});
  product_context ctx{&a, &b, &view, &depof, {}};
  for (const auto& pp : products) {
    auto res = check_product_obligation(pp, candidates, ctx);
    CHECK(res.call_seq_ok);
    CHECK(res.violated_pres.empty());
    for (const auto& [y, v] : res.summ) CHECK(v == obligation_verdict::holds);
  }
}

TEST_CASE("assumed facts are never refuted") {
  inference_fixture fx("nonterm_trap");
  equivalence_set assumed;
  assumed.add_pre("f", "x", fact_provenance::assumed);
  equivalence_set eq = fx.infer(fx.all_procs(), assumed);
  CHECK(eq.pre_holds("f", "x"));  // survives as assumed
  CHECK(eq.pre.at({"f", "x"}) == fact_provenance::assumed);
}

TEST_CASE("inference result is independent of the check order") {
  inference_fixture fx("coreutils_like");
  equivalence_set base = fx.infer(fx.all_procs());
  for (unsigned seed : {1u, 7u, 1234u, 998244353u}) {
    equivalence_set shuffled = fx.infer(fx.all_procs(), {}, seed);
    CHECK(shuffled == base);
  }
}

TEST_CASE("every inferred fact passes its oracle on every corpus pair") {
  for (const auto* base : cia_test::corpus_pairs) {
    inference_fixture fx(base);
    equivalence_set eq = fx.infer(fx.all_procs());
    oracle_config cfg;
    for (const auto& [key, pv] : eq.pre) {
      auto v = oracle_preequiv(fx.pair.p1, fx.pair.p2, fx.pair.map, key.first,
                               key.second, cfg);
      CHECK_MESSAGE(v != verdict::fails,
                    base << " pre(" << key.second << ", " << key.first << ")");
    }
    for (const auto& [key, pv] : eq.summ) {
      auto v = oracle_summaryequiv(fx.pair.p1, fx.pair.p2, key.first, key.second,
                                   fx.depof[{key.first, key.second}], cfg);
      CHECK_MESSAGE(v != verdict::fails,
                    base << " summ(" << key.second << ", " << key.first << ")");
    }
  }
}

TEST_CASE("facts inferred at a scope survive at any larger scope (corpus)") {
  // empirical property: widening the inference scope never loses facts
  for (const auto* base : cia_test::corpus_pairs) {
    inference_fixture fx(base);
    auto delta = fx.pair.map.procs_delta(fx.pair.p1, fx.pair.p2);
    equivalence_set prev;
    std::set<std::string> prev_scope;
    for (int k = 0; k <= static_cast<int>(fx.pair.p1.procs.size()); ++k) {
      auto scope = procs_within(delta, fx.pair.p1, fx.pair.p2, k);
      if (scope == prev_scope) continue;
      equivalence_set eq = fx.infer(scope);
      for (const auto& [key, pv] : prev.pre)
        CHECK_MESSAGE(eq.pre_holds(key.first, key.second),
                      base << " k=" << k << " pre " << key.first << "." << key.second);
      for (const auto& [key, pv] : prev.summ)
        CHECK_MESSAGE(eq.summ_holds(key.first, key.second),
                      base << " k=" << k << " summ " << key.first << "." << key.second);
      prev = eq;
      prev_scope = scope;
      if (scope == fx.all_procs()) break;
    }
  }
}

TEST_CASE("smt backend stub reports unknown and infers nothing new") {
  inference_fixture fx("refactor_equiv");
  scope_view view = drop_procs(fx.pair.p1, fx.pair.p2, fx.all_procs());
  auto products = build_product(fx.pair.p1, fx.pair.p2, fx.all_procs());
  auto candidates = generate_candidates(fx.pair.p1, fx.pair.p2, view, {});
  checker_config cfg;
  cfg.backend = checker_config::backend_kind::smt_stub;
  product_context ctx{&fx.pair.p1, &fx.pair.p2, &view, &fx.depof, cfg};
  equivalence_set eq = houdini_infer(products, candidates, ctx);
  CHECK(eq.size() == 0);
}
