#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "../test_util.hpp"

using namespace cia;

TEST_CASE("procs_within at distance zero is the changed set") {
  auto f = cia_test::load_pair("anytime_chain");
  auto delta = f.map.procs_delta(f.p1, f.p2);
  CHECK(delta == std::set<std::string>{"main"});
  CHECK(procs_within(delta, f.p1, f.p2, 0) == delta);
}

TEST_CASE("procs_within pulls in the far caller of the changed chain") {
  auto f = cia_test::load_pair("patho_chain_n2");
  auto delta = f.map.procs_delta(f.p1, f.p2);
  REQUIRE(delta == std::set<std::string>{"main"});
  // f4 shares the descendant f1 with main within one call
  CHECK(procs_within(delta, f.p1, f.p2, 1) ==
        std::set<std::string>{"main", "f1", "f4"});
  CHECK(procs_within(delta, f.p1, f.p2, 2) ==
        std::set<std::string>{"main", "f1", "f2", "f3", "f4"});
}

TEST_CASE("procs_within saturates at the call-graph diameter") {
  auto f = cia_test::load_pair("anytime_chain");
  std::set<std::string> all;
  for (const auto& p : f.p1.procs) all.insert(p.name);
  CHECK(procs_within({"main"}, f.p1, f.p2, 16) == all);
}

TEST_CASE("drop_procs computes external-callsite flags") {
  auto f = cia_test::load_pair("patho_chain_n2");
  SUBCASE("full scope has no external callsites") {
    std::set<std::string> all;
    for (const auto& p : f.p1.procs) all.insert(p.name);
    scope_view v = drop_procs(f.p1, f.p2, all);
    for (const auto& [proc, flag] : v.external_callsites) CHECK_MESSAGE(!flag, proc);
  }
  SUBCASE("partial scope flags procedures with callers outside") {
    scope_view v = drop_procs(f.p1, f.p2, {"main", "f1", "f4"});
    CHECK(!v.external_callsites.at("main"));  // no callers at all
    CHECK(!v.external_callsites.at("f1"));    // called from main and f4, both inside
    CHECK(v.external_callsites.at("f4"));     // called from f3, outside
    CHECK(v.all_callsites_in_scope.at("f1"));
    CHECK(v.all_callsites_in_scope.at("f2"));   // its only callsite is in f1
    CHECK(!v.all_callsites_in_scope.at("f3"));  // called from f2, outside
  }
  SUBCASE("a lone procedure with its caller outside is flagged") {
    auto g = cia_test::load_pair("anytime_chain");
    scope_view v = drop_procs(g.p1, g.p2, {"f1"});
    CHECK(v.external_callsites.at("f1"));
  }
}

TEST_CASE("anytime at k=0 confines the chain's impact to main") {
  auto f = cia_test::load_pair("anytime_chain");
  anytime_options opts;
  opts.k_max = 0;
  anytime_result res = sem_dcia_anytime(f.p1, f.p2, f.map, f.dep1, f.dep2, opts);
  REQUIRE(res.iterations.size() == 1);
  CHECK(res.iterations[0].scope == std::set<std::string>{"main"});
  for (const auto& [proc, label] : res.final_impact().nodes_union())
    CHECK_MESSAGE(proc == "main", proc << ":" << label);
  // the plain dataflow baseline impacts every procedure
  std::set<std::string> base_procs;
  for (const auto& [proc, label] : res.initial.nodes_union()) base_procs.insert(proc);
  CHECK(base_procs.size() == 6);
}

TEST_CASE("anytime on the pathological pair improves only at full scope") {
  auto f = cia_test::load_pair("patho_chain_n2");
  anytime_options opts;  // widen to saturation
  anytime_result res = sem_dcia_anytime(f.p1, f.p2, f.map, f.dep1, f.dep2, opts);
  std::set<std::string> all;
  for (const auto& p : f.p1.procs) all.insert(p.name);
  std::size_t k0_size = 0, full_size = 0;
  for (const auto& it : res.iterations) {
    bool full = it.scope == all;
    if (it.k == 0) k0_size = it.impact.nodes_union().size();
    if (full) full_size = it.impact.nodes_union().size();
    // the f1 precondition appears exactly when the scope is complete
    CHECK(it.eq.pre_holds("f1", "x") == full);
  }
  CHECK(full_size < k0_size);
}

TEST_CASE("iteration impact shrinks monotonically in k") {
  for (const auto* base : {"anytime_chain", "patho_chain_n2", "coreutils_like"}) {
    auto f = cia_test::load_pair(base);
    anytime_result res = sem_dcia_anytime(f.p1, f.p2, f.map, f.dep1, f.dep2, {});
    const impact_result* prev = &res.initial;
    for (const auto& it : res.iterations) {
      CHECK_MESSAGE(it.impact.subset_of(*prev), base << " k=" << it.k);
      prev = &it.impact;
    }
  }
}

TEST_CASE("equivalence facts accumulate monotonically") {
  auto f = cia_test::load_pair("coreutils_like");
  anytime_result res = sem_dcia_anytime(f.p1, f.p2, f.map, f.dep1, f.dep2, {});
  std::size_t prev = 0;
  for (const auto& it : res.iterations) {
    CHECK(it.eq.size() >= prev);
    prev = it.eq.size();
  }
}

TEST_CASE("the loop terminates within procedure-count iterations") {
  for (const auto* base : cia_test::corpus_pairs) {
    auto f = cia_test::load_pair(base);
    anytime_result res = sem_dcia_anytime(f.p1, f.p2, f.map, f.dep1, f.dep2, {});
    CHECK(res.iterations.size() <= f.p1.procs.size() + 1);
  }
}

TEST_CASE("anytime soundness: oracle impact is contained at every k") {
  for (const auto* base : cia_test::corpus_pairs) {
    auto f = cia_test::load_pair(base);
    anytime_result res = sem_dcia_anytime(f.p1, f.p2, f.map, f.dep1, f.dep2, {});
    auto verdicts = oracle_impacted(f.p1, f.p2, f.map);
    for (const auto& it : res.iterations)
      for (const auto& v : verdicts) {
        if (v.v != impact_verdict::impacted) continue;
        CHECK_MESSAGE(it.impact.nodes[v.version - 1].count({v.proc, v.label}),
                      base << " k=" << it.k << " " << v.proc << ":" << v.label);
      }
  }
}
