// Microbenchmarks over the analysis pipeline, using the corpus pair with the
// richest call structure.

#include <benchmark/benchmark.h>

#include "cia/anytime.hpp"
#include "cia/depends.hpp"
#include "cia/diffmap.hpp"
#include "cia/impact.hpp"
#include "cia/lower.hpp"
#include "cia/oracles.hpp"
#include "cia/parser.hpp"

#ifndef CIA_CORPUS_DIR
#define CIA_CORPUS_DIR "tests/corpus"
#endif

namespace {

std::string corpus(const char* name) {
  return std::string(CIA_CORPUS_DIR) + "/" + name;
}

struct fixture {
  cia::program p1, p2;
  cia::node_map map;
  cia::dependency_relation dep1, dep2;

  fixture() {
    auto a = cia::lower(cia::parse_program_file(corpus("coreutils_like_v1.ir")));
    auto b = cia::lower(cia::parse_program_file(corpus("coreutils_like_v2.ir")));
    auto [n1, n2] = cia::normalize_pair(a, b);
    p1 = std::move(n1);
    p2 = std::move(n2);
    map = cia::structural_diff(p1, p2);
    dep1 = cia::compute_depends(p1);
    dep2 = cia::compute_depends(p2);
  }
};

const fixture& shared() {
  static fixture f;
  return f;
}

void bm_parse_and_lower(benchmark::State& state) {
  for (auto _ : state) {
    auto p = cia::lower(cia::parse_program_file(corpus("coreutils_like_v2.ir")));
    benchmark::DoNotOptimize(p);
  }
}
BENCHMARK(bm_parse_and_lower);

void bm_depends_fixpoint(benchmark::State& state) {
  const auto& f = shared();
  for (auto _ : state) {
    auto d = cia::compute_depends(f.p1);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(bm_depends_fixpoint);

void bm_dcia(benchmark::State& state) {
  const auto& f = shared();
  for (auto _ : state) {
    auto r = cia::dcia(f.p1, f.p2, f.map, f.dep1, f.dep2);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(bm_dcia);

void bm_interpreter_sweep(benchmark::State& state) {
  const auto& f = shared();
  for (auto _ : state) {
    for (const auto& in : cia::enumerate_input_stores(f.p1)) {
      auto t = cia::run(f.p1, in);
      benchmark::DoNotOptimize(t);
    }
  }
}
BENCHMARK(bm_interpreter_sweep);

void bm_impact_oracle(benchmark::State& state) {
  const auto& f = shared();
  for (auto _ : state) {
    auto v = cia::oracle_impacted(f.p1, f.p2, f.map);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(bm_impact_oracle);

void bm_sem_dcia_anytime(benchmark::State& state) {
  const auto& f = shared();
  for (auto _ : state) {
    auto r = cia::sem_dcia_anytime(f.p1, f.p2, f.map, f.dep1, f.dep2, {});
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(bm_sem_dcia_anytime);

}  // namespace

BENCHMARK_MAIN();
