#include <benchmark/benchmark.h>

#include "cbkb/hierarchy.hpp"
#include "cbkb/kb.hpp"
#include "cbkb/matcher.hpp"
#include "cbkb/notation.hpp"
#include "cbkb/service.hpp"

using namespace cbkb;

namespace {

Hierarchy animals() {
  Hierarchy h = KnowledgeBase::preloaded().hierarchy;
  auto add = [&](const std::string& id, const std::string& parent) {
    h.add_term(Term{id, "b", Formality::formal, {}, {}, ""},
               {HierarchyLink{LinkKind::subtype, id, parent, "b", "", false}});
  };
  add("b#animal", "thing");
  add("b#bird", "b#animal");
  add("b#penguin", "b#bird");
  return h;
}

Graph chain(std::size_t n, const std::string& term) {
  Graph g;
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes.push_back(ConceptNode{term, Quantifier::at_least(1), std::nullopt, std::nullopt});
    if (i > 0) g.edges.push_back(Edge{i - 1, "part", i});
  }
  return g;
}

void BM_ChainProjection(benchmark::State& state) {
  Hierarchy h = animals();
  std::size_t n = static_cast<std::size_t>(state.range(0));
  Graph query = chain(n, "b#animal");
  Graph target = chain(n, "b#penguin");
  for (auto _ : state) benchmark::DoNotOptimize(project_graph(query, target, h));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ChainProjection)->RangeMultiplier(2)->Range(8, 512)->Complexity();

void BM_CompareStatements(benchmark::State& state) {
  Hierarchy h = animals();
  Statement general = parse_sentence("u1#`every b#bird can be agent of a flight´");
  Statement specific = parse_sentence("u2#`b#penguin can be agent of a flight with duration at least 2.5 hour´");
  for (auto _ : state) benchmark::DoNotOptimize(compare(specific, general, h));
}
BENCHMARK(BM_CompareStatements);

void BM_DryRunAgainstStoredCorpus(benchmark::State& state) {
  Service service(Service::Options{std::nullopt, [] { return std::string("2024-01-01T00:00:00Z"); }});
  std::string terms = "thing subtype: b#fish";
  for (int i = 0; i < state.range(0); ++i) terms += " b#c" + std::to_string(i);
  run_script(service, "register pm;\nregister u1;\nregister u2;\n" + terms + " (b);\n", "pm");
  for (int i = 0; i < state.range(0); ++i) {
    service.command("u1", "u1#`every b#c" + std::to_string(i) + " can be agent of a flight´;");
  }
  service.command("u1", "u1#`every b#fish can be agent of a flight´;");
  for (auto _ : state) {
    benchmark::DoNotOptimize(service.dry_run("u2", "u2#`75% of b#fish can be agent of a flight´"));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DryRunAgainstStoredCorpus)->Arg(10)->Arg(100)->Arg(1000)->Complexity();

}  // namespace

BENCHMARK_MAIN();
