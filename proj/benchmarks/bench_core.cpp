#include <filesystem>
#include <random>
#include <string>

#include <benchmark/benchmark.h>

#include "loopinv/evaluator.hpp"
#include "loopinv/problem.hpp"
#include "loopinv/retrieval.hpp"
#include "loopinv/sexpr.hpp"

namespace {

const std::filesystem::path kData = LOOPINV_BENCH_DATA_DIR;

loopinv::LabeledTree random_tree(std::mt19937& rng, std::size_t nodes) {
  loopinv::LabeledTree root{"n", {}};
  std::vector<loopinv::LabeledTree*> all{&root};
  all.reserve(nodes);
  for (std::size_t i = 1; i < nodes; ++i) {
    auto* parent = all[rng() % all.size()];
    parent->children.push_back({std::string(1, "abcd"[rng() % 4]), {}});
    // Children vectors may reallocate, so rebuild the pointer list.
    all.clear();
    std::vector<loopinv::LabeledTree*> stack{&root};
    while (!stack.empty()) {
      auto* t = stack.back();
      stack.pop_back();
      all.push_back(t);
      for (auto& c : t->children) stack.push_back(&c);
    }
  }
  return root;
}

void BM_TreeEditDistance(benchmark::State& state) {
  std::mt19937 rng(42);
  auto a = random_tree(rng, static_cast<std::size_t>(state.range(0)));
  auto b = random_tree(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loopinv::tree_edit_distance(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_TreeEditDistance)->RangeMultiplier(2)->Range(8, 128)->Complexity();

std::string nested_conjunction(int n) {
  std::string s = "(and";
  for (int i = 0; i < n; ++i) s += " (<= (+ x " + std::to_string(i) + ") (* 2 y))";
  return s + ")";
}

void BM_ParseSexpr(benchmark::State& state) {
  const std::string text = nested_conjunction(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(loopinv::parse_sexprs(text));
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_ParseSexpr)->Range(8, 1024);

void BM_Evaluate(benchmark::State& state) {
  auto e = loopinv::parse_sexprs(nested_conjunction(static_cast<int>(state.range(0))))[0];
  loopinv::Env env{{"x", loopinv::BigInt(-5)}, {"y", loopinv::BigInt(1000)}};
  for (auto _ : state) benchmark::DoNotOptimize(loopinv::evaluate_bool(e, env));
}
BENCHMARK(BM_Evaluate)->Range(8, 1024);

void BM_TopK(benchmark::State& state) {
  static const auto corpus = loopinv::load_corpus(kData / "corpus");
  const auto& query = corpus.front().problem;
  const auto metric = state.range(0) == 0 ? loopinv::SimilarityMetric::Syntactic
                                          : loopinv::SimilarityMetric::Semantic;
  for (auto _ : state) benchmark::DoNotOptimize(loopinv::top_k_examples(query, corpus, 2, metric));
}
BENCHMARK(BM_TopK)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
