#include <benchmark/benchmark.h>

#include <vector>

#include "fedctmc/datagen.hpp"
#include "fedctmc/hazard.hpp"

namespace {

using namespace fedctmc;

std::vector<TransitionPair> sample_pairs(std::size_t n) {
  GeneratorConfig cfg;
  cfg.user_count = 200;
  std::vector<TransitionPair> out;
  for (const UserDataset& u : build_population(cfg)) {
    for (const TransitionPair& p : u.pairs) {
      if (out.size() == n) return out;
      out.push_back(p);
    }
  }
  return out;
}

void BM_PairNll(benchmark::State& state) {
  const auto pairs = sample_pairs(1024);
  const CoefMatrix beta = ground_truth_beta();
  for (auto _ : state) benchmark::DoNotOptimize(nll_sum(beta, pairs));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()));
}
BENCHMARK(BM_PairNll);

void BM_NllGradient(benchmark::State& state) {
  const auto pairs = sample_pairs(static_cast<std::size_t>(state.range(0)));
  const CoefMatrix beta = ground_truth_beta();
  for (auto _ : state) benchmark::DoNotOptimize(nll_gradient(beta, pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NllGradient)->Arg(32)->Arg(1024)->Arg(16384);

}  // namespace
