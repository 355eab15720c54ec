#include <benchmark/benchmark.h>

#include <vector>

#include "fedctmc/harness.hpp"

namespace {

using namespace fedctmc;

void BM_Generate(benchmark::State& state) {
  GeneratorConfig cfg;
  cfg.user_count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_population(cfg));
}
BENCHMARK(BM_Generate)->Arg(500)->Arg(4000)->Unit(benchmark::kMillisecond);

// One communication round (sampling, local training, aggregation, step).
void BM_Round(benchmark::State& state) {
  ExperimentConfig cfg;
  cfg.generator.user_count = static_cast<std::size_t>(state.range(0));
  cfg.server.rounds = 1;
  const auto population = build_population(cfg.generator);
  for (auto _ : state) benchmark::DoNotOptimize(run_rounds(cfg, population, ServerState{}));
}
BENCHMARK(BM_Round)->Arg(500)->Arg(2000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_LocalClient(benchmark::State& state) {
  GeneratorConfig gen;
  gen.user_count = 1;
  const UserDataset user = generate_user(gen, 0);
  const LocalTrainConfig cfg;
  std::uint64_t round = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_client(CoefMatrix{}, user, cfg, 2024, ++round));
}
BENCHMARK(BM_LocalClient);

}  // namespace
