#include <benchmark/benchmark.h>

#include "ocpls/pls.hpp"
#include "ocpls/sim.hpp"

namespace {

ocpls::GeneratorConfig desk_generator(int n) {
  ocpls::GeneratorConfig g;
  g.n_min = n;
  g.n_max = n;
  g.seed = 7;
  return g;
}

void BM_GenerateSystem(benchmark::State& state) {
  const auto gen = desk_generator(static_cast<int>(state.range(0)));
  std::uint64_t t = 0;
  for (auto _ : state) {
    auto sys = ocpls::generate_system(gen, ++t);
    benchmark::DoNotOptimize(sys.b());
  }
}
BENCHMARK(BM_GenerateSystem)->Arg(50)->Arg(100)->Arg(200);

void BM_PlsRun(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = ocpls::generate_system(desk_generator(n), 1);
  const int budget = std::max(1, n / 10);
  for (auto _ : state) {
    auto post = ocpls::pls_run(sys, budget, ocpls::PriorSpec{});
    benchmark::DoNotOptimize(post.mean());
  }
}
BENCHMARK(BM_PlsRun)->Arg(50)->Arg(100)->Arg(200);

void BM_Score(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto sys = ocpls::generate_system(desk_generator(n), 1);
  const auto post = ocpls::pls_run(sys, std::max(1, n / 10), ocpls::PriorSpec{});
  const ocpls::Vector x = ocpls::Vector::Ones(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(post.score(x));
  }
}
BENCHMARK(BM_Score)->Arg(50)->Arg(100)->Arg(200);

void BM_Episode(benchmark::State& state) {
  ocpls::ExperimentConfig cfg;
  cfg.rounds = state.range(0);
  cfg.n_runs = 1;
  cfg.master_seed = 11;
  for (auto _ : state) {
    auto records = ocpls::run_episode(cfg, 0);
    benchmark::DoNotOptimize(records.back().cum_coverage);
  }
}
BENCHMARK(BM_Episode)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
