#include <benchmark/benchmark.h>

#include "metalearn/knowledge_base.hpp"
#include "metalearn/learners.hpp"
#include "metalearn/synthetic.hpp"

namespace {

// Fits the first sampled build configuration of each algorithm.
void BM_Fit(benchmark::State& state) {
  const auto alg = metalearn::kAllAlgorithms[static_cast<std::size_t>(state.range(0))];
  const auto ds = metalearn::make_linearly_separable(static_cast<std::size_t>(state.range(1)), 1);
  const auto cfg = metalearn::build_configs(alg, 1, 0).front();
  for (auto _ : state) benchmark::DoNotOptimize(metalearn::fit({alg, cfg, 0}, ds));
  state.SetLabel(std::string(metalearn::to_string(alg)));
}
BENCHMARK(BM_Fit)->ArgsProduct({benchmark::CreateDenseRange(0, 7, 1), {200, 800}})->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto alg = metalearn::kAllAlgorithms[static_cast<std::size_t>(state.range(0))];
  const auto ds = metalearn::make_linearly_separable(400, 2);
  const auto model = metalearn::fit({alg, metalearn::build_configs(alg, 1, 0).front(), 0}, ds);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(ds));
  state.SetLabel(std::string(metalearn::to_string(alg)));
}
BENCHMARK(BM_Predict)->DenseRange(0, 7)->Unit(benchmark::kMicrosecond);

}  // namespace
