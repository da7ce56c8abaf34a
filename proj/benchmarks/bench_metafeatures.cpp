#include <benchmark/benchmark.h>

#include "metalearn/metafeatures.hpp"
#include "metalearn/synthetic.hpp"

namespace {

const metalearn::Dataset& corpus_dataset(std::size_t i) {
  static const auto corpus = metalearn::desk_corpus();
  return corpus[i].data;
}

void BM_ExtractAll(benchmark::State& state) {
  const auto& ds = corpus_dataset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metalearn::extract_all(ds, 0));
  state.SetLabel(ds.id());
}
BENCHMARK(BM_ExtractAll)->DenseRange(0, 9)->Unit(benchmark::kMillisecond);

void BM_Landmarking(benchmark::State& state) {
  const auto& ds = corpus_dataset(0);
  for (auto _ : state) benchmark::DoNotOptimize(metalearn::extract_landmarking(ds, 0));
}
BENCHMARK(BM_Landmarking)->Unit(benchmark::kMillisecond);

void BM_Statistical(benchmark::State& state) {
  const auto& ds = corpus_dataset(9);
  for (auto _ : state) benchmark::DoNotOptimize(metalearn::extract_statistical(ds));
}
BENCHMARK(BM_Statistical)->Unit(benchmark::kMicrosecond);

}  // namespace
