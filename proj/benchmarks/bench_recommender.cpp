#include <benchmark/benchmark.h>

#include <random>

#include "metalearn/knowledge_base.hpp"
#include "metalearn/recommender.hpp"

namespace {

using namespace metalearn;

MetaFeatureVector random_vector(const std::string& id, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MetaFeatureVector v;
  v.dataset_id = id;
  for (const auto& e : catalogue()) {
    v.names.push_back(e.name);
    v.values.push_back(g(rng));
  }
  return v;
}

// KB with `datasets` datasets, each holding scores for 8 x 20 pipelines.
KnowledgeBase synthetic_kb(int datasets, std::mt19937_64& rng) {
  KnowledgeBase kb;
  std::uniform_real_distribution<double> u(0.4, 1.0);
  std::vector<PipelineRecord> pipelines;
  for (auto alg : kAllAlgorithms) {
    for (const auto& cfg : build_configs(alg, 20, 0)) pipelines.push_back({pipeline_id(alg, cfg), alg, cfg});
  }
  for (const auto& p : pipelines) kb.add_pipeline(p);
  for (int d = 0; d < datasets; ++d) {
    DatasetRecord rec;
    rec.id = "d" + std::to_string(d);
    rec.metafeatures = random_vector(rec.id, rng);
    kb.add_dataset(rec);
    for (const auto& p : pipelines) {
      ExperimentRecord r;
      r.dataset_id = rec.id;
      r.pipeline_id = p.pipeline_id;
      r.algorithm = p.algorithm;
      r.config = p.config;
      const double s = u(rng);
      r.scores[Metric::kAccuracy] = {s, 0.0, {s}};
      r.runtime_seconds = u(rng);
      kb.append_experiment(r);
    }
  }
  return kb;
}

void BM_RecommendKnn(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto kb = synthetic_kb(static_cast<int>(state.range(0)), rng);
  const auto query = random_vector("q", rng);
  for (auto _ : state) benchmark::DoNotOptimize(recommend_knn(query, kb, Metric::kAccuracy));
}
BENCHMARK(BM_RecommendKnn)->Arg(20)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_KndSelection(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto kb = synthetic_kb(static_cast<int>(state.range(0)), rng);
  const auto query = random_vector("q", rng);
  for (auto _ : state) benchmark::DoNotOptimize(knd_selection(query, kb, 5));
}
BENCHMARK(BM_KndSelection)->Arg(20)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_RecommendRf(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto kb = synthetic_kb(20, rng);
  MetaModelOptions o;
  o.n_trees = 100;
  o.promising_threshold = 0.05;
  const auto model = train_rf_metamodel(kb, Metric::kAccuracy, o);
  const auto query = random_vector("q", rng);
  for (auto _ : state) benchmark::DoNotOptimize(recommend_rf(query, model, kb.pipelines(), 10));
}
BENCHMARK(BM_RecommendRf)->Unit(benchmark::kMillisecond);

}  // namespace
