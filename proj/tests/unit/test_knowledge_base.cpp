#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "metalearn/error.hpp"
#include "metalearn/folds.hpp"
#include "metalearn/knowledge_base.hpp"

using namespace metalearn;
using testutil::TempDir;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes `count` small blob datasets and returns their manifest entries.
std::vector<ManifestEntry> tiny_corpus(const TempDir& dir, int count, std::size_t n = 30) {
  std::vector<ManifestEntry> out;
  for (int i = 0; i < count; ++i) {
    const std::string id = "d" + std::to_string(i);
    const auto ds = testutil::blobs(n, 2 + i % 2, 2 + i % 2, 1.0 + 0.3 * i, 100 + i, id);
    write_dataset(ds, dir / (id + ".csv"));
    out.push_back({id, dir / (id + ".csv"), "class"});
  }
  return out;
}

BuildOptions small_build(std::size_t configs = 10) {
  BuildOptions o;
  o.algorithms = {AlgorithmId::kDecisionTree, AlgorithmId::kLogisticRegression};
  o.configs_per_algo = configs;
  o.metrics = {Metric::kAccuracy};
  o.k = 3;
  o.repeats = 1;
  o.seed = 7;
  return o;
}

DatasetRecord dataset_record(const std::string& id) {
  DatasetRecord d;
  d.id = id;
  d.name = id;
  d.source = id + ".csv";
  d.target = "class";
  d.n = 10;
  d.p = 2;
  d.c = 2;
  d.metafeatures = extract_all(testutil::blobs(20, 2, 2, 1.0, 1, id), 0);
  return d;
}

ExperimentRecord experiment(const std::string& ds, const PipelineRecord& p, double acc, double runtime) {
  ExperimentRecord r;
  r.dataset_id = ds;
  r.pipeline_id = p.pipeline_id;
  r.algorithm = p.algorithm;
  r.config = p.config;
  r.k = 3;
  r.repeats = 1;
  r.scores[Metric::kAccuracy] = {acc, 0.0, {acc}};
  r.runtime_seconds = runtime;
  return r;
}

PipelineRecord pipeline(int leaf) {
  Rng rng(0);
  Assignment cfg = hp_space(AlgorithmId::kDecisionTree).sample(rng);
  cfg["min_samples_leaf"] = std::int64_t{leaf};
  return {pipeline_id(AlgorithmId::kDecisionTree, cfg), AlgorithmId::kDecisionTree, cfg};
}

}  // namespace

TEST(PipelineId, StableAndDistinct) {
  const auto a = pipeline(1), b = pipeline(2);
  EXPECT_EQ(a.pipeline_id.size(), 16u);
  EXPECT_NE(a.pipeline_id, b.pipeline_id);
  EXPECT_EQ(a.pipeline_id, pipeline(1).pipeline_id);
}

TEST(BuildConfigs, DeterministicDistinctAndValid) {
  for (auto alg : kAllAlgorithms) {
    const auto a = build_configs(alg, 20, 3);
    const auto b = build_configs(alg, 20, 3);
    ASSERT_EQ(a.size(), 20u);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(canonical(a[i]), canonical(b[i]));
      hp_space(alg).validate(a[i]);
      seen.insert(canonical(a[i]));
    }
    EXPECT_EQ(seen.size(), 20u);
  }
}

TEST(Build, CountsEveryPipeline) {
  TempDir dir("kb_count");
  const auto manifest = tiny_corpus(dir, 2);
  KnowledgeBase kb;
  const auto s = build_knowledge_base(kb, manifest, small_build());
  EXPECT_EQ(s.added, 40u);
  EXPECT_EQ(s.failed, 0u);
  EXPECT_EQ(kb.experiments().size(), 40u);
  EXPECT_EQ(kb.pipelines().size(), 20u);
  EXPECT_EQ(kb.datasets().size(), 2u);
  for (std::size_t i = 0; i < kb.experiments().size(); ++i) {
    EXPECT_EQ(kb.experiments()[i].experiment_id, i + 1);
    EXPECT_FALSE(kb.experiments()[i].failed);
  }
}

TEST(Build, ResumeAddsNoDuplicatesAndMatchesFullBuild) {
  TempDir dir("kb_resume");
  const auto manifest = tiny_corpus(dir, 2);
  auto opts = small_build(6);

  KnowledgeBase full = KnowledgeBase::open(dir / "full", true);
  build_knowledge_base(full, manifest, opts);

  {
    KnowledgeBase part = KnowledgeBase::open(dir / "part", true);
    auto stop = opts;
    stop.stop_after = 9;
    const auto s = build_knowledge_base(part, manifest, stop);
    EXPECT_TRUE(s.interrupted);
    EXPECT_EQ(part.experiments().size(), 9u);
  }
  KnowledgeBase part = KnowledgeBase::open(dir / "part");
  const auto s = build_knowledge_base(part, manifest, opts);
  EXPECT_EQ(s.added, 15u);
  EXPECT_EQ(s.skipped, 9u);

  std::set<std::pair<std::string, std::string>> keys;
  for (const auto& r : part.experiments()) EXPECT_TRUE(keys.insert({r.dataset_id, r.pipeline_id}).second);
  ASSERT_EQ(part.experiments().size(), full.experiments().size());
  for (std::size_t i = 0; i < full.experiments().size(); ++i) {
    const auto& a = full.experiments()[i];
    const auto& b = part.experiments()[i];
    EXPECT_EQ(a.dataset_id, b.dataset_id);
    EXPECT_EQ(a.pipeline_id, b.pipeline_id);
    EXPECT_EQ(a.scores.at(Metric::kAccuracy).folds, b.scores.at(Metric::kAccuracy).folds);
  }
}

TEST(Build, ReplayReproducesStoredScores) {
  TempDir dir("kb_replay");
  const auto manifest = tiny_corpus(dir, 5, 24);
  KnowledgeBase kb;
  build_knowledge_base(kb, manifest, small_build(3));
  ASSERT_EQ(kb.experiments().size(), 30u);
  for (const auto& r : kb.experiments()) {
    const auto* d = kb.find_dataset(r.dataset_id);
    ASSERT_NE(d, nullptr);
    const auto ds = load_dataset(d->source, d->target, d->id);
    EXPECT_EQ(r.seed, dataset_seed(7, r.dataset_id));
    const auto plan = stratified_kfold(ds, r.k, r.repeats, r.seed);
    const auto scores = evaluate_pipeline({r.algorithm, r.config, r.seed}, ds, plan, {Metric::kAccuracy});
    EXPECT_EQ(scores.at(Metric::kAccuracy).mean, r.scores.at(Metric::kAccuracy).mean);
    EXPECT_EQ(scores.at(Metric::kAccuracy).folds, r.scores.at(Metric::kAccuracy).folds);
  }
}

TEST(Build, FailedFoldPlanBecomesFailedRecords) {
  TempDir dir("kb_fail");
  // Two rows of one class cannot be spread over three folds.
  testutil::write_file(dir / "tiny.csv", "x,class\n1,a\n2,a\n3,b\n4,b\n5,b\n6,b\n");
  KnowledgeBase kb;
  const auto s = build_knowledge_base(kb, {{"tiny", dir / "tiny.csv", "class"}}, small_build(2));
  EXPECT_EQ(s.failed, 4u);
  for (const auto& r : kb.experiments()) {
    EXPECT_TRUE(r.failed);
    EXPECT_FALSE(r.failure.empty());
    EXPECT_TRUE(r.scores.empty());
  }
}

TEST(Store, AppendReloadIsByteStable) {
  TempDir dir("kb_bytes");
  {
    auto kb = KnowledgeBase::open(dir / "kb", true);
    kb.add_dataset(dataset_record("a"));
    const auto p = pipeline(3);
    kb.add_pipeline(p);
    auto r = experiment("a", p, 0.1 + 0.2, 1.0 / 3.0);
    r.scores[Metric::kAccuracy].folds = {0.1, 1e-17, 2.0 / 3.0};
    kb.append_experiment(r);
  }
  const auto before = slurp(dir / "kb" / "experiments.ndjson");
  const auto datasets_before = slurp(dir / "kb" / "datasets.ndjson");
  auto kb = KnowledgeBase::open(dir / "kb");
  ASSERT_EQ(kb.experiments().size(), 1u);
  const auto& r = kb.experiments()[0];
  EXPECT_EQ(r.scores.at(Metric::kAccuracy).mean, 0.1 + 0.2);
  EXPECT_EQ(r.scores.at(Metric::kAccuracy).folds[2], 2.0 / 3.0);
  EXPECT_EQ(r.runtime_seconds, 1.0 / 3.0);
  EXPECT_EQ(kb.datasets()[0].metafeatures.values, dataset_record("a").metafeatures.values);

  // Rewriting everything from the loaded state reproduces the same bytes.
  auto copy = KnowledgeBase::open(dir / "copy", true);
  for (const auto& d : kb.datasets()) copy.add_dataset(d);
  for (const auto& p : kb.pipelines()) copy.add_pipeline(p);
  for (const auto& e : kb.experiments()) copy.append_experiment(e);
  EXPECT_EQ(slurp(dir / "copy" / "experiments.ndjson"), before);
  EXPECT_EQ(slurp(dir / "copy" / "datasets.ndjson"), datasets_before);
}

TEST(Store, ReferentialIntegrity) {
  KnowledgeBase kb;
  kb.add_dataset(dataset_record("a"));
  const auto p = pipeline(1);
  try {
    kb.append_experiment(experiment("a", p, 0.5, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReferentialIntegrity);
  }
  kb.add_pipeline(p);
  try {
    kb.append_experiment(experiment("zzz", p, 0.5, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kReferentialIntegrity);
  }
  EXPECT_THROW(kb.add_dataset(dataset_record("a")), Error);
  kb.add_pipeline(p);
  EXPECT_EQ(kb.pipelines().size(), 1u);
}

TEST(Store, CatalogueMismatchRejected) {
  KnowledgeBase kb;
  auto d = dataset_record("a");
  d.metafeatures.names.pop_back();
  d.metafeatures.values.pop_back();
  try {
    kb.add_dataset(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCatalogueMismatch);
  }
}

TEST(Store, ThousandAppends) {
  TempDir dir("kb_1000");
  {
    auto kb = KnowledgeBase::open(dir / "kb", true);
    kb.add_dataset(dataset_record("a"));
    const auto p = pipeline(1);
    kb.add_pipeline(p);
    for (int i = 0; i < 1000; ++i) kb.append_experiment(experiment("a", p, i / 1000.0, 1));
    EXPECT_EQ(kb.experiments().size(), 1000u);
  }
  const auto kb = KnowledgeBase::open(dir / "kb");
  EXPECT_EQ(kb.experiments().size(), 1000u);
  EXPECT_EQ(kb.experiments().back().experiment_id, 1000u);
}

TEST(Store, InterleavedAppendsAndReloads) {
  TempDir dir("kb_interleave");
  std::size_t expected = 0;
  for (int round = 0; round < 5; ++round) {
    auto kb = KnowledgeBase::open(dir / "kb", true);
    ASSERT_EQ(kb.experiments().size(), expected);
    const std::string id = "d" + std::to_string(round);
    kb.add_dataset(dataset_record(id));
    const auto p = pipeline(round + 1);
    kb.add_pipeline(p);
    for (const auto& d : kb.datasets()) {
      kb.append_experiment(experiment(d.id, p, 0.5, 1));
      ++expected;
    }
    for (const auto& r : kb.experiments()) {
      EXPECT_NE(kb.find_dataset(r.dataset_id), nullptr);
      EXPECT_NE(kb.find_pipeline(r.pipeline_id), nullptr);
    }
  }
}

TEST(Store, TornTrailingLineTruncated) {
  TempDir dir("kb_torn");
  {
    auto kb = KnowledgeBase::open(dir / "kb", true);
    kb.add_dataset(dataset_record("a"));
    const auto p = pipeline(1);
    kb.add_pipeline(p);
    kb.append_experiment(experiment("a", p, 0.5, 1));
  }
  const auto path = dir / "kb" / "experiments.ndjson";
  const auto good = slurp(path);
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << "{\"experiment_id\":2,\"data";
  }
  auto kb = KnowledgeBase::open(dir / "kb");
  EXPECT_EQ(kb.experiments().size(), 1u);
  EXPECT_EQ(slurp(path), good);
  EXPECT_EQ(kb.append_experiment(experiment("a", pipeline(1), 0.6, 1)), 2u);
}

TEST(Store, OpenMissingWithoutCreate) {
  TempDir dir("kb_missing");
  EXPECT_THROW(KnowledgeBase::open(dir / "nothing"), Error);
}

TEST(QueryBest, SingletonTieBreakAndTruncation) {
  KnowledgeBase kb;
  kb.add_dataset(dataset_record("a"));
  const auto p1 = pipeline(1), p2 = pipeline(2), p3 = pipeline(3);
  for (const auto& p : {p1, p2, p3}) kb.add_pipeline(p);

  kb.append_experiment(experiment("a", p1, 0.8, 5));
  auto one = query_best(kb, "a", Metric::kAccuracy, 10);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].pipeline_id, p1.pipeline_id);

  kb.append_experiment(experiment("a", p2, 0.8, 2));
  kb.append_experiment(experiment("a", p3, 0.7, 1));
  auto all = query_best(kb, "a", Metric::kAccuracy, 10);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].pipeline_id, p2.pipeline_id);
  EXPECT_EQ(all[1].pipeline_id, p1.pipeline_id);
  EXPECT_EQ(all[2].pipeline_id, p3.pipeline_id);
  EXPECT_EQ(query_best(kb, "a", Metric::kAccuracy, 2).size(), 2u);

  // A newer experiment supersedes the older one for the same pipeline.
  kb.append_experiment(experiment("a", p3, 0.95, 1));
  EXPECT_EQ(query_best(kb, "a", Metric::kAccuracy, 1)[0].pipeline_id, p3.pipeline_id);
}

TEST(QueryBest, Errors) {
  KnowledgeBase kb;
  kb.add_dataset(dataset_record("a"));
  EXPECT_THROW(query_best(kb, "zzz", Metric::kAccuracy, 5), Error);
  try {
    query_best(kb, "a", Metric::kAccuracy, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoExperiments);
  }
  const auto p = pipeline(1);
  kb.add_pipeline(p);
  kb.append_experiment(experiment("a", p, 0.5, 1));
  try {
    query_best(kb, "a", Metric::kF1, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownMetric);
  }
}

TEST(Stats, Ranges) {
  TempDir dir("kb_stats");
  const auto manifest = tiny_corpus(dir, 3);
  KnowledgeBase kb;
  auto opts = small_build(1);
  build_knowledge_base(kb, manifest, opts);
  const auto s = kb_stats(kb);
  EXPECT_EQ(s.datasets, 3u);
  EXPECT_EQ(s.pipelines, 2u);
  EXPECT_EQ(s.experiments, 6u);
  EXPECT_EQ(s.classes_min, 2);
  EXPECT_EQ(s.classes_max, 3);
  EXPECT_EQ(s.attributes_min, 2u);
  EXPECT_EQ(s.attributes_max, 3u);
  EXPECT_EQ(s.instances_min, 30u);
  EXPECT_EQ(s.instances_max, 30u);
}
