#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "metalearn/error.hpp"
#include "metalearn/knowledge_base.hpp"
#include "metalearn/recommender.hpp"

using namespace metalearn;

namespace {

// A catalogue-shaped vector with only the given entries present.
MetaFeatureVector mfv(const std::string& id, const std::map<std::string, double>& values) {
  MetaFeatureVector v;
  v.dataset_id = id;
  for (const auto& e : catalogue()) {
    v.names.push_back(e.name);
    v.values.push_back(std::nullopt);
  }
  for (const auto& [k, x] : values) v.set(k, x);
  return v;
}

MetaFeatureVector random_mf(const std::string& id, std::mt19937_64& rng, std::size_t dims = 6) {
  std::normal_distribution<double> g;
  std::map<std::string, double> values;
  for (std::size_t j = 0; j < dims; ++j) values[catalogue()[j].name] = g(rng);
  return mfv(id, values);
}

void add_dataset(KnowledgeBase& kb, const MetaFeatureVector& v) {
  DatasetRecord d;
  d.id = v.dataset_id;
  d.name = v.dataset_id;
  d.target = "class";
  d.n = 100;
  d.p = 3;
  d.c = 2;
  d.metafeatures = v;
  kb.add_dataset(d);
}

PipelineRecord make_pipeline(AlgorithmId alg, std::uint64_t seed) {
  Rng rng(seed);
  const auto cfg = hp_space(alg).sample(rng);
  return {pipeline_id(alg, cfg), alg, cfg};
}

void record(KnowledgeBase& kb, const std::string& ds, const PipelineRecord& p, double acc, double runtime = 1.0) {
  kb.add_pipeline(p);
  ExperimentRecord r;
  r.dataset_id = ds;
  r.pipeline_id = p.pipeline_id;
  r.algorithm = p.algorithm;
  r.config = p.config;
  r.k = 5;
  r.repeats = 1;
  r.scores[Metric::kAccuracy] = {acc, 0.0, {acc}};
  r.runtime_seconds = runtime;
  kb.append_experiment(r);
}

std::vector<PipelineRecord> pipelines(AlgorithmId alg, int count, std::uint64_t base) {
  std::vector<PipelineRecord> out;
  for (int i = 0; i < count; ++i) out.push_back(make_pipeline(alg, base + static_cast<std::uint64_t>(i)));
  return out;
}

}  // namespace

TEST(Distance, IdentityAndPythagoras) {
  MetaFeatureVector a, b;
  a.names = b.names = {"x", "y"};
  a.values = {0.0, 0.0};
  b.values = {3.0, 4.0};
  const auto id = ScalingStats::identity({"x", "y"});
  EXPECT_EQ(euclidean_distance(a, a, id), 0.0);
  EXPECT_DOUBLE_EQ(euclidean_distance(a, b, id), 5.0);
}

TEST(Distance, MatchesDirectLoopOn41Dims) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> names;
    for (int j = 0; j < 41; ++j) names.push_back("m" + std::to_string(j));
    ScalingStats s = ScalingStats::identity(names);
    MetaFeatureVector a, b;
    a.names = b.names = names;
    for (int j = 0; j < 41; ++j) {
      s.mean[j] = g(rng);
      s.sd[j] = u(rng);
      a.values.push_back(g(rng) * 5);
      b.values.push_back(g(rng) * 5);
    }
    double sum = 0;
    for (int j = 0; j < 41; ++j) {
      const double za = (*a.values[j] - s.mean[j]) / s.sd[j];
      const double zb = (*b.values[j] - s.mean[j]) / s.sd[j];
      sum += (za - zb) * (za - zb);
    }
    EXPECT_NEAR(euclidean_distance(a, b, s), std::sqrt(sum), 1e-12 * std::max(1.0, std::sqrt(sum)));
  }
}

TEST(Distance, MissingEntriesRescaled) {
  MetaFeatureVector a, b;
  a.names = b.names = {"x", "y", "z", "w"};
  a.values = {1.0, std::nullopt, 2.0, 7.0};
  b.values = {4.0, 1.0, 2.0, 9.0};
  auto s = ScalingStats::identity(a.names);
  s.usable[3] = false;
  // Used entries x and z out of three usable ones.
  EXPECT_NEAR(euclidean_distance(a, b, s), std::sqrt(9.0 * 3.0 / 2.0), 1e-12);
  a.values = {std::nullopt, std::nullopt, std::nullopt, 1.0};
  try {
    euclidean_distance(a, b, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroUsableDimensions);
  }
  MetaFeatureVector c;
  c.names = {"x"};
  c.values = {1.0};
  EXPECT_THROW(euclidean_distance(c, b, s), Error);
}

TEST(Distance, MetricAxiomsProperty) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const std::vector<std::string> names{"a", "b", "c", "d", "e"};
  auto s = ScalingStats::identity(names);
  for (auto& sd : s.sd) sd = 0.5 + std::abs(g(rng));
  auto draw = [&] {
    MetaFeatureVector v;
    v.names = names;
    for (std::size_t j = 0; j < names.size(); ++j) v.values.push_back(g(rng));
    return v;
  };
  for (int t = 0; t < 500; ++t) {
    const auto a = draw(), b = draw(), c = draw();
    const double ab = euclidean_distance(a, b, s);
    EXPECT_GE(ab, 0.0);
    EXPECT_EQ(ab, euclidean_distance(b, a, s));
    EXPECT_LE(euclidean_distance(a, c, s), ab + euclidean_distance(b, c, s) + 1e-12);
  }
}

TEST(Scaling, PopulationStatisticsAndExclusion) {
  KnowledgeBase kb;
  const double xs[] = {1, 2, 3, 10};
  for (int i = 0; i < 4; ++i) add_dataset(kb, mfv("d" + std::to_string(i), {{"nr_inst", xs[i]}, {"nr_attr", 5.0}}));
  const auto s = scaling_stats(kb);
  const auto j = static_cast<std::size_t>(
      std::find(s.names.begin(), s.names.end(), "nr_inst") - s.names.begin());
  EXPECT_DOUBLE_EQ(s.mean[j], 4.0);
  EXPECT_DOUBLE_EQ(s.sd[j], std::sqrt((9 + 4 + 1 + 36) / 4.0));
  EXPECT_TRUE(s.usable[j]);
  EXPECT_EQ(s.usable_count(), 1u);  // nr_attr is constant
  const auto ex = scaling_stats(kb, {"d3"});
  EXPECT_DOUBLE_EQ(ex.mean[j], 2.0);
}

TEST(Knd, SelfRetrievalTruncationAndBruteForce) {
  std::mt19937_64 rng(21);
  KnowledgeBase kb;
  std::vector<MetaFeatureVector> vs;
  for (int i = 0; i < 20; ++i) {
    vs.push_back(random_mf("d" + std::to_string(i), rng));
    add_dataset(kb, vs.back());
  }
  const auto self = knd_selection(vs[7], kb, 1);
  ASSERT_EQ(self.neighbors.size(), 1u);
  EXPECT_EQ(self.neighbors[0].dataset_id, "d7");
  EXPECT_EQ(self.neighbors[0].distance, 0.0);

  const auto all = knd_selection(vs[3], kb, 50);
  EXPECT_EQ(all.neighbors.size(), 20u);

  for (int q = 0; q < 20; ++q) {
    const auto query = random_mf("q", rng);
    const auto stats = scaling_stats(kb);
    std::vector<std::pair<double, std::string>> brute;
    for (const auto& v : vs) brute.push_back({euclidean_distance(query, v, stats), v.dataset_id});
    std::sort(brute.begin(), brute.end());
    const auto got = knd_selection(query, kb, 20);
    for (std::size_t i = 0; i < brute.size(); ++i) {
      EXPECT_EQ(got.neighbors[i].dataset_id, brute[i].second);
      EXPECT_EQ(got.neighbors[i].distance, brute[i].first);
    }
  }
}

TEST(Knd, ExcludedDatasetsNeverReturned) {
  std::mt19937_64 rng(2);
  KnowledgeBase kb;
  std::vector<MetaFeatureVector> vs;
  for (int i = 0; i < 6; ++i) {
    vs.push_back(random_mf("d" + std::to_string(i), rng));
    add_dataset(kb, vs.back());
  }
  const auto n = knd_selection(vs[2], kb, 10, {"d2"});
  EXPECT_EQ(n.neighbors.size(), 5u);
  for (const auto& x : n.neighbors) EXPECT_NE(x.dataset_id, "d2");
  EXPECT_NE(n.neighbors[0].distance, 0.0);
  EXPECT_THROW(knd_selection(vs[0], KnowledgeBase{}, 3), Error);
  EXPECT_THROW(knd_selection(vs[0], kb, 0), Error);
}

TEST(Knd, RescalingOneEntryKeepsOrder) {
  std::mt19937_64 rng(30);
  KnowledgeBase a, b;
  std::vector<MetaFeatureVector> vs;
  for (int i = 0; i < 12; ++i) {
    auto v = random_mf("d" + std::to_string(i), rng);
    add_dataset(a, v);
    v.set("nr_class", *v.get("nr_class") * 1000.0 + 7.0);
    add_dataset(b, v);
  }
  auto q = random_mf("q", rng);
  const auto na = knd_selection(q, a, 12);
  q.set("nr_class", *q.get("nr_class") * 1000.0 + 7.0);
  const auto nb = knd_selection(q, b, 12);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(na.neighbors[i].dataset_id, nb.neighbors[i].dataset_id);
    EXPECT_NEAR(na.neighbors[i].distance, nb.neighbors[i].distance, 1e-9);
  }
}

TEST(Knn, SingleNeighborReducesToQueryBest) {
  std::mt19937_64 rng(5);
  KnowledgeBase kb;
  const auto ps = pipelines(AlgorithmId::kDecisionTree, 8, 100);
  std::uniform_real_distribution<double> u(0.5, 1.0);
  std::vector<MetaFeatureVector> vs;
  for (int i = 0; i < 4; ++i) {
    vs.push_back(random_mf("d" + std::to_string(i), rng));
    add_dataset(kb, vs.back());
    for (std::size_t p = 0; p < ps.size(); ++p) record(kb, vs.back().dataset_id, ps[p], std::round(u(rng) * 10) / 10, 1.0 + p % 3);
  }
  KnnOptions o;
  o.k = 1;
  o.top_n = 8;
  const auto rec = recommend_knn(vs[2], kb, Metric::kAccuracy, o);
  const auto best = query_best(kb, "d2", Metric::kAccuracy, 8);
  ASSERT_EQ(rec.pipelines.size(), best.size());
  for (std::size_t i = 0; i < best.size(); ++i) {
    EXPECT_EQ(rec.pipelines[i].pipeline_id, best[i].pipeline_id);
    EXPECT_DOUBLE_EQ(rec.pipelines[i].predicted_score, best[i].score);
  }
}

TEST(Knn, EquidistantNeighborsWithDisjointPipelines) {
  KnowledgeBase kb;
  add_dataset(kb, mfv("a", {{"nr_inst", 0.0}}));
  add_dataset(kb, mfv("b", {{"nr_inst", 2.0}}));
  const auto pa = pipelines(AlgorithmId::kDecisionTree, 2, 1);
  const auto pb = pipelines(AlgorithmId::kLogisticRegression, 2, 1);
  record(kb, "a", pa[0], 0.9);
  record(kb, "a", pa[1], 0.7);
  record(kb, "b", pb[0], 0.8);
  record(kb, "b", pb[1], 0.6);
  KnnOptions o;
  o.k = 2;
  const auto rec = recommend_knn(mfv("q", {{"nr_inst", 1.0}}), kb, Metric::kAccuracy, o);
  ASSERT_EQ(rec.pipelines.size(), 4u);
  const std::vector<std::string> order{pa[0].pipeline_id, pb[0].pipeline_id, pa[1].pipeline_id, pb[1].pipeline_id};
  const double scores[] = {0.9, 0.8, 0.7, 0.6};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(rec.pipelines[i].pipeline_id, order[i]);
    EXPECT_DOUBLE_EQ(rec.pipelines[i].predicted_score, scores[i]);
    ASSERT_EQ(rec.pipelines[i].support.size(), 1u);
    EXPECT_EQ(rec.pipelines[i].support[0].weight, 1.0);
  }
}

TEST(Knn, FiveDatasetManualOracle) {
  KnowledgeBase kb;
  const double xs[] = {0, 1, 2, 4, 8};
  for (int i = 0; i < 5; ++i) add_dataset(kb, mfv("d" + std::to_string(i), {{"nr_inst", xs[i]}}));
  const auto p = pipelines(AlgorithmId::kSvm, 3, 50);
  // score[d][p]; -1 marks no experiment.
  const double score[5][3] = {{0.5, 0.6, 0.7}, {0.9, 0.4, -1}, {0.8, 0.85, 0.3}, {0.6, -1, 0.95}, {0.1, 0.2, 0.3}};
  const double runtime[3] = {3.0, 2.0, 1.0};
  for (int d = 0; d < 5; ++d) {
    for (int j = 0; j < 3; ++j) {
      if (score[d][j] >= 0) record(kb, "d" + std::to_string(d), p[j], score[d][j], runtime[j]);
    }
  }
  // Query 3: mean 3, population sd sqrt(8); neighbors d2, d3 (1/sqrt 8) and d1 (2/sqrt 8).
  const double sd = std::sqrt(8.0);
  const double eps = 1e-6;
  const std::map<int, double> dist{{2, 1 / sd}, {3, 1 / sd}, {1, 2 / sd}};
  KnnOptions o;
  o.k = 3;
  o.epsilon = eps;
  const auto rec = recommend_knn(mfv("q", {{"nr_inst", 3.0}}), kb, Metric::kAccuracy, o);
  ASSERT_EQ(rec.neighbors.size(), 3u);
  EXPECT_EQ(rec.neighbors[0].dataset_id, "d2");
  EXPECT_EQ(rec.neighbors[1].dataset_id, "d3");
  EXPECT_EQ(rec.neighbors[2].dataset_id, "d1");
  std::map<std::string, double> expected;
  for (int j = 0; j < 3; ++j) {
    double wsum = 0, ssum = 0;
    for (const auto& [d, dd] : dist) {
      if (score[d][j] < 0) continue;
      const double w = 1.0 / (dd + eps);
      wsum += w;
      ssum += w * score[d][j];
    }
    expected[p[j].pipeline_id] = ssum / wsum;
  }
  ASSERT_EQ(rec.pipelines.size(), 3u);
  for (const auto& r : rec.pipelines) EXPECT_NEAR(r.predicted_score, expected.at(r.pipeline_id), 1e-9);
  for (std::size_t i = 1; i < rec.pipelines.size(); ++i) {
    EXPECT_GE(rec.pipelines[i - 1].predicted_score, rec.pipelines[i].predicted_score);
  }
}

TEST(Knn, FailuresScoreZeroAndMissingMetricErrors) {
  KnowledgeBase kb;
  add_dataset(kb, mfv("a", {{"nr_inst", 0.0}}));
  add_dataset(kb, mfv("b", {{"nr_inst", 1.0}}));
  const auto p = pipelines(AlgorithmId::kDecisionTree, 2, 7);
  record(kb, "a", p[0], 0.8);
  kb.add_pipeline(p[1]);
  ExperimentRecord fail;
  fail.dataset_id = "a";
  fail.pipeline_id = p[1].pipeline_id;
  fail.algorithm = p[1].algorithm;
  fail.config = p[1].config;
  fail.failed = true;
  fail.failure = "boom";
  kb.append_experiment(fail);
  KnnOptions o;
  o.k = 1;
  const auto rec = recommend_knn(mfv("q", {{"nr_inst", 0.0}}), kb, Metric::kAccuracy, o);
  ASSERT_EQ(rec.pipelines.size(), 2u);
  EXPECT_EQ(rec.pipelines[1].pipeline_id, p[1].pipeline_id);
  EXPECT_EQ(rec.pipelines[1].predicted_score, 0.0);
  try {
    recommend_knn(mfv("q", {{"nr_inst", 1.0}}), kb, Metric::kAccuracy, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoExperiments);
  }
}

namespace {

// Eight datasets where every decision tree scores 0.9 and every logistic
// regression 0.5 (plus a little per-pipeline jitter).
KnowledgeBase dominance_kb(std::vector<PipelineRecord>& all) {
  std::mt19937_64 rng(12);
  KnowledgeBase kb;
  const auto dt = pipelines(AlgorithmId::kDecisionTree, 6, 300);
  const auto lr = pipelines(AlgorithmId::kLogisticRegression, 6, 400);
  all = dt;
  all.insert(all.end(), lr.begin(), lr.end());
  for (int i = 0; i < 8; ++i) {
    const auto v = random_mf("d" + std::to_string(i), rng);
    add_dataset(kb, v);
    for (std::size_t j = 0; j < dt.size(); ++j) record(kb, v.dataset_id, dt[j], 0.9 - 0.001 * j);
    for (std::size_t j = 0; j < lr.size(); ++j) record(kb, v.dataset_id, lr[j], 0.5 - 0.001 * j);
  }
  return kb;
}

}  // namespace

TEST(MetaModel, ThresholdBoundaries) {
  std::vector<PipelineRecord> all;
  const auto kb = dominance_kb(all);
  MetaModelOptions o;
  o.n_trees = 20;
  o.promising_threshold = 0.0;
  const auto m = train_rf_metamodel(kb, Metric::kAccuracy, o);
  EXPECT_EQ(m.training_rows(), 96u);
  EXPECT_EQ(m.promising_rows(), 8u);  // one argmax per dataset
  o.promising_threshold = 1.0;
  try {
    train_rf_metamodel(kb, Metric::kAccuracy, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateLabels);
  }
}

TEST(MetaModel, DominantAlgorithmRankedFirst) {
  std::vector<PipelineRecord> all;
  const auto kb = dominance_kb(all);
  MetaModelOptions o;
  o.n_trees = 100;
  o.promising_threshold = 0.1;
  o.exclude = {"d3"};
  const auto m = train_rf_metamodel(kb, Metric::kAccuracy, o);
  EXPECT_EQ(m.training_rows(), 84u);
  const auto rec = recommend_rf(kb.find_dataset("d3")->metafeatures, m, all, 12);
  ASSERT_EQ(rec.pipelines.size(), 12u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(rec.pipelines[i].algorithm, AlgorithmId::kDecisionTree);
  EXPECT_GT(rec.pipelines[0].predicted_score, rec.pipelines[11].predicted_score);
}

TEST(MetaModel, SingletonAndDuplicateCandidates) {
  std::vector<PipelineRecord> all;
  const auto kb = dominance_kb(all);
  MetaModelOptions o;
  o.n_trees = 30;
  o.promising_threshold = 0.1;
  const auto m = train_rf_metamodel(kb, Metric::kAccuracy, o);
  const auto& q = kb.find_dataset("d0")->metafeatures;
  const auto one = recommend_rf(q, m, {all.back()}, 5);
  ASSERT_EQ(one.pipelines.size(), 1u);
  EXPECT_EQ(one.pipelines[0].pipeline_id, all.back().pipeline_id);
  const auto dup = recommend_rf(q, m, {all[2], all[2]}, 5);
  ASSERT_EQ(dup.pipelines.size(), 2u);
  EXPECT_EQ(dup.pipelines[0].predicted_score, dup.pipelines[1].predicted_score);
  const double p = m.predict(q, all[2].algorithm, all[2].config);
  EXPECT_GE(p, 0.0);
  EXPECT_LE(p, 1.0);
  EXPECT_EQ(p, m.predict(q, all[2].algorithm, all[2].config));
}

TEST(PipelineEncoding, WidthAndRange) {
  for (auto alg : kAllAlgorithms) {
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
      const auto e = encode_pipeline(alg, hp_space(alg).sample(rng));
      ASSERT_EQ(e.size(), pipeline_encoding_width());
      for (std::size_t i = 0; i < kAllAlgorithms.size(); ++i) {
        EXPECT_EQ(e[i], kAllAlgorithms[i] == alg ? 1.0 : 0.0);
      }
      for (double x : e) {
        EXPECT_TRUE(x == -1.0 || (x >= 0.0 && x <= 1.0));
      }
    }
  }
}

TEST(Loo, IdenticalCopiesAlwaysHit) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.3, 1.0);
  KnowledgeBase kb;
  const auto ps = pipelines(AlgorithmId::kRandomForest, 10, 900);
  for (int pair = 0; pair < 4; ++pair) {
    const auto v = random_mf("p" + std::to_string(pair), rng);
    std::vector<double> scores(ps.size());
    for (auto& s : scores) s = u(rng);
    for (const char* suffix : {"a", "b"}) {
      auto copy = v;
      copy.dataset_id = v.dataset_id + suffix;
      add_dataset(kb, copy);
      for (std::size_t j = 0; j < ps.size(); ++j) record(kb, copy.dataset_id, ps[j], scores[j]);
    }
  }
  LooOptions o;
  o.k = 1;
  o.seed = 3;
  const auto rep = loo_evaluate(kb, Metric::kAccuracy, o);
  ASSERT_EQ(rep.datasets.size(), 8u);
  EXPECT_EQ(rep.hit_rate, 1.0);
  EXPECT_EQ(rep.regret_max, 0.0);
  ASSERT_EQ(rep.baseline_hit_rates.size(), 20u);
  std::size_t ge = 0;
  for (double b : rep.baseline_hit_rates) ge += b >= rep.hit_rate;
  EXPECT_DOUBLE_EQ(rep.p_value, (1.0 + ge) / 21.0);
  for (const auto& d : rep.datasets) {
    EXPECT_EQ(d.recommended_score, d.best_score);
    EXPECT_TRUE(d.hit);
  }
}

TEST(Loo, NoSelfLeakage) {
  // Each dataset's own record would be a perfect answer; the held-out
  // dataset must never contribute to its own recommendation.
  std::mt19937_64 rng(8);
  KnowledgeBase kb;
  const auto ps = pipelines(AlgorithmId::kDecisionTree, 5, 10);
  for (int i = 0; i < 6; ++i) {
    const auto v = random_mf("d" + std::to_string(i), rng);
    add_dataset(kb, v);
    for (std::size_t j = 0; j < ps.size(); ++j) {
      record(kb, v.dataset_id, ps[j], static_cast<int>(j) == i % 5 ? 1.0 : 0.1);
    }
  }
  LooOptions o;
  o.k = 1;
  const auto rep = loo_evaluate(kb, Metric::kAccuracy, o);
  // Only d0 and d5 share their best pipeline, so only they can hit.
  for (const auto& d : rep.datasets) {
    EXPECT_EQ(d.best_score, 1.0);
    if (d.hit) EXPECT_TRUE(d.dataset_id == "d0" || d.dataset_id == "d5") << d.dataset_id;
  }
}

TEST(Loo, RandomScoresMatchBaseline) {
  // With scores independent of the meta-features the neighbours carry no
  // signal, so kNN should look like the random-pipeline baseline.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto ps = pipelines(AlgorithmId::kDecisionTree, 10, 300);
  int significant = 0;
  double diff = 0;
  const int runs = 30;
  for (int run = 0; run < runs; ++run) {
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(run));
    KnowledgeBase kb;
    for (int i = 0; i < 20; ++i) {
      const auto v = random_mf("d" + std::to_string(i), rng);
      add_dataset(kb, v);
      for (const auto& p : ps) record(kb, v.dataset_id, p, u(rng));
    }
    LooOptions o;
    o.seed = static_cast<std::uint64_t>(run);
    const auto rep = loo_evaluate(kb, Metric::kAccuracy, o);
    significant += rep.p_value < 0.05;
    diff += rep.hit_rate - rep.baseline_mean;
  }
  EXPECT_LE(significant, 6);
  EXPECT_LT(std::abs(diff / runs), 0.1);
}

TEST(Loo, NeedsFiveDatasets) {
  std::mt19937_64 rng(1);
  KnowledgeBase kb;
  const auto p = make_pipeline(AlgorithmId::kDecisionTree, 1);
  for (int i = 0; i < 4; ++i) {
    add_dataset(kb, random_mf("d" + std::to_string(i), rng));
    record(kb, "d" + std::to_string(i), p, 0.5);
  }
  EXPECT_THROW(loo_evaluate(kb, Metric::kAccuracy), Error);
}

TEST(Method, Parse) {
  EXPECT_EQ(parse_method("knn"), RecommendMethod::kKnn);
  EXPECT_EQ(parse_method("rf"), RecommendMethod::kRf);
  EXPECT_THROW(parse_method("svm"), Error);
}
