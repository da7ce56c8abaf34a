#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "metalearn/error.hpp"
#include "metalearn/evaluation.hpp"

using namespace metalearn;
using testutil::blobs;

namespace {

struct OracleRow {
  double precision, recall, f1;
  bool undefined;
};

// Per-class table computed straight from the definitions.
std::vector<OracleRow> oracle_table(const Confusion& m) {
  std::vector<OracleRow> rows;
  const auto c = m.size();
  for (std::size_t k = 0; k < c; ++k) {
    double tp = static_cast<double>(m[k][k]);
    double predicted = 0, actual = 0;
    for (std::size_t i = 0; i < c; ++i) {
      predicted += static_cast<double>(m[i][k]);
      actual += static_cast<double>(m[k][i]);
    }
    OracleRow r{0, 0, 0, false};
    if (predicted > 0) r.precision = tp / predicted; else r.undefined = true;
    if (actual > 0) r.recall = tp / actual; else r.undefined = true;
    if (predicted + actual > 0) r.f1 = 2 * tp / (predicted + actual); else r.undefined = true;
    rows.push_back(r);
  }
  return rows;
}

HpConfig dt_config() {
  return {AlgorithmId::kDecisionTree,
          {{"max_features", 0.9},
           {"min_samples_leaf", std::int64_t{1}},
           {"min_samples_split", std::int64_t{2}},
           {"criterion", std::string("entropy")}},
          3};
}

}  // namespace

TEST(Metrics, BinaryAccuracy) {
  // truth-major: TN=4, FP=2, FN=1, TP=3
  const auto r = compute_metrics({{4, 2}, {1, 3}});
  EXPECT_DOUBLE_EQ(r.accuracy, 0.7);
}

TEST(Metrics, PerfectDiagonal) {
  const auto r = compute_metrics({{3, 0, 0}, {0, 5, 0}, {0, 0, 2}});
  for (auto m : kAllMetrics) EXPECT_DOUBLE_EQ(r.get(m), 1.0);
  EXPECT_FALSE(r.undefined);
}

TEST(Metrics, ThreeClassMatchesOracle) {
  const Confusion m{{5, 0, 0}, {0, 0, 5}, {0, 0, 5}};
  const auto r = compute_metrics(m);
  const auto table = oracle_table(m);
  double p = 0, rc = 0, f = 0;
  for (const auto& row : table) {
    p += row.precision / 3;
    rc += row.recall / 3;
    f += row.f1 / 3;
  }
  EXPECT_NEAR(r.precision, p, 1e-15);
  EXPECT_NEAR(r.recall, rc, 1e-15);
  EXPECT_NEAR(r.f1, f, 1e-15);
  EXPECT_NEAR(r.precision, 0.5, 1e-15);
  EXPECT_NEAR(r.recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.f1, 5.0 / 9.0, 1e-15);
  EXPECT_DOUBLE_EQ(r.accuracy, 10.0 / 15.0);
  EXPECT_TRUE(r.undefined);
}

TEST(Metrics, EmptyMatrixRejected) {
  try {
    compute_metrics({{0, 0}, {0, 0}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyMatrix);
  }
  EXPECT_THROW(compute_metrics({}), Error);
}

TEST(MetricsProperty, RandomMatricesMatchOracleAndBounds) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t c = 2 + rng() % 5;
    Confusion m(c, std::vector<std::size_t>(c));
    std::size_t total = 0;
    for (auto& row : m) {
      for (auto& v : row) {
        v = rng() % 4 == 0 ? 0 : rng() % 20;
        total += v;
      }
    }
    if (total == 0) continue;
    const auto r = compute_metrics(m);
    const auto table = oracle_table(m);
    double p = 0, rc = 0, f = 0, fmin = 1, fmax = 0;
    bool undefined = false;
    for (const auto& row : table) {
      p += row.precision;
      rc += row.recall;
      f += row.f1;
      fmin = std::min(fmin, row.f1);
      fmax = std::max(fmax, row.f1);
      undefined |= row.undefined;
    }
    const double cd = static_cast<double>(c);
    ASSERT_NEAR(r.precision, p / cd, 1e-12);
    ASSERT_NEAR(r.recall, rc / cd, 1e-12);
    ASSERT_NEAR(r.f1, f / cd, 1e-12);
    ASSERT_EQ(r.undefined, undefined);
    ASSERT_GE(r.f1, fmin - 1e-12);
    ASSERT_LE(r.f1, fmax + 1e-12);
    for (auto metric : kAllMetrics) {
      ASSERT_GE(r.get(metric), 0.0);
      ASSERT_LE(r.get(metric), 1.0);
    }
  }
}

TEST(CrossValidate, MajorityPredictorScoresBaseRateExactly) {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({static_cast<double>(i)});
    y.push_back(i < 70 ? 0 : 1);
  }
  const auto ds = testutil::numeric_dataset(rows, y, 2);
  const auto plan = stratified_kfold(ds, 5, 10, 1);
  auto majority = [](const Dataset& train, const Dataset& test) {
    const auto counts = train.class_counts();
    const int label = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    return FoldOutput{std::vector<int>(test.n(), label), 0};
  };
  const auto scores = cross_validate(ds, plan, {Metric::kAccuracy}, majority);
  EXPECT_EQ(scores.at(Metric::kAccuracy).mean, 0.7);
  EXPECT_EQ(scores.at(Metric::kAccuracy).std, 0.0);
}

TEST(CrossValidate, FoldCountIsKTimesRepeats) {
  const auto ds = blobs(60, 2, 2, 2.0, 5);
  const auto plan = stratified_kfold(ds, 5, 10, 2);
  const auto scores = evaluate_pipeline(dt_config(), ds, plan);
  for (auto m : kAllMetrics) {
    const auto& s = scores.at(m);
    ASSERT_EQ(s.folds.size(), 50u);
    double mean = 0;
    for (double v : s.folds) mean += v;
    EXPECT_NEAR(s.mean, mean / 50.0, 1e-12);
    EXPECT_GE(s.std, 0.0);
  }
  EXPECT_EQ(scores.k, 5);
  EXPECT_EQ(scores.repeats, 10);
  EXPECT_GT(scores.memory_bytes, 0u);
}

TEST(CrossValidate, MatchesNaiveLoop) {
  const auto ds = blobs(50, 3, 2, 0.7, 12);
  const auto plan = stratified_kfold(ds, 5, 2, 9);
  const auto scores = evaluate_pipeline(dt_config(), ds, plan, {Metric::kAccuracy});

  std::vector<double> naive;
  for (int r = 0; r < 2; ++r) {
    const auto& assign = plan.assignment(r);
    for (int f = 0; f < 5; ++f) {
      std::vector<std::size_t> train, test;
      for (std::size_t i = 0; i < ds.n(); ++i) (assign[i] == f ? test : train).push_back(i);
      const auto model = fit(dt_config(), ds.subset(train));
      const auto pred = model.predict(ds.subset(test));
      std::size_t hit = 0;
      for (std::size_t i = 0; i < test.size(); ++i) hit += pred[i] == ds.labels()[test[i]];
      naive.push_back(static_cast<double>(hit) / static_cast<double>(test.size()));
    }
  }
  EXPECT_EQ(scores.at(Metric::kAccuracy).folds, naive);
}

TEST(CrossValidate, TestLabelsNeverReachTheFit) {
  const auto ds = blobs(60, 3, 3, 1.0, 14);
  const auto plan = stratified_kfold(ds, 5, 1, 4);
  std::vector<std::string> reference(5);
  evaluate_pipeline(dt_config(), ds, plan, {Metric::kAccuracy},
                    [&](int, int f, const Model& m) { reference[f] = m.serialize(); });
  for (int f = 0; f < 5; ++f) {
    auto labels = ds.labels();
    for (auto i : plan.test_indices(0, f)) labels[i] = (labels[i] + 1) % 3;
    const Dataset corrupted(ds.id(), ds.name(), ds.features(), labels, ds.class_names());
    std::string model_f;
    evaluate_pipeline(dt_config(), corrupted, plan, {Metric::kAccuracy}, [&](int, int g, const Model& m) {
      if (g == f) model_f = m.serialize();
    });
    EXPECT_EQ(model_f, reference[f]) << "fold " << f;
  }
}

TEST(CrossValidate, ErrorsNameTheFold) {
  auto ds = blobs(40, 2, 2, 2.0, 1);
  auto cols = ds.features();
  cols[1].values[0] = std::nan("");
  cols[1].missing[0] = 1;
  const Dataset gappy(ds.id(), ds.name(), cols, ds.labels(), ds.class_names());
  HpConfig lr{AlgorithmId::kLogisticRegression,
              {{"C", 1.0}, {"penalty", std::string("l2")}, {"fit_intercept", std::string("true")}},
              0};
  try {
    evaluate_pipeline(lr, gappy, stratified_kfold(gappy, 5, 1, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingValues);
    EXPECT_NE(std::string(e.what()).find("(repeat 0, fold"), std::string::npos);
  }
}

TEST(MetricNames, ParseAndList) {
  EXPECT_EQ(parse_metric("f1"), Metric::kF1);
  EXPECT_EQ(parse_metric_list("accuracy,f1,accuracy"), (std::vector<Metric>{Metric::kAccuracy, Metric::kF1}));
  try {
    parse_metric("auc");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownMetric);
  }
}
