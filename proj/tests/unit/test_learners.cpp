#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "estimators.hpp"
#include "helpers.hpp"
#include "json.hpp"
#include "metalearn/error.hpp"
#include "metalearn/learners.hpp"
#include "metalearn/synthetic.hpp"

using namespace metalearn;
using testutil::blobs;
using testutil::numeric_dataset;

namespace {

HpConfig dt_config(std::uint64_t seed = 0) {
  return {AlgorithmId::kDecisionTree,
          {{"max_features", 0.9},
           {"min_samples_leaf", std::int64_t{1}},
           {"min_samples_split", std::int64_t{2}},
           {"criterion", std::string("gini")}},
          seed};
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

Dataset relabel(const Dataset& ds, const std::vector<int>& perm) {
  std::vector<int> y;
  for (int v : ds.labels()) y.push_back(perm[v]);
  std::vector<std::string> names(ds.class_names().size());
  for (std::size_t k = 0; k < perm.size(); ++k) names[perm[k]] = ds.class_names()[k];
  return Dataset(ds.id(), ds.name(), ds.features(), y, names);
}

}  // namespace

TEST(Learners, EverySampledConfigIsAcceptedByFit) {
  const auto ds = blobs(60, 3, 3, 1.5, 4);
  for (auto alg : kAllAlgorithms) {
    Rng rng(mix_seed(17, static_cast<std::uint64_t>(alg)));
    for (int i = 0; i < 6; ++i) {
      HpConfig cfg{alg, hp_space(alg).sample(rng), 3};
      try {
        const auto model = fit(cfg, ds);
        EXPECT_EQ(model.predict(ds).size(), ds.n());
      } catch (const Error& e) {
        // A diverging optimizer is a data failure, never a rejected config.
        EXPECT_EQ(e.code(), ErrorCode::kDegenerateTrainingData) << to_string(alg) << ": " << e.what();
      }
    }
  }
}

TEST(Learners, InvalidConfigRejected) {
  const auto ds = blobs(40, 2, 2, 2.0, 1);
  auto cfg = dt_config();
  cfg.values["min_samples_leaf"] = std::int64_t{21};
  try {
    fit(cfg, ds);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
}

TEST(Learners, SingleClassTrainingRejected) {
  const auto ds = blobs(40, 2, 2, 2.0, 1);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n(); i += 2) rows.push_back(i);
  try {
    fit(dt_config(), ds.subset(rows));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateTrainingData);
  }
}

TEST(DecisionTree, MinSamplesSplitAboveNGivesMajorityLeaf) {
  std::vector<std::vector<double>> rows;
  std::vector<int> y;
  for (int i = 0; i < 15; ++i) {
    rows.push_back({static_cast<double>(i)});
    y.push_back(i < 9 ? 1 : 0);
  }
  const auto ds = numeric_dataset(rows, y, 2);
  auto cfg = dt_config();
  cfg.values["min_samples_split"] = std::int64_t{20};
  const auto model = fit(cfg, ds);
  for (int p : model.predict(ds)) EXPECT_EQ(p, 1);
  const auto doc = nlohmann::json::parse(model.serialize());
  EXPECT_EQ(doc.at("estimator").at("nodes").size(), 1u);
}

TEST(DecisionTree, MemorizesNoiseFreeTrainingData) {
  const auto ds = blobs(120, 4, 3, 0.5, 9);
  const auto model = fit(dt_config(), ds);
  EXPECT_DOUBLE_EQ(accuracy(model.predict(ds), ds.labels()), 1.0);
}

TEST(RandomForest, OneTreeWithoutBootstrapEqualsDecisionTree) {
  const auto ds = blobs(150, 5, 3, 0.6, 21);
  for (std::uint64_t seed : {0ULL, 7ULL, 99ULL}) {
    auto dt = dt_config(seed);
    dt.values["max_features"] = 0.5;
    dt.values["min_samples_leaf"] = std::int64_t{3};
    HpConfig rf{AlgorithmId::kRandomForest,
                {{"bootstrap", std::string("false")},
                 {"max_features", 0.5},
                 {"min_samples_leaf", std::int64_t{3}},
                 {"min_samples_split", std::int64_t{2}},
                 {"imputation", std::string("mean")},
                 {"criterion", std::string("gini")},
                 {"n_estimators", std::int64_t{1}}},
                seed};
    EXPECT_EQ(fit(dt, ds).predict(ds), fit(rf, ds).predict(ds)) << "seed " << seed;
  }
}

TEST(LogisticRegression, MaximalRegularizationShrinksWeights) {
  const auto ds = blobs(100, 4, 2, 1.0, 5);
  for (const char* penalty : {"l2", "l1"}) {
    HpConfig cfg{AlgorithmId::kLogisticRegression,
                 {{"C", 1e-10}, {"penalty", std::string(penalty)}, {"fit_intercept", std::string("true")}},
                 0};
    const auto doc = nlohmann::json::parse(fit(cfg, ds).serialize());
    double norm = 0.0;
    for (const auto& row : doc.at("estimator").at("coef")) {
      for (const auto& w : row) norm += w.get<double>() * w.get<double>();
    }
    EXPECT_LT(std::sqrt(norm), 1e-3) << penalty;
  }
}

TEST(LogisticRegression, WeakRegularizationSeparatesBlobs) {
  const auto ds = blobs(100, 2, 2, 4.0, 5);
  HpConfig cfg{AlgorithmId::kLogisticRegression,
               {{"C", 10.0}, {"penalty", std::string("l2")}, {"fit_intercept", std::string("true")}},
               0};
  EXPECT_GT(accuracy(fit(cfg, ds).predict(ds), ds.labels()), 0.95);
}

TEST(AdaBoost, SingleStumpEnsembleEqualsStump) {
  const auto ds = blobs(80, 3, 2, 0.5, 13);
  const auto x = encode(FeatureSchema::of(ds), ds);
  ml::AdaBoost ada;
  ada.fit(x, ds.labels(), 2, {false, 1, 1.0, 1}, 5);
  ml::ClassificationTree stump;
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> w(ds.n(), 1.0 / static_cast<double>(ds.n()));
  ml::TreeOptions opts;
  opts.max_depth = 1;
  Rng rng(5);
  stump.fit(x, ds.labels(), 2, rows, w, opts, rng);
  for (std::size_t i = 0; i < ds.n(); ++i) EXPECT_EQ(ada.predict(x.row(i)), stump.predict(x.row(i)));
}

TEST(Models, SerializationRoundTripsForEveryAlgorithm) {
  const auto ds = blobs(60, 3, 3, 1.5, 8);
  for (auto alg : kAllAlgorithms) {
    Rng rng(mix_seed(3, static_cast<std::uint64_t>(alg)));
    HpConfig cfg{alg, hp_space(alg).sample(rng), 11};
    Model model = [&] {
      for (;;) {
        try {
          return fit(cfg, ds);
        } catch (const Error&) {
          cfg.values = hp_space(alg).sample(rng);
        }
      }
    }();
    const auto text = model.serialize();
    const auto back = Model::deserialize(text);
    EXPECT_EQ(back.predict(ds), model.predict(ds)) << to_string(alg);
    EXPECT_EQ(back.serialize(), text) << to_string(alg);
    EXPECT_EQ(back.algorithm(), alg);
    // Determinism: refitting reproduces the same document.
    EXPECT_EQ(fit(cfg, ds).serialize(), text) << to_string(alg);
  }
}

TEST(Models, ModelDocumentIsSelfDescribing) {
  const auto ds = blobs(40, 2, 2, 2.0, 1);
  const auto doc = nlohmann::json::parse(fit(dt_config(), ds).serialize());
  EXPECT_EQ(doc.at("format"), "metalearn-model");
  EXPECT_EQ(doc.at("format_version"), 1);
  EXPECT_EQ(doc.at("algorithm"), "DECISION_TREE");
  EXPECT_EQ(doc.at("schema").at("fields").size(), 2u);
  EXPECT_THROW(Model::deserialize("{\"format\":\"other\"}"), Error);
  EXPECT_THROW(Model::deserialize("not json"), Error);
}

TEST(Models, SchemaMismatchRejected) {
  const auto ds = blobs(40, 2, 2, 2.0, 1);
  const auto other = blobs(40, 3, 2, 2.0, 1);
  const auto model = fit(dt_config(), ds);
  try {
    model.predict(other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
  }
}

TEST(Models, MissingValuesOnlyForImputingLearners) {
  auto ds = blobs(40, 2, 2, 2.0, 1);
  auto cols = ds.features();
  cols[0].values[3] = std::nan("");
  cols[0].missing[3] = 1;
  const Dataset gappy(ds.id(), ds.name(), cols, ds.labels(), ds.class_names());
  HpConfig lr{AlgorithmId::kLogisticRegression,
              {{"C", 1.0}, {"penalty", std::string("l2")}, {"fit_intercept", std::string("true")}},
              0};
  try {
    fit(lr, gappy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingValues);
  }
  for (const char* strategy : {"mean", "median", "mode"}) {
    HpConfig rf{AlgorithmId::kExtraTrees,
                {{"bootstrap", std::string("false")},
                 {"max_features", 0.5},
                 {"min_samples_leaf", std::int64_t{1}},
                 {"min_samples_split", std::int64_t{2}},
                 {"imputation", std::string(strategy)},
                 {"criterion", std::string("entropy")}},
                0};
    EXPECT_EQ(fit(rf, gappy).predict(gappy).size(), gappy.n());
  }
}

TEST(Models, LabelPermutationEquivariance) {
  const auto ds = blobs(90, 3, 3, 2.5, 31);
  const std::vector<int> perm{2, 0, 1};
  const auto renamed = relabel(ds, perm);
  HpConfig lr{AlgorithmId::kLogisticRegression,
              {{"C", 1.0}, {"penalty", std::string("l2")}, {"fit_intercept", std::string("true")}},
              0};
  for (const auto& cfg : {dt_config(4), lr}) {
    const auto a = fit(cfg, ds).predict(ds);
    const auto b = fit(cfg, renamed).predict(renamed);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(perm[a[i]], b[i]) << to_string(cfg.algorithm);
  }
}

TEST(Models, SingleLeafPredictsMajority) {
  const auto ds = blobs(30, 2, 2, 0.1, 3);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    if (ds.labels()[i] == 1 || i < 6) rows.push_back(i);
  }
  const auto sub = ds.subset(rows);
  auto cfg = dt_config();
  cfg.values["min_samples_split"] = std::int64_t{20};
  cfg.values["min_samples_leaf"] = std::int64_t{20};
  for (int p : fit(cfg, sub).predict(ds)) EXPECT_EQ(p, 1);
}

TEST(Synthetic, LinearlySeparableHasMargin) {
  const auto ds = make_linearly_separable(200, 3);
  EXPECT_EQ(ds.n(), 200u);
  EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{100, 100}));
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const double s = 0.8 * ds.feature(0).values[i] - 0.6 * ds.feature(1).values[i];
    EXPECT_GE(std::abs(s), 0.3);
    EXPECT_EQ(s > 0, ds.labels()[i] == 1);
  }
}

TEST(Synthetic, DeskCorpusShape) {
  const auto corpus = desk_corpus();
  ASSERT_EQ(corpus.size(), 20u);
  std::set<std::string> ids, families;
  for (const auto& d : corpus) {
    ids.insert(d.data.id());
    families.insert(d.family);
  }
  EXPECT_EQ(ids.size(), 20u);
  EXPECT_EQ(families.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(corpus[i].family, corpus[i + 10].family);
}
