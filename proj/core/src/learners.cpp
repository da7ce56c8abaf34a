#include "metalearn/learners.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <variant>

#include "estimators.hpp"
#include "json_util.hpp"
#include "metalearn/error.hpp"

namespace metalearn {

namespace {

using ml::Json;

constexpr int kModelFormatVersion = 1;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

SearchSpace make_space(AlgorithmId id) {
  using D = Dimension;
  const std::string exclusive_note = "upper bound exclusive in the source table";
  switch (id) {
    case AlgorithmId::kLogisticRegression:
      return SearchSpace({
          D::continuous("C", 1e-10, 10.0, true),
          D::categorical("penalty", {"l2", "l1"}),
          D::categorical("fit_intercept", {"true", "false"}),
      });
    case AlgorithmId::kDecisionTree:
      return SearchSpace({
          D::continuous("max_features", 0.1, 0.9),
          D::integer("min_samples_leaf", 1, 20).with_note(exclusive_note),
          D::integer("min_samples_split", 2, 20).with_note(exclusive_note),
          D::categorical("criterion", {"entropy", "gini"}),
      });
    case AlgorithmId::kSvm:
      return SearchSpace({
          D::continuous("C", 1e-10, 500.0, true),
          D::categorical("kernel", {"poly", "rbf"}),
          D::continuous("coef0", 0.0, 10.0),
          D::continuous("gamma", 1e-3, 1.01, true),
          D::integer("degree", 2, 3).when("kernel", {"poly"}),
      });
    case AlgorithmId::kSgdClassifier:
      return SearchSpace(
          {
              D::categorical("loss", {"hinge", "perceptron", "log", "squared_hinge"}),
              D::categorical("penalty", {"l2", "l1", "elasticnet"}),
              D::categorical("learning_rate", {"constant", "optimal", "invscaling"}),
              D::categorical("fit_intercept", {"true", "false"}),
              D::continuous("l1_ratio", 0.0, 1.0).when("penalty", {"elasticnet"}),
              D::continuous("eta0", 0.0, 5.0),
          },
          {{"alpha", 1e-4}, {"epochs", std::int64_t{20}}, {"power_t", 0.5}});
    case AlgorithmId::kRandomForest:
    case AlgorithmId::kExtraTrees:
      return SearchSpace(
          {
              D::categorical("bootstrap", {"true", "false"}),
              D::continuous("max_features", 0.1, 0.9),
              D::integer("min_samples_leaf", 1, 20),
              D::integer("min_samples_split", 2, 20),
              D::categorical("imputation", {"mean", "median", "mode"}),
              D::categorical("criterion", {"entropy", "gini"}),
          },
          {{"n_estimators", std::int64_t{100}}});
    case AlgorithmId::kGradientBoosting:
      return SearchSpace({
          D::continuous("learning_rate", 0.01, 1.0),
          D::categorical("criterion", {"friedman_mse", "mse"}),
          D::integer("n_estimators", 50, 500).with_note(exclusive_note),
          D::integer("max_depth", 1, 10).with_note(exclusive_note),
          D::integer("min_samples_split", 2, 20).with_note(exclusive_note),
      });
    case AlgorithmId::kAdaBoost:
      return SearchSpace({
          D::categorical("algorithm", {"SAMME", "SAMME.R"}),
          D::integer("n_estimators", 50, 500).with_note(exclusive_note),
          D::continuous("learning_rate", 0.01, 2.0, true),
          D::integer("max_depth", 1, 10).with_note(exclusive_note),
      });
  }
  throw Error(ErrorCode::kInternal, "unknown algorithm");
}

// Looks a parameter up in the configuration, then in the space's fixed
// defaults.
const HpValue& param(const HpConfig& cfg, const std::string& name) {
  if (auto it = cfg.values.find(name); it != cfg.values.end()) return it->second;
  const auto& fixed = hp_space(cfg.algorithm).fixed();
  if (auto it = fixed.find(name); it != fixed.end()) return it->second;
  throw Error(ErrorCode::kInvalidConfig, "missing hyperparameter '" + name + "'");
}

ml::Criterion tree_criterion(const HpConfig& cfg) {
  return as_string(param(cfg, "criterion")) == "entropy" ? ml::Criterion::kEntropy
                                                         : ml::Criterion::kGini;
}

ml::TreeOptions tree_options(const HpConfig& cfg) {
  ml::TreeOptions o;
  o.criterion = tree_criterion(cfg);
  o.max_features = as_double(param(cfg, "max_features"));
  o.min_samples_leaf = static_cast<int>(as_int(param(cfg, "min_samples_leaf")));
  o.min_samples_split = static_cast<int>(as_int(param(cfg, "min_samples_split")));
  return o;
}

ml::ImputeStrategy impute_strategy(const std::string& s) {
  if (s == "mean") return ml::ImputeStrategy::kMean;
  if (s == "median") return ml::ImputeStrategy::kMedian;
  return ml::ImputeStrategy::kMode;
}

ml::SgdParams sgd_params(const HpConfig& cfg) {
  ml::SgdParams p;
  const auto& loss = as_string(param(cfg, "loss"));
  p.loss = loss == "hinge"        ? ml::SgdLoss::kHinge
           : loss == "perceptron" ? ml::SgdLoss::kPerceptron
           : loss == "log"        ? ml::SgdLoss::kLog
                                  : ml::SgdLoss::kSquaredHinge;
  const auto& pen = as_string(param(cfg, "penalty"));
  p.penalty = pen == "l2" ? ml::SgdPenalty::kL2
              : pen == "l1" ? ml::SgdPenalty::kL1
                            : ml::SgdPenalty::kElasticNet;
  const auto& lr = as_string(param(cfg, "learning_rate"));
  p.schedule = lr == "constant" ? ml::SgdSchedule::kConstant
               : lr == "optimal" ? ml::SgdSchedule::kOptimal
                                 : ml::SgdSchedule::kInvScaling;
  p.fit_intercept = as_bool(param(cfg, "fit_intercept"));
  if (p.penalty == ml::SgdPenalty::kElasticNet) p.l1_ratio = as_double(param(cfg, "l1_ratio"));
  p.eta0 = as_double(param(cfg, "eta0"));
  p.alpha = as_double(param(cfg, "alpha"));
  p.epochs = static_cast<int>(as_int(param(cfg, "epochs")));
  p.power_t = as_double(param(cfg, "power_t"));
  return p;
}

bool standardizes(AlgorithmId id) {
  return id == AlgorithmId::kLogisticRegression || id == AlgorithmId::kSvm ||
         id == AlgorithmId::kSgdClassifier;
}

bool imputes(AlgorithmId id) {
  return id == AlgorithmId::kRandomForest || id == AlgorithmId::kExtraTrees;
}

using Estimator = std::variant<ml::ClassificationTree, ml::Forest, ml::GradientBoosting,
                               ml::AdaBoost, ml::KernelSvm, ml::LinearOvr>;

Json schema_to_json(const FeatureSchema& s) {
  Json fields = Json::array();
  for (const auto& f : s.fields) {
    fields.push_back({{"name", f.name}, {"type", std::string(to_string(f.type))}, {"levels", f.levels}});
  }
  return {{"fields", std::move(fields)}, {"classes", s.class_names}};
}

ColumnType column_type_from(const std::string& s) {
  if (s == "numeric") return ColumnType::kNumeric;
  if (s == "categorical") return ColumnType::kCategorical;
  if (s == "binary") return ColumnType::kBinary;
  throw Error(ErrorCode::kParse, "unknown column type '" + s + "'");
}

FeatureSchema schema_from_json(const Json& j) {
  FeatureSchema s;
  for (const auto& f : j.at("fields")) {
    s.fields.push_back({f.at("name").get<std::string>(),
                        column_type_from(f.at("type").get<std::string>()),
                        f.at("levels").get<std::vector<std::string>>()});
  }
  s.class_names = j.at("classes").get<std::vector<std::string>>();
  return s;
}

}  // namespace

struct Model::State {
  HpConfig config;
  FeatureSchema schema;
  std::optional<ml::Standardizer> standardizer;
  std::optional<ml::Imputer> imputer;
  Estimator estimator;
};

std::string_view to_string(AlgorithmId id) {
  switch (id) {
    case AlgorithmId::kLogisticRegression: return "LOGISTIC_REGRESSION";
    case AlgorithmId::kDecisionTree: return "DECISION_TREE";
    case AlgorithmId::kSvm: return "SVM";
    case AlgorithmId::kSgdClassifier: return "SGD_CLASSIFIER";
    case AlgorithmId::kRandomForest: return "RANDOM_FOREST";
    case AlgorithmId::kExtraTrees: return "EXTRA_TREES";
    case AlgorithmId::kGradientBoosting: return "GRADIENT_BOOSTING";
    case AlgorithmId::kAdaBoost: return "ADABOOST";
  }
  return "UNKNOWN";
}

AlgorithmId parse_algorithm(std::string_view text) {
  const auto t = lower(text);
  static const std::pair<const char*, AlgorithmId> aliases[] = {
      {"lr", AlgorithmId::kLogisticRegression}, {"dt", AlgorithmId::kDecisionTree},
      {"svm", AlgorithmId::kSvm},               {"sgd", AlgorithmId::kSgdClassifier},
      {"rf", AlgorithmId::kRandomForest},       {"et", AlgorithmId::kExtraTrees},
      {"gb", AlgorithmId::kGradientBoosting},   {"ada", AlgorithmId::kAdaBoost},
  };
  for (const auto& [alias, id] : aliases) {
    if (t == alias) return id;
  }
  for (auto id : kAllAlgorithms) {
    if (t == lower(to_string(id))) return id;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown algorithm '" + std::string(text) + "'");
}

const SearchSpace& hp_space(AlgorithmId id) {
  static const std::array<SearchSpace, 8> spaces = [] {
    std::array<SearchSpace, 8> out;
    for (std::size_t i = 0; i < kAllAlgorithms.size(); ++i) out[i] = make_space(kAllAlgorithms[i]);
    return out;
  }();
  return spaces[static_cast<std::size_t>(id)];
}

void validate_config(const HpConfig& cfg) { hp_space(cfg.algorithm).validate(cfg.values); }

FeatureSchema FeatureSchema::of(const Dataset& ds) {
  FeatureSchema s;
  for (const auto& col : ds.features()) s.fields.push_back({col.name, col.type, col.levels});
  s.class_names = ds.class_names();
  return s;
}

std::size_t FeatureSchema::width() const {
  std::size_t w = 0;
  for (const auto& f : fields) w += f.type == ColumnType::kCategorical ? f.levels.size() : 1;
  return w;
}

Matrix encode(const FeatureSchema& schema, const Dataset& ds) {
  if (ds.p() != schema.fields.size()) {
    throw Error(ErrorCode::kSchemaMismatch, "expected " + std::to_string(schema.fields.size()) +
                                                " feature columns, got " + std::to_string(ds.p()));
  }
  for (std::size_t j = 0; j < ds.p(); ++j) {
    const auto& col = ds.feature(j);
    const auto& f = schema.fields[j];
    if (col.name != f.name || col.type != f.type || col.levels != f.levels) {
      throw Error(ErrorCode::kSchemaMismatch, "column " + std::to_string(j) + " ('" + col.name +
                                                  "') does not match training column '" + f.name +
                                                  "'");
    }
  }
  Matrix x(ds.n(), schema.width());
  std::size_t out = 0;
  for (std::size_t j = 0; j < ds.p(); ++j) {
    const auto& col = ds.feature(j);
    if (col.type != ColumnType::kCategorical) {
      for (std::size_t i = 0; i < ds.n(); ++i) x(i, out) = col.values[i];
      ++out;
      continue;
    }
    const auto k = col.levels.size();
    for (std::size_t i = 0; i < ds.n(); ++i) {
      for (std::size_t l = 0; l < k; ++l) {
        x(i, out + l) = col.is_missing(i) ? NAN : (static_cast<std::size_t>(col.values[i]) == l ? 1.0 : 0.0);
      }
    }
    out += k;
  }
  return x;
}

Model::Model(std::shared_ptr<const State> state) : state_(std::move(state)) {}

AlgorithmId Model::algorithm() const { return state_->config.algorithm; }
const HpConfig& Model::config() const { return state_->config; }
const FeatureSchema& Model::schema() const { return state_->schema; }

Model fit(const HpConfig& cfg, const Dataset& train) {
  validate_config(cfg);
  const int c = train.c();
  {
    const auto counts = train.class_counts();
    const auto observed = std::count_if(counts.begin(), counts.end(), [](auto v) { return v > 0; });
    if (observed < 2) {
      throw Error(ErrorCode::kDegenerateTrainingData, "training data has fewer than two classes");
    }
  }
  auto state = std::make_shared<Model::State>();
  state->config = cfg;
  state->schema = FeatureSchema::of(train);
  Matrix x = encode(state->schema, train);
  const auto& y = train.labels();
  const auto alg = cfg.algorithm;

  if (imputes(alg)) {
    ml::Imputer imp;
    imp.fit(x, impute_strategy(as_string(param(cfg, "imputation"))));
    x = imp.transform(x);
    state->imputer = std::move(imp);
  } else if (x.has_missing()) {
    throw Error(ErrorCode::kMissingValues,
                std::string(to_string(alg)) + " does not accept missing values; impute first");
  }
  if (standardizes(alg)) {
    ml::Standardizer s;
    s.fit(x);
    x = s.transform(x);
    state->standardizer = std::move(s);
  }

  switch (alg) {
    case AlgorithmId::kLogisticRegression: {
      ml::LogisticParams p;
      p.C = as_double(param(cfg, "C"));
      p.l1 = as_string(param(cfg, "penalty")) == "l1";
      p.fit_intercept = as_bool(param(cfg, "fit_intercept"));
      state->estimator = ml::fit_logistic(x, y, c, p);
      break;
    }
    case AlgorithmId::kDecisionTree: {
      std::vector<std::size_t> rows(x.rows());
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
      Rng rng(cfg.seed);
      ml::ClassificationTree tree;
      tree.fit(x, y, c, rows, {}, tree_options(cfg), rng);
      state->estimator = std::move(tree);
      break;
    }
    case AlgorithmId::kSvm: {
      ml::SvmParams p;
      p.C = as_double(param(cfg, "C"));
      p.kernel = as_string(param(cfg, "kernel")) == "rbf" ? ml::Kernel::kRbf : ml::Kernel::kPoly;
      p.coef0 = as_double(param(cfg, "coef0"));
      p.gamma = as_double(param(cfg, "gamma"));
      if (p.kernel == ml::Kernel::kPoly) p.degree = static_cast<int>(as_int(param(cfg, "degree")));
      ml::KernelSvm svm;
      svm.fit(x, y, c, p);
      state->estimator = std::move(svm);
      break;
    }
    case AlgorithmId::kSgdClassifier:
      state->estimator = ml::fit_sgd(x, y, c, sgd_params(cfg), cfg.seed);
      break;
    case AlgorithmId::kRandomForest:
    case AlgorithmId::kExtraTrees: {
      ml::ForestOptions o;
      o.tree = tree_options(cfg);
      o.tree.random_splits = alg == AlgorithmId::kExtraTrees;
      o.bootstrap = as_bool(param(cfg, "bootstrap"));
      o.n_trees = static_cast<int>(as_int(param(cfg, "n_estimators")));
      ml::Forest forest;
      forest.fit(x, y, c, o, cfg.seed);
      state->estimator = std::move(forest);
      break;
    }
    case AlgorithmId::kGradientBoosting: {
      ml::BoostingParams p;
      p.learning_rate = as_double(param(cfg, "learning_rate"));
      p.criterion = as_string(param(cfg, "criterion")) == "mse" ? ml::RegressionCriterion::kMse
                                                                : ml::RegressionCriterion::kFriedmanMse;
      p.n_estimators = static_cast<int>(as_int(param(cfg, "n_estimators")));
      p.max_depth = static_cast<int>(as_int(param(cfg, "max_depth")));
      p.min_samples_split = static_cast<int>(as_int(param(cfg, "min_samples_split")));
      ml::GradientBoosting gb;
      gb.fit(x, y, c, p);
      state->estimator = std::move(gb);
      break;
    }
    case AlgorithmId::kAdaBoost: {
      ml::AdaBoostParams p;
      p.real = as_string(param(cfg, "algorithm")) == "SAMME.R";
      p.n_estimators = static_cast<int>(as_int(param(cfg, "n_estimators")));
      p.learning_rate = as_double(param(cfg, "learning_rate"));
      p.max_depth = static_cast<int>(as_int(param(cfg, "max_depth")));
      ml::AdaBoost ada;
      ada.fit(x, y, c, p, cfg.seed);
      state->estimator = std::move(ada);
      break;
    }
  }
  return Model(std::move(state));
}

std::vector<int> Model::predict(const Dataset& rows) const {
  if (rows.class_names() != state_->schema.class_names) {
    // Class names only matter for reporting, but a different class set means
    // the rows come from another task.
    if (rows.c() != static_cast<int>(state_->schema.class_names.size())) {
      throw Error(ErrorCode::kSchemaMismatch, "class set differs from the training data");
    }
  }
  return predict_encoded(encode(state_->schema, rows));
}

std::vector<int> Model::predict_encoded(const Matrix& rows) const {
  const auto& s = *state_;
  if (rows.cols() != s.schema.width()) {
    throw Error(ErrorCode::kSchemaMismatch, "expected " + std::to_string(s.schema.width()) +
                                                " encoded columns, got " + std::to_string(rows.cols()));
  }
  Matrix x;
  const Matrix* in = &rows;
  if (s.imputer) {
    x = s.imputer->transform(rows);
    in = &x;
  } else if (rows.has_missing()) {
    throw Error(ErrorCode::kMissingValues,
                std::string(to_string(s.config.algorithm)) + " cannot predict rows with missing values");
  }
  if (s.standardizer) {
    x = s.standardizer->transform(*in);
    in = &x;
  }
  std::vector<int> out(in->rows());
  std::visit(
      [&](const auto& est) {
        for (std::size_t i = 0; i < in->rows(); ++i) out[i] = est.predict(in->row(i));
      },
      s.estimator);
  return out;
}

std::string Model::serialize() const {
  const auto& s = *state_;
  Json pre = Json::object();
  if (s.standardizer) pre["standardizer"] = s.standardizer->to_json();
  if (s.imputer) pre["imputer"] = s.imputer->to_json();
  Json est = std::visit([](const auto& e) { return e.to_json(); }, s.estimator);
  Json doc = {
      {"format", "metalearn-model"},
      {"format_version", kModelFormatVersion},
      {"engine_version", METALEARN_VERSION},
      {"algorithm", std::string(to_string(s.config.algorithm))},
      {"seed", s.config.seed},
      {"hyperparameters", detail::to_json(s.config.values)},
      {"schema", schema_to_json(s.schema)},
      {"preprocess", std::move(pre)},
      {"estimator", std::move(est)},
  };
  return doc.dump();
}

Model Model::deserialize(const std::string& text) {
  const Json doc = detail::parse_json(text, "model document");
  try {
    if (doc.at("format").get<std::string>() != "metalearn-model") {
      throw Error(ErrorCode::kParse, "not a model document");
    }
    if (doc.at("format_version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kParse, "unsupported model format version");
    }
    auto state = std::make_shared<State>();
    state->config.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    state->config.seed = doc.at("seed").get<std::uint64_t>();
    state->config.values = detail::assignment_from_json(doc.at("hyperparameters"));
    state->schema = schema_from_json(doc.at("schema"));
    const auto& pre = doc.at("preprocess");
    if (pre.contains("standardizer")) state->standardizer = ml::Standardizer::from_json(pre["standardizer"]);
    if (pre.contains("imputer")) state->imputer = ml::Imputer::from_json(pre["imputer"]);
    const auto& est = doc.at("estimator");
    switch (state->config.algorithm) {
      case AlgorithmId::kLogisticRegression:
      case AlgorithmId::kSgdClassifier:
        state->estimator = ml::LinearOvr::from_json(est);
        break;
      case AlgorithmId::kDecisionTree:
        state->estimator = ml::ClassificationTree::from_json(est);
        break;
      case AlgorithmId::kSvm:
        state->estimator = ml::KernelSvm::from_json(est);
        break;
      case AlgorithmId::kRandomForest:
      case AlgorithmId::kExtraTrees:
        state->estimator = ml::Forest::from_json(est);
        break;
      case AlgorithmId::kGradientBoosting:
        state->estimator = ml::GradientBoosting::from_json(est);
        break;
      case AlgorithmId::kAdaBoost:
        state->estimator = ml::AdaBoost::from_json(est);
        break;
    }
    return Model(std::move(state));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("malformed model document: ") + e.what());
  }
}

std::size_t Model::memory_bytes() const {
  return std::visit(
      [](const auto& e) -> std::size_t {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, ml::LinearOvr>) {
          std::size_t total = e.intercept.size() * sizeof(double);
          for (const auto& w : e.coef) total += w.size() * sizeof(double);
          return total;
        } else {
          return e.memory_bytes();
        }
      },
      state_->estimator);
}

}  // namespace metalearn
