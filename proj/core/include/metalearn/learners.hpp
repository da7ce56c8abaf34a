#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "metalearn/dataset.hpp"
#include "metalearn/matrix.hpp"
#include "metalearn/search_space.hpp"

namespace metalearn {

enum class AlgorithmId {
  kLogisticRegression,
  kDecisionTree,
  kSvm,
  kSgdClassifier,
  kRandomForest,
  kExtraTrees,
  kGradientBoosting,
  kAdaBoost,
};

inline constexpr std::array<AlgorithmId, 8> kAllAlgorithms = {
    AlgorithmId::kLogisticRegression, AlgorithmId::kDecisionTree,
    AlgorithmId::kSvm,                AlgorithmId::kSgdClassifier,
    AlgorithmId::kRandomForest,       AlgorithmId::kExtraTrees,
    AlgorithmId::kGradientBoosting,   AlgorithmId::kAdaBoost,
};

// Upper-case names such as "DECISION_TREE".
std::string_view to_string(AlgorithmId id);
// Accepts the upper-case names (any case) and the short aliases
// lr, dt, svm, sgd, rf, et, gb, ada.
AlgorithmId parse_algorithm(std::string_view text);

struct HpConfig {
  AlgorithmId algorithm = AlgorithmId::kDecisionTree;
  Assignment values;
  std::uint64_t seed = 0;
};

// The tuned hyperparameter space of each algorithm. Integer bounds are
// inclusive; see docs/hyperparameters.md for the per-dimension notes.
const SearchSpace& hp_space(AlgorithmId id);

// Throws Error(kInvalidConfig) when a value is outside its dimension, a
// conditional parameter is present without its condition, or an active one
// is absent.
void validate_config(const HpConfig& cfg);

// Columns as the model saw them at training time.
struct FeatureSchema {
  struct Field {
    std::string name;
    ColumnType type = ColumnType::kNumeric;
    std::vector<std::string> levels;

    friend bool operator==(const Field&, const Field&) = default;
  };
  std::vector<Field> fields;
  std::vector<std::string> class_names;

  static FeatureSchema of(const Dataset& ds);
  // Width of the encoded design matrix: one column per numeric or binary
  // field and one per level of a categorical field.
  std::size_t width() const;

  friend bool operator==(const FeatureSchema&, const FeatureSchema&) = default;
};

// Numeric values pass through, binary columns become their 0/1 code and
// categorical columns are one-hot encoded. Missing cells stay NaN (all
// indicator columns of a missing categorical cell are NaN).
Matrix encode(const FeatureSchema& schema, const Dataset& ds);

class Model {
 public:
  struct State;

  AlgorithmId algorithm() const;
  const HpConfig& config() const;
  const FeatureSchema& schema() const;

  // Throws Error(kSchemaMismatch) when the rows do not match the training
  // schema and Error(kMissingValues) when the learner cannot handle gaps.
  std::vector<int> predict(const Dataset& rows) const;
  std::vector<int> predict_encoded(const Matrix& rows) const;

  // Self-describing JSON document; see docs/model_format.md.
  std::string serialize() const;
  static Model deserialize(const std::string& text);

  // Approximate size of the fitted state.
  std::size_t memory_bytes() const;

 private:
  friend Model fit(const HpConfig&, const Dataset&);
  explicit Model(std::shared_ptr<const State> state);

  std::shared_ptr<const State> state_;
};

// Deterministic given cfg.seed. Throws Error(kInvalidConfig) for invalid
// configurations, Error(kDegenerateTrainingData) for fewer than two
// observed classes or a diverged optimizer, Error(kMissingValues) when the
// learner cannot handle missing cells.
Model fit(const HpConfig& cfg, const Dataset& train);

inline std::vector<int> predict(const Model& model, const Dataset& rows) {
  return model.predict(rows);
}

}  // namespace metalearn
