#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "metalearn/evaluation.hpp"
#include "metalearn/knowledge_base.hpp"
#include "metalearn/metafeatures.hpp"

namespace metalearn {

// Per-entry z-score parameters. Entries with `usable` false (zero variance
// or fewer than two observed values) take no part in distances.
struct ScalingStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<bool> usable;

  std::size_t usable_count() const;
  // Mean 0, sd 1 on every entry.
  static ScalingStats identity(std::vector<std::string> names);
};

// Statistics over the meta-feature vectors of every KB dataset not in
// `exclude`. Population standard deviation.
ScalingStats scaling_stats(const KnowledgeBase& kb, const std::set<std::string>& exclude = {});

// Euclidean distance between standardized vectors. Entries missing in either
// vector are skipped and the squared sum is rescaled by usable/used.
// Throws kCatalogueMismatch when the vectors do not follow `stats.names`
// and kZeroUsableDimensions when no entry can be compared.
double euclidean_distance(const MetaFeatureVector& a, const MetaFeatureVector& b,
                          const ScalingStats& stats);

struct Neighbor {
  std::string dataset_id;
  double distance = 0.0;
};

struct NeighborSet {
  std::vector<Neighbor> neighbors;  // ascending distance, ties by dataset_id
  std::size_t k = 0;
  ScalingStats scaling;
};

// The min(k, candidates) KB datasets closest to `query`. Datasets in
// `exclude` are neither neighbors nor part of the scaling statistics.
// Throws kEmptyKnowledgeBase when no candidate dataset remains.
NeighborSet knd_selection(const MetaFeatureVector& query, const KnowledgeBase& kb, std::size_t k,
                          const std::set<std::string>& exclude = {});

enum class RecommendMethod { kKnn, kRf };

std::string_view to_string(RecommendMethod method);
// Throws Error(kInvalidArgument) for anything but "knn" or "rf".
RecommendMethod parse_method(std::string_view text);

struct Support {
  std::string dataset_id;
  double distance = 0.0;
  double weight = 0.0;  // normalized over the neighbors supporting the pipeline
  double score = 0.0;
};

struct RecommendedPipeline {
  std::string pipeline_id;
  AlgorithmId algorithm = AlgorithmId::kDecisionTree;
  Assignment config;
  double predicted_score = 0.0;
  double runtime_seconds = 0.0;  // weighted mean over supporting neighbors (kNN)
  std::vector<Support> support;
};

struct Recommendation {
  RecommendMethod method = RecommendMethod::kKnn;
  Metric metric = Metric::kAccuracy;
  std::vector<Neighbor> neighbors;  // kNN only
  std::vector<RecommendedPipeline> pipelines;  // descending predicted score
};

struct KnnOptions {
  std::size_t k = 5;
  std::size_t top_n = 10;
  double epsilon = 1e-6;
  std::set<std::string> exclude;
};

// Scores every pipeline evaluated by at least one neighbor with the
// distance-weighted mean of the neighbors' scores. A failed experiment
// scores 0. Ties go to the lower weighted runtime, then the pipeline id.
// Throws kNoExperiments when no neighbor holds a score for `metric`.
Recommendation recommend_knn(const MetaFeatureVector& query, const KnowledgeBase& kb, Metric metric,
                             const KnnOptions& options = {});

// Algorithm one-hot followed by every hyperparameter of every algorithm
// scaled to [0,1] within its bounds (log dims in log space); inactive or
// foreign parameters are -1.
std::vector<double> encode_pipeline(AlgorithmId algorithm, const Assignment& config);
std::size_t pipeline_encoding_width();

struct MetaModelOptions {
  double promising_threshold = 0.01;
  int n_trees = 500;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::set<std::string> exclude;  // datasets left out of training
};

// Random forest over (meta-features, pipeline encoding) predicting whether
// a pipeline lands within the threshold of its dataset's best score.
class MetaModel {
 public:
  MetaModel();
  ~MetaModel();
  MetaModel(MetaModel&&) noexcept;
  MetaModel& operator=(MetaModel&&) noexcept;

  Metric metric() const;
  const std::string& catalogue_version() const;
  int n_trees() const;
  std::size_t training_rows() const;
  std::size_t promising_rows() const;
  double promising_threshold() const;

  // Probability in [0,1] that the pipeline is promising on the query.
  // Throws kCatalogueMismatch when the query follows another catalogue.
  double predict(const MetaFeatureVector& query, AlgorithmId algorithm, const Assignment& config) const;

  struct State;

 private:
  friend MetaModel train_rf_metamodel(const KnowledgeBase&, Metric, const MetaModelOptions&);
  std::unique_ptr<State> state_;
};

// Throws kInvalidArgument when fewer than two datasets have scores for the
// metric and kDegenerateLabels when every label is the same.
MetaModel train_rf_metamodel(const KnowledgeBase& kb, Metric metric, const MetaModelOptions& options = {});

// Ranks the candidates by promising probability; ties by pipeline id.
Recommendation recommend_rf(const MetaFeatureVector& query, const MetaModel& model,
                            const std::vector<PipelineRecord>& candidates, std::size_t top_n);

// --- leave-one-dataset-out evaluation --------------------------------------

struct LooOptions {
  RecommendMethod method = RecommendMethod::kKnn;
  std::size_t k = 5;
  double tolerance = 0.05;  // hit when score >= (1 - tolerance) * best
  int baseline_resamples = 20;
  std::uint64_t seed = 0;
  MetaModelOptions rf;
};

struct LooDatasetResult {
  std::string dataset_id;
  std::string recommended_pipeline;
  double recommended_score = 0.0;
  double best_score = 0.0;
  double regret = 0.0;
  bool hit = false;
};

struct LooReport {
  RecommendMethod method = RecommendMethod::kKnn;
  Metric metric = Metric::kAccuracy;
  double tolerance = 0.0;
  std::vector<LooDatasetResult> datasets;
  double hit_rate = 0.0;
  double regret_mean = 0.0;
  double regret_median = 0.0;
  double regret_max = 0.0;
  // Hit rates of a recommender that picks a uniformly random evaluated
  // pipeline per dataset, one per resample.
  std::vector<double> baseline_hit_rates;
  double baseline_mean = 0.0;
  // (1 + #{baseline >= hit_rate}) / (1 + resamples).
  double p_value = 1.0;
};

// Throws kInvalidArgument when fewer than 5 datasets have scores.
LooReport loo_evaluate(const KnowledgeBase& kb, Metric metric, const LooOptions& options = {});

}  // namespace metalearn
