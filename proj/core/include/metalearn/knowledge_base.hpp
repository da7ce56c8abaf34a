#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "metalearn/dataset.hpp"
#include "metalearn/evaluation.hpp"
#include "metalearn/learners.hpp"
#include "metalearn/metafeatures.hpp"

namespace metalearn {

struct DatasetRecord {
  std::string id;
  std::string name;
  std::string source;  // path the dataset was loaded from
  std::string target;
  std::size_t n = 0;
  std::size_t p = 0;
  int c = 0;
  MetaFeatureVector metafeatures;
};

struct PipelineRecord {
  std::string pipeline_id;
  AlgorithmId algorithm = AlgorithmId::kDecisionTree;
  Assignment config;
};

// Stable id of an (algorithm, configuration) pair: 16 hex digits of a hash
// of the canonical text form.
std::string pipeline_id(AlgorithmId algorithm, const Assignment& config);

struct ExperimentRecord {
  std::uint64_t experiment_id = 0;  // 1-based append sequence number
  std::string dataset_id;
  std::string pipeline_id;
  AlgorithmId algorithm = AlgorithmId::kDecisionTree;
  Assignment config;
  std::uint64_t seed = 0;  // used for both the fold plan and the fit
  int k = 0;
  int repeats = 0;
  bool failed = false;
  std::string failure;
  std::map<Metric, MetricSummary> scores;
  double runtime_seconds = 0.0;
  std::size_t memory_bytes = 0;
  std::string timestamp;
  std::string engine_version;
};

struct KbManifest {
  int schema_version = 1;
  std::string catalogue_version;
  std::vector<std::string> catalogue;
  std::string engine_version;
};

// Append-only store of datasets, pipelines and experiments. With a
// directory, every append is written and synced before it returns; without
// one the KB lives in memory only.
class KnowledgeBase {
 public:
  KnowledgeBase();  // in-memory
  ~KnowledgeBase();
  KnowledgeBase(KnowledgeBase&&) noexcept;
  KnowledgeBase& operator=(KnowledgeBase&&) noexcept;

  // Opens `dir`, creating an empty KB there when `create` is set and no
  // manifest exists. A torn final line left by an interrupted write is
  // truncated away.
  static KnowledgeBase open(const std::filesystem::path& dir, bool create = false);

  const std::optional<std::filesystem::path>& directory() const;
  const KbManifest& manifest() const;
  const std::vector<DatasetRecord>& datasets() const;
  const std::vector<PipelineRecord>& pipelines() const;
  const std::vector<ExperimentRecord>& experiments() const;

  const DatasetRecord* find_dataset(const std::string& id) const;
  const PipelineRecord* find_pipeline(const std::string& id) const;
  bool has_experiment(const std::string& dataset_id, const std::string& pipeline_id) const;

  // Throws Error(kCatalogueMismatch) if the meta-feature names differ from
  // the KB catalogue; Error(kInvalidArgument) on a duplicate id.
  void add_dataset(DatasetRecord record);
  // Adding an existing pipeline id is a no-op.
  void add_pipeline(PipelineRecord record);
  // Assigns the next experiment id and returns it. Throws
  // Error(kReferentialIntegrity) for an unknown dataset or pipeline.
  std::uint64_t append_experiment(ExperimentRecord record);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct BuildOptions {
  std::vector<AlgorithmId> algorithms{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  std::size_t configs_per_algo = 50;
  std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
  int k = 5;
  int repeats = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  // Stop after this many new experiments (simulates an interruption).
  std::optional<std::size_t> stop_after;
  std::function<void(const ExperimentRecord&)> on_record;
};

struct BuildSummary {
  std::size_t added = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  bool interrupted = false;
};

// The configurations evaluated for `algorithm` in a build with `seed`; the
// same list is used on every dataset.
std::vector<Assignment> build_configs(AlgorithmId algorithm, std::size_t count, std::uint64_t seed);

// Seed of the fold plan and fits for one dataset in a build.
std::uint64_t dataset_seed(std::uint64_t seed, const std::string& dataset_id);

// Extracts meta-features for every manifest dataset not yet in the KB and
// evaluates every (dataset, pipeline) pair that has no experiment yet, in
// manifest, algorithm, configuration order. Pipeline failures become failed
// records.
BuildSummary build_knowledge_base(KnowledgeBase& kb, const std::vector<ManifestEntry>& manifest,
                                  const BuildOptions& options);

struct RankedPipeline {
  std::string pipeline_id;
  AlgorithmId algorithm = AlgorithmId::kDecisionTree;
  Assignment config;
  double score = 0.0;
  double runtime_seconds = 0.0;
};

// Latest successful experiment per pipeline on `dataset_id`, sorted by mean
// score descending, then runtime ascending, then pipeline id.
std::vector<RankedPipeline> query_best(const KnowledgeBase& kb, const std::string& dataset_id,
                                       Metric metric, std::size_t top_n);

struct KbStats {
  std::size_t datasets = 0;
  std::size_t pipelines = 0;
  std::size_t experiments = 0;
  std::size_t failed = 0;
  int classes_min = 0, classes_max = 0;
  std::size_t attributes_min = 0, attributes_max = 0;
  std::size_t instances_min = 0, instances_max = 0;
};

KbStats kb_stats(const KnowledgeBase& kb);

}  // namespace metalearn
