#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <string_view>
#include <vector>

#include "metalearn/dataset.hpp"
#include "metalearn/folds.hpp"
#include "metalearn/learners.hpp"

namespace metalearn {

enum class Metric { kAccuracy, kPrecision, kRecall, kF1 };

inline constexpr std::array<Metric, 4> kAllMetrics = {Metric::kAccuracy, Metric::kPrecision,
                                                      Metric::kRecall, Metric::kF1};

// "accuracy", "precision", "recall", "f1".
std::string_view to_string(Metric m);
// Throws Error(kUnknownMetric).
Metric parse_metric(std::string_view text);
// Comma-separated list; duplicates are dropped, order is kept.
std::vector<Metric> parse_metric_list(std::string_view text);

// confusion[truth][predicted]
using Confusion = std::vector<std::vector<std::size_t>>;

Confusion confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                           int n_classes);

struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;  // macro average over all classes
  double recall = 0.0;
  double f1 = 0.0;         // mean of per-class F1
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<double> class_f1;
  // Set when some per-class ratio had a zero denominator and was counted as 0.
  bool undefined = false;

  double get(Metric m) const;
};

// Throws Error(kEmptyMatrix) when the matrix is empty or sums to zero.
MetricReport compute_metrics(const Confusion& confusion);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
  std::vector<double> folds;  // repeat-major order
};

struct ScoreSet {
  std::map<Metric, MetricSummary> metrics;
  double runtime_seconds = 0.0;
  // Largest fitted-state plus training-matrix footprint over folds. An
  // estimate, not a measured allocator peak.
  std::size_t memory_bytes = 0;
  bool undefined_ratios = false;
  int k = 0;
  int repeats = 0;

  const MetricSummary& at(Metric m) const;
};

// Fits on `train` and returns predictions for every row of `test` together
// with an estimate of the fitted state's size in bytes.
struct FoldOutput {
  std::vector<int> predictions;
  std::size_t memory_bytes = 0;
};
using FitPredictFn = std::function<FoldOutput(const Dataset& train, const Dataset& test)>;

// Runs `fit_predict` on every (repeat, fold) split of `plan`. Errors are
// rethrown as Error with the same code and "(repeat r, fold f)" appended.
ScoreSet cross_validate(const Dataset& ds, const FoldPlan& plan, const std::vector<Metric>& metrics,
                        const FitPredictFn& fit_predict);

using FoldObserver = std::function<void(int repeat, int fold, const Model& model)>;

ScoreSet evaluate_pipeline(const HpConfig& cfg, const Dataset& ds, const FoldPlan& plan,
                           const std::vector<Metric>& metrics = {kAllMetrics.begin(),
                                                                 kAllMetrics.end()},
                           const FoldObserver& observer = {});

}  // namespace metalearn
