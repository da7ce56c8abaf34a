#include "metalearn/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "metalearn/error.hpp"

namespace metalearn {

namespace {

double ratio(std::size_t num, std::size_t den, bool& undefined) {
  if (den == 0) {
    undefined = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

// Extended-precision sum, so equal fold scores average to exactly that score.
double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const long double sum = std::accumulate(v.begin(), v.end(), 0.0L);
  return static_cast<double>(sum / static_cast<long double>(v.size()));
}

}  // namespace

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kAccuracy: return "accuracy";
    case Metric::kPrecision: return "precision";
    case Metric::kRecall: return "recall";
    case Metric::kF1: return "f1";
  }
  return "unknown";
}

Metric parse_metric(std::string_view text) {
  for (auto m : kAllMetrics) {
    if (text == to_string(m)) return m;
  }
  throw Error(ErrorCode::kUnknownMetric, "unknown metric '" + std::string(text) + "'");
}

std::vector<Metric> parse_metric_list(std::string_view text) {
  std::vector<Metric> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) {
      const auto m = parse_metric(item);
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorCode::kUnknownMetric, "no metric given");
  return out;
}

Confusion confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                           int n_classes) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorCode::kInvalidArgument, "truth and prediction lengths differ");
  }
  const auto c = static_cast<std::size_t>(n_classes);
  Confusion m(c, std::vector<std::size_t>(c, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (t >= c || p >= c) throw Error(ErrorCode::kInvalidArgument, "label outside the class range");
    ++m[t][p];
  }
  return m;
}

double MetricReport::get(Metric m) const {
  switch (m) {
    case Metric::kAccuracy: return accuracy;
    case Metric::kPrecision: return precision;
    case Metric::kRecall: return recall;
    case Metric::kF1: return f1;
  }
  return 0.0;
}

MetricReport compute_metrics(const Confusion& confusion) {
  const std::size_t c = confusion.size();
  std::size_t total = 0, trace = 0;
  for (std::size_t i = 0; i < c; ++i) {
    if (confusion[i].size() != c) throw Error(ErrorCode::kInvalidArgument, "confusion matrix is not square");
    for (std::size_t j = 0; j < c; ++j) total += confusion[i][j];
    trace += confusion[i][i];
  }
  if (c == 0 || total == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix has no counts");

  MetricReport r;
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  for (std::size_t k = 0; k < c; ++k) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t i = 0; i < c; ++i) {
      predicted += confusion[i][k];
      actual += confusion[k][i];
    }
    const double p = ratio(confusion[k][k], predicted, r.undefined);
    const double rec = ratio(confusion[k][k], actual, r.undefined);
    double f = 0.0;
    if (p + rec > 0.0) {
      f = 2.0 * p * rec / (p + rec);
    } else if (predicted + actual == 0) {
      r.undefined = true;
    }
    r.class_precision.push_back(p);
    r.class_recall.push_back(rec);
    r.class_f1.push_back(f);
  }
  r.precision = mean_of(r.class_precision);
  r.recall = mean_of(r.class_recall);
  r.f1 = mean_of(r.class_f1);
  return r;
}

const MetricSummary& ScoreSet::at(Metric m) const {
  auto it = metrics.find(m);
  if (it == metrics.end()) {
    throw Error(ErrorCode::kUnknownMetric, "metric '" + std::string(to_string(m)) + "' not scored");
  }
  return it->second;
}

ScoreSet cross_validate(const Dataset& ds, const FoldPlan& plan, const std::vector<Metric>& metrics,
                        const FitPredictFn& fit_predict) {
  if (plan.n() != ds.n()) throw Error(ErrorCode::kInvalidArgument, "fold plan was built for another dataset");
  if (metrics.empty()) throw Error(ErrorCode::kUnknownMetric, "no metric requested");
  const auto start = std::chrono::steady_clock::now();
  ScoreSet out;
  out.k = plan.k();
  out.repeats = plan.repeats();
  for (auto m : metrics) out.metrics[m];

  for (int r = 0; r < plan.repeats(); ++r) {
    for (int f = 0; f < plan.k(); ++f) {
      const auto train_rows = plan.train_indices(r, f);
      const auto test_rows = plan.test_indices(r, f);
      const Dataset train = ds.subset(train_rows);
      const Dataset test = ds.subset(test_rows);
      FoldOutput fold;
      try {
        fold = fit_predict(train, test);
      } catch (const Error& e) {
        throw Error(e.code(), std::string(e.what()).substr(to_string(e.code()).size() + 2) +
                                  " (repeat " + std::to_string(r) + ", fold " + std::to_string(f) + ")");
      }
      if (fold.predictions.size() != test.n()) {
        throw Error(ErrorCode::kInternal, "prediction count differs from test size");
      }
      const auto report = compute_metrics(confusion_matrix(test.labels(), fold.predictions, ds.c()));
      out.undefined_ratios = out.undefined_ratios || report.undefined;
      for (auto& [m, summary] : out.metrics) summary.folds.push_back(report.get(m));
      const std::size_t matrix_bytes = train.n() * FeatureSchema::of(train).width() * sizeof(double);
      out.memory_bytes = std::max(out.memory_bytes, fold.memory_bytes + matrix_bytes);
    }
  }
  for (auto& [m, s] : out.metrics) {
    s.mean = mean_of(s.folds);
    double sq = 0.0;
    for (double v : s.folds) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.folds.size()));
  }
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

ScoreSet evaluate_pipeline(const HpConfig& cfg, const Dataset& ds, const FoldPlan& plan,
                           const std::vector<Metric>& metrics, const FoldObserver& observer) {
  validate_config(cfg);
  int repeat = 0, fold = 0;
  auto fn = [&](const Dataset& train, const Dataset& test) {
    const Model model = fit(cfg, train);
    if (observer) observer(repeat, fold, model);
    if (++fold == plan.k()) {
      fold = 0;
      ++repeat;
    }
    return FoldOutput{model.predict(test), model.memory_bytes()};
  };
  return cross_validate(ds, plan, metrics, fn);
}

}  // namespace metalearn
