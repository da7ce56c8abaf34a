#include "metalearn/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "estimators.hpp"
#include "metalearn/error.hpp"
#include "metalearn/random.hpp"

namespace metalearn {

namespace {

struct StoredScore {
  double score = 0.0;
  double runtime = 0.0;
  std::uint64_t experiment_id = 0;
};

using ScoreTable = std::unordered_map<std::string, std::unordered_map<std::string, StoredScore>>;

// Latest experiment per (dataset, pipeline) for the datasets accepted by
// `keep`. Failures score 0; successful records without the metric are ignored.
template <class Keep>
ScoreTable score_table(const KnowledgeBase& kb, Metric metric, Keep&& keep) {
  ScoreTable table;
  for (const auto& r : kb.experiments()) {
    if (!keep(r.dataset_id)) continue;
    double score = 0.0;
    if (!r.failed) {
      auto it = r.scores.find(metric);
      if (it == r.scores.end()) continue;
      score = it->second.mean;
    }
    auto& slot = table[r.dataset_id][r.pipeline_id];
    if (r.experiment_id >= slot.experiment_id) slot = {score, r.runtime_seconds, r.experiment_id};
  }
  return table;
}

void check_catalogue(const MetaFeatureVector& v, const std::vector<std::string>& names) {
  if (v.names != names) {
    throw Error(ErrorCode::kCatalogueMismatch, "meta-feature vector of '" + v.dataset_id +
                                                   "' does not follow the knowledge-base catalogue");
  }
}

bool better(const RecommendedPipeline& a, const RecommendedPipeline& b) {
  if (a.predicted_score != b.predicted_score) return a.predicted_score > b.predicted_score;
  if (a.runtime_seconds != b.runtime_seconds) return a.runtime_seconds < b.runtime_seconds;
  return a.pipeline_id < b.pipeline_id;
}

}  // namespace

std::size_t ScalingStats::usable_count() const {
  return static_cast<std::size_t>(std::count(usable.begin(), usable.end(), true));
}

ScalingStats ScalingStats::identity(std::vector<std::string> names) {
  ScalingStats s;
  const auto k = names.size();
  s.names = std::move(names);
  s.mean.assign(k, 0.0);
  s.sd.assign(k, 1.0);
  s.usable.assign(k, true);
  return s;
}

ScalingStats scaling_stats(const KnowledgeBase& kb, const std::set<std::string>& exclude) {
  ScalingStats s;
  s.names = kb.manifest().catalogue;
  const auto k = s.names.size();
  s.mean.assign(k, 0.0);
  s.sd.assign(k, 0.0);
  s.usable.assign(k, false);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> xs;
    for (const auto& d : kb.datasets()) {
      if (exclude.count(d.id)) continue;
      if (const auto& v = d.metafeatures.values[j]) xs.push_back(*v);
    }
    if (xs.size() < 2) continue;
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / n);
    s.mean[j] = mean;
    s.sd[j] = sd;
    s.usable[j] = sd > 1e-12 * std::max(1.0, std::abs(mean));
  }
  return s;
}

double euclidean_distance(const MetaFeatureVector& a, const MetaFeatureVector& b,
                          const ScalingStats& stats) {
  check_catalogue(a, stats.names);
  check_catalogue(b, stats.names);
  double sum = 0.0;
  std::size_t used = 0;
  std::size_t usable = 0;
  for (std::size_t j = 0; j < stats.names.size(); ++j) {
    if (!stats.usable[j]) continue;
    ++usable;
    const auto& x = a.values[j];
    const auto& y = b.values[j];
    if (!x || !y) continue;
    const double diff = (*x - *y) / stats.sd[j];
    sum += diff * diff;
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::kZeroUsableDimensions,
                "no meta-feature is usable for both '" + a.dataset_id + "' and '" + b.dataset_id + "'");
  }
  return std::sqrt(sum * static_cast<double>(usable) / static_cast<double>(used));
}

NeighborSet knd_selection(const MetaFeatureVector& query, const KnowledgeBase& kb, std::size_t k,
                          const std::set<std::string>& exclude) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  NeighborSet out;
  out.k = k;
  out.scaling = scaling_stats(kb, exclude);
  for (const auto& d : kb.datasets()) {
    if (exclude.count(d.id)) continue;
    out.neighbors.push_back({d.id, euclidean_distance(query, d.metafeatures, out.scaling)});
  }
  if (out.neighbors.empty()) {
    throw Error(ErrorCode::kEmptyKnowledgeBase, "the knowledge base has no candidate datasets");
  }
  const auto keep = std::min(k, out.neighbors.size());
  std::partial_sort(out.neighbors.begin(), out.neighbors.begin() + static_cast<std::ptrdiff_t>(keep),
                    out.neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
                      if (a.distance != b.distance) return a.distance < b.distance;
                      return a.dataset_id < b.dataset_id;
                    });
  out.neighbors.resize(keep);
  return out;
}

std::string_view to_string(RecommendMethod method) {
  return method == RecommendMethod::kKnn ? "knn" : "rf";
}

RecommendMethod parse_method(std::string_view text) {
  if (text == "knn") return RecommendMethod::kKnn;
  if (text == "rf") return RecommendMethod::kRf;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(text) + "' (knn|rf)");
}

Recommendation recommend_knn(const MetaFeatureVector& query, const KnowledgeBase& kb, Metric metric,
                             const KnnOptions& options) {
  const auto nbrs = knd_selection(query, kb, options.k, options.exclude);
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < nbrs.neighbors.size(); ++i) rank[nbrs.neighbors[i].dataset_id] = i;
  const auto table = score_table(kb, metric, [&](const std::string& id) { return rank.count(id) > 0; });

  std::unordered_map<std::string, RecommendedPipeline> pooled;
  for (const auto& n : nbrs.neighbors) {
    auto it = table.find(n.dataset_id);
    if (it == table.end()) continue;
    const double w = 1.0 / (n.distance + options.epsilon);
    for (const auto& [pid, s] : it->second) {
      auto& rp = pooled[pid];
      rp.pipeline_id = pid;
      rp.support.push_back({n.dataset_id, n.distance, w, s.score});
      rp.runtime_seconds += w * s.runtime;  // normalized below
    }
  }
  if (pooled.empty()) {
    throw Error(ErrorCode::kNoExperiments,
                "no neighbor holds " + std::string(to_string(metric)) + " scores");
  }

  Recommendation rec;
  rec.method = RecommendMethod::kKnn;
  rec.metric = metric;
  rec.neighbors = nbrs.neighbors;
  rec.pipelines.reserve(pooled.size());
  for (auto& [pid, rp] : pooled) {
    double total = 0.0;
    for (const auto& s : rp.support) total += s.weight;
    double score = 0.0;
    for (auto& s : rp.support) {
      s.weight /= total;
      score += s.weight * s.score;
    }
    rp.predicted_score = score;
    rp.runtime_seconds /= total;
    std::sort(rp.support.begin(), rp.support.end(),
              [&](const Support& a, const Support& b) { return rank[a.dataset_id] < rank[b.dataset_id]; });
    const auto* p = kb.find_pipeline(pid);
    if (!p) throw Error(ErrorCode::kReferentialIntegrity, "unknown pipeline '" + pid + "'");
    rp.algorithm = p->algorithm;
    rp.config = p->config;
    rec.pipelines.push_back(std::move(rp));
  }
  const auto keep = std::min(options.top_n, rec.pipelines.size());
  std::partial_sort(rec.pipelines.begin(), rec.pipelines.begin() + static_cast<std::ptrdiff_t>(keep),
                    rec.pipelines.end(), better);
  rec.pipelines.resize(keep);
  return rec;
}

// --- random-forest meta-model -------------------------------------------------

std::size_t pipeline_encoding_width() {
  std::size_t w = kAllAlgorithms.size();
  for (auto alg : kAllAlgorithms) w += hp_space(alg).size();
  return w;
}

std::vector<double> encode_pipeline(AlgorithmId algorithm, const Assignment& config) {
  std::vector<double> out(kAllAlgorithms.size(), 0.0);
  for (std::size_t a = 0; a < kAllAlgorithms.size(); ++a) {
    const bool own = kAllAlgorithms[a] == algorithm;
    if (own) out[a] = 1.0;
  }
  for (auto alg : kAllAlgorithms) {
    for (const auto& dim : hp_space(alg).dims()) {
      auto it = config.find(dim.name);
      if (alg != algorithm || it == config.end()) {
        out.push_back(-1.0);
        continue;
      }
      double v = 0.0;
      if (dim.kind == DimKind::kCategorical) {
        const auto pos = std::find(dim.choices.begin(), dim.choices.end(), as_string(it->second));
        const auto idx = static_cast<double>(pos - dim.choices.begin());
        v = dim.choices.size() > 1 ? idx / static_cast<double>(dim.choices.size() - 1) : 0.0;
      } else {
        const double x = as_double(it->second);
        if (dim.high > dim.low) {
          v = dim.log_scale ? (std::log(x) - std::log(dim.low)) / (std::log(dim.high) - std::log(dim.low))
                            : (x - dim.low) / (dim.high - dim.low);
        }
      }
      out.push_back(std::clamp(v, 0.0, 1.0));
    }
  }
  return out;
}

struct MetaModel::State {
  Metric metric = Metric::kAccuracy;
  std::string catalogue_version;
  std::vector<std::string> names;
  std::vector<double> medians;
  ml::Forest forest;
  int n_trees = 0;
  std::size_t rows = 0;
  std::size_t positives = 0;
  double threshold = 0.0;

  std::vector<double> features(const MetaFeatureVector& mf, AlgorithmId alg, const Assignment& cfg) const {
    std::vector<double> row;
    row.reserve(names.size() + pipeline_encoding_width());
    for (std::size_t j = 0; j < names.size(); ++j) row.push_back(mf.values[j] ? *mf.values[j] : medians[j]);
    const auto enc = encode_pipeline(alg, cfg);
    row.insert(row.end(), enc.begin(), enc.end());
    return row;
  }
};

MetaModel::MetaModel() = default;
MetaModel::~MetaModel() = default;
MetaModel::MetaModel(MetaModel&&) noexcept = default;
MetaModel& MetaModel::operator=(MetaModel&&) noexcept = default;

Metric MetaModel::metric() const { return state_->metric; }
const std::string& MetaModel::catalogue_version() const { return state_->catalogue_version; }
int MetaModel::n_trees() const { return state_->n_trees; }
std::size_t MetaModel::training_rows() const { return state_->rows; }
std::size_t MetaModel::promising_rows() const { return state_->positives; }
double MetaModel::promising_threshold() const { return state_->threshold; }

double MetaModel::predict(const MetaFeatureVector& query, AlgorithmId algorithm, const Assignment& config) const {
  if (!state_) throw Error(ErrorCode::kInvalidArgument, "meta-model is not trained");
  if (query.catalogue_version != state_->catalogue_version || query.names != state_->names) {
    throw Error(ErrorCode::kCatalogueMismatch, "query meta-features follow catalogue " +
                                                   query.catalogue_version + ", model uses " +
                                                   state_->catalogue_version);
  }
  const auto row = state_->features(query, algorithm, config);
  return state_->forest.predict_proba(row)[1];
}

MetaModel train_rf_metamodel(const KnowledgeBase& kb, Metric metric, const MetaModelOptions& options) {
  if (options.promising_threshold < 0.0 || options.promising_threshold > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "promising threshold must lie in [0, 1]");
  }
  if (options.n_trees < 1) throw Error(ErrorCode::kInvalidArgument, "n_trees must be >= 1");
  const auto table =
      score_table(kb, metric, [&](const std::string& id) { return options.exclude.count(id) == 0; });

  auto state = std::make_unique<MetaModel::State>();
  state->metric = metric;
  state->catalogue_version = kb.manifest().catalogue_version;
  state->names = kb.manifest().catalogue;
  state->n_trees = options.n_trees;
  state->threshold = options.promising_threshold;

  // Datasets in KB order, pipelines by id, so training rows are deterministic.
  std::vector<const DatasetRecord*> used;
  for (const auto& d : kb.datasets()) {
    if (table.count(d.id)) used.push_back(&d);
  }
  if (used.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "the meta-model needs at least two datasets with scores");
  }

  const auto k = state->names.size();
  state->medians.assign(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> xs;
    for (const auto* d : used) {
      if (const auto& v = d->metafeatures.values[j]) xs.push_back(*v);
    }
    if (xs.empty()) continue;
    std::sort(xs.begin(), xs.end());
    const auto m = xs.size();
    state->medians[j] = m % 2 ? xs[m / 2] : 0.5 * (xs[m / 2 - 1] + xs[m / 2]);
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (const auto* d : used) {
    const auto& scores = table.at(d->id);
    double best = 0.0;
    for (const auto& [pid, s] : scores) best = std::max(best, s.score);
    std::vector<std::string> pids;
    for (const auto& [pid, s] : scores) pids.push_back(pid);
    std::sort(pids.begin(), pids.end());
    for (const auto& pid : pids) {
      const auto* p = kb.find_pipeline(pid);
      if (!p) throw Error(ErrorCode::kReferentialIntegrity, "unknown pipeline '" + pid + "'");
      rows.push_back(state->features(d->metafeatures, p->algorithm, p->config));
      labels.push_back(scores.at(pid).score >= (1.0 - options.promising_threshold) * best ? 1 : 0);
    }
  }
  state->rows = rows.size();
  state->positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (state->positives == 0 || state->positives == state->rows) {
    throw Error(ErrorCode::kDegenerateLabels,
                "every training pipeline has the same promising label at threshold " +
                    std::to_string(options.promising_threshold));
  }

  Matrix x(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), x.row(i).begin());
  ml::ForestOptions fo;
  fo.n_trees = options.n_trees;
  fo.jobs = options.jobs;
  fo.tree.max_features = std::sqrt(static_cast<double>(x.cols())) / static_cast<double>(x.cols());
  state->forest.fit(x, labels, 2, fo, options.seed);

  MetaModel model;
  model.state_ = std::move(state);
  return model;
}

Recommendation recommend_rf(const MetaFeatureVector& query, const MetaModel& model,
                            const std::vector<PipelineRecord>& candidates, std::size_t top_n) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidate pipelines");
  Recommendation rec;
  rec.method = RecommendMethod::kRf;
  rec.metric = model.metric();
  for (const auto& c : candidates) {
    RecommendedPipeline rp;
    rp.pipeline_id = c.pipeline_id;
    rp.algorithm = c.algorithm;
    rp.config = c.config;
    rp.predicted_score = model.predict(query, c.algorithm, c.config);
    rec.pipelines.push_back(std::move(rp));
  }
  std::stable_sort(rec.pipelines.begin(), rec.pipelines.end(), [](const auto& a, const auto& b) {
    if (a.predicted_score != b.predicted_score) return a.predicted_score > b.predicted_score;
    return a.pipeline_id < b.pipeline_id;
  });
  if (rec.pipelines.size() > top_n) rec.pipelines.resize(std::max<std::size_t>(top_n, 1));
  return rec;
}

// --- leave-one-dataset-out ----------------------------------------------------------

LooReport loo_evaluate(const KnowledgeBase& kb, Metric metric, const LooOptions& options) {
  const auto table = score_table(kb, metric, [](const std::string&) { return true; });
  std::vector<const DatasetRecord*> used;
  for (const auto& d : kb.datasets()) {
    if (table.count(d.id)) used.push_back(&d);
  }
  if (used.size() < 5) {
    throw Error(ErrorCode::kInvalidArgument, "leave-one-out evaluation needs at least 5 datasets with " +
                                                 std::string(to_string(metric)) + " scores, found " +
                                                 std::to_string(used.size()));
  }

  LooReport report;
  report.method = options.method;
  report.metric = metric;
  report.tolerance = options.tolerance;
  auto is_hit = [&](double score, double best) { return score >= (1.0 - options.tolerance) * best; };

  std::vector<double> regrets;
  for (const auto* d : used) {
    const auto& own = table.at(d->id);
    double best = 0.0;
    for (const auto& [pid, s] : own) best = std::max(best, s.score);

    std::vector<std::string> ranked;
    if (options.method == RecommendMethod::kKnn) {
      KnnOptions ko;
      ko.k = options.k;
      ko.top_n = kb.pipelines().size();
      ko.exclude = {d->id};
      for (const auto& p : recommend_knn(d->metafeatures, kb, metric, ko).pipelines) {
        ranked.push_back(p.pipeline_id);
      }
    } else {
      auto mo = options.rf;
      mo.exclude.insert(d->id);
      const auto model = train_rf_metamodel(kb, metric, mo);
      for (const auto& p : recommend_rf(d->metafeatures, model, kb.pipelines(), kb.pipelines().size()).pipelines) {
        ranked.push_back(p.pipeline_id);
      }
    }
    // The first recommendation the held-out dataset has a record for.
    LooDatasetResult r;
    r.dataset_id = d->id;
    r.best_score = best;
    for (const auto& pid : ranked) {
      auto it = own.find(pid);
      if (it == own.end()) continue;
      r.recommended_pipeline = pid;
      r.recommended_score = it->second.score;
      break;
    }
    r.regret = best - r.recommended_score;
    r.hit = !r.recommended_pipeline.empty() && is_hit(r.recommended_score, best);
    regrets.push_back(r.regret);
    report.datasets.push_back(std::move(r));
  }

  const double n = static_cast<double>(report.datasets.size());
  report.hit_rate =
      static_cast<double>(std::count_if(report.datasets.begin(), report.datasets.end(),
                                        [](const auto& r) { return r.hit; })) / n;
  report.regret_mean = std::accumulate(regrets.begin(), regrets.end(), 0.0) / n;
  std::sort(regrets.begin(), regrets.end());
  const auto m = regrets.size();
  report.regret_median = m % 2 ? regrets[m / 2] : 0.5 * (regrets[m / 2 - 1] + regrets[m / 2]);
  report.regret_max = regrets.back();

  // Random-pipeline baseline: one uniformly drawn evaluated pipeline per dataset.
  Rng rng(mix_seed(options.seed, 0xBA5E));
  int at_least = 0;
  for (int b = 0; b < options.baseline_resamples; ++b) {
    int hits = 0;
    for (const auto* d : used) {
      const auto& own = table.at(d->id);
      double best = 0.0;
      std::vector<std::pair<std::string, double>> entries;
      for (const auto& [pid, s] : own) {
        best = std::max(best, s.score);
        entries.emplace_back(pid, s.score);
      }
      std::sort(entries.begin(), entries.end());
      std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
      hits += is_hit(entries[pick(rng)].second, best);
    }
    const double rate = hits / n;
    report.baseline_hit_rates.push_back(rate);
    at_least += rate >= report.hit_rate;
  }
  if (!report.baseline_hit_rates.empty()) {
    report.baseline_mean = std::accumulate(report.baseline_hit_rates.begin(), report.baseline_hit_rates.end(), 0.0) /
                           static_cast<double>(report.baseline_hit_rates.size());
  }
  report.p_value = (1.0 + at_least) / (1.0 + options.baseline_resamples);
  return report;
}

}  // namespace metalearn
