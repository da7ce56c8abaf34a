#include <algorithm>
#include <cmath>
#include <numeric>

#include "estimators.hpp"
#include "metalearn/error.hpp"

namespace metalearn::ml {

namespace {

constexpr double kGainTieTolerance = 1e-10;

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double decrease = -1.0;  // total weighted impurity decrease
};

int resolve_max_features(double fraction, std::size_t d) {
  const auto m = static_cast<int>(std::floor(fraction * static_cast<double>(d) + 1e-9));
  return std::clamp(m, 1, static_cast<int>(d));
}

class ClassificationBuilder {
 public:
  ClassificationBuilder(const Matrix& x, std::span<const int> y, int n_classes,
                        std::span<const double> weights, const TreeOptions& options, Rng& rng,
                        std::vector<ClassificationTree::Node>& nodes, std::vector<double>& dist)
      : x_(x),
        y_(y),
        k_(static_cast<std::size_t>(n_classes)),
        w_(weights),
        opt_(options),
        rng_(rng),
        nodes_(nodes),
        dist_(dist),
        features_(x.cols()),
        max_features_(resolve_max_features(options.max_features, x.cols())),
        left_(k_),
        right_(k_) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  int build(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    dist_.resize(dist_.size() + k_, 0.0);

    std::vector<double> hist(k_, 0.0);
    for (auto r : rows) hist[static_cast<std::size_t>(y_[r])] += weight(r);
    const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
    {
      auto& node = nodes_[static_cast<std::size_t>(id)];
      node.depth = depth;
      node.samples = rows.size();
      node.weight = total;
      node.impurity = impurity(hist, total, opt_.criterion);
    }
    for (std::size_t c = 0; c < k_; ++c) {
      dist_[static_cast<std::size_t>(id) * k_ + c] = total > 0 ? hist[c] / total : 0.0;
    }

    const auto n = static_cast<int>(rows.size());
    const bool stop = n < opt_.min_samples_split || n < 2 * opt_.min_samples_leaf ||
                      nodes_[static_cast<std::size_t>(id)].impurity <= 0.0 ||
                      (opt_.max_depth >= 0 && depth >= opt_.max_depth);
    if (stop) return id;

    const auto split = find_split(rows, hist, total);
    if (split.feature < 0) return id;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (auto r : rows) {
      (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left_rows : right_rows)
          .push_back(r);
    }
    {
      auto& node = nodes_[static_cast<std::size_t>(id)];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.gain = total > 0 ? split.decrease / total : 0.0;
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(left_rows, depth + 1);
    const int r = build(right_rows, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

 private:
  double weight(std::size_t r) const { return w_.empty() ? 1.0 : w_[r]; }

  std::vector<int> candidate_features() {
    const auto d = features_.size();
    if (static_cast<std::size_t>(max_features_) >= d) return features_;
    // Partial Fisher-Yates over a fresh copy keeps draws independent of
    // earlier nodes' orderings.
    std::vector<int> pool = features_;
    for (int i = 0; i < max_features_; ++i) {
      const auto j = std::uniform_int_distribution<std::size_t>(static_cast<std::size_t>(i), d - 1)(rng_);
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(max_features_));
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  void consider(SplitChoice& best, int feature, double threshold, double decrease) {
    const double tol = kGainTieTolerance * std::max(1.0, std::abs(best.decrease));
    if (best.feature < 0 || decrease > best.decrease + tol) {
      best.feature = feature;
      best.threshold = threshold;
      best.decrease = decrease;
    }
  }

  SplitChoice find_split(const std::vector<std::size_t>& rows, const std::vector<double>& hist,
                         double total) {
    SplitChoice best;
    const double parent = impurity(hist, total, opt_.criterion) * total;
    const auto n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(opt_.min_samples_leaf);

    for (int f : candidate_features()) {
      const auto col = static_cast<std::size_t>(f);
      if (opt_.random_splits) {
        double lo = INFINITY, hi = -INFINITY;
        for (auto r : rows) {
          lo = std::min(lo, x_(r, col));
          hi = std::max(hi, x_(r, col));
        }
        if (!(hi > lo)) continue;
        double thr = std::uniform_real_distribution<double>(lo, hi)(rng_);
        if (thr >= hi) thr = lo;
        std::fill(left_.begin(), left_.end(), 0.0);
        std::size_t left_count = 0;
        for (auto r : rows) {
          if (x_(r, col) <= thr) {
            left_[static_cast<std::size_t>(y_[r])] += weight(r);
            ++left_count;
          }
        }
        if (left_count < min_leaf || n - left_count < min_leaf) continue;
        consider(best, f, thr, parent - children_impurity(hist, total));
        continue;
      }

      sorted_.clear();
      for (auto r : rows) sorted_.emplace_back(x_(r, col), r);
      std::sort(sorted_.begin(), sorted_.end());
      if (!(sorted_.back().first > sorted_.front().first)) continue;

      std::fill(left_.begin(), left_.end(), 0.0);
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_[static_cast<std::size_t>(y_[sorted_[i].second])] += weight(sorted_[i].second);
        const double v = sorted_[i].first;
        const double next = sorted_[i + 1].first;
        if (!(next > v)) continue;
        const auto left_count = i + 1;
        if (left_count < min_leaf || n - left_count < min_leaf) continue;
        double thr = v + (next - v) / 2.0;
        if (!(thr < next)) thr = v;
        consider(best, f, thr, parent - children_impurity(hist, total));
      }
    }
    return best;
  }

  // Weighted impurity of both children given left_ and the parent histogram.
  double children_impurity(const std::vector<double>& hist, double total) {
    double wl = 0.0;
    for (std::size_t c = 0; c < k_; ++c) {
      right_[c] = hist[c] - left_[c];
      if (right_[c] < 0.0) right_[c] = 0.0;
      wl += left_[c];
    }
    const double wr = std::max(0.0, total - wl);
    return impurity(left_, wl, opt_.criterion) * wl + impurity(right_, wr, opt_.criterion) * wr;
  }

  const Matrix& x_;
  std::span<const int> y_;
  std::size_t k_;
  std::span<const double> w_;
  const TreeOptions& opt_;
  Rng& rng_;
  std::vector<ClassificationTree::Node>& nodes_;
  std::vector<double>& dist_;
  std::vector<int> features_;
  int max_features_;
  std::vector<double> left_;
  std::vector<double> right_;
  std::vector<std::pair<double, std::size_t>> sorted_;
};

}  // namespace

double impurity(std::span<const double> class_weights, double total, Criterion criterion) {
  if (total <= 0.0) return 0.0;
  double out = 0.0;
  if (criterion == Criterion::kGini) {
    double sq = 0.0;
    for (double w : class_weights) {
      const double p = w / total;
      sq += p * p;
    }
    out = 1.0 - sq;
  } else {
    for (double w : class_weights) {
      if (w <= 0.0) continue;
      const double p = w / total;
      out -= p * std::log2(p);
    }
  }
  return out < 1e-15 ? 0.0 : out;
}

void ClassificationTree::fit(const Matrix& x, std::span<const int> y, int n_classes,
                             std::span<const std::size_t> rows, std::span<const double> weights,
                             const TreeOptions& options, Rng& rng) {
  if (rows.empty()) throw Error(ErrorCode::kDegenerateTrainingData, "tree fit on zero rows");
  if (x.cols() == 0) throw Error(ErrorCode::kDegenerateTrainingData, "tree fit on zero columns");
  n_classes_ = n_classes;
  nodes_.clear();
  dist_.clear();
  std::vector<std::size_t> root(rows.begin(), rows.end());
  ClassificationBuilder builder(x, y, n_classes, weights, options, rng, nodes_, dist_);
  builder.build(root, 0);
}

int ClassificationTree::leaf_of(std::span<const double> row) const {
  int id = 0;
  while (!nodes_[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    id = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return id;
}

int ClassificationTree::predict(std::span<const double> row) const {
  const auto p = predict_proba(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

Json ClassificationTree::to_json() const {
  Json nodes = Json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    Json node = {{"depth", n.depth}, {"samples", n.samples}, {"weight", n.weight},
                 {"impurity", n.impurity}};
    if (n.is_leaf()) {
      auto d = distribution(static_cast<int>(i));
      node["distribution"] = std::vector<double>(d.begin(), d.end());
    } else {
      node["feature"] = n.feature;
      node["threshold"] = n.threshold;
      node["left"] = n.left;
      node["right"] = n.right;
      node["gain"] = n.gain;
      auto d = distribution(static_cast<int>(i));
      node["distribution"] = std::vector<double>(d.begin(), d.end());
    }
    nodes.push_back(std::move(node));
  }
  return {{"n_classes", n_classes_}, {"nodes", std::move(nodes)}};
}

ClassificationTree ClassificationTree::from_json(const Json& j) {
  ClassificationTree t;
  t.n_classes_ = j.at("n_classes").get<int>();
  for (const auto& node : j.at("nodes")) {
    Node n;
    n.depth = node.at("depth").get<int>();
    n.samples = node.at("samples").get<std::size_t>();
    n.weight = node.at("weight").get<double>();
    n.impurity = node.at("impurity").get<double>();
    if (node.contains("feature")) {
      n.feature = node.at("feature").get<int>();
      n.threshold = node.at("threshold").get<double>();
      n.left = node.at("left").get<int>();
      n.right = node.at("right").get<int>();
      n.gain = node.at("gain").get<double>();
    }
    const auto d = node.at("distribution").get<std::vector<double>>();
    if (d.size() != static_cast<std::size_t>(t.n_classes_)) {
      throw Error(ErrorCode::kParse, "tree node distribution has wrong length");
    }
    t.dist_.insert(t.dist_.end(), d.begin(), d.end());
    t.nodes_.push_back(n);
  }
  return t;
}

std::size_t ClassificationTree::memory_bytes() const {
  return nodes_.size() * sizeof(Node) + dist_.size() * sizeof(double);
}

// --- regression tree ------------------------------------------------------

namespace {

class RegressionBuilder {
 public:
  RegressionBuilder(const Matrix& x, std::span<const double> target, int max_depth,
                    int min_split, int min_leaf, RegressionCriterion criterion,
                    std::vector<RegressionTree::Node>& nodes)
      : x_(x),
        t_(target),
        max_depth_(max_depth),
        min_split_(min_split),
        min_leaf_(static_cast<std::size_t>(min_leaf)),
        criterion_(criterion),
        nodes_(nodes) {}

  int build(std::vector<std::size_t>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double sum = 0.0, sq = 0.0;
    for (auto r : rows) {
      sum += t_[r];
      sq += t_[r] * t_[r];
    }
    const double n = static_cast<double>(rows.size());
    nodes_[static_cast<std::size_t>(id)].value = n > 0 ? sum / n : 0.0;
    const double sse = sq - sum * sum / std::max(n, 1.0);
    if (static_cast<int>(rows.size()) < min_split_ || rows.size() < 2 * min_leaf_ ||
        (max_depth_ >= 0 && depth >= max_depth_) || sse <= 1e-14) {
      return id;
    }

    int best_feature = -1;
    double best_thr = 0.0, best_score = -1.0;
    for (std::size_t f = 0; f < x_.cols(); ++f) {
      sorted_.clear();
      for (auto r : rows) sorted_.emplace_back(x_(r, f), t_[r]);
      std::sort(sorted_.begin(), sorted_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (!(sorted_.back().first > sorted_.front().first)) continue;
      double left_sum = 0.0;
      const auto count = sorted_.size();
      for (std::size_t i = 0; i + 1 < count; ++i) {
        left_sum += sorted_[i].second;
        const double v = sorted_[i].first;
        const double next = sorted_[i + 1].first;
        if (!(next > v)) continue;
        const auto nl = i + 1;
        const auto nr = count - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double ml = left_sum / static_cast<double>(nl);
        const double mr = (sum - left_sum) / static_cast<double>(nr);
        double score;
        if (criterion_ == RegressionCriterion::kFriedmanMse) {
          const double diff = ml - mr;
          score = static_cast<double>(nl) * static_cast<double>(nr) / n * diff * diff;
        } else {
          // Reduction in summed squared error.
          score = left_sum * ml + (sum - left_sum) * mr - sum * sum / n;
        }
        const double tol = kGainTieTolerance * std::max(1.0, std::abs(best_score));
        if (best_feature < 0 || score > best_score + tol) {
          best_feature = static_cast<int>(f);
          best_score = score;
          double thr = v + (next - v) / 2.0;
          if (!(thr < next)) thr = v;
          best_thr = thr;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> left_rows, right_rows;
    for (auto r : rows) {
      (x_(r, static_cast<std::size_t>(best_feature)) <= best_thr ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    nodes_[static_cast<std::size_t>(id)].feature = best_feature;
    nodes_[static_cast<std::size_t>(id)].threshold = best_thr;
    const int l = build(left_rows, depth + 1);
    const int r = build(right_rows, depth + 1);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

 private:
  const Matrix& x_;
  std::span<const double> t_;
  int max_depth_;
  int min_split_;
  std::size_t min_leaf_;
  RegressionCriterion criterion_;
  std::vector<RegressionTree::Node>& nodes_;
  std::vector<std::pair<double, double>> sorted_;
};

}  // namespace

void RegressionTree::fit(const Matrix& x, std::span<const double> target,
                         std::span<const std::size_t> rows, int max_depth, int min_samples_split,
                         int min_samples_leaf, RegressionCriterion criterion) {
  if (rows.empty()) throw Error(ErrorCode::kDegenerateTrainingData, "regression tree on zero rows");
  nodes_.clear();
  std::vector<std::size_t> root(rows.begin(), rows.end());
  RegressionBuilder builder(x, target, max_depth, min_samples_split, min_samples_leaf, criterion,
                            nodes_);
  builder.build(root, 0);
}

int RegressionTree::leaf_of(std::span<const double> row) const {
  int id = 0;
  while (nodes_[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    id = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return id;
}

Json RegressionTree::to_json() const {
  Json feature = Json::array(), threshold = Json::array(), left = Json::array(),
       right = Json::array(), value = Json::array();
  for (const auto& n : nodes_) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return {{"feature", feature}, {"threshold", threshold}, {"left", left},
          {"right", right},     {"value", value}};
}

RegressionTree RegressionTree::from_json(const Json& j) {
  RegressionTree t;
  const auto f = j.at("feature").get<std::vector<int>>();
  const auto th = j.at("threshold").get<std::vector<double>>();
  const auto l = j.at("left").get<std::vector<int>>();
  const auto r = j.at("right").get<std::vector<int>>();
  const auto v = j.at("value").get<std::vector<double>>();
  t.nodes_.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t.nodes_[i] = {f[i], th[i], l[i], r[i], v[i]};
  return t;
}

}  // namespace metalearn::ml
