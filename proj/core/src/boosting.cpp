#include <algorithm>
#include <cmath>
#include <numeric>

#include "estimators.hpp"
#include "metalearn/error.hpp"

namespace metalearn::ml {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

// --- gradient boosting ----------------------------------------------------

void GradientBoosting::fit(const Matrix& x, std::span<const int> y, int n_classes,
                           const BoostingParams& params) {
  if (params.n_estimators < 1) throw Error(ErrorCode::kInvalidConfig, "n_estimators must be >= 1");
  n_classes_ = n_classes;
  learning_rate_ = params.learning_rate;
  const std::size_t n = x.rows();
  const std::size_t problems = n_classes == 2 ? 1 : static_cast<std::size_t>(n_classes);
  init_.assign(problems, 0.0);
  trees_.assign(problems, {});

  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<double> target(n), residual(n), score(n);

  for (std::size_t k = 0; k < problems; ++k) {
    const int positive = n_classes == 2 ? 1 : static_cast<int>(k);
    double pos = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      target[i] = y[i] == positive ? 1.0 : 0.0;
      pos += target[i];
    }
    const double prior = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    init_[k] = std::log(prior / (1.0 - prior));
    std::fill(score.begin(), score.end(), init_[k]);

    auto& stages = trees_[k];
    stages.reserve(static_cast<std::size_t>(params.n_estimators));
    for (int m = 0; m < params.n_estimators; ++m) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = target[i] - sigmoid(score[i]);
      RegressionTree tree;
      tree.fit(x, residual, all, params.max_depth, params.min_samples_split, 1, params.criterion);

      // Newton step per leaf.
      auto& nodes = tree.nodes();
      std::vector<double> num(nodes.size(), 0.0), den(nodes.size(), 0.0);
      std::vector<int> leaf(n);
      for (std::size_t i = 0; i < n; ++i) {
        leaf[i] = tree.leaf_of(x.row(i));
        const double p = sigmoid(score[i]);
        num[static_cast<std::size_t>(leaf[i])] += residual[i];
        den[static_cast<std::size_t>(leaf[i])] += p * (1.0 - p);
      }
      for (std::size_t id = 0; id < nodes.size(); ++id) {
        if (nodes[id].feature >= 0) continue;
        nodes[id].value = den[id] > 1e-12 ? num[id] / den[id] : 0.0;
      }
      for (std::size_t i = 0; i < n; ++i) {
        score[i] += learning_rate_ * nodes[static_cast<std::size_t>(leaf[i])].value;
      }
      stages.push_back(std::move(tree));
    }
  }
}

std::vector<double> GradientBoosting::decision(std::span<const double> row) const {
  std::vector<double> out(init_);
  for (std::size_t k = 0; k < trees_.size(); ++k) {
    for (const auto& tree : trees_[k]) out[k] += learning_rate_ * tree.predict(row);
  }
  return out;
}

int GradientBoosting::predict(std::span<const double> row) const {
  const auto d = decision(row);
  if (n_classes_ == 2) return d[0] > 0.0 ? 1 : 0;
  return argmax(d);
}

Json GradientBoosting::to_json() const {
  Json problems = Json::array();
  for (const auto& stages : trees_) {
    Json arr = Json::array();
    for (const auto& t : stages) arr.push_back(t.to_json());
    problems.push_back(std::move(arr));
  }
  return {{"n_classes", n_classes_}, {"learning_rate", learning_rate_}, {"init", init_},
          {"trees", std::move(problems)}};
}

GradientBoosting GradientBoosting::from_json(const Json& j) {
  GradientBoosting g;
  g.n_classes_ = j.at("n_classes").get<int>();
  g.learning_rate_ = j.at("learning_rate").get<double>();
  g.init_ = j.at("init").get<std::vector<double>>();
  for (const auto& stages : j.at("trees")) {
    auto& out = g.trees_.emplace_back();
    for (const auto& t : stages) out.push_back(RegressionTree::from_json(t));
  }
  if (g.trees_.size() != g.init_.size()) throw Error(ErrorCode::kParse, "boosting shape mismatch");
  return g;
}

std::size_t GradientBoosting::memory_bytes() const {
  std::size_t total = init_.size() * sizeof(double);
  for (const auto& stages : trees_) {
    for (const auto& t : stages) total += t.nodes().size() * sizeof(RegressionTree::Node);
  }
  return total;
}

// --- AdaBoost -------------------------------------------------------------

void AdaBoost::fit(const Matrix& x, std::span<const int> y, int n_classes,
                   const AdaBoostParams& params, std::uint64_t seed) {
  if (params.n_estimators < 1) throw Error(ErrorCode::kInvalidConfig, "n_estimators must be >= 1");
  n_classes_ = n_classes;
  real_ = params.real;
  trees_.clear();
  alphas_.clear();
  const std::size_t n = x.rows();
  const auto c = static_cast<double>(n_classes);
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  TreeOptions opts;
  opts.max_depth = params.max_depth;
  Rng rng(seed);

  for (int m = 0; m < params.n_estimators; ++m) {
    ClassificationTree tree;
    tree.fit(x, y, n_classes, all, w, opts, rng);

    if (real_) {
      // SAMME.R: reweight by the class-probability estimates.
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto p = tree.predict_proba(x.row(i));
        std::vector<double> lp(p.size());
        for (std::size_t k = 0; k < p.size(); ++k) lp[k] = std::log(std::max(p[k], 1e-12));
        // y coding: 1 for the true class, -1/(c-1) otherwise.
        double inner = 0.0;
        for (std::size_t k = 0; k < p.size(); ++k) {
          const double code = static_cast<int>(k) == y[i] ? 1.0 : -1.0 / (c - 1.0);
          inner += code * lp[k];
        }
        w[i] *= std::exp(-params.learning_rate * (c - 1.0) / c * inner);
        total += w[i];
      }
      trees_.push_back(std::move(tree));
      alphas_.push_back(params.learning_rate);
      if (!(total > 0.0) || !std::isfinite(total)) break;
      for (auto& v : w) v /= total;
      continue;
    }

    double err = 0.0;
    std::vector<char> wrong(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (tree.predict(x.row(i)) != y[i]) {
        wrong[i] = 1;
        err += w[i];
      }
    }
    if (err <= 0.0) {
      trees_.push_back(std::move(tree));
      alphas_.push_back(1.0);
      break;
    }
    if (err >= 1.0 - 1.0 / c) {
      if (trees_.empty()) {
        trees_.push_back(std::move(tree));
        alphas_.push_back(1.0);
      }
      break;
    }
    const double alpha = params.learning_rate * (std::log((1.0 - err) / err) + std::log(c - 1.0));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (wrong[i]) w[i] *= std::exp(alpha);
      total += w[i];
    }
    for (auto& v : w) v /= total;
    trees_.push_back(std::move(tree));
    alphas_.push_back(alpha);
  }
}

int AdaBoost::predict(std::span<const double> row) const {
  std::vector<double> votes(static_cast<std::size_t>(n_classes_), 0.0);
  const auto c = static_cast<double>(n_classes_);
  for (std::size_t m = 0; m < trees_.size(); ++m) {
    if (real_) {
      const auto p = trees_[m].predict_proba(row);
      std::vector<double> lp(p.size());
      double mean = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        lp[k] = std::log(std::max(p[k], 1e-12));
        mean += lp[k];
      }
      mean /= c;
      for (std::size_t k = 0; k < p.size(); ++k) votes[k] += (c - 1.0) * (lp[k] - mean);
    } else {
      votes[static_cast<std::size_t>(trees_[m].predict(row))] += alphas_[m];
    }
  }
  return argmax(votes);
}

Json AdaBoost::to_json() const {
  Json trees = Json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"n_classes", n_classes_}, {"real", real_}, {"weights", alphas_},
          {"trees", std::move(trees)}};
}

AdaBoost AdaBoost::from_json(const Json& j) {
  AdaBoost a;
  a.n_classes_ = j.at("n_classes").get<int>();
  a.real_ = j.at("real").get<bool>();
  a.alphas_ = j.at("weights").get<std::vector<double>>();
  for (const auto& t : j.at("trees")) a.trees_.push_back(ClassificationTree::from_json(t));
  if (a.trees_.size() != a.alphas_.size()) throw Error(ErrorCode::kParse, "adaboost shape mismatch");
  return a;
}

std::size_t AdaBoost::memory_bytes() const {
  std::size_t total = alphas_.size() * sizeof(double);
  for (const auto& t : trees_) total += t.memory_bytes();
  return total;
}

}  // namespace metalearn::ml
