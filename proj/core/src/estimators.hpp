#pragma once

// Internal estimator building blocks. The public surface is learners.hpp;
// these classes are shared by the learners, the landmarking and model-based
// meta-features, and the random-forest meta-model.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "metalearn/matrix.hpp"
#include "metalearn/random.hpp"

namespace metalearn::ml {

using Json = nlohmann::json;

// --- decision trees -------------------------------------------------------

enum class Criterion { kGini, kEntropy };

struct TreeOptions {
  Criterion criterion = Criterion::kGini;
  double max_features = 1.0;  // fraction of columns examined per node
  int min_samples_leaf = 1;
  int min_samples_split = 2;
  int max_depth = -1;  // unlimited when negative
  bool random_splits = false;  // extremely randomized thresholds
};

double impurity(std::span<const double> class_weights, double total, Criterion criterion);

class ClassificationTree {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int depth = 0;
    std::size_t samples = 0;
    double weight = 0.0;
    double impurity = 0.0;
    double gain = 0.0;  // impurity decrease per unit weight, split nodes only

    bool is_leaf() const noexcept { return feature < 0; }
  };

  // `rows` may repeat indices (bootstrap). `weights` is indexed by row id and
  // may be empty for unit weights. Rows go left when x <= threshold.
  void fit(const Matrix& x, std::span<const int> y, int n_classes,
           std::span<const std::size_t> rows, std::span<const double> weights,
           const TreeOptions& options, Rng& rng);

  int n_classes() const noexcept { return n_classes_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::span<const double> distribution(int node) const {
    return {dist_.data() + static_cast<std::size_t>(node) * static_cast<std::size_t>(n_classes_),
            static_cast<std::size_t>(n_classes_)};
  }

  int leaf_of(std::span<const double> row) const;
  std::span<const double> predict_proba(std::span<const double> row) const {
    return distribution(leaf_of(row));
  }
  int predict(std::span<const double> row) const;

  Json to_json() const;
  static ClassificationTree from_json(const Json& j);
  std::size_t memory_bytes() const;

 private:
  int n_classes_ = 0;
  std::vector<Node> nodes_;
  std::vector<double> dist_;
};

enum class RegressionCriterion { kMse, kFriedmanMse };

class RegressionTree {
 public:
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  void fit(const Matrix& x, std::span<const double> target, std::span<const std::size_t> rows,
           int max_depth, int min_samples_split, int min_samples_leaf,
           RegressionCriterion criterion);

  int leaf_of(std::span<const double> row) const;
  double predict(std::span<const double> row) const { return nodes_[static_cast<std::size_t>(leaf_of(row))].value; }
  std::vector<Node>& nodes() noexcept { return nodes_; }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  Json to_json() const;
  static RegressionTree from_json(const Json& j);

 private:
  std::vector<Node> nodes_;
};

// --- ensembles ------------------------------------------------------------

struct ForestOptions {
  int n_trees = 100;
  TreeOptions tree;
  bool bootstrap = true;
  int jobs = 1;
};

class Forest {
 public:
  // Tree t draws its splits from seed + t and its bootstrap sample from a
  // separate stream, so a one-tree forest without bootstrap reproduces a
  // plain tree fitted with the same seed.
  void fit(const Matrix& x, std::span<const int> y, int n_classes, const ForestOptions& options,
           std::uint64_t seed);

  std::vector<double> predict_proba(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
  const std::vector<ClassificationTree>& trees() const noexcept { return trees_; }

  Json to_json() const;
  static Forest from_json(const Json& j);
  std::size_t memory_bytes() const;

 private:
  int n_classes_ = 0;
  std::vector<ClassificationTree> trees_;
};

struct BoostingParams {
  double learning_rate = 0.1;
  RegressionCriterion criterion = RegressionCriterion::kFriedmanMse;
  int n_estimators = 100;
  int max_depth = 3;
  int min_samples_split = 2;
};

// One-vs-rest logistic-loss gradient boosting with Newton leaf updates. A
// binary task fits a single score function.
class GradientBoosting {
 public:
  void fit(const Matrix& x, std::span<const int> y, int n_classes, const BoostingParams& params);
  std::vector<double> decision(std::span<const double> row) const;
  int predict(std::span<const double> row) const;

  Json to_json() const;
  static GradientBoosting from_json(const Json& j);
  std::size_t memory_bytes() const;

 private:
  int n_classes_ = 0;
  double learning_rate_ = 0.1;
  std::vector<double> init_;
  std::vector<std::vector<RegressionTree>> trees_;  // [problem][stage]
};

struct AdaBoostParams {
  bool real = false;  // SAMME.R when true, SAMME otherwise
  int n_estimators = 50;
  double learning_rate = 1.0;
  int max_depth = 1;
};

class AdaBoost {
 public:
  void fit(const Matrix& x, std::span<const int> y, int n_classes, const AdaBoostParams& params,
           std::uint64_t seed);
  int predict(std::span<const double> row) const;
  const std::vector<ClassificationTree>& estimators() const noexcept { return trees_; }
  const std::vector<double>& estimator_weights() const noexcept { return alphas_; }

  Json to_json() const;
  static AdaBoost from_json(const Json& j);
  std::size_t memory_bytes() const;

 private:
  int n_classes_ = 0;
  bool real_ = false;
  std::vector<ClassificationTree> trees_;
  std::vector<double> alphas_;
};

// --- kernel machines ------------------------------------------------------

enum class Kernel { kRbf, kPoly };

struct SvmParams {
  double C = 1.0;
  Kernel kernel = Kernel::kRbf;
  double gamma = 0.1;
  double coef0 = 0.0;
  int degree = 3;
  double tolerance = 1e-3;
  long max_iter = 100000;
};

// Binary C-SVC solved by SMO with second-order working-set selection;
// multiclass tasks use one-vs-rest.
class KernelSvm {
 public:
  struct Problem {
    std::vector<std::size_t> support;  // indices into support_vectors_
    std::vector<double> coef;          // alpha_i * y_i
    double rho = 0.0;
    long iterations = 0;
    bool converged = true;
  };

  void fit(const Matrix& x, std::span<const int> y, int n_classes, const SvmParams& params);
  std::vector<double> decision(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
  const std::vector<Problem>& problems() const noexcept { return problems_; }

  Json to_json() const;
  static KernelSvm from_json(const Json& j);
  std::size_t memory_bytes() const;

 private:
  double kernel(std::span<const double> a, std::span<const double> b) const;

  int n_classes_ = 0;
  SvmParams params_;
  Matrix support_vectors_;
  std::vector<Problem> problems_;
};

// --- linear models --------------------------------------------------------

// One-vs-rest linear scores; a binary task stores one score function for
// class 1.
struct LinearOvr {
  int n_classes = 0;
  std::vector<std::vector<double>> coef;
  std::vector<double> intercept;

  std::vector<double> decision(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
  Json to_json() const;
  static LinearOvr from_json(const Json& j);
};

struct LogisticParams {
  double C = 1.0;
  bool l1 = false;
  bool fit_intercept = true;
  int max_iter = 500;
  double tolerance = 1e-7;
};

// Proximal gradient descent on mean log-loss + R(w) / (C n), where R is
// 0.5 * ||w||^2 or ||w||_1. The intercept is not penalized.
LinearOvr fit_logistic(const Matrix& x, std::span<const int> y, int n_classes,
                       const LogisticParams& params);

enum class SgdLoss { kHinge, kPerceptron, kLog, kSquaredHinge };
enum class SgdPenalty { kL2, kL1, kElasticNet };
enum class SgdSchedule { kConstant, kOptimal, kInvScaling };

struct SgdParams {
  SgdLoss loss = SgdLoss::kHinge;
  SgdPenalty penalty = SgdPenalty::kL2;
  SgdSchedule schedule = SgdSchedule::kOptimal;
  bool fit_intercept = true;
  double l1_ratio = 0.15;
  double eta0 = 0.01;
  double alpha = 1e-4;
  double power_t = 0.5;
  int epochs = 20;
};

LinearOvr fit_sgd(const Matrix& x, std::span<const int> y, int n_classes, const SgdParams& params,
                  std::uint64_t seed);

// --- preprocessing --------------------------------------------------------

class Standardizer {
 public:
  void fit(const Matrix& x);
  Matrix transform(const Matrix& x) const;
  void transform_row(std::span<const double> in, std::span<double> out) const;
  Json to_json() const;
  static Standardizer from_json(const Json& j);

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

enum class ImputeStrategy { kMean, kMedian, kMode };

class Imputer {
 public:
  void fit(const Matrix& x, ImputeStrategy strategy);
  Matrix transform(const Matrix& x) const;
  const std::vector<double>& fill_values() const noexcept { return fill_; }
  Json to_json() const;
  static Imputer from_json(const Json& j);

 private:
  std::vector<double> fill_;
};

}  // namespace metalearn::ml
