#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "estimators.hpp"
#include "metalearn/error.hpp"
#include "metalearn/folds.hpp"
#include "metalearn/metafeatures.hpp"
#include "mf_internal.hpp"

namespace metalearn {

namespace {

constexpr const char* kLandmarkers[] = {"naive_bayes", "one_nn", "elite_nn", "decision_node",
                                        "random_node"};
constexpr std::size_t kCount = 5;

struct Split {
  const Matrix& x;
  std::span<const int> y;
  int n_classes;
  const std::vector<std::size_t>& train;
  const std::vector<std::size_t>& test;
};

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double accuracy(const Split& s, const std::vector<int>& pred) {
  std::size_t ok = 0;
  for (std::size_t t = 0; t < s.test.size(); ++t) ok += pred[t] == s.y[s.test[t]];
  return static_cast<double>(ok) / static_cast<double>(s.test.size());
}

std::vector<int> naive_bayes(const Split& s) {
  const auto d = s.x.cols();
  const auto c = static_cast<std::size_t>(s.n_classes);
  std::vector<double> count(c, 0.0);
  std::vector<std::vector<double>> mu(c, std::vector<double>(d, 0.0)), var = mu;
  for (auto i : s.train) {
    const auto k = static_cast<std::size_t>(s.y[i]);
    count[k] += 1.0;
    for (std::size_t f = 0; f < d; ++f) mu[k][f] += s.x(i, f);
  }
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t f = 0; f < d; ++f) mu[k][f] = count[k] > 0 ? mu[k][f] / count[k] : 0.0;
  }
  double max_var = 0.0;
  for (auto i : s.train) {
    const auto k = static_cast<std::size_t>(s.y[i]);
    for (std::size_t f = 0; f < d; ++f) {
      const double e = s.x(i, f) - mu[k][f];
      var[k][f] += e * e;
    }
  }
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t f = 0; f < d; ++f) {
      var[k][f] = count[k] > 0 ? var[k][f] / count[k] : 0.0;
      max_var = std::max(max_var, var[k][f]);
    }
  }
  const double smoothing = std::max(1e-9, 1e-9 * max_var);
  const double total = static_cast<double>(s.train.size());
  std::vector<int> out;
  std::vector<double> score(c);
  for (auto i : s.test) {
    for (std::size_t k = 0; k < c; ++k) {
      if (count[k] == 0) {
        score[k] = -std::numeric_limits<double>::infinity();
        continue;
      }
      double l = std::log(count[k] / total);
      for (std::size_t f = 0; f < d; ++f) {
        const double v = var[k][f] + smoothing;
        const double e = s.x(i, f) - mu[k][f];
        l -= 0.5 * (std::log(2.0 * M_PI * v) + e * e / v);
      }
      score[k] = l;
    }
    out.push_back(argmax(score));
  }
  return out;
}

// 1-NN over the listed columns, standardized by training statistics.
std::vector<int> nearest_neighbor(const Split& s, const std::vector<std::size_t>& cols) {
  std::vector<double> mu(cols.size(), 0.0), sd(cols.size(), 0.0);
  const double n = static_cast<double>(s.train.size());
  for (std::size_t q = 0; q < cols.size(); ++q) {
    for (auto i : s.train) mu[q] += s.x(i, cols[q]);
    mu[q] /= n;
    for (auto i : s.train) sd[q] += (s.x(i, cols[q]) - mu[q]) * (s.x(i, cols[q]) - mu[q]);
    sd[q] = std::sqrt(sd[q] / n);
    if (!(sd[q] > 1e-12)) sd[q] = 1.0;
  }
  std::vector<int> out;
  for (auto t : s.test) {
    double best = std::numeric_limits<double>::infinity();
    int label = 0;
    for (auto i : s.train) {
      double dist = 0.0;
      for (std::size_t q = 0; q < cols.size(); ++q) {
        const double e = (s.x(t, cols[q]) - s.x(i, cols[q])) / sd[q];
        dist += e * e;
      }
      if (dist < best) {
        best = dist;
        label = s.y[i];
      }
    }
    out.push_back(label);
  }
  return out;
}

std::size_t most_informative_column(const Split& s) {
  const auto c = static_cast<std::size_t>(s.n_classes);
  std::size_t best_col = 0;
  double best = -1.0;
  std::vector<double> values(s.train.size());
  for (std::size_t f = 0; f < s.x.cols(); ++f) {
    for (std::size_t r = 0; r < s.train.size(); ++r) values[r] = s.x(s.train[r], f);
    const auto bins = mf::discretize(values);
    std::size_t levels = 0;
    for (double b : bins) levels = std::max(levels, static_cast<std::size_t>(b) + 1);
    std::vector<std::vector<double>> table(levels, std::vector<double>(c, 0.0));
    for (std::size_t r = 0; r < s.train.size(); ++r) {
      table[static_cast<std::size_t>(bins[r])][static_cast<std::size_t>(s.y[s.train[r]])] += 1.0;
    }
    const double ig = mf::mutual_information_bits(table);
    if (ig > best + 1e-12) {
      best = ig;
      best_col = f;
    }
  }
  return best_col;
}

std::vector<int> stump(const Split& s, const std::vector<std::size_t>& cols) {
  Matrix sub(s.x.rows(), cols.size());
  for (std::size_t i = 0; i < s.x.rows(); ++i) {
    for (std::size_t q = 0; q < cols.size(); ++q) sub(i, q) = s.x(i, cols[q]);
  }
  ml::TreeOptions o;
  o.criterion = ml::Criterion::kEntropy;
  o.max_depth = 1;
  Rng rng(0);
  ml::ClassificationTree tree;
  tree.fit(sub, s.y, s.n_classes, s.train, {}, o, rng);
  std::vector<int> out;
  for (auto t : s.test) out.push_back(tree.predict(sub.row(t)));
  return out;
}

// Mean fold accuracy of each landmarker.
std::array<double, kCount> run_landmarkers(const Dataset& ds, std::uint64_t seed) {
  if (ds.n() < 10) {
    throw Error(ErrorCode::kDatasetTooSmall, "landmarking needs at least 10 instances");
  }
  const Matrix x = detail::design_matrix(ds);
  const auto counts = ds.class_counts();
  std::size_t min_count = ds.n();
  for (auto cnt : counts) {
    if (cnt > 0) min_count = std::min(min_count, cnt);
  }
  const int k = static_cast<int>(std::clamp<std::size_t>(min_count, 2, 5));
  const auto plan = stratified_kfold(ds.labels(), ds.c(), k, 1, mix_seed(seed, 11));
  Rng pick(mix_seed(seed, 12));
  const std::size_t random_col =
      std::uniform_int_distribution<std::size_t>(0, x.cols() - 1)(pick);

  std::array<double, kCount> acc{};
  std::vector<std::size_t> all_cols(x.cols());
  std::iota(all_cols.begin(), all_cols.end(), 0);
  for (int f = 0; f < k; ++f) {
    const auto train = plan.train_indices(0, f);
    const auto test = plan.test_indices(0, f);
    const Split s{x, ds.labels(), ds.c(), train, test};
    acc[0] += accuracy(s, naive_bayes(s));
    acc[1] += accuracy(s, nearest_neighbor(s, all_cols));
    acc[2] += accuracy(s, nearest_neighbor(s, {most_informative_column(s)}));
    acc[3] += accuracy(s, stump(s, all_cols));
    acc[4] += accuracy(s, stump(s, {random_col}));
  }
  for (auto& a : acc) a /= static_cast<double>(k);
  return acc;
}

}  // namespace

MetaFeatureVector extract_landmarking(const Dataset& input, std::uint64_t seed) {
  if (input.n() < 10) {
    throw Error(ErrorCode::kDatasetTooSmall, "landmarking needs at least 10 instances");
  }
  auto v = detail::empty_family(MetaFamily::kLandmarking);
  const Dataset ds = detail::canonical_order(input);
  const auto acc = run_landmarkers(ds, seed);
  for (std::size_t a = 0; a < kCount; ++a) {
    v.set(std::string("lm_") + kLandmarkers[a], acc[a]);
    for (std::size_t b = a + 1; b < kCount; ++b) {
      v.set(std::string("rel_") + kLandmarkers[a] + "_vs_" + kLandmarkers[b], acc[a] - acc[b]);
    }
  }

  // Stratified half of every class.
  Rng rng(mix_seed(seed, 13));
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.c()));
  for (std::size_t i = 0; i < ds.n(); ++i) by_class[static_cast<std::size_t>(ds.labels()[i])].push_back(i);
  std::vector<std::size_t> rows;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto take = (members.size() + 1) / 2;
    rows.insert(rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(rows.begin(), rows.end());
  try {
    const auto sub = run_landmarkers(ds.subset(rows), mix_seed(seed, 14));
    for (std::size_t a = 0; a < kCount; ++a) v.set(std::string("lm_sub_") + kLandmarkers[a], sub[a]);
  } catch (const Error&) {
    v.diagnostics["subsample_landmarking_skipped"] = 1.0;
  }
  return v;
}

}  // namespace metalearn
