#include <algorithm>
#include <thread>

#include "estimators.hpp"
#include "metalearn/error.hpp"

namespace metalearn::ml {

void Forest::fit(const Matrix& x, std::span<const int> y, int n_classes,
                 const ForestOptions& options, std::uint64_t seed) {
  if (options.n_trees < 1) throw Error(ErrorCode::kInvalidConfig, "forest needs at least one tree");
  n_classes_ = n_classes;
  trees_.assign(static_cast<std::size_t>(options.n_trees), ClassificationTree{});
  const std::size_t n = x.rows();

  auto fit_tree = [&](std::size_t t) {
    std::vector<std::size_t> rows(n);
    if (options.bootstrap) {
      Rng boot(mix_seed(seed, 1000003ULL + t));
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (auto& r : rows) r = pick(boot);
      std::sort(rows.begin(), rows.end());
    } else {
      for (std::size_t i = 0; i < n; ++i) rows[i] = i;
    }
    Rng rng(seed + t);
    trees_[t].fit(x, y, n_classes, rows, {}, options.tree, rng);
  };

  const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
  if (jobs == 1 || trees_.size() == 1) {
    for (std::size_t t = 0; t < trees_.size(); ++t) fit_tree(t);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t t = w; t < trees_.size(); t += jobs) fit_tree(t);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : workers) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> Forest::predict_proba(std::span<const double> row) const {
  std::vector<double> out(static_cast<std::size_t>(n_classes_), 0.0);
  for (const auto& tree : trees_) {
    const auto p = tree.predict_proba(row);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += p[c];
  }
  for (auto& v : out) v /= static_cast<double>(trees_.size());
  return out;
}

int Forest::predict(std::span<const double> row) const {
  const auto p = predict_proba(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

Json Forest::to_json() const {
  Json trees = Json::array();
  for (const auto& t : trees_) trees.push_back(t.to_json());
  return {{"n_classes", n_classes_}, {"trees", std::move(trees)}};
}

Forest Forest::from_json(const Json& j) {
  Forest f;
  f.n_classes_ = j.at("n_classes").get<int>();
  for (const auto& t : j.at("trees")) f.trees_.push_back(ClassificationTree::from_json(t));
  if (f.trees_.empty()) throw Error(ErrorCode::kParse, "forest has no trees");
  return f;
}

std::size_t Forest::memory_bytes() const {
  std::size_t total = 0;
  for (const auto& t : trees_) total += t.memory_bytes();
  return total;
}

}  // namespace metalearn::ml
