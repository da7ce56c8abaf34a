#include "metalearn/folds.hpp"

#include <algorithm>
#include <numeric>

#include "metalearn/dataset.hpp"
#include "metalearn/error.hpp"
#include "metalearn/random.hpp"

namespace metalearn {

FoldPlan::FoldPlan(int k, int repeats, std::uint64_t seed,
                   std::vector<std::vector<int>> assignments)
    : k_(k), repeats_(repeats), seed_(seed), assignments_(std::move(assignments)) {}

std::vector<std::size_t> FoldPlan::test_indices(int repeat, int fold) const {
  const auto& a = assignments_.at(static_cast<std::size_t>(repeat));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int repeat, int fold) const {
  const auto& a = assignments_.at(static_cast<std::size_t>(repeat));
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_kfold(std::span<const int> labels, int n_classes, int k, int repeats,
                          std::uint64_t seed) {
  const auto n = labels.size();
  if (k < 2 || static_cast<std::size_t>(k) > n) {
    throw Error(ErrorCode::kKOutOfRange,
                "k=" + std::to_string(k) + " must lie in [2, " + std::to_string(n) + "]");
  }
  if (repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(n_classes));
  for (std::size_t i = 0; i < n; ++i) by_class.at(static_cast<std::size_t>(labels[i])).push_back(i);
  for (int c = 0; c < n_classes; ++c) {
    const auto count = by_class[static_cast<std::size_t>(c)].size();
    if (count > 0 && count < static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::kClassTooSmall, "class " + std::to_string(c) + " has " +
                                                 std::to_string(count) + " instance(s), fewer than k=" +
                                                 std::to_string(k));
    }
  }

  std::vector<std::vector<int>> assignments(static_cast<std::size_t>(repeats),
                                            std::vector<int>(n, -1));
  for (int r = 0; r < repeats; ++r) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    // Dealing each shuffled class round-robin from a rotating offset keeps
    // both per-class and total fold sizes within one of their shares.
    std::size_t offset = 0;
    for (const auto& members : by_class) {
      auto order = members;
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t j = 0; j < order.size(); ++j) {
        assignments[static_cast<std::size_t>(r)][order[j]] =
            static_cast<int>((offset + j) % static_cast<std::size_t>(k));
      }
      offset = (offset + order.size()) % static_cast<std::size_t>(k);
    }
  }
  return FoldPlan(k, repeats, seed, std::move(assignments));
}

FoldPlan stratified_kfold(const Dataset& ds, int k, int repeats, std::uint64_t seed) {
  return stratified_kfold(ds.labels(), ds.c(), k, repeats, seed);
}

}  // namespace metalearn
