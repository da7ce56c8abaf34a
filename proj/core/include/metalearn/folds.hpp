#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace metalearn {

class Dataset;

// Repeated stratified k-fold assignment. Every instance lands in exactly one
// fold per repeat, and each fold's per-class count is within one of the
// class's proportional share.
class FoldPlan {
 public:
  FoldPlan(int k, int repeats, std::uint64_t seed,
           std::vector<std::vector<int>> assignments);

  int k() const noexcept { return k_; }
  int repeats() const noexcept { return repeats_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t n() const noexcept {
    return assignments_.empty() ? 0 : assignments_.front().size();
  }
  const std::vector<int>& assignment(int repeat) const { return assignments_.at(repeat); }

  // Ascending instance indices.
  std::vector<std::size_t> test_indices(int repeat, int fold) const;
  std::vector<std::size_t> train_indices(int repeat, int fold) const;

  friend bool operator==(const FoldPlan&, const FoldPlan&) = default;

 private:
  int k_;
  int repeats_;
  std::uint64_t seed_;
  std::vector<std::vector<int>> assignments_;
};

FoldPlan stratified_kfold(std::span<const int> labels, int n_classes, int k,
                          int repeats, std::uint64_t seed);
FoldPlan stratified_kfold(const Dataset& ds, int k, int repeats, std::uint64_t seed);

}  // namespace metalearn
