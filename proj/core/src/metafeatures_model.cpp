#include <algorithm>
#include <cmath>
#include <numeric>

#include "estimators.hpp"
#include "metalearn/error.hpp"
#include "metalearn/metafeatures.hpp"
#include "mf_internal.hpp"

namespace metalearn {

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double pop_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

MetaFeatureVector extract_model_based(const Dataset& input, std::uint64_t seed) {
  if (input.n() < 10) {
    throw Error(ErrorCode::kDatasetTooSmall, "model-based features need at least 10 instances");
  }
  auto v = detail::empty_family(MetaFamily::kModelBased);
  const Dataset ds = detail::canonical_order(input);
  std::vector<std::size_t> owner;
  const Matrix x = detail::design_matrix(ds, &owner);
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), 0);
  ml::TreeOptions o;
  o.criterion = ml::Criterion::kEntropy;
  Rng rng(seed);
  ml::ClassificationTree tree;
  tree.fit(x, ds.labels(), ds.c(), rows, {}, o, rng);

  const auto& nodes = tree.nodes();
  int height = 0;
  for (const auto& n : nodes) height = std::max(height, n.depth);
  std::vector<double> per_level(static_cast<std::size_t>(height) + 1, 0.0);
  std::vector<double> branch, agreement, gains;
  std::vector<double> leaves_of_class(static_cast<std::size_t>(ds.c()), 0.0);
  std::vector<double> occurrence(ds.p(), 0.0);
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto& n = nodes[id];
    per_level[static_cast<std::size_t>(n.depth)] += 1.0;
    if (n.is_leaf()) {
      const auto dist = tree.distribution(static_cast<int>(id));
      const auto top = std::max_element(dist.begin(), dist.end());
      branch.push_back(n.depth);
      agreement.push_back(*top);
      leaves_of_class[static_cast<std::size_t>(top - dist.begin())] += 1.0;
    } else {
      occurrence[owner[static_cast<std::size_t>(n.feature)]] += 1.0;
      gains.push_back(n.gain);
    }
  }
  const double leaves = static_cast<double>(branch.size());
  v.set("tree_nodes", static_cast<double>(nodes.size()));
  v.set("tree_leaves", leaves);
  v.set("tree_height", height);
  v.set("tree_width", *std::max_element(per_level.begin(), per_level.end()));
  v.set("tree_nodes_per_level_mean", static_cast<double>(nodes.size()) / (height + 1.0));
  v.set("branch_len_max", *std::max_element(branch.begin(), branch.end()));
  v.set("branch_len_min", *std::min_element(branch.begin(), branch.end()));
  v.set("branch_len_mean", mean(branch));
  v.set("branch_len_sd", pop_sd(branch));
  v.set("leaves_per_class_min", *std::min_element(leaves_of_class.begin(), leaves_of_class.end()) / leaves);
  v.set("leaves_per_class_max", *std::max_element(leaves_of_class.begin(), leaves_of_class.end()) / leaves);
  v.set("leaves_agreement", mean(agreement));
  v.set("attr_occurrence_min", *std::min_element(occurrence.begin(), occurrence.end()));
  v.set("attr_occurrence_max", *std::max_element(occurrence.begin(), occurrence.end()));
  v.set("attr_occurrence_mean", mean(occurrence));
  v.set("attr_occurrence_sd", pop_sd(occurrence));
  if (!gains.empty()) v.set("info_gain_mean", mean(gains));
  return v;
}

}  // namespace metalearn
