#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "metalearn/search_space.hpp"

namespace metalearn {

// Scores a configuration; larger is better. Minimization objectives must be
// negated by the caller.
using Objective = std::function<double(const Assignment&)>;

struct Trial {
  Assignment config;
  double score = 0.0;
};

struct SearchResult {
  Assignment best_config;
  double best_score = 0.0;
  std::vector<Trial> history;  // in evaluation order
  std::size_t evaluations_used = 0;
  std::uint64_t seed = 0;
  // Bayesian optimization steps that sampled at random because every
  // observed score was identical.
  std::size_t surrogate_fallbacks = 0;
};

inline constexpr std::size_t kDefaultGridCap = 100000;

// Values taken by one dimension: evenly spaced (log-spaced when flagged)
// with exact endpoints, rounded and deduplicated for integers, every choice
// for categoricals. per_dim == 1 takes the (geometric) midpoint.
std::vector<HpValue> grid_values(const Dimension& dim, int per_dim);

// Cartesian product in dimension order; conditional dimensions expand only
// where their condition holds. Throws Error(kGridTooLarge) above `cap`.
std::vector<Assignment> grid_points(const SearchSpace& space, int per_dim,
                                    std::size_t cap = kDefaultGridCap);

SearchResult grid_search(const SearchSpace& space, const Objective& objective, int per_dim = 5,
                         std::size_t cap = kDefaultGridCap);

SearchResult random_search(const SearchSpace& space, const Objective& objective,
                           std::size_t budget, std::uint64_t seed);

struct BayesOptions {
  std::size_t candidates = 1000;
  std::size_t local_candidates = 100;  // perturbations of the incumbent
  double local_scale = 0.05;           // in the unit-scaled input space
  double xi = 0.0;
  int restarts = 3;
};

SearchResult bayes_opt(const SearchSpace& space, const Objective& objective, std::size_t budget,
                       std::size_t init, std::uint64_t seed, const BayesOptions& options = {});

// Position of a configuration in the surrogate's input space: each numeric
// dimension scaled to [0, 1] (in log space when flagged), categoricals one-hot,
// and an activity flag per conditional dimension.
std::vector<double> surrogate_encoding(const SearchSpace& space, const Assignment& values);

struct GaOptions {
  std::size_t pop_size = 20;
  std::size_t generations = 10;
  double crossover_rate = 0.5;
  double mutation_rate = 0.1;
  std::size_t tournament = 3;
};

struct GaGeneration {
  std::vector<Assignment> individuals;
  std::vector<double> fitnesses;
};

// Evaluations are at most pop_size * (generations + 1). `on_generation`, when
// set, sees the population after each generation (the initial one included).
SearchResult genetic_search(const SearchSpace& space, const Objective& objective,
                            const GaOptions& options, std::uint64_t seed,
                            const std::function<void(const GaGeneration&)>& on_generation = {});

}  // namespace metalearn
