#include "metalearn/hpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "metalearn/error.hpp"
#include "metalearn/gaussian_process.hpp"

namespace metalearn {

namespace {

class Recorder {
 public:
  Recorder(const SearchSpace& space, const Objective& objective, std::uint64_t seed)
      : space_(space), objective_(objective) {
    result_.seed = seed;
    result_.best_score = -std::numeric_limits<double>::infinity();
  }

  // `replace_on_tie` follows the random-search rule that an equal score
  // replaces the incumbent.
  double evaluate(const Assignment& cfg, bool replace_on_tie) {
    space_.validate(cfg);
    const double y = objective_(cfg);
    result_.history.push_back({cfg, y});
    ++result_.evaluations_used;
    if (result_.history.size() == 1 || y > result_.best_score ||
        (replace_on_tie && y == result_.best_score)) {
      result_.best_score = y;
      result_.best_config = cfg;
    }
    return y;
  }

  SearchResult& result() { return result_; }

 private:
  const SearchSpace& space_;
  const Objective& objective_;
  SearchResult result_;
};

double unit_position(const Dimension& d, double v) {
  if (d.high == d.low) return 0.0;
  if (d.log_scale) return (std::log(v) - std::log(d.low)) / (std::log(d.high) - std::log(d.low));
  return (v - d.low) / (d.high - d.low);
}

HpValue from_unit(const Dimension& d, double u) {
  u = std::clamp(u, 0.0, 1.0);
  double v = d.log_scale ? std::exp(std::log(d.low) + u * (std::log(d.high) - std::log(d.low)))
                         : d.low + u * (d.high - d.low);
  v = std::clamp(v, d.low, d.high);
  if (d.kind == DimKind::kInteger) return static_cast<std::int64_t>(std::llround(v));
  return v;
}

}  // namespace

std::vector<HpValue> grid_values(const Dimension& dim, int per_dim) {
  if (per_dim < 1) throw Error(ErrorCode::kInvalidArgument, "per_dim must be >= 1");
  std::vector<HpValue> out;
  if (dim.kind == DimKind::kCategorical) {
    for (const auto& c : dim.choices) out.emplace_back(c);
    return out;
  }
  const auto m = static_cast<std::size_t>(per_dim);
  std::vector<double> pts(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double t = m == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(m - 1);
    if (dim.log_scale) {
      const double a = std::log10(dim.low), b = std::log10(dim.high);
      pts[i] = std::pow(10.0, a + t * (b - a));
    } else {
      pts[i] = dim.low + t * (dim.high - dim.low);
    }
  }
  if (m > 1) {
    pts.front() = dim.low;
    pts.back() = dim.high;
  }
  for (double v : pts) {
    if (dim.kind == DimKind::kInteger) {
      const auto iv = static_cast<std::int64_t>(std::llround(v));
      if (out.empty() || std::get<std::int64_t>(out.back()) != iv) out.emplace_back(iv);
    } else {
      out.emplace_back(std::clamp(v, dim.low, dim.high));
    }
  }
  return out;
}

std::vector<Assignment> grid_points(const SearchSpace& space, int per_dim, std::size_t cap) {
  std::vector<Assignment> points{Assignment{}};
  for (const auto& dim : space.dims()) {
    const auto values = grid_values(dim, per_dim);
    std::vector<Assignment> next;
    for (auto& p : points) {
      if (!space.is_active(dim, p)) {
        next.push_back(std::move(p));
      } else {
        for (const auto& v : values) {
          if (next.size() >= cap) {
            throw Error(ErrorCode::kGridTooLarge,
                        "grid exceeds the cap of " + std::to_string(cap) + " points");
          }
          auto q = p;
          q[dim.name] = v;
          next.push_back(std::move(q));
        }
      }
      if (next.size() > cap) {
        throw Error(ErrorCode::kGridTooLarge, "grid exceeds the cap of " + std::to_string(cap) + " points");
      }
    }
    points = std::move(next);
  }
  return points;
}

SearchResult grid_search(const SearchSpace& space, const Objective& objective, int per_dim,
                         std::size_t cap) {
  const auto points = grid_points(space, per_dim, cap);
  Recorder rec(space, objective, 0);
  for (const auto& p : points) rec.evaluate(p, false);
  return std::move(rec.result());
}

SearchResult random_search(const SearchSpace& space, const Objective& objective,
                           std::size_t budget, std::uint64_t seed) {
  if (budget < 1) throw Error(ErrorCode::kInvalidArgument, "budget must be >= 1");
  Rng rng(seed);
  Recorder rec(space, objective, seed);
  for (std::size_t i = 0; i < budget; ++i) rec.evaluate(space.sample(rng), true);
  return std::move(rec.result());
}

std::vector<double> surrogate_encoding(const SearchSpace& space, const Assignment& values) {
  std::vector<double> out;
  for (const auto& d : space.dims()) {
    auto it = values.find(d.name);
    const bool active = it != values.end();
    if (d.kind == DimKind::kCategorical) {
      for (const auto& c : d.choices) out.push_back(active && as_string(it->second) == c ? 1.0 : 0.0);
    } else {
      out.push_back(active ? unit_position(d, as_double(it->second)) : 0.0);
    }
    if (d.condition) out.push_back(active ? 1.0 : 0.0);
  }
  return out;
}

SearchResult bayes_opt(const SearchSpace& space, const Objective& objective, std::size_t budget,
                       std::size_t init, std::uint64_t seed, const BayesOptions& options) {
  if (init < 2 || budget <= init) {
    throw Error(ErrorCode::kInvalidArgument, "bayes_opt needs budget > init >= 2");
  }
  Rng rng(seed);
  Recorder rec(space, objective, seed);
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  auto observe = [&](const Assignment& cfg) {
    ys.push_back(rec.evaluate(cfg, true));
    xs.push_back(surrogate_encoding(space, cfg));
  };
  for (std::size_t i = 0; i < init; ++i) observe(space.sample(rng));

  while (rec.result().evaluations_used < budget) {
    const bool flat = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys.front(); });
    if (flat) {
      ++rec.result().surrogate_fallbacks;
      observe(space.sample(rng));
      continue;
    }
    GaussianProcess gp;
    gp.fit_optimized(xs, ys, rng, options.restarts);
    const double best = *std::max_element(ys.begin(), ys.end());

    std::vector<Assignment> pool;
    pool.reserve(options.candidates + options.local_candidates);
    for (std::size_t i = 0; i < options.candidates; ++i) pool.push_back(space.sample(rng));
    const Assignment& incumbent = rec.result().best_config;
    std::normal_distribution<double> jitter(0.0, options.local_scale);
    for (std::size_t i = 0; i < options.local_candidates; ++i) {
      Assignment cand = incumbent;
      for (const auto& d : space.dims()) {
        auto it = cand.find(d.name);
        if (it == cand.end()) continue;
        if (d.kind == DimKind::kCategorical) {
          if (uniform01(rng) < 0.1) it->second = space.sample_dimension(d, rng);
        } else {
          it->second = from_unit(d, unit_position(d, as_double(it->second)) + jitter(rng));
        }
      }
      pool.push_back(space.repair(std::move(cand), rng));
    }

    std::size_t pick = 0;
    double best_ei = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const auto enc = surrogate_encoding(space, pool[i]);
      const double ei = expected_improvement(gp.predict(enc), best, options.xi);
      if (ei > best_ei) {
        best_ei = ei;
        pick = i;
      }
    }
    observe(pool[pick]);
  }
  return std::move(rec.result());
}

SearchResult genetic_search(const SearchSpace& space, const Objective& objective,
                            const GaOptions& options, std::uint64_t seed,
                            const std::function<void(const GaGeneration&)>& on_generation) {
  if (options.pop_size < 2) throw Error(ErrorCode::kInvalidArgument, "pop_size must be >= 2");
  if (options.tournament < 1) throw Error(ErrorCode::kInvalidArgument, "tournament size must be >= 1");
  Rng rng(seed);
  Recorder rec(space, objective, seed);

  GaGeneration pop;
  for (std::size_t i = 0; i < options.pop_size; ++i) {
    pop.individuals.push_back(space.sample(rng));
    pop.fitnesses.push_back(rec.evaluate(pop.individuals.back(), false));
  }
  if (on_generation) on_generation(pop);

  std::uniform_int_distribution<std::size_t> any(0, options.pop_size - 1);
  auto tournament = [&]() {
    std::size_t best = any(rng);
    for (std::size_t t = 1; t < options.tournament; ++t) {
      const auto c = any(rng);
      if (pop.fitnesses[c] > pop.fitnesses[best]) best = c;
    }
    return best;
  };

  for (std::size_t g = 0; g < options.generations; ++g) {
    const auto elite = static_cast<std::size_t>(
        std::max_element(pop.fitnesses.begin(), pop.fitnesses.end()) - pop.fitnesses.begin());
    GaGeneration next;
    next.individuals.push_back(pop.individuals[elite]);
    next.fitnesses.push_back(pop.fitnesses[elite]);
    while (next.individuals.size() < options.pop_size) {
      const auto& a = pop.individuals[tournament()];
      const auto& b = pop.individuals[tournament()];
      Assignment child;
      for (const auto& d : space.dims()) {
        const bool from_b = uniform01(rng) < options.crossover_rate;
        const auto& src = from_b ? b : a;
        if (auto it = src.find(d.name); it != src.end()) {
          child[d.name] = it->second;
        } else if (auto other = (from_b ? a : b).find(d.name); other != (from_b ? a : b).end()) {
          child[d.name] = other->second;
        }
        if (uniform01(rng) < options.mutation_rate) child[d.name] = space.sample_dimension(d, rng);
      }
      child = space.repair(std::move(child), rng);
      next.fitnesses.push_back(rec.evaluate(child, false));
      next.individuals.push_back(std::move(child));
    }
    pop = std::move(next);
    if (on_generation) on_generation(pop);
  }
  return std::move(rec.result());
}

}  // namespace metalearn
