#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "metalearn/error.hpp"
#include "metalearn/gaussian_process.hpp"
#include "metalearn/hpo.hpp"

using namespace metalearn;

namespace {

double best_of(const SearchResult& r) {
  double best = -INFINITY;
  for (const auto& t : r.history) best = std::max(best, t.score);
  return best;
}

SearchSpace unit_interval() { return SearchSpace({Dimension::continuous("x", 0.0, 1.0)}); }

double quadratic(const Assignment& a) {
  const double x = as_double(a.at("x"));
  return -(x - 0.3) * (x - 0.3);
}

// Solves the small dense system a x = b by Gaussian elimination with
// partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const auto n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

}  // namespace

TEST(Grid, CartesianProductSize) {
  const SearchSpace space({Dimension::categorical("a", {"x", "y", "z"}),
                           Dimension::categorical("b", {"1", "2", "3", "4"})});
  int calls = 0;
  std::set<std::string> seen;
  const auto r = grid_search(space, [&](const Assignment& a) {
    ++calls;
    seen.insert(canonical(a));
    return 0.0;
  });
  EXPECT_EQ(calls, 12);
  EXPECT_EQ(seen.size(), 12u);
  EXPECT_EQ(r.evaluations_used, 12u);
}

TEST(Grid, DeltaObjectiveFindsItsPoint) {
  const SearchSpace space({Dimension::integer("i", 0, 9), Dimension::continuous("x", 0.0, 1.0)});
  const auto points = grid_points(space, 5);
  const auto target = points[7];
  const auto r = grid_search(space, [&](const Assignment& a) { return canonical(a) == canonical(target) ? 1.0 : 0.0; });
  EXPECT_EQ(canonical(r.best_config), canonical(target));
  EXPECT_EQ(r.best_score, 1.0);
}

TEST(Grid, LogSpacing) {
  const auto values = grid_values(Dimension::continuous("c", 1e-10, 10.0, true), 3);
  ASSERT_EQ(values.size(), 3u);
  const double expected[] = {1e-10, std::pow(10.0, -4.5), 10.0};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(as_double(values[i]) / expected[i], 1.0, 1e-12);
}

TEST(Grid, ConditionalDimsExpandOnlyUnderCondition) {
  const SearchSpace space({Dimension::categorical("kernel", {"poly", "rbf"}),
                           Dimension::integer("degree", 2, 3).when("kernel", {"poly"})});
  const auto points = grid_points(space, 2);
  EXPECT_EQ(points.size(), 3u);
  for (const auto& p : points) space.validate(p);
}

TEST(Grid, TooLargeRejected) {
  const SearchSpace space({Dimension::continuous("a", 0, 1), Dimension::continuous("b", 0, 1),
                           Dimension::continuous("c", 0, 1)});
  try {
    grid_points(space, 10, 999);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGridTooLarge);
  }
  EXPECT_EQ(grid_points(space, 10, 1000).size(), 1000u);
}

TEST(Random, ExactBudgetAndDeterminism) {
  const SearchSpace space({Dimension::continuous("c", 1e-3, 1.01, true),
                           Dimension::categorical("k", {"a", "b"}),
                           Dimension::integer("d", 2, 3).when("k", {"a"})});
  auto objective = [](const Assignment& a) { return as_double(a.at("c")); };
  const auto r1 = random_search(space, objective, 50, 4);
  const auto r2 = random_search(space, objective, 50, 4);
  ASSERT_EQ(r1.history.size(), 50u);
  EXPECT_EQ(r1.evaluations_used, 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(canonical(r1.history[i].config), canonical(r2.history[i].config));
    space.validate(r1.history[i].config);
  }
  EXPECT_EQ(r1.best_score, best_of(r1));
}

TEST(Random, LogUniformKolmogorovSmirnov) {
  const SearchSpace space({Dimension::continuous("g", 1e-3, 1.01, true)});
  std::vector<double> u;
  random_search(space, [&](const Assignment& a) {
    const double g = as_double(a.at("g"));
    u.push_back((std::log(g) - std::log(1e-3)) / (std::log(1.01) - std::log(1e-3)));
    return 0.0;
  }, 10000, 2);
  std::sort(u.begin(), u.end());
  double d = 0.0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
  }
  // Critical value of the one-sample KS statistic at alpha = 0.01.
  EXPECT_LT(d, 1.628 / std::sqrt(n));
}

TEST(GaussianProcess, PosteriorMatchesClosedForm) {
  const std::vector<std::vector<double>> x{{0.1}, {0.5}, {0.9}};
  const std::vector<double> y{0.3, -0.2, 0.7};
  const GpHyperparameters h{{0.4}, 1.5, 1e-4};
  GaussianProcess gp;
  gp.fit(x, y, h);
  auto k = [&](double a, double b) { return h.signal_variance * std::exp(-0.5 * std::pow((a - b) / 0.4, 2)); };
  std::vector<std::vector<double>> kxx(3, std::vector<double>(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) kxx[i][j] = k(x[i][0], x[j][0]) + (i == j ? h.noise_variance : 0.0);
  }
  const auto alpha = solve(kxx, y);
  for (double q : {0.0, 0.1, 0.33, 0.5, 0.77, 1.2}) {
    std::vector<double> ks{k(q, 0.1), k(q, 0.5), k(q, 0.9)};
    const auto v = solve(kxx, ks);
    double mean = 0, reduce = 0;
    for (int i = 0; i < 3; ++i) {
      mean += ks[i] * alpha[i];
      reduce += ks[i] * v[i];
    }
    const auto p = gp.predict(std::vector<double>{q});
    EXPECT_NEAR(p.mean, mean, 1e-9) << q;
    EXPECT_NEAR(p.variance, h.signal_variance - reduce, 1e-9) << q;
  }
}

TEST(GaussianProcess, InterpolatesAndVarianceBoundedAtObservations) {
  const std::vector<std::vector<double>> x{{0.0, 0.0}, {0.3, 0.8}, {1.0, 0.5}, {0.6, 0.1}};
  const std::vector<double> y{1.0, 2.0, -1.0, 0.5};
  GaussianProcess gp;
  gp.fit(x, y, {{0.5, 0.5}, 1.0, 1e-8});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto p = gp.predict(x[i]);
    EXPECT_NEAR(p.mean, y[i], 1e-5);
    EXPECT_LE(p.variance, 1e-6);
    EXPECT_GE(p.variance, 0.0);
    // No expected improvement at a known point that is already the best.
    if (y[i] == 2.0) {
      EXPECT_NEAR(expected_improvement(p, 2.0), 0.0, 1e-4);
    }
  }
}

TEST(GaussianProcess, OptimizedFitIsFiniteAndBounded) {
  std::vector<std::vector<double>> x;
  std::vector<double> y;
  for (int i = 0; i < 12; ++i) {
    const double t = i / 11.0;
    x.push_back({t});
    y.push_back(std::sin(6 * t));
  }
  Rng rng(1);
  GaussianProcess gp;
  gp.fit_optimized(x, y, rng);
  EXPECT_TRUE(std::isfinite(gp.log_marginal_likelihood()));
  const auto& h = gp.hyperparameters();
  EXPECT_GE(h.length_scales[0], 0.01);
  EXPECT_LE(h.length_scales[0], 10.0);
  EXPECT_NEAR(gp.predict(std::vector<double>{0.5}).mean, std::sin(3.0), 0.1);
}

TEST(Bayes, ConvergesOnQuadratic) {
  int close = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = bayes_opt(unit_interval(), quadratic, 30, 5, seed);
    ASSERT_EQ(r.history.size(), 30u);
    ASSERT_EQ(r.best_score, best_of(r));
    close += std::abs(as_double(r.best_config.at("x")) - 0.3) <= 0.05;
  }
  EXPECT_GE(close, 95);
}

TEST(Bayes, DeterministicAndValidated) {
  const SearchSpace space({Dimension::continuous("c", 1e-3, 10.0, true),
                           Dimension::categorical("k", {"poly", "rbf"}),
                           Dimension::integer("d", 2, 3).when("k", {"poly"})});
  auto objective = [](const Assignment& a) {
    return -std::abs(std::log10(as_double(a.at("c")))) + (as_string(a.at("k")) == "rbf" ? 0.5 : 0.0);
  };
  const auto a = bayes_opt(space, objective, 15, 4, 9);
  const auto b = bayes_opt(space, objective, 15, 4, 9);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(canonical(a.history[i].config), canonical(b.history[i].config));
    space.validate(a.history[i].config);
  }
}

TEST(Bayes, FlatObjectiveFallsBackToRandom) {
  const auto r = bayes_opt(unit_interval(), [](const Assignment&) { return 1.0; }, 10, 3, 0);
  EXPECT_EQ(r.history.size(), 10u);
  EXPECT_EQ(r.surrogate_fallbacks, 7u);
}

TEST(Bayes, RejectsBadWarmup) {
  EXPECT_THROW(bayes_opt(unit_interval(), quadratic, 5, 5, 0), Error);
  EXPECT_THROW(bayes_opt(unit_interval(), quadratic, 5, 1, 0), Error);
}

TEST(Genetic, ElitismKeepsBestFitnessMonotone) {
  const SearchSpace space({Dimension::continuous("x", 0.0, 1.0), Dimension::integer("n", 0, 20)});
  auto objective = [](const Assignment& a) { return as_double(a.at("x")) * static_cast<double>(as_int(a.at("n"))); };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    GaOptions o;
    o.crossover_rate = 0.0;
    o.mutation_rate = 0.0;
    std::vector<double> best;
    const auto r = genetic_search(space, objective, o, seed, [&](const GaGeneration& g) {
      EXPECT_EQ(g.individuals.size(), o.pop_size);
      best.push_back(*std::max_element(g.fitnesses.begin(), g.fitnesses.end()));
    });
    ASSERT_EQ(best.size(), o.generations + 1);
    for (std::size_t i = 1; i < best.size(); ++i) EXPECT_GE(best[i], best[i - 1]);
    EXPECT_LE(r.evaluations_used, 20u * 11u);
    EXPECT_EQ(r.best_score, best_of(r));
  }
}

TEST(Genetic, OneMaxReachesOptimum) {
  std::vector<Dimension> dims;
  for (int i = 0; i < 8; ++i) dims.push_back(Dimension::categorical("g" + std::to_string(i), {"a", "b", "c", "d"}));
  const SearchSpace space(dims);
  auto objective = [](const Assignment& a) {
    double s = 0;
    for (const auto& [k, v] : a) s += as_string(v) == "c";
    return s;
  };
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GaOptions o;
    o.pop_size = 30;
    o.generations = 50;
    const auto r = genetic_search(space, objective, o, seed);
    solved += r.best_score == 8.0;
  }
  EXPECT_GE(solved, 90);
}

TEST(Strategies, BestScoreIsMaxOfHistory) {
  const SearchSpace space({Dimension::continuous("x", 0.0, 1.0), Dimension::categorical("k", {"a", "b"})});
  auto objective = [](const Assignment& a) {
    return quadratic(a) + (as_string(a.at("k")) == "a" ? 0.1 : 0.0);
  };
  GaOptions ga;
  ga.pop_size = 6;
  ga.generations = 4;
  for (const auto& r : {grid_search(space, objective, 4), random_search(space, objective, 20, 1),
                        bayes_opt(space, objective, 12, 4, 1), genetic_search(space, objective, ga, 1)}) {
    EXPECT_EQ(r.best_score, best_of(r));
    for (const auto& t : r.history) space.validate(t.config);
  }
}
