#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "metalearn/random.hpp"

namespace metalearn {

// Squared-exponential kernel with one length scale per input dimension:
// k(a, b) = signal_variance * exp(-0.5 * sum_d ((a_d - b_d) / l_d)^2).
struct GpHyperparameters {
  std::vector<double> length_scales;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;  // of the latent function, never negative
};

// Zero-mean Gaussian-process regression. With `normalize_y` the targets are
// standardized before fitting and predictions are mapped back.
class GaussianProcess {
 public:
  GaussianProcess();
  ~GaussianProcess();
  GaussianProcess(GaussianProcess&&) noexcept;
  GaussianProcess& operator=(GaussianProcess&&) noexcept;

  void fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
           const GpHyperparameters& hyper, bool normalize_y = false);

  // Chooses hyperparameters by maximizing the log marginal likelihood with a
  // bounded multi-start pattern search, then fits. Targets are normalized.
  void fit_optimized(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                     Rng& rng, int restarts = 3);

  GpPrediction predict(std::span<const double> x) const;
  double log_marginal_likelihood() const;
  const GpHyperparameters& hyperparameters() const;
  std::size_t size() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Expected improvement of a maximization problem over `best`.
double expected_improvement(const GpPrediction& p, double best, double xi = 0.0);

}  // namespace metalearn
