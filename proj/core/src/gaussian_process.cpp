#include "metalearn/gaussian_process.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "metalearn/error.hpp"

namespace metalearn {

namespace {

constexpr double kMinLength = 0.01, kMaxLength = 10.0;
constexpr double kMinSignal = 0.05, kMaxSignal = 20.0;
constexpr double kMinNoise = 1e-6, kMaxNoise = 0.1;

double se_kernel(std::span<const double> a, std::span<const double> b,
                 const GpHyperparameters& h) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double t = (a[d] - b[d]) / h.length_scales[d];
    s += t * t;
  }
  return h.signal_variance * std::exp(-0.5 * s);
}

}  // namespace

struct GaussianProcess::Impl {
  std::vector<std::vector<double>> x;
  Eigen::VectorXd y;  // normalized targets
  double y_mean = 0.0;
  double y_scale = 1.0;
  GpHyperparameters hyper;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd alpha;
  double lml = -std::numeric_limits<double>::infinity();

  // Returns false when the covariance is not positive definite.
  bool factor() {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = se_kernel(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)], hyper);
        k(i, j) = v;
        k(j, i) = v;
      }
      k(i, i) += hyper.noise_variance;
    }
    llt.compute(k);
    if (llt.info() != Eigen::Success) return false;
    alpha = llt.solve(y);
    const Eigen::MatrixXd l = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) log_det += std::log(l(i, i));
    lml = -0.5 * y.dot(alpha) - log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
    return std::isfinite(lml);
  }
};

GaussianProcess::GaussianProcess() : impl_(std::make_unique<Impl>()) {}
GaussianProcess::~GaussianProcess() = default;
GaussianProcess::GaussianProcess(GaussianProcess&&) noexcept = default;
GaussianProcess& GaussianProcess::operator=(GaussianProcess&&) noexcept = default;

void GaussianProcess::fit(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                          const GpHyperparameters& hyper, bool normalize_y) {
  if (x.empty() || x.size() != y.size()) {
    throw Error(ErrorCode::kInvalidArgument, "GP needs matching, nonempty inputs and targets");
  }
  const auto dim = x.front().size();
  for (const auto& row : x) {
    if (row.size() != dim) throw Error(ErrorCode::kInvalidArgument, "GP inputs differ in width");
  }
  if (hyper.length_scales.size() != dim) {
    throw Error(ErrorCode::kInvalidArgument, "one length scale per input dimension required");
  }
  auto& s = *impl_;
  s.x = x;
  s.hyper = hyper;
  s.y_mean = 0.0;
  s.y_scale = 1.0;
  if (normalize_y) {
    double m = 0.0;
    for (double v : y) m += v;
    m /= static_cast<double>(y.size());
    double sq = 0.0;
    for (double v : y) sq += (v - m) * (v - m);
    const double sd = std::sqrt(sq / static_cast<double>(y.size()));
    s.y_mean = m;
    s.y_scale = sd > 0.0 ? sd : 1.0;
  }
  s.y.resize(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    s.y(static_cast<Eigen::Index>(i)) = (y[i] - s.y_mean) / s.y_scale;
  }
  if (!s.factor()) {
    throw Error(ErrorCode::kDegenerateTrainingData, "GP covariance is not positive definite");
  }
}

void GaussianProcess::fit_optimized(const std::vector<std::vector<double>>& x,
                                    const std::vector<double>& y, Rng& rng, int restarts) {
  if (x.empty()) throw Error(ErrorCode::kInvalidArgument, "GP needs at least one point");
  const auto dim = x.front().size();
  // Search in log space over [length scales..., signal, noise].
  std::vector<double> lo(dim + 2, std::log(kMinLength)), hi(dim + 2, std::log(kMaxLength));
  lo[dim] = std::log(kMinSignal);
  hi[dim] = std::log(kMaxSignal);
  lo[dim + 1] = std::log(kMinNoise);
  hi[dim + 1] = std::log(kMaxNoise);

  auto to_hyper = [&](const std::vector<double>& theta) {
    GpHyperparameters h;
    h.length_scales.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) h.length_scales[d] = std::exp(theta[d]);
    h.signal_variance = std::exp(theta[dim]);
    h.noise_variance = std::exp(theta[dim + 1]);
    return h;
  };
  auto score = [&](const std::vector<double>& theta) {
    try {
      fit(x, y, to_hyper(theta), true);
      return impl_->lml;
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  std::vector<double> best_theta(dim + 2);
  double best = -std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, restarts); ++r) {
    std::vector<double> theta(dim + 2);
    if (r == 0) {
      for (std::size_t d = 0; d < dim; ++d) theta[d] = std::log(0.3);
      theta[dim] = 0.0;
      theta[dim + 1] = std::log(1e-4);
    } else {
      for (std::size_t d = 0; d < theta.size(); ++d) {
        theta[d] = std::uniform_real_distribution<double>(lo[d], hi[d])(rng);
      }
    }
    double current = score(theta);
    double step = 1.0;
    while (step > 0.05) {
      bool improved = false;
      for (std::size_t d = 0; d < theta.size(); ++d) {
        for (double dir : {1.0, -1.0}) {
          auto trial = theta;
          trial[d] = std::clamp(trial[d] + dir * step, lo[d], hi[d]);
          if (trial[d] == theta[d]) continue;
          const double v = score(trial);
          if (v > current) {
            current = v;
            theta = std::move(trial);
            improved = true;
            break;
          }
        }
      }
      if (!improved) step /= 2.0;
    }
    if (current > best) {
      best = current;
      best_theta = theta;
    }
  }
  if (!std::isfinite(best)) {
    throw Error(ErrorCode::kDegenerateTrainingData, "no GP hyperparameters gave a valid fit");
  }
  fit(x, y, to_hyper(best_theta), true);
}

GpPrediction GaussianProcess::predict(std::span<const double> x) const {
  const auto& s = *impl_;
  const auto n = static_cast<Eigen::Index>(s.x.size());
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "GP is not fitted");
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) k(i) = se_kernel(s.x[static_cast<std::size_t>(i)], x, s.hyper);
  GpPrediction p;
  p.mean = s.y_mean + s.y_scale * k.dot(s.alpha);
  const Eigen::VectorXd v = s.llt.matrixL().solve(k);
  const double var = s.hyper.signal_variance - v.squaredNorm();
  p.variance = std::max(0.0, var) * s.y_scale * s.y_scale;
  return p;
}

double GaussianProcess::log_marginal_likelihood() const { return impl_->lml; }
const GpHyperparameters& GaussianProcess::hyperparameters() const { return impl_->hyper; }
std::size_t GaussianProcess::size() const { return impl_->x.size(); }

double expected_improvement(const GpPrediction& p, double best, double xi) {
  const double sd = std::sqrt(p.variance);
  const double diff = p.mean - best - xi;
  if (sd < 1e-12) return std::max(0.0, diff);
  const double z = diff / sd;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return std::max(0.0, diff * cdf + sd * pdf);
}

}  // namespace metalearn
