#include <algorithm>
#include <cmath>
#include <numeric>

#include "estimators.hpp"
#include "metalearn/error.hpp"

namespace metalearn::ml {

namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Numerically stable derivative of log(1 + exp(-m)) with respect to m.
double logistic_slope(double m) {
  if (m > 0) {
    const double e = std::exp(-m);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(m));
}

std::size_t problem_count(int n_classes) {
  return n_classes == 2 ? 1 : static_cast<std::size_t>(n_classes);
}

}  // namespace

std::vector<double> LinearOvr::decision(std::span<const double> row) const {
  std::vector<double> out(coef.size());
  for (std::size_t k = 0; k < coef.size(); ++k) {
    double z = intercept[k];
    for (std::size_t f = 0; f < row.size(); ++f) z += coef[k][f] * row[f];
    out[k] = z;
  }
  return out;
}

int LinearOvr::predict(std::span<const double> row) const {
  const auto d = decision(row);
  if (n_classes == 2) return d[0] > 0.0 ? 1 : 0;
  return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

Json LinearOvr::to_json() const {
  return {{"n_classes", n_classes}, {"coef", coef}, {"intercept", intercept}};
}

LinearOvr LinearOvr::from_json(const Json& j) {
  LinearOvr m;
  m.n_classes = j.at("n_classes").get<int>();
  m.coef = j.at("coef").get<std::vector<std::vector<double>>>();
  m.intercept = j.at("intercept").get<std::vector<double>>();
  if (m.coef.size() != m.intercept.size() || m.coef.size() != problem_count(m.n_classes)) {
    throw Error(ErrorCode::kParse, "linear model shape mismatch");
  }
  return m;
}

LinearOvr fit_logistic(const Matrix& x, std::span<const int> y, int n_classes,
                       const LogisticParams& params) {
  if (!(params.C > 0.0)) throw Error(ErrorCode::kInvalidConfig, "C must be positive");
  const std::size_t n = x.rows(), d = x.cols();
  const double nd = static_cast<double>(n);
  const double lambda = 1.0 / (params.C * nd);

  double max_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = params.fit_intercept ? 1.0 : 0.0;
    for (double v : x.row(i)) sq += v * v;
    max_sq = std::max(max_sq, sq);
  }
  double lipschitz = 0.25 * max_sq;
  if (!params.l1) lipschitz += lambda;
  const double step = lipschitz > 0 ? 1.0 / lipschitz : 1.0;

  LinearOvr model;
  model.n_classes = n_classes;
  const auto count = problem_count(n_classes);
  std::vector<double> grad(d), z(n);
  for (std::size_t k = 0; k < count; ++k) {
    const int positive = n_classes == 2 ? 1 : static_cast<int>(k);
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    for (int it = 0; it < params.max_iter; ++it) {
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_b = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = x.row(i);
        double zi = b;
        for (std::size_t f = 0; f < d; ++f) zi += w[f] * row[f];
        const double s = y[i] == positive ? 1.0 : -1.0;
        const double g = s * logistic_slope(s * zi) / nd;
        for (std::size_t f = 0; f < d; ++f) grad[f] += g * row[f];
        grad_b += g;
      }
      double change = 0.0;
      for (std::size_t f = 0; f < d; ++f) {
        const double moved = w[f] - step * grad[f];
        const double next = params.l1 ? soft_threshold(moved, step * lambda)
                                      : moved / (1.0 + step * lambda);
        change = std::max(change, std::abs(next - w[f]));
        w[f] = next;
      }
      if (params.fit_intercept) {
        const double next = b - step * grad_b;
        change = std::max(change, std::abs(next - b));
        b = next;
      }
      if (change < params.tolerance) break;
    }
    model.coef.push_back(std::move(w));
    model.intercept.push_back(b);
  }
  return model;
}

LinearOvr fit_sgd(const Matrix& x, std::span<const int> y, int n_classes, const SgdParams& params,
                  std::uint64_t seed) {
  if (params.epochs < 1) throw Error(ErrorCode::kInvalidConfig, "epochs must be >= 1");
  const std::size_t n = x.rows(), d = x.cols();
  const double rho = params.penalty == SgdPenalty::kL2   ? 0.0
                     : params.penalty == SgdPenalty::kL1 ? 1.0
                                                         : params.l1_ratio;
  const double t0 = 1.0 / params.alpha;

  LinearOvr model;
  model.n_classes = n_classes;
  const auto count = problem_count(n_classes);
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < count; ++k) {
    const int positive = n_classes == 2 ? 1 : static_cast<int>(k);
    Rng rng(mix_seed(seed, k));
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    double t = 1.0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (auto i : order) {
        const auto row = x.row(i);
        double z = b;
        for (std::size_t f = 0; f < d; ++f) z += w[f] * row[f];
        const double s = y[i] == positive ? 1.0 : -1.0;
        double dloss = 0.0;
        switch (params.loss) {
          case SgdLoss::kHinge:
            if (s * z < 1.0) dloss = -s;
            break;
          case SgdLoss::kPerceptron:
            if (s * z <= 0.0) dloss = -s;
            break;
          case SgdLoss::kLog:
            dloss = s * logistic_slope(s * z);
            break;
          case SgdLoss::kSquaredHinge: {
            const double m = 1.0 - s * z;
            if (m > 0) dloss = -2.0 * s * m;
            break;
          }
        }
        double eta = params.eta0;
        if (params.schedule == SgdSchedule::kOptimal) {
          eta = 1.0 / (params.alpha * (t0 + t));
        } else if (params.schedule == SgdSchedule::kInvScaling) {
          eta = params.eta0 / std::pow(t, params.power_t);
        }
        const double shrink = std::max(0.0, 1.0 - eta * params.alpha * (1.0 - rho));
        for (std::size_t f = 0; f < d; ++f) {
          double v = w[f] * shrink - eta * dloss * row[f];
          if (rho > 0) v = soft_threshold(v, eta * params.alpha * rho);
          w[f] = v;
        }
        if (params.fit_intercept) b -= eta * dloss;
        t += 1.0;
      }
      bool finite = std::isfinite(b);
      for (double v : w) finite = finite && std::isfinite(v);
      if (!finite) {
        throw Error(ErrorCode::kDegenerateTrainingData, "SGD diverged to non-finite weights");
      }
    }
    model.coef.push_back(std::move(w));
    model.intercept.push_back(b);
  }
  return model;
}

}  // namespace metalearn::ml
