#include <algorithm>
#include <cmath>
#include <limits>

#include "estimators.hpp"
#include "metalearn/error.hpp"

namespace metalearn::ml {

namespace {

constexpr double kTau = 1e-12;

struct BinaryResult {
  std::vector<double> alpha;
  double rho = 0.0;
  long iterations = 0;
  bool converged = true;
};

// SMO for min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0, with the second-order
// working-set selection of Fan, Chen and Lin.
BinaryResult solve_binary(const std::vector<double>& k, std::size_t n, const std::vector<double>& y,
                          double c, double eps, long max_iter) {
  BinaryResult out;
  auto& a = out.alpha;
  a.assign(n, 0.0);
  std::vector<double> g(n, -1.0);
  auto kij = [&](std::size_t i, std::size_t j) { return k[i * n + j]; };
  auto is_upper = [&](std::size_t t) { return a[t] >= c; };
  auto is_lower = [&](std::size_t t) { return a[t] <= 0.0; };

  for (;;) {
    if (out.iterations >= max_iter) {
      out.converged = false;
      break;
    }
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const bool up = y[t] > 0 ? !is_upper(t) : !is_lower(t);
      if (up && -y[t] * g[t] >= gmax) {
        gmax = -y[t] * g[t];
        i = static_cast<std::ptrdiff_t>(t);
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    double obj_min = std::numeric_limits<double>::infinity();
    std::ptrdiff_t j = -1;
    for (std::size_t t = 0; t < n; ++t) {
      const bool low = y[t] > 0 ? !is_lower(t) : !is_upper(t);
      if (!low) continue;
      gmax2 = std::max(gmax2, y[t] * g[t]);
      if (i < 0) continue;
      const double diff = gmax + y[t] * g[t];
      if (diff > 0) {
        const auto ii = static_cast<std::size_t>(i);
        double quad = kij(ii, ii) + kij(t, t) - 2.0 * kij(ii, t);
        if (quad <= 0) quad = kTau;
        const double obj = -(diff * diff) / quad;
        if (obj <= obj_min) {
          obj_min = obj;
          j = static_cast<std::ptrdiff_t>(t);
        }
      }
    }
    if (gmax + gmax2 < eps || i < 0 || j < 0) break;
    ++out.iterations;

    const auto ii = static_cast<std::size_t>(i);
    const auto jj = static_cast<std::size_t>(j);
    const double old_i = a[ii], old_j = a[jj];
    double quad = kij(ii, ii) + kij(jj, jj) - 2.0 * kij(ii, jj);
    if (quad <= 0) quad = kTau;
    if (y[ii] != y[jj]) {
      const double delta = (-g[ii] - g[jj]) / quad;
      const double diff = a[ii] - a[jj];
      a[ii] += delta;
      a[jj] += delta;
      if (diff > 0) {
        if (a[jj] < 0) {
          a[jj] = 0;
          a[ii] = diff;
        }
      } else if (a[ii] < 0) {
        a[ii] = 0;
        a[jj] = -diff;
      }
      if (diff > 0) {
        if (a[ii] > c) {
          a[ii] = c;
          a[jj] = c - diff;
        }
      } else if (a[jj] > c) {
        a[jj] = c;
        a[ii] = c + diff;
      }
    } else {
      const double delta = (g[ii] - g[jj]) / quad;
      const double sum = a[ii] + a[jj];
      a[ii] -= delta;
      a[jj] += delta;
      if (sum > c) {
        if (a[ii] > c) {
          a[ii] = c;
          a[jj] = sum - c;
        }
      } else if (a[jj] < 0) {
        a[jj] = 0;
        a[ii] = sum;
      }
      if (sum > c) {
        if (a[jj] > c) {
          a[jj] = c;
          a[ii] = sum - c;
        }
      } else if (a[ii] < 0) {
        a[ii] = 0;
        a[jj] = sum;
      }
    }
    const double di = a[ii] - old_i, dj = a[jj] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      g[t] += y[t] * (y[ii] * kij(t, ii) * di + y[jj] * kij(t, jj) * dj);
    }
  }

  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * g[t];
    if (is_upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (is_lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  out.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  return out;
}

}  // namespace

double KernelSvm::kernel(std::span<const double> a, std::span<const double> b) const {
  if (params_.kernel == Kernel::kRbf) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double t = a[i] - b[i];
      d += t * t;
    }
    return std::exp(-params_.gamma * d);
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::pow(params_.gamma * dot + params_.coef0, params_.degree);
}

void KernelSvm::fit(const Matrix& x, std::span<const int> y, int n_classes,
                    const SvmParams& params) {
  if (!(params.C > 0.0)) throw Error(ErrorCode::kInvalidConfig, "SVM C must be positive");
  n_classes_ = n_classes;
  params_ = params;
  problems_.clear();
  const std::size_t n = x.rows();
  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double v = kernel(x.row(i), x.row(j));
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kDegenerateTrainingData, "kernel value is not finite");
      }
      k[i * n + j] = v;
      k[j * n + i] = v;
    }
  }

  const std::size_t count = n_classes == 2 ? 1 : static_cast<std::size_t>(n_classes);
  std::vector<std::ptrdiff_t> sv_index(n, -1);
  std::vector<std::size_t> sv_rows;
  std::vector<double> labels(n);
  for (std::size_t p = 0; p < count; ++p) {
    const int positive = n_classes == 2 ? 1 : static_cast<int>(p);
    for (std::size_t i = 0; i < n; ++i) labels[i] = y[i] == positive ? 1.0 : -1.0;
    auto res = solve_binary(k, n, labels, params.C, params.tolerance, params.max_iter);
    Problem prob;
    prob.rho = res.rho;
    prob.iterations = res.iterations;
    prob.converged = res.converged;
    for (std::size_t i = 0; i < n; ++i) {
      if (res.alpha[i] <= 0.0) continue;
      if (sv_index[i] < 0) {
        sv_index[i] = static_cast<std::ptrdiff_t>(sv_rows.size());
        sv_rows.push_back(i);
      }
      prob.support.push_back(static_cast<std::size_t>(sv_index[i]));
      prob.coef.push_back(res.alpha[i] * labels[i]);
    }
    problems_.push_back(std::move(prob));
  }
  support_vectors_ = x.select_rows(sv_rows);
}

std::vector<double> KernelSvm::decision(std::span<const double> row) const {
  std::vector<double> kv(support_vectors_.rows());
  for (std::size_t s = 0; s < kv.size(); ++s) kv[s] = kernel(support_vectors_.row(s), row);
  std::vector<double> out;
  out.reserve(problems_.size());
  for (const auto& p : problems_) {
    double f = -p.rho;
    for (std::size_t t = 0; t < p.support.size(); ++t) f += p.coef[t] * kv[p.support[t]];
    out.push_back(f);
  }
  return out;
}

int KernelSvm::predict(std::span<const double> row) const {
  const auto d = decision(row);
  if (n_classes_ == 2) return d[0] > 0.0 ? 1 : 0;
  return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

Json KernelSvm::to_json() const {
  Json problems = Json::array();
  for (const auto& p : problems_) {
    problems.push_back({{"support", p.support}, {"coef", p.coef}, {"rho", p.rho},
                        {"iterations", p.iterations}, {"converged", p.converged}});
  }
  return {{"n_classes", n_classes_},
          {"C", params_.C},
          {"kernel", params_.kernel == Kernel::kRbf ? "rbf" : "poly"},
          {"gamma", params_.gamma},
          {"coef0", params_.coef0},
          {"degree", params_.degree},
          {"n_features", support_vectors_.cols()},
          {"support_vectors", support_vectors_.data()},
          {"problems", std::move(problems)}};
}

KernelSvm KernelSvm::from_json(const Json& j) {
  KernelSvm s;
  s.n_classes_ = j.at("n_classes").get<int>();
  s.params_.C = j.at("C").get<double>();
  s.params_.kernel = j.at("kernel").get<std::string>() == "rbf" ? Kernel::kRbf : Kernel::kPoly;
  s.params_.gamma = j.at("gamma").get<double>();
  s.params_.coef0 = j.at("coef0").get<double>();
  s.params_.degree = j.at("degree").get<int>();
  const auto cols = j.at("n_features").get<std::size_t>();
  auto data = j.at("support_vectors").get<std::vector<double>>();
  const std::size_t rows = cols == 0 ? 0 : data.size() / cols;
  if (rows * cols != data.size()) throw Error(ErrorCode::kParse, "support vector shape mismatch");
  s.support_vectors_ = Matrix(rows, cols);
  s.support_vectors_.data() = std::move(data);
  for (const auto& p : j.at("problems")) {
    Problem prob;
    prob.support = p.at("support").get<std::vector<std::size_t>>();
    prob.coef = p.at("coef").get<std::vector<double>>();
    prob.rho = p.at("rho").get<double>();
    prob.iterations = p.at("iterations").get<long>();
    prob.converged = p.at("converged").get<bool>();
    for (auto idx : prob.support) {
      if (idx >= rows) throw Error(ErrorCode::kParse, "support index out of range");
    }
    s.problems_.push_back(std::move(prob));
  }
  return s;
}

std::size_t KernelSvm::memory_bytes() const {
  std::size_t total = support_vectors_.data().size() * sizeof(double);
  for (const auto& p : problems_) total += p.support.size() * (sizeof(std::size_t) + sizeof(double));
  return total;
}

}  // namespace metalearn::ml
