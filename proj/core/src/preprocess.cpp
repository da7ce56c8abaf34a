#include <algorithm>
#include <cmath>

#include "estimators.hpp"
#include "metalearn/error.hpp"

namespace metalearn::ml {

void Standardizer::fit(const Matrix& x) {
  const std::size_t n = x.rows(), d = x.cols();
  mean_.assign(d, 0.0);
  scale_.assign(d, 1.0);
  if (n == 0) return;
  for (std::size_t f = 0; f < d; ++f) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += x(i, f);
    const double m = sum / static_cast<double>(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) sq += (x(i, f) - m) * (x(i, f) - m);
    const double sd = std::sqrt(sq / static_cast<double>(n));
    mean_[f] = m;
    scale_[f] = sd > 1e-12 ? sd : 1.0;
  }
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
  for (std::size_t f = 0; f < in.size(); ++f) out[f] = (in[f] - mean_[f]) / scale_[f];
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (x.cols() != mean_.size()) throw Error(ErrorCode::kSchemaMismatch, "standardizer width mismatch");
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) transform_row(x.row(i), out.row(i));
  return out;
}

Json Standardizer::to_json() const { return {{"mean", mean_}, {"scale", scale_}}; }

Standardizer Standardizer::from_json(const Json& j) {
  Standardizer s;
  s.mean_ = j.at("mean").get<std::vector<double>>();
  s.scale_ = j.at("scale").get<std::vector<double>>();
  if (s.mean_.size() != s.scale_.size()) throw Error(ErrorCode::kParse, "standardizer shape mismatch");
  return s;
}

void Imputer::fit(const Matrix& x, ImputeStrategy strategy) {
  const std::size_t d = x.cols();
  fill_.assign(d, 0.0);
  std::vector<double> present;
  for (std::size_t f = 0; f < d; ++f) {
    present.clear();
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (!std::isnan(x(i, f))) present.push_back(x(i, f));
    }
    if (present.empty()) continue;
    std::sort(present.begin(), present.end());
    switch (strategy) {
      case ImputeStrategy::kMean: {
        double sum = 0.0;
        for (double v : present) sum += v;
        fill_[f] = sum / static_cast<double>(present.size());
        break;
      }
      case ImputeStrategy::kMedian: {
        const auto m = present.size();
        fill_[f] = m % 2 ? present[m / 2] : (present[m / 2 - 1] + present[m / 2]) / 2.0;
        break;
      }
      case ImputeStrategy::kMode: {
        // Smallest of the most frequent values.
        std::size_t best = 0;
        for (std::size_t i = 0; i < present.size();) {
          std::size_t j = i;
          while (j < present.size() && present[j] == present[i]) ++j;
          if (j - i > best) {
            best = j - i;
            fill_[f] = present[i];
          }
          i = j;
        }
        break;
      }
    }
  }
}

Matrix Imputer::transform(const Matrix& x) const {
  if (x.cols() != fill_.size()) throw Error(ErrorCode::kSchemaMismatch, "imputer width mismatch");
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t f = 0; f < out.cols(); ++f) {
      if (std::isnan(out(i, f))) out(i, f) = fill_[f];
    }
  }
  return out;
}

Json Imputer::to_json() const { return {{"fill", fill_}}; }

Imputer Imputer::from_json(const Json& j) {
  Imputer m;
  m.fill_ = j.at("fill").get<std::vector<double>>();
  return m;
}

}  // namespace metalearn::ml
