#include "metalearn/metafeatures.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "metalearn/error.hpp"
#include "metalearn/learners.hpp"
#include "mf_internal.hpp"

namespace metalearn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean(std::span<const double> x) {
  if (x.empty()) return kNaN;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pop_variance(std::span<const double> x) {
  if (x.empty()) return kNaN;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size());
}

double pop_sd(std::span<const double> x) { return std::sqrt(pop_variance(x)); }

std::vector<double> present(const Column& col) {
  std::vector<double> out;
  out.reserve(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (!col.is_missing(i)) out.push_back(col.values[i]);
  }
  return out;
}

std::vector<std::size_t> numeric_columns(const Dataset& ds) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < ds.p(); ++j) {
    if (ds.feature(j).is_numeric()) out.push_back(j);
  }
  return out;
}

bool constant(std::span<const double> x) {
  return x.empty() || std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

// Values of two columns on rows where both are present.
void paired(const Column& a, const Column& b, std::vector<double>& va, std::vector<double>& vb) {
  va.clear();
  vb.clear();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.is_missing(i) || b.is_missing(i)) continue;
    va.push_back(a.values[i]);
    vb.push_back(b.values[i]);
  }
}

double covariance(std::span<const double> a, std::span<const double> b) {
  if (a.empty()) return kNaN;
  const double ma = mean(a), mb = mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size());
}

std::pair<std::size_t, std::size_t> majority_minority(const std::vector<std::size_t>& counts) {
  std::size_t maj = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] > counts[maj]) maj = k;
  }
  std::size_t mino = maj == 0 ? 1 : 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (k == maj || counts[k] == 0) continue;
    if (counts[mino] == 0 || counts[k] < counts[mino]) mino = k;
  }
  return {maj, mino};
}

// Rows with no missing cell among `cols`.
Matrix complete_rows(const Dataset& ds, const std::vector<std::size_t>& cols) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    bool ok = true;
    for (auto j : cols) ok = ok && !ds.feature(j).is_missing(i);
    if (ok) rows.push_back(i);
  }
  Matrix m(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) m(r, c) = ds.feature(cols[c]).values[rows[r]];
  }
  return m;
}

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
  Eigen::VectorXd ev = solver.eigenvalues();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  return ev;
}

std::vector<double> class_counts_d(const Dataset& ds) {
  const auto counts = ds.class_counts();
  return {counts.begin(), counts.end()};
}

}  // namespace

// --- catalogue ------------------------------------------------------------

std::string_view to_string(MetaFamily family) {
  switch (family) {
    case MetaFamily::kSimple: return "simple";
    case MetaFamily::kStatistical: return "statistical";
    case MetaFamily::kInformation: return "information";
    case MetaFamily::kLandmarking: return "landmarking";
    case MetaFamily::kModelBased: return "model_based";
    case MetaFamily::kComplexity: return "complexity";
  }
  return "unknown";
}

const std::vector<CatalogueEntry>& catalogue() {
  static const std::vector<CatalogueEntry> entries = [] {
    std::vector<CatalogueEntry> e;
    auto add = [&](MetaFamily f, std::string name, std::string desc) {
      e.push_back({std::move(name), f, std::move(desc)});
    };
    using F = MetaFamily;
    add(F::kSimple, "nr_inst", "number of instances n");
    add(F::kSimple, "nr_attr", "number of attributes p");
    add(F::kSimple, "nr_class", "number of classes c");
    add(F::kSimple, "nr_missing", "number of missing cells m");
    add(F::kSimple, "nr_outliers", "numeric cells outside [Q1 - 1.5 IQR, Q3 + 1.5 IQR]");
    add(F::kSimple, "attr_to_inst", "p / n");
    add(F::kSimple, "inst_to_attr", "n / p");
    add(F::kSimple, "minority_class_prop", "smallest class count / n");
    add(F::kSimple, "majority_class_prop", "largest class count / n");
    add(F::kSimple, "prop_binary_attr", "binary attributes / p");
    add(F::kSimple, "prop_nominal_attr", "categorical attributes / p");
    add(F::kSimple, "prop_numeric_attr", "numeric attributes / p");
    add(F::kSimple, "prop_inst_with_missing", "instances with a missing cell / n");
    add(F::kSimple, "prop_missing_values", "missing cells / (n p)");

    add(F::kStatistical, "skewness_mean", "mean population skewness of numeric attributes");
    add(F::kStatistical, "kurtosis_mean", "mean excess kurtosis of numeric attributes");
    add(F::kStatistical, "correlation_mean_abs", "mean |Pearson r| over numeric pairs");
    add(F::kStatistical, "covariance_mean_abs", "mean |covariance| over numeric pairs");
    add(F::kStatistical, "sparsity", "mean of 1 - distinct / n over numeric attributes");
    add(F::kStatistical, "gravity", "distance between majority and minority centroids, standardized");
    add(F::kStatistical, "max_eigenvalue", "largest eigenvalue of the numeric covariance matrix");
    add(F::kStatistical, "anova_pvalue_mean", "mean one-way ANOVA p-value of attribute vs class");
    add(F::kStatistical, "geometric_mean", "mean per-attribute geometric mean (shifted if needed)");
    add(F::kStatistical, "harmonic_mean", "mean per-attribute harmonic mean (shifted if needed)");

    add(F::kInformation, "class_entropy", "H(C) in bits");
    add(F::kInformation, "attr_entropy_mean_norm", "mean H(X) / log2 n");
    add(F::kInformation, "mi_mean", "mean MI(C, X) in bits");
    add(F::kInformation, "uncertainty_coef", "mean MI / H(C)");
    add(F::kInformation, "equiv_nr_attr", "H(C) / mean MI");
    add(F::kInformation, "noise_signal_ratio", "(mean H(X) - mean MI) / mean MI");

    const char* lms[] = {"naive_bayes", "one_nn", "elite_nn", "decision_node", "random_node"};
    for (const char* l : lms) {
      add(F::kLandmarking, std::string("lm_") + l, std::string("5-fold CV accuracy of ") + l);
    }
    for (std::size_t a = 0; a < 5; ++a) {
      for (std::size_t b = a + 1; b < 5; ++b) {
        add(F::kLandmarking, std::string("rel_") + lms[a] + "_vs_" + lms[b],
            std::string("lm_") + lms[a] + " - lm_" + lms[b]);
      }
    }
    for (const char* l : lms) {
      add(F::kLandmarking, std::string("lm_sub_") + l, std::string(l) + " on a 50% stratified subsample");
    }

    add(F::kModelBased, "tree_nodes", "node count");
    add(F::kModelBased, "tree_leaves", "leaf count");
    add(F::kModelBased, "tree_height", "depth of the deepest leaf");
    add(F::kModelBased, "tree_width", "most nodes on one level");
    add(F::kModelBased, "tree_nodes_per_level_mean", "nodes / (height + 1)");
    add(F::kModelBased, "branch_len_max", "longest root-to-leaf path");
    add(F::kModelBased, "branch_len_min", "shortest root-to-leaf path");
    add(F::kModelBased, "branch_len_mean", "mean root-to-leaf path length");
    add(F::kModelBased, "branch_len_sd", "population sd of root-to-leaf path lengths");
    add(F::kModelBased, "leaves_per_class_min", "smallest share of leaves predicting one class");
    add(F::kModelBased, "leaves_per_class_max", "largest share of leaves predicting one class");
    add(F::kModelBased, "leaves_agreement", "mean majority fraction of leaves");
    add(F::kModelBased, "attr_occurrence_min", "fewest split nodes using one attribute");
    add(F::kModelBased, "attr_occurrence_max", "most split nodes using one attribute");
    add(F::kModelBased, "attr_occurrence_mean", "mean split nodes per attribute");
    add(F::kModelBased, "attr_occurrence_sd", "population sd of split nodes per attribute");
    add(F::kModelBased, "info_gain_mean", "mean entropy decrease of split nodes");

    add(F::kComplexity, "fisher_ratio_max", "max Fisher discriminant ratio over attributes and class pairs");
    add(F::kComplexity, "overlap_volume", "min over class pairs of the product of range overlaps");
    add(F::kComplexity, "class_prop_entropy", "entropy of class proportions in bits");
    add(F::kComplexity, "imbalance_ratio", "largest / smallest nonzero class count");
    add(F::kComplexity, "points_per_dim", "n / p");
    add(F::kComplexity, "pca_dim_ratio", "components for 95% of correlation variance / p");
    return e;
  }();
  return entries;
}

std::optional<double> MetaFeatureVector::get(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw Error(ErrorCode::kInvalidArgument, "no meta-feature named '" + std::string(name) + "'");
}

void MetaFeatureVector::set(const std::string& name, std::optional<double> value) {
  if (value && !std::isfinite(*value)) value.reset();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      values[i] = value;
      return;
    }
  }
  throw Error(ErrorCode::kInternal, "meta-feature '" + name + "' is not in this vector");
}

void MetaFeatureVector::append(const MetaFeatureVector& other) {
  names.insert(names.end(), other.names.begin(), other.names.end());
  values.insert(values.end(), other.values.begin(), other.values.end());
  for (const auto& [k, v] : other.diagnostics) diagnostics[k] = v;
}

// --- shared helpers -------------------------------------------------------

namespace detail {

Dataset canonical_order(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), 0);
  auto key = [&](std::size_t i, std::size_t j) {
    const auto& col = ds.feature(j);
    return col.is_missing(i) ? std::numeric_limits<double>::infinity() : col.values[i];
  };
  std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t j = 0; j < ds.p(); ++j) {
      const double va = key(a, j), vb = key(b, j);
      if (va != vb) return va < vb;
      const bool ma = ds.feature(j).is_missing(a), mb = ds.feature(j).is_missing(b);
      if (ma != mb) return mb;
    }
    return ds.labels()[a] < ds.labels()[b];
  });
  return ds.subset(rows);
}

MetaFeatureVector empty_family(MetaFamily family) {
  MetaFeatureVector v;
  for (const auto& e : catalogue()) {
    if (e.family != family) continue;
    v.names.push_back(e.name);
    v.values.emplace_back();
  }
  return v;
}

Matrix design_matrix(const Dataset& ds, std::vector<std::size_t>* owner) {
  const auto schema = FeatureSchema::of(ds);
  Matrix x = encode(schema, ds);
  if (owner) {
    owner->clear();
    for (std::size_t j = 0; j < schema.fields.size(); ++j) {
      const auto& f = schema.fields[j];
      const std::size_t w = f.type == ColumnType::kCategorical ? f.levels.size() : 1;
      owner->insert(owner->end(), w, j);
    }
  }
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (!std::isnan(x(i, c))) {
        sum += x(i, c);
        ++count;
      }
    }
    const double fill = count ? sum / static_cast<double>(count) : 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
      if (std::isnan(x(i, c))) x(i, c) = fill;
    }
  }
  return x;
}

}  // namespace detail

// --- numeric building blocks ----------------------------------------------

namespace mf {

double skewness(std::span<const double> x) {
  const double m2 = pop_variance(x);
  if (!(m2 > 0.0)) return kNaN;
  const double m = mean(x);
  double m3 = 0.0;
  for (double v : x) m3 += (v - m) * (v - m) * (v - m);
  m3 /= static_cast<double>(x.size());
  return m3 / std::pow(m2, 1.5);
}

double excess_kurtosis(std::span<const double> x) {
  const double m2 = pop_variance(x);
  if (!(m2 > 0.0)) return kNaN;
  const double m = mean(x);
  double m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m4 += d * d;
  }
  m4 /= static_cast<double>(x.size());
  return m4 / (m2 * m2) - 3.0;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double va = pop_variance(a), vb = pop_variance(b);
  if (!(va > 0.0) || !(vb > 0.0)) return kNaN;
  return std::clamp(covariance(a, b) / std::sqrt(va * vb), -1.0, 1.0);
}

double entropy_bits(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c <= 0.0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

double mutual_information_bits(const std::vector<std::vector<double>>& table) {
  if (table.empty()) return 0.0;
  const std::size_t nc = table.front().size();
  std::vector<double> row_sum(table.size(), 0.0), col_sum(nc, 0.0);
  double total = 0.0;
  for (std::size_t x = 0; x < table.size(); ++x) {
    for (std::size_t c = 0; c < nc; ++c) {
      row_sum[x] += table[x][c];
      col_sum[c] += table[x][c];
      total += table[x][c];
    }
  }
  if (!(total > 0.0)) return 0.0;
  double mi = 0.0;
  for (std::size_t x = 0; x < table.size(); ++x) {
    for (std::size_t c = 0; c < nc; ++c) {
      const double n_xc = table[x][c];
      if (n_xc <= 0.0) continue;
      // Exact count ratio: an independent table gives log2(1) = 0 exactly.
      mi += n_xc / total * std::log2(n_xc * total / (row_sum[x] * col_sum[c]));
    }
  }
  return std::max(0.0, mi);
}

double fisher_ratio(std::span<const double> a, std::span<const double> b) {
  const double den = pop_variance(a) + pop_variance(b);
  if (!(den > 0.0)) return kNaN;
  const double d = mean(a) - mean(b);
  return d * d / den;
}

std::vector<double> discretize(std::span<const double> values) {
  std::vector<double> sorted;
  for (double v : values) {
    if (!std::isnan(v)) sorted.push_back(v);
  }
  std::vector<double> out(values.size(), kNaN);
  if (sorted.empty()) return out;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const auto bins = std::min<std::size_t>(
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m)))), 10);
  std::vector<double> cuts;
  for (std::size_t j = 1; j < bins; ++j) cuts.push_back(sorted[j * m / bins]);
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // A cut equal to the minimum would leave the first bin empty.
  if (!cuts.empty() && cuts.front() == sorted.front()) cuts.erase(cuts.begin());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) continue;
    out[i] = static_cast<double>(std::upper_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin());
  }
  return out;
}

}  // namespace mf

// --- simple ---------------------------------------------------------------

MetaFeatureVector extract_simple(const Dataset& ds) {
  auto v = detail::empty_family(MetaFamily::kSimple);
  const double n = static_cast<double>(ds.n()), p = static_cast<double>(ds.p());
  const auto counts = ds.class_counts();
  std::size_t outliers = 0, binary = 0, nominal = 0, numeric = 0;
  for (const auto& col : ds.features()) {
    switch (col.type) {
      case ColumnType::kBinary: ++binary; break;
      case ColumnType::kCategorical: ++nominal; break;
      case ColumnType::kNumeric: {
        ++numeric;
        auto x = present(col);
        if (x.size() < 2) break;
        std::sort(x.begin(), x.end());
        auto quantile = [&](double q) {
          const double pos = q * static_cast<double>(x.size() - 1);
          const auto lo = static_cast<std::size_t>(std::floor(pos));
          const auto hi = std::min(lo + 1, x.size() - 1);
          return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
        };
        const double q1 = quantile(0.25), q3 = quantile(0.75), iqr = q3 - q1;
        for (double val : x) {
          if (val < q1 - 1.5 * iqr || val > q3 + 1.5 * iqr) ++outliers;
        }
        break;
      }
    }
  }
  std::size_t rows_missing = 0;
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (const auto& col : ds.features()) {
      if (col.is_missing(i)) {
        ++rows_missing;
        break;
      }
    }
  }
  std::size_t observed_min = ds.n(), observed_max = 0;
  for (auto c : counts) {
    observed_max = std::max(observed_max, c);
    observed_min = std::min(observed_min, c);
  }
  v.set("nr_inst", n);
  v.set("nr_attr", p);
  v.set("nr_class", ds.c());
  v.set("nr_missing", static_cast<double>(ds.missing_count()));
  v.set("nr_outliers", static_cast<double>(outliers));
  v.set("attr_to_inst", p / n);
  v.set("inst_to_attr", n / p);
  v.set("minority_class_prop", static_cast<double>(observed_min) / n);
  v.set("majority_class_prop", static_cast<double>(observed_max) / n);
  v.set("prop_binary_attr", static_cast<double>(binary) / p);
  v.set("prop_nominal_attr", static_cast<double>(nominal) / p);
  v.set("prop_numeric_attr", static_cast<double>(numeric) / p);
  v.set("prop_inst_with_missing", static_cast<double>(rows_missing) / n);
  v.set("prop_missing_values", static_cast<double>(ds.missing_count()) / (n * p));
  return v;
}

// --- statistical ----------------------------------------------------------

MetaFeatureVector extract_statistical(const Dataset& input) {
  auto v = detail::empty_family(MetaFamily::kStatistical);
  const Dataset ds = detail::canonical_order(input);
  const auto num = numeric_columns(ds);
  std::size_t degenerate = 0, shifted = 0;
  std::vector<double> skews, kurts, sparsity, geo, harm, pvalues;
  std::vector<std::size_t> usable;  // numeric, non-constant
  const auto c = static_cast<std::size_t>(ds.c());

  for (auto j : num) {
    const auto& col = ds.feature(j);
    auto x = present(col);
    if (x.empty()) {
      ++degenerate;
      continue;
    }
    {
      auto s = x;
      std::sort(s.begin(), s.end());
      const auto distinct = static_cast<double>(std::unique(s.begin(), s.end()) - s.begin());
      sparsity.push_back(1.0 - distinct / static_cast<double>(ds.n()));
    }
    const double lo = *std::min_element(x.begin(), x.end());
    const double shift = lo <= 0.0 ? 1.0 - lo : 0.0;
    if (shift > 0.0) ++shifted;
    double log_sum = 0.0, inv_sum = 0.0;
    for (double val : x) {
      log_sum += std::log(val + shift);
      inv_sum += 1.0 / (val + shift);
    }
    geo.push_back(std::exp(log_sum / static_cast<double>(x.size())));
    harm.push_back(static_cast<double>(x.size()) / inv_sum);

    if (constant(x)) {
      ++degenerate;
      continue;
    }
    usable.push_back(j);
    skews.push_back(mf::skewness(x));
    kurts.push_back(mf::excess_kurtosis(x));

    // One-way ANOVA of the attribute against the class.
    std::vector<double> sum(c, 0.0), cnt(c, 0.0);
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (col.is_missing(i)) continue;
      const auto k = static_cast<std::size_t>(ds.labels()[i]);
      sum[k] += col.values[i];
      cnt[k] += 1.0;
    }
    const double grand = mean(x);
    double ssb = 0.0, ssw = 0.0;
    std::size_t groups = 0;
    for (std::size_t k = 0; k < c; ++k) {
      if (cnt[k] == 0.0) continue;
      ++groups;
      const double mk = sum[k] / cnt[k];
      ssb += cnt[k] * (mk - grand) * (mk - grand);
    }
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (col.is_missing(i)) continue;
      const auto k = static_cast<std::size_t>(ds.labels()[i]);
      const double d = col.values[i] - sum[k] / cnt[k];
      ssw += d * d;
    }
    const double df1 = static_cast<double>(groups) - 1.0;
    const double df2 = static_cast<double>(x.size()) - static_cast<double>(groups);
    if (df1 >= 1.0 && df2 >= 1.0) {
      if (ssw <= 0.0) {
        pvalues.push_back(ssb > 0.0 ? 0.0 : 1.0);
      } else {
        const double f = (ssb / df1) / (ssw / df2);
        boost::math::fisher_f dist(df1, df2);
        pvalues.push_back(boost::math::cdf(boost::math::complement(dist, f)));
      }
    }
  }

  v.diagnostics["degenerate_attrs"] = static_cast<double>(degenerate);
  v.diagnostics["shifted_attrs"] = static_cast<double>(shifted);
  if (!skews.empty()) {
    v.set("skewness_mean", mean(skews));
    v.set("kurtosis_mean", mean(kurts));
  }
  if (!sparsity.empty()) v.set("sparsity", mean(sparsity));
  if (!geo.empty()) {
    v.set("geometric_mean", mean(geo));
    v.set("harmonic_mean", mean(harm));
  }
  if (!pvalues.empty()) v.set("anova_pvalue_mean", mean(pvalues));

  std::vector<double> a, b, cors, covs;
  for (std::size_t s = 0; s < num.size(); ++s) {
    for (std::size_t t = s + 1; t < num.size(); ++t) {
      paired(ds.feature(num[s]), ds.feature(num[t]), a, b);
      if (a.empty()) continue;
      covs.push_back(std::abs(covariance(a, b)));
      const double r = mf::pearson(a, b);
      if (std::isfinite(r)) cors.push_back(std::abs(r));
    }
  }
  if (!cors.empty()) v.set("correlation_mean_abs", mean(cors));
  if (!covs.empty()) v.set("covariance_mean_abs", mean(covs));

  if (!num.empty()) {
    const Matrix m = complete_rows(ds, num);
    if (m.rows() > 0) {
      const auto d = static_cast<Eigen::Index>(m.cols());
      Eigen::MatrixXd cov(d, d);
      std::vector<std::vector<double>> cols(m.cols(), std::vector<double>(m.rows()));
      for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t q = 0; q < m.cols(); ++q) cols[q][r] = m(r, q);
      }
      for (Eigen::Index s = 0; s < d; ++s) {
        for (Eigen::Index t = 0; t <= s; ++t) {
          const double cv = covariance(cols[static_cast<std::size_t>(s)], cols[static_cast<std::size_t>(t)]);
          cov(s, t) = cv;
          cov(t, s) = cv;
        }
      }
      v.set("max_eigenvalue", sorted_eigenvalues(cov)(0));
    }
  }

  // Gravity over standardized usable numeric attributes.
  const auto counts = ds.class_counts();
  if (!usable.empty()) {
    const auto [maj, mino] = majority_minority(counts);
    if (counts[mino] > 0 && maj != mino) {
      double dist = 0.0;
      for (auto j : usable) {
        const auto& col = ds.feature(j);
        const auto x = present(col);
        const double mu = mean(x), sd = pop_sd(x);
        double s1 = 0.0, n1 = 0.0, s2 = 0.0, n2 = 0.0;
        for (std::size_t i = 0; i < ds.n(); ++i) {
          if (col.is_missing(i)) continue;
          const double z = (col.values[i] - mu) / sd;
          const auto k = static_cast<std::size_t>(ds.labels()[i]);
          if (k == maj) {
            s1 += z;
            n1 += 1.0;
          } else if (k == mino) {
            s2 += z;
            n2 += 1.0;
          }
        }
        if (n1 > 0 && n2 > 0) {
          const double d = s1 / n1 - s2 / n2;
          dist += d * d;
        }
      }
      v.set("gravity", std::sqrt(dist));
    }
  }
  return v;
}

// --- information-theoretic ------------------------------------------------

MetaFeatureVector extract_info_theoretic(const Dataset& input) {
  auto v = detail::empty_family(MetaFamily::kInformation);
  const Dataset ds = detail::canonical_order(input);
  const auto counts = class_counts_d(ds);
  const double hc = mf::entropy_bits(counts);
  v.set("class_entropy", hc);
  const auto c = static_cast<std::size_t>(ds.c());

  std::vector<double> hx, mi;
  for (const auto& col : ds.features()) {
    std::vector<double> codes;
    if (col.is_numeric()) {
      codes = mf::discretize(col.values);
    } else {
      codes = col.values;
    }
    std::size_t levels = 0;
    for (double val : codes) {
      if (!std::isnan(val)) levels = std::max(levels, static_cast<std::size_t>(val) + 1);
    }
    if (levels == 0) continue;
    std::vector<std::vector<double>> table(levels, std::vector<double>(c, 0.0));
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (std::isnan(codes[i])) continue;
      table[static_cast<std::size_t>(codes[i])][static_cast<std::size_t>(ds.labels()[i])] += 1.0;
    }
    std::vector<double> marginal(levels, 0.0);
    for (std::size_t l = 0; l < levels; ++l) {
      marginal[l] = std::accumulate(table[l].begin(), table[l].end(), 0.0);
    }
    hx.push_back(mf::entropy_bits(marginal));
    mi.push_back(mf::mutual_information_bits(table));
  }
  if (hx.empty()) return v;
  const double mean_hx = mean(hx), mean_mi = mean(mi);
  const double log_n = std::log2(static_cast<double>(ds.n()));
  if (log_n > 0.0) v.set("attr_entropy_mean_norm", mean_hx / log_n);
  v.set("mi_mean", mean_mi);
  if (hc > 0.0) v.set("uncertainty_coef", std::min(1.0, mean_mi / hc));
  if (mean_mi > 1e-12) {
    v.set("equiv_nr_attr", hc / mean_mi);
    v.set("noise_signal_ratio", (mean_hx - mean_mi) / mean_mi);
  }
  return v;
}

// --- complexity -----------------------------------------------------------

MetaFeatureVector extract_complexity(const Dataset& input) {
  auto v = detail::empty_family(MetaFamily::kComplexity);
  const Dataset ds = detail::canonical_order(input);
  const auto counts = ds.class_counts();
  const auto c = static_cast<std::size_t>(ds.c());
  v.set("class_prop_entropy", mf::entropy_bits(class_counts_d(ds)));
  {
    std::size_t hi = 0, lo = ds.n();
    for (auto k : counts) {
      if (k == 0) continue;
      hi = std::max(hi, k);
      lo = std::min(lo, k);
    }
    v.set("imbalance_ratio", static_cast<double>(hi) / static_cast<double>(lo));
  }
  v.set("points_per_dim", static_cast<double>(ds.n()) / static_cast<double>(ds.p()));

  const auto num = numeric_columns(ds);
  if (num.empty()) return v;

  // Per attribute, per class: present values.
  std::vector<std::vector<std::vector<double>>> by_class(num.size(), std::vector<std::vector<double>>(c));
  for (std::size_t a = 0; a < num.size(); ++a) {
    const auto& col = ds.feature(num[a]);
    for (std::size_t i = 0; i < ds.n(); ++i) {
      if (!col.is_missing(i)) by_class[a][static_cast<std::size_t>(ds.labels()[i])].push_back(col.values[i]);
    }
  }
  double fisher = -1.0;
  double overlap = std::numeric_limits<double>::infinity();
  for (std::size_t k1 = 0; k1 < c; ++k1) {
    for (std::size_t k2 = k1 + 1; k2 < c; ++k2) {
      double volume = 1.0;
      bool any = false;
      for (std::size_t a = 0; a < num.size(); ++a) {
        const auto& x1 = by_class[a][k1];
        const auto& x2 = by_class[a][k2];
        if (x1.empty() || x2.empty()) continue;
        any = true;
        const double f = mf::fisher_ratio(x1, x2);
        if (std::isfinite(f)) fisher = std::max(fisher, f);
        const auto [min1, max1] = std::minmax_element(x1.begin(), x1.end());
        const auto [min2, max2] = std::minmax_element(x2.begin(), x2.end());
        const double range = std::max(*max1, *max2) - std::min(*min1, *min2);
        if (range > 0.0) {
          volume *= std::max(0.0, std::min(*max1, *max2) - std::max(*min1, *min2)) / range;
        }
      }
      if (any) overlap = std::min(overlap, volume);
    }
  }
  if (fisher >= 0.0) v.set("fisher_ratio_max", fisher);
  if (std::isfinite(overlap)) v.set("overlap_volume", overlap);

  // PCA on the correlation matrix of non-constant numeric attributes.
  std::vector<std::size_t> usable;
  for (auto j : num) {
    if (!constant(present(ds.feature(j)))) usable.push_back(j);
  }
  if (!usable.empty()) {
    const Matrix m = complete_rows(ds, usable);
    if (m.rows() > 1) {
      const auto d = static_cast<Eigen::Index>(m.cols());
      std::vector<std::vector<double>> cols(m.cols(), std::vector<double>(m.rows()));
      for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t q = 0; q < m.cols(); ++q) cols[q][r] = m(r, q);
      }
      Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(d, d);
      for (Eigen::Index s = 0; s < d; ++s) {
        for (Eigen::Index t = 0; t < s; ++t) {
          double r = mf::pearson(cols[static_cast<std::size_t>(s)], cols[static_cast<std::size_t>(t)]);
          if (!std::isfinite(r)) {
            // Constant on the complete rows only.
            r = 0.0;
          }
          corr(s, t) = r;
          corr(t, s) = r;
        }
      }
      const auto ev = sorted_eigenvalues(corr);
      const double total = ev.sum();
      double acc = 0.0;
      Eigen::Index dims = 0;
      while (dims < ev.size() && acc < 0.95 * total - 1e-12) acc += std::max(0.0, ev(dims++));
      v.set("pca_dim_ratio", static_cast<double>(dims) / static_cast<double>(ds.p()));
    }
  }
  return v;
}

// --- everything -----------------------------------------------------------

MetaFeatureVector extract_all(const Dataset& ds, std::uint64_t seed) {
  MetaFeatureVector out;
  out.dataset_id = ds.id();
  auto run = [&](MetaFamily family, auto&& fn) {
    try {
      out.append(fn());
    } catch (const Error&) {
      auto empty = detail::empty_family(family);
      empty.diagnostics["failed_" + std::string(to_string(family))] = 1.0;
      out.append(empty);
    }
  };
  run(MetaFamily::kSimple, [&] { return extract_simple(ds); });
  run(MetaFamily::kStatistical, [&] { return extract_statistical(ds); });
  run(MetaFamily::kInformation, [&] { return extract_info_theoretic(ds); });
  run(MetaFamily::kLandmarking, [&] { return extract_landmarking(ds, seed); });
  run(MetaFamily::kModelBased, [&] { return extract_model_based(ds, seed); });
  run(MetaFamily::kComplexity, [&] { return extract_complexity(ds); });
  return out;
}

}  // namespace metalearn
