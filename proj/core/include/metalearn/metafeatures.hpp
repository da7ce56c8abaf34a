#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metalearn/dataset.hpp"

namespace metalearn {

enum class MetaFamily { kSimple, kStatistical, kInformation, kLandmarking, kModelBased, kComplexity };

std::string_view to_string(MetaFamily family);

struct CatalogueEntry {
  std::string name;
  MetaFamily family;
  std::string description;
};

inline constexpr std::string_view kCatalogueVersion = "mf-1";

// Published order of all entries; docs/catalogue.md lists the formulas.
const std::vector<CatalogueEntry>& catalogue();

// Names and values in catalogue order. A missing value is std::nullopt,
// never a silent zero.
struct MetaFeatureVector {
  std::string dataset_id;
  std::string catalogue_version{kCatalogueVersion};
  std::vector<std::string> names;
  std::vector<std::optional<double>> values;
  // Counts recorded while extracting (e.g. degenerate attributes); not part
  // of the vector itself.
  std::map<std::string, double> diagnostics;

  std::size_t size() const noexcept { return names.size(); }
  // Throws Error(kInvalidArgument) for a name outside the vector.
  std::optional<double> get(std::string_view name) const;
  void set(const std::string& name, std::optional<double> value);
  void append(const MetaFeatureVector& other);
};

MetaFeatureVector extract_simple(const Dataset& ds);
MetaFeatureVector extract_statistical(const Dataset& ds);
MetaFeatureVector extract_info_theoretic(const Dataset& ds);
// Throws Error(kDatasetTooSmall) when n < 10.
MetaFeatureVector extract_landmarking(const Dataset& ds, std::uint64_t seed);
// Throws Error(kDatasetTooSmall) when n < 10.
MetaFeatureVector extract_model_based(const Dataset& ds, std::uint64_t seed);
MetaFeatureVector extract_complexity(const Dataset& ds);

// All families in catalogue order. A family that fails leaves its entries
// missing and records the error under diagnostics["failed_<family>"].
MetaFeatureVector extract_all(const Dataset& ds, std::uint64_t seed);

// Building blocks shared by the extractors.
namespace mf {

// Population skewness g1 = m3 / m2^1.5 and excess kurtosis g2 = m4 / m2^2 - 3.
// Both return NaN for constant samples.
double skewness(std::span<const double> x);
double excess_kurtosis(std::span<const double> x);
// Pearson correlation; NaN if either sample is constant.
double pearson(std::span<const double> a, std::span<const double> b);
// Shannon entropy in bits of a count vector.
double entropy_bits(std::span<const double> counts);
// Mutual information in bits of a contingency table table[x][c].
double mutual_information_bits(const std::vector<std::vector<double>>& table);
// (mean_a - mean_b)^2 / (var_a + var_b) with population variances; NaN when
// the denominator is zero.
double fisher_ratio(std::span<const double> a, std::span<const double> b);

// Equal-frequency bin index per value (NaN stays NaN) with
// min(ceil(sqrt(m)), 10) bins, m the count of present values.
std::vector<double> discretize(std::span<const double> values);

}  // namespace mf

}  // namespace metalearn
