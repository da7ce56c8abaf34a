#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "metalearn/matrix.hpp"

namespace metalearn {

enum class ColumnType : std::uint8_t { kNumeric, kCategorical, kBinary };

std::string_view to_string(ColumnType type);

// One feature column. Numeric columns store values; categorical and binary
// columns store the level index as a double. Missing cells hold NaN and are
// flagged in `missing`.
struct Column {
  std::string name;
  ColumnType type = ColumnType::kNumeric;
  std::vector<double> values;
  std::vector<std::string> levels;
  std::vector<std::uint8_t> missing;

  std::size_t size() const noexcept { return values.size(); }
  bool is_missing(std::size_t i) const { return missing[i] != 0; }
  std::size_t missing_count() const;
  bool is_numeric() const noexcept { return type == ColumnType::kNumeric; }
};

// An immutable tabular classification task. Labels are dense indices into
// class_names(); the original label text is kept for reporting.
class Dataset {
 public:
  Dataset(std::string id, std::string name, std::vector<Column> features,
          std::vector<int> labels, std::vector<std::string> class_names);

  // Builds an all-numeric dataset; used by generators and tests.
  static Dataset from_matrix(std::string id, const Matrix& x,
                             std::vector<int> labels, int n_classes);

  const std::string& id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  const std::vector<Column>& features() const noexcept { return features_; }
  const Column& feature(std::size_t j) const { return features_[j]; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }

  std::size_t n() const noexcept { return labels_.size(); }
  std::size_t p() const noexcept { return features_.size(); }
  int c() const noexcept { return static_cast<int>(class_names_.size()); }

  std::size_t missing_count() const;
  std::vector<std::size_t> class_counts() const;

  // Rows whose target was missing in the source file and were dropped.
  std::size_t dropped_rows() const noexcept { return dropped_rows_; }

  // Rows in the given order; the class set is preserved even when a class is
  // absent from the selection.
  Dataset subset(std::span<const std::size_t> rows) const;
  Dataset with_id(std::string id) const;

 private:
  friend Dataset load_dataset(const std::filesystem::path&, const std::string&,
                              const std::string&);

  std::string id_;
  std::string name_;
  std::vector<Column> features_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  std::size_t dropped_rows_ = 0;
};

// Reads a delimited text file with a header row. The delimiter is detected
// among comma, semicolon and tab. Empty, "?", "NA", "NaN" and "null" cells
// are missing. If `id` is empty the file stem is used.
Dataset load_dataset(const std::filesystem::path& path,
                     const std::string& target_name, const std::string& id = {});

// Writes comma-separated text with the target as the last column.
void write_dataset(const Dataset& ds, const std::filesystem::path& path,
                   const std::string& target_name = "class");

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
  std::string target;
};

// Dataset manifest: header `id,path,target`, one dataset per line, `#`
// comments. Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path);

}  // namespace metalearn
