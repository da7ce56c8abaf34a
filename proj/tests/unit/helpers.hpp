#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "metalearn/dataset.hpp"
#include "metalearn/matrix.hpp"

namespace testutil {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("metalearn_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Numeric dataset from rows and labels.
inline metalearn::Dataset numeric_dataset(const std::vector<std::vector<double>>& rows,
                                          const std::vector<int>& labels, int n_classes,
                                          const std::string& id = "test") {
  metalearn::Matrix x(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
  }
  return metalearn::Dataset::from_matrix(id, x, labels, n_classes);
}

// Gaussian blobs, one per class, centred `sep` apart along every axis.
inline metalearn::Dataset blobs(std::size_t n, std::size_t p, int c, double sep, std::uint64_t seed,
                                const std::string& id = "blobs") {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  metalearn::Matrix x(n, p);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % static_cast<std::size_t>(c));
    for (std::size_t j = 0; j < p; ++j) x(i, j) = sep * y[i] * ((j % 2) ? 1.0 : -1.0) + g(rng);
  }
  return metalearn::Dataset::from_matrix(id, x, y, c);
}

}  // namespace testutil
