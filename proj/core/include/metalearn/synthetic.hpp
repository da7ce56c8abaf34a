#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "metalearn/dataset.hpp"

namespace metalearn {

// Two numeric attributes, labels from the sign of a fixed hyperplane with a
// margin of at least `margin` around it; classes balanced.
Dataset make_linearly_separable(std::size_t n, std::uint64_t seed, double margin = 0.3);

struct CorpusDataset {
  std::string family;
  Dataset data;
};

// Twenty small synthetic classification tasks: ten families, two variants
// each. The first ten (one per family) form the knowledge-base set.
std::vector<CorpusDataset> desk_corpus(std::uint64_t seed = 2024);

struct CorpusFiles {
  std::vector<ManifestEntry> all;  // manifest.csv
  std::vector<ManifestEntry> kb;   // kb_manifest.csv, first ten
};

// Writes every dataset as `<id>.csv` plus both manifests into `dir`.
CorpusFiles write_desk_corpus(const std::filesystem::path& dir, std::uint64_t seed = 2024);

}  // namespace metalearn
