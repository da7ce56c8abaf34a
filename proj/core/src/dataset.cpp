#include "metalearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "metalearn/error.hpp"

namespace metalearn {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Sorted level list: numeric order when every level parses as a number,
// lexicographic otherwise.
std::vector<std::string> ordered_levels(const std::set<std::string>& distinct) {
  std::vector<std::string> levels(distinct.begin(), distinct.end());
  std::vector<double> numeric(levels.size());
  bool all_numeric = true;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!detail::parse_number(levels[i], numeric[i])) {
      all_numeric = false;
      break;
    }
  }
  if (all_numeric) {
    std::vector<std::size_t> order(levels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return numeric[a] < numeric[b]; });
    std::vector<std::string> sorted;
    sorted.reserve(levels.size());
    for (auto i : order) sorted.push_back(levels[i]);
    return sorted;
  }
  return levels;
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Column infer_column(std::string name, const std::vector<const std::string*>& cells) {
  Column col;
  col.name = std::move(name);
  const std::size_t n = cells.size();
  col.values.assign(n, kNaN);
  col.missing.assign(n, 0);

  std::set<std::string> distinct;
  bool all_numeric = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (detail::is_missing_token(*cells[i])) {
      col.missing[i] = 1;
      continue;
    }
    distinct.insert(trimmed(*cells[i]));
    double v;
    if (all_numeric && !detail::parse_number(*cells[i], v)) all_numeric = false;
  }

  if (distinct.size() == 2) {
    col.type = ColumnType::kBinary;
  } else if (all_numeric) {
    col.type = ColumnType::kNumeric;
  } else {
    col.type = ColumnType::kCategorical;
  }

  if (col.type == ColumnType::kNumeric) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!col.missing[i]) detail::parse_number(*cells[i], col.values[i]);
    }
    return col;
  }

  col.levels = ordered_levels(distinct);
  std::map<std::string, double> code;
  for (std::size_t l = 0; l < col.levels.size(); ++l) code[col.levels[l]] = static_cast<double>(l);
  for (std::size_t i = 0; i < n; ++i) {
    if (!col.missing[i]) col.values[i] = code.at(trimmed(*cells[i]));
  }
  return col;
}

}  // namespace

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::kNumeric: return "numeric";
    case ColumnType::kCategorical: return "categorical";
    case ColumnType::kBinary: return "binary";
  }
  return "unknown";
}

std::size_t Column::missing_count() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), 1));
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

bool Matrix::has_missing() const {
  return std::any_of(data_.begin(), data_.end(), [](double v) { return std::isnan(v); });
}

Dataset::Dataset(std::string id, std::string name, std::vector<Column> features,
                 std::vector<int> labels, std::vector<std::string> class_names)
    : id_(std::move(id)),
      name_(std::move(name)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)) {
  if (labels_.empty()) throw Error(ErrorCode::kInvalidArgument, "dataset has no instances");
  if (features_.empty()) throw Error(ErrorCode::kInvalidArgument, "dataset has no features");
  if (class_names_.size() < 2) {
    throw Error(ErrorCode::kSingleClassTarget, "dataset '" + id_ + "' has fewer than 2 classes");
  }
  for (const auto& col : features_) {
    if (col.values.size() != labels_.size() || col.missing.size() != labels_.size()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "column '" + col.name + "' length differs from target length");
    }
  }
  for (int y : labels_) {
    if (y < 0 || y >= c()) throw Error(ErrorCode::kInvalidArgument, "label index out of range");
  }
}

Dataset Dataset::from_matrix(std::string id, const Matrix& x, std::vector<int> labels,
                             int n_classes) {
  std::vector<Column> cols(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    cols[j].name = "x" + std::to_string(j);
    cols[j].type = ColumnType::kNumeric;
    cols[j].values.resize(x.rows());
    cols[j].missing.resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      cols[j].values[i] = x(i, j);
      cols[j].missing[i] = std::isnan(x(i, j)) ? 1 : 0;
    }
  }
  std::vector<std::string> names;
  for (int k = 0; k < n_classes; ++k) names.push_back(std::to_string(k));
  auto name = id;
  return Dataset(std::move(id), std::move(name), std::move(cols), std::move(labels),
                 std::move(names));
}

std::size_t Dataset::missing_count() const {
  std::size_t total = 0;
  for (const auto& col : features_) total += col.missing_count();
  return total;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_names_.size(), 0);
  for (int y : labels_) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Column> cols = features_;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      cols[j].values[i] = features_[j].values[rows[i]];
      cols[j].missing[i] = features_[j].missing[rows[i]];
    }
    cols[j].values.resize(rows.size());
    cols[j].missing.resize(rows.size());
  }
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = labels_[rows[i]];
  return Dataset(id_, name_, std::move(cols), std::move(labels), class_names_);
}

Dataset Dataset::with_id(std::string id) const {
  Dataset copy = *this;
  copy.id_ = std::move(id);
  return copy;
}

Dataset load_dataset(const std::filesystem::path& path, const std::string& target_name,
                     const std::string& id) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kFileNotFound, path.string());
  const auto table = detail::parse_delimited(read_file(path));

  std::size_t target_col = table.header.size();
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (trimmed(table.header[j]) == target_name) {
      target_col = j;
      break;
    }
  }
  if (target_col == table.header.size()) {
    throw Error(ErrorCode::kTargetMissing,
                "column '" + target_name + "' not found in " + path.string());
  }
  if (table.header.size() < 2) {
    throw Error(ErrorCode::kParse, path.string() + ": no feature columns besides the target");
  }

  std::vector<std::size_t> kept;
  std::set<std::string> distinct_labels;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& cell = table.rows[r][target_col];
    if (detail::is_missing_token(cell)) continue;
    kept.push_back(r);
    distinct_labels.insert(trimmed(cell));
  }
  const std::size_t dropped = table.rows.size() - kept.size();
  if (distinct_labels.size() < 2) {
    throw Error(ErrorCode::kSingleClassTarget,
                path.string() + ": target '" + target_name + "' has " +
                    std::to_string(distinct_labels.size()) + " distinct value(s)");
  }
  if (dropped > 0) {
    std::cerr << "warning: " << path.string() << ": dropped " << dropped
              << " row(s) with missing target\n";
  }

  const auto class_names = ordered_levels(distinct_labels);
  std::map<std::string, int> label_code;
  for (std::size_t k = 0; k < class_names.size(); ++k) label_code[class_names[k]] = static_cast<int>(k);
  std::vector<int> labels;
  labels.reserve(kept.size());
  for (auto r : kept) labels.push_back(label_code.at(trimmed(table.rows[r][target_col])));

  std::vector<Column> features;
  std::vector<const std::string*> cells(kept.size());
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (j == target_col) continue;
    for (std::size_t i = 0; i < kept.size(); ++i) cells[i] = &table.rows[kept[i]][j];
    features.push_back(infer_column(trimmed(table.header[j]), cells));
  }

  const std::string resolved_id = id.empty() ? path.stem().string() : id;
  Dataset ds(resolved_id, path.stem().string(), std::move(features), std::move(labels),
             class_names);
  ds.dropped_rows_ = dropped;
  return ds;
}

void write_dataset(const Dataset& ds, const std::filesystem::path& path,
                   const std::string& target_name) {
  std::ostringstream out;
  for (const auto& col : ds.features()) out << detail::quote_field(col.name, ',') << ',';
  out << detail::quote_field(target_name, ',') << '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    for (const auto& col : ds.features()) {
      if (!col.is_missing(i)) {
        if (col.type == ColumnType::kNumeric) {
          out << detail::format_double(col.values[i]);
        } else {
          out << detail::quote_field(col.levels[static_cast<std::size_t>(col.values[i])], ',');
        }
      }
      out << ',';
    }
    out << detail::quote_field(ds.class_names()[static_cast<std::size_t>(ds.labels()[i])], ',')
        << '\n';
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  file << out.str();
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  std::ostringstream filtered;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trimmed(line);
    if (t.empty() || t.front() == '#') {
      filtered << '\n';  // keep line numbering
      continue;
    }
    filtered << line << '\n';
  }
  const auto table = detail::parse_delimited(filtered.str());
  auto column = [&](const std::string& name) {
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (trimmed(table.header[j]) == name) return j;
    }
    throw Error(ErrorCode::kParse, path.string() + ": manifest header lacks '" + name + "'");
  };
  const auto id_col = column("id");
  const auto path_col = column("path");
  const auto target_col = column("target");
  std::vector<ManifestEntry> entries;
  const auto base = path.parent_path();
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    ManifestEntry e{trimmed(table.rows[r][id_col]), trimmed(table.rows[r][path_col]),
                    trimmed(table.rows[r][target_col])};
    if (e.id.empty()) {
      throw Error(ErrorCode::kParse,
                  path.string() + ": line " + std::to_string(table.line_numbers[r]) + ": empty id");
    }
    if (!seen.insert(e.id).second) {
      throw Error(ErrorCode::kParse, path.string() + ": duplicate dataset id '" + e.id + "'");
    }
    if (e.path.is_relative()) e.path = base / e.path;
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << "id,path,target\n";
  const auto base = path.parent_path();
  for (const auto& e : entries) {
    auto rel = e.path.is_absolute() ? std::filesystem::relative(e.path, base) : e.path;
    out << detail::quote_field(e.id, ',') << ',' << detail::quote_field(rel.generic_string(), ',')
        << ',' << detail::quote_field(e.target, ',') << '\n';
  }
}

}  // namespace metalearn
