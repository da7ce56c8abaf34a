#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "metalearn/random.hpp"

namespace metalearn {

// Integer, real, or categorical (including boolean "true"/"false") value.
using HpValue = std::variant<std::int64_t, double, std::string>;
using Assignment = std::map<std::string, HpValue>;

std::string to_string(const HpValue& value);
double as_double(const HpValue& value);
std::int64_t as_int(const HpValue& value);
const std::string& as_string(const HpValue& value);
bool as_bool(const HpValue& value);

// Deterministic text form, e.g. `C=0.5;penalty=l2`; doubles use the shortest
// round-trip representation.
std::string canonical(const Assignment& values);

enum class DimKind { kContinuous, kInteger, kCategorical };

std::string_view to_string(DimKind kind);

// A dimension is active only when its parent currently takes one of `values`.
struct Condition {
  std::string parent;
  std::vector<std::string> values;
};

// Integer bounds are inclusive on both ends; continuous bounds are closed.
struct Dimension {
  std::string name;
  DimKind kind = DimKind::kContinuous;
  double low = 0.0;
  double high = 0.0;
  std::vector<std::string> choices;
  bool log_scale = false;
  std::optional<Condition> condition;
  std::string note;

  static Dimension continuous(std::string name, double low, double high, bool log = false);
  static Dimension integer(std::string name, std::int64_t low, std::int64_t high);
  static Dimension categorical(std::string name, std::vector<std::string> choices);
  Dimension&& when(std::string parent, std::vector<std::string> values) &&;
  Dimension&& with_note(std::string text) &&;

  bool contains(const HpValue& value) const;
};

class SearchSpace {
 public:
  SearchSpace() = default;
  // `fixed` holds parameters that are not searched but may be overridden per
  // configuration (e.g. forest size). Throws Error(kInvalidArgument) when
  // bounds are unordered or non-finite, log bounds are nonpositive, or a
  // condition refers to a dimension not declared earlier.
  explicit SearchSpace(std::vector<Dimension> dims, Assignment fixed = {});

  const std::vector<Dimension>& dims() const noexcept { return dims_; }
  const Assignment& fixed() const noexcept { return fixed_; }
  std::size_t size() const noexcept { return dims_.size(); }
  const Dimension* find(const std::string& name) const;

  bool is_active(const Dimension& dim, const Assignment& values) const;

  // Throws Error(kInvalidConfig) naming the offending dimension.
  void validate(const Assignment& values) const;

  // Draws every active dimension: uniform, log-uniform on flagged dims,
  // uniform over integer ranges and choice sets.
  Assignment sample(Rng& rng) const;
  HpValue sample_dimension(const Dimension& dim, Rng& rng) const;

  // Drops inactive dimensions and samples newly activated ones.
  Assignment repair(Assignment values, Rng& rng) const;

 private:
  std::vector<Dimension> dims_;
  Assignment fixed_;
};

}  // namespace metalearn
