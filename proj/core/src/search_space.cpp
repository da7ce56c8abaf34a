#include "metalearn/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "csv.hpp"
#include "metalearn/error.hpp"

namespace metalearn {

std::string to_string(const HpValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) return detail::format_double(*d);
  return std::get<std::string>(value);
}

double as_double(const HpValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
  if (const auto* d = std::get_if<double>(&value)) return *d;
  throw Error(ErrorCode::kInvalidConfig, "expected a number, got '" + std::get<std::string>(value) + "'");
}

std::int64_t as_int(const HpValue& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return *i;
  if (const auto* d = std::get_if<double>(&value)) {
    if (std::floor(*d) == *d) return static_cast<std::int64_t>(*d);
  }
  throw Error(ErrorCode::kInvalidConfig, "expected an integer, got '" + to_string(value) + "'");
}

const std::string& as_string(const HpValue& value) {
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  throw Error(ErrorCode::kInvalidConfig, "expected a category, got '" + to_string(value) + "'");
}

bool as_bool(const HpValue& value) {
  const auto& s = as_string(value);
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error(ErrorCode::kInvalidConfig, "expected true/false, got '" + s + "'");
}

std::string canonical(const Assignment& values) {
  std::string out;
  for (const auto& [name, value] : values) {
    if (!out.empty()) out.push_back(';');
    out += name;
    out.push_back('=');
    out += to_string(value);
  }
  return out;
}

std::string_view to_string(DimKind kind) {
  switch (kind) {
    case DimKind::kContinuous: return "continuous";
    case DimKind::kInteger: return "integer";
    case DimKind::kCategorical: return "categorical";
  }
  return "unknown";
}

Dimension Dimension::continuous(std::string name, double low, double high, bool log) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimKind::kContinuous;
  d.low = low;
  d.high = high;
  d.log_scale = log;
  return d;
}

Dimension Dimension::integer(std::string name, std::int64_t low, std::int64_t high) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimKind::kInteger;
  d.low = static_cast<double>(low);
  d.high = static_cast<double>(high);
  return d;
}

Dimension Dimension::categorical(std::string name, std::vector<std::string> choices) {
  Dimension d;
  d.name = std::move(name);
  d.kind = DimKind::kCategorical;
  d.choices = std::move(choices);
  return d;
}

Dimension&& Dimension::when(std::string parent, std::vector<std::string> values) && {
  condition = Condition{std::move(parent), std::move(values)};
  return std::move(*this);
}

Dimension&& Dimension::with_note(std::string text) && {
  note = std::move(text);
  return std::move(*this);
}

bool Dimension::contains(const HpValue& value) const {
  switch (kind) {
    case DimKind::kContinuous: {
      if (std::holds_alternative<std::string>(value)) return false;
      const double v = as_double(value);
      return std::isfinite(v) && v >= low && v <= high;
    }
    case DimKind::kInteger: {
      const auto* i = std::get_if<std::int64_t>(&value);
      if (i == nullptr) return false;
      return static_cast<double>(*i) >= low && static_cast<double>(*i) <= high;
    }
    case DimKind::kCategorical: {
      const auto* s = std::get_if<std::string>(&value);
      return s != nullptr && std::find(choices.begin(), choices.end(), *s) != choices.end();
    }
  }
  return false;
}

SearchSpace::SearchSpace(std::vector<Dimension> dims, Assignment fixed)
    : dims_(std::move(dims)), fixed_(std::move(fixed)) {
  std::set<std::string> seen;
  for (const auto& d : dims_) {
    if (!seen.insert(d.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate dimension '" + d.name + "'");
    }
    if (d.kind == DimKind::kCategorical) {
      if (d.choices.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "dimension '" + d.name + "' has no choices");
      }
    } else {
      if (!std::isfinite(d.low) || !std::isfinite(d.high) || d.low > d.high) {
        throw Error(ErrorCode::kInvalidArgument, "dimension '" + d.name + "' has invalid bounds");
      }
      if (d.log_scale && d.low <= 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "log-scaled dimension '" + d.name + "' needs positive bounds");
      }
    }
    if (d.condition) {
      const auto* parent = find(d.condition->parent);
      // Parents must be declared earlier, which also rules out cycles.
      if (parent == nullptr || parent == &d || !seen.count(parent->name) ||
          parent->name == d.name) {
        throw Error(ErrorCode::kInvalidArgument, "dimension '" + d.name +
                                                     "' is conditioned on undeclared '" +
                                                     d.condition->parent + "'");
      }
      if (parent->kind != DimKind::kCategorical) {
        throw Error(ErrorCode::kInvalidArgument,
                    "condition parent '" + parent->name + "' must be categorical");
      }
    }
    if (fixed_.count(d.name)) {
      throw Error(ErrorCode::kInvalidArgument, "'" + d.name + "' is both fixed and searched");
    }
  }
}

const Dimension* SearchSpace::find(const std::string& name) const {
  for (const auto& d : dims_) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

bool SearchSpace::is_active(const Dimension& dim, const Assignment& values) const {
  if (!dim.condition) return true;
  const auto* parent = find(dim.condition->parent);
  if (parent == nullptr || !is_active(*parent, values)) return false;
  auto it = values.find(dim.condition->parent);
  if (it == values.end()) return false;
  const auto* s = std::get_if<std::string>(&it->second);
  if (s == nullptr) return false;
  const auto& allowed = dim.condition->values;
  return std::find(allowed.begin(), allowed.end(), *s) != allowed.end();
}

void SearchSpace::validate(const Assignment& values) const {
  for (const auto& d : dims_) {
    const bool active = is_active(d, values);
    auto it = values.find(d.name);
    if (active && it == values.end()) {
      throw Error(ErrorCode::kInvalidConfig, "missing value for '" + d.name + "'");
    }
    if (!active && it != values.end()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "'" + d.name + "' is set but its condition on '" + d.condition->parent +
                      "' does not hold");
    }
    if (active && !d.contains(it->second)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "value " + to_string(it->second) + " outside the range of '" + d.name + "'");
    }
  }
  for (const auto& [name, value] : values) {
    if (find(name) != nullptr) continue;
    auto f = fixed_.find(name);
    if (f == fixed_.end()) {
      throw Error(ErrorCode::kInvalidConfig, "unknown hyperparameter '" + name + "'");
    }
    if (value.index() != f->second.index()) {
      throw Error(ErrorCode::kInvalidConfig, "wrong value type for '" + name + "'");
    }
  }
}

HpValue SearchSpace::sample_dimension(const Dimension& dim, Rng& rng) const {
  switch (dim.kind) {
    case DimKind::kContinuous: {
      if (dim.log_scale) {
        const double u = std::uniform_real_distribution<double>(std::log(dim.low),
                                                                std::log(dim.high))(rng);
        return std::clamp(std::exp(u), dim.low, dim.high);
      }
      return std::uniform_real_distribution<double>(dim.low, dim.high)(rng);
    }
    case DimKind::kInteger:
      return std::uniform_int_distribution<std::int64_t>(static_cast<std::int64_t>(dim.low),
                                                         static_cast<std::int64_t>(dim.high))(rng);
    case DimKind::kCategorical: {
      const auto idx = std::uniform_int_distribution<std::size_t>(0, dim.choices.size() - 1)(rng);
      return dim.choices[idx];
    }
  }
  throw Error(ErrorCode::kInternal, "unknown dimension kind");
}

Assignment SearchSpace::sample(Rng& rng) const {
  Assignment values;
  for (const auto& d : dims_) {
    if (is_active(d, values)) values[d.name] = sample_dimension(d, rng);
  }
  return values;
}

Assignment SearchSpace::repair(Assignment values, Rng& rng) const {
  for (const auto& d : dims_) {
    const bool active = is_active(d, values);
    auto it = values.find(d.name);
    if (!active && it != values.end()) {
      values.erase(it);
    } else if (active && (it == values.end() || !d.contains(it->second))) {
      values[d.name] = sample_dimension(d, rng);
    }
  }
  return values;
}

}  // namespace metalearn
