#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "metalearn/evaluation.hpp"
#include "metalearn/knowledge_base.hpp"
#include "metalearn/metafeatures.hpp"
#include "metalearn/recommender.hpp"
#include "metalearn/search_space.hpp"

namespace cli {

using Json = nlohmann::ordered_json;

Json to_json(const metalearn::HpValue& v);
Json to_json(const metalearn::Assignment& a);
Json to_json(const metalearn::MetaFeatureVector& v);
Json to_json(const metalearn::MetricSummary& s);
Json to_json(const metalearn::Recommendation& r);
Json to_json(const metalearn::LooReport& r);

// A structured report: one JSON object per line, the first being the run
// configuration.
class Report {
 public:
  explicit Report(Json run_config);
  void add(Json record);
  std::string text() const;
  // Atomic write-temp-then-rename.
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<Json> lines_;
};

void write_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace cli
