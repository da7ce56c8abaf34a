#include "report.hpp"

#include <cmath>
#include <fstream>

#include "metalearn/error.hpp"

namespace cli {

using namespace metalearn;

Json to_json(const HpValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  if (const auto* d = std::get_if<double>(&v)) return *d;
  return std::get<std::string>(v);
}

Json to_json(const Assignment& a) {
  Json j = Json::object();
  for (const auto& [k, v] : a) j[k] = to_json(v);
  return j;
}

Json to_json(const MetaFeatureVector& v) {
  Json values = Json::object();
  for (std::size_t i = 0; i < v.size(); ++i) {
    values[v.names[i]] = v.values[i] ? Json(*v.values[i]) : Json(nullptr);
  }
  Json diag = Json::object();
  for (const auto& [k, d] : v.diagnostics) diag[k] = d;
  return {{"record", "metafeatures"},
          {"dataset_id", v.dataset_id},
          {"catalogue_version", v.catalogue_version},
          {"count", v.size()},
          {"values", std::move(values)},
          {"diagnostics", std::move(diag)}};
}

Json to_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.std}, {"folds", s.folds}}; }

Json to_json(const Recommendation& r) {
  Json neighbors = Json::array();
  for (const auto& n : r.neighbors) neighbors.push_back({{"dataset_id", n.dataset_id}, {"distance", n.distance}});
  Json pipelines = Json::array();
  std::size_t rank = 0;
  for (const auto& p : r.pipelines) {
    Json support = Json::array();
    for (const auto& s : p.support) {
      support.push_back(
          {{"dataset_id", s.dataset_id}, {"distance", s.distance}, {"weight", s.weight}, {"score", s.score}});
    }
    pipelines.push_back({{"rank", ++rank},
                         {"pipeline_id", p.pipeline_id},
                         {"algorithm", std::string(to_string(p.algorithm))},
                         {"config", to_json(p.config)},
                         {"predicted_score", p.predicted_score},
                         {"support", std::move(support)}});
  }
  return {{"record", "recommendation"},
          {"method", std::string(to_string(r.method))},
          {"metric", std::string(to_string(r.metric))},
          {"neighbors", std::move(neighbors)},
          {"pipelines", std::move(pipelines)}};
}

Json to_json(const LooReport& r) {
  Json rows = Json::array();
  for (const auto& d : r.datasets) {
    rows.push_back({{"dataset_id", d.dataset_id},
                    {"recommended_pipeline", d.recommended_pipeline},
                    {"recommended_score", d.recommended_score},
                    {"best_score", d.best_score},
                    {"regret", d.regret},
                    {"hit", d.hit}});
  }
  return {{"record", "loo_evaluation"},
          {"method", std::string(to_string(r.method))},
          {"metric", std::string(to_string(r.metric))},
          {"tolerance", r.tolerance},
          {"hit_rate", r.hit_rate},
          {"regret", {{"mean", r.regret_mean}, {"median", r.regret_median}, {"max", r.regret_max}}},
          {"baseline_hit_rates", r.baseline_hit_rates},
          {"baseline_mean", r.baseline_mean},
          {"p_value", r.p_value},
          {"datasets", std::move(rows)}};
}

Report::Report(Json run_config) { lines_.push_back(std::move(run_config)); }

void Report::add(Json record) { lines_.push_back(std::move(record)); }

std::string Report::text() const {
  std::string out;
  for (const auto& l : lines_) out += l.dump() + "\n";
  return out;
}

void Report::write(const std::filesystem::path& path) const { write_atomic(path, text()); }

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace cli
