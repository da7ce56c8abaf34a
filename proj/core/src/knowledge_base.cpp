#include "metalearn/knowledge_base.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <iostream>
#include <set>
#include <thread>
#include <unordered_map>

#include "json_util.hpp"
#include "metalearn/error.hpp"
#include "metalearn/folds.hpp"
#include "metalearn/version.hpp"

namespace metalearn {

namespace fs = std::filesystem;
using detail::Json;

namespace {

constexpr const char* kManifestFile = "manifest";
constexpr const char* kDatasetsFile = "datasets.ndjson";
constexpr const char* kPipelinesFile = "pipelines.ndjson";
constexpr const char* kExperimentsFile = "experiments.ndjson";

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Appends one line and syncs it to disk.
class DurableAppender {
 public:
  explicit DurableAppender(fs::path path) : path_(std::move(path)) {}
  ~DurableAppender() {
    if (file_) std::fclose(file_);
  }
  DurableAppender(const DurableAppender&) = delete;
  DurableAppender& operator=(const DurableAppender&) = delete;

  void append(const std::string& line) {
    if (!file_) {
      file_ = std::fopen(path_.c_str(), "ab");
      if (!file_) throw Error(ErrorCode::kIo, "cannot open " + path_.string() + " for append");
    }
    const std::string data = line + "\n";
    if (std::fwrite(data.data(), 1, data.size(), file_) != data.size() || std::fflush(file_) != 0 ||
        ::fsync(::fileno(file_)) != 0) {
      throw Error(ErrorCode::kIo, "append to " + path_.string() + " failed");
    }
  }

 private:
  fs::path path_;
  std::FILE* file_ = nullptr;
};

// Reads all complete lines; a trailing partial line is cut off the file.
std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  if (!fs::exists(path)) return lines;
  std::string text = detail::read_text(path);
  if (!text.empty() && text.back() != '\n') {
    const auto keep = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
    std::cerr << "warning: dropping an incomplete final line of " << path.string() << "\n";
    fs::resize_file(path, keep);
    text.resize(keep);
  }
  std::size_t start = 0;
  while (start < text.size()) {
    const auto end = text.find('\n', start);
    if (end > start) lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

Json mf_to_json(const MetaFeatureVector& v) {
  Json values = Json::array();
  for (const auto& x : v.values) values.push_back(x ? Json(*x) : Json(nullptr));
  Json diag = Json::object();
  for (const auto& [k, d] : v.diagnostics) diag[k] = d;
  return {{"values", std::move(values)}, {"diagnostics", std::move(diag)}};
}

Json dataset_to_json(const DatasetRecord& r) {
  return {{"id", r.id},         {"name", r.name}, {"source", r.source},
          {"target", r.target}, {"n", r.n},       {"p", r.p},
          {"c", r.c},           {"catalogue_version", r.metafeatures.catalogue_version},
          {"metafeatures", mf_to_json(r.metafeatures)}};
}

DatasetRecord dataset_from_json(const Json& j, const std::vector<std::string>& names) {
  DatasetRecord r;
  r.id = j.at("id").get<std::string>();
  r.name = j.at("name").get<std::string>();
  r.source = j.at("source").get<std::string>();
  r.target = j.at("target").get<std::string>();
  r.n = j.at("n").get<std::size_t>();
  r.p = j.at("p").get<std::size_t>();
  r.c = j.at("c").get<int>();
  r.metafeatures.dataset_id = r.id;
  r.metafeatures.catalogue_version = j.at("catalogue_version").get<std::string>();
  const auto& mf = j.at("metafeatures");
  const auto& values = mf.at("values");
  if (values.size() != names.size()) {
    throw Error(ErrorCode::kCatalogueMismatch, "dataset '" + r.id + "' has " +
                                                   std::to_string(values.size()) +
                                                   " meta-features, catalogue has " +
                                                   std::to_string(names.size()));
  }
  r.metafeatures.names = names;
  for (const auto& v : values) {
    r.metafeatures.values.push_back(v.is_null() ? std::nullopt : std::optional<double>(v.get<double>()));
  }
  for (const auto& [k, d] : mf.at("diagnostics").items()) r.metafeatures.diagnostics[k] = d.get<double>();
  return r;
}

Json pipeline_to_json(const PipelineRecord& r) {
  return {{"pipeline_id", r.pipeline_id},
          {"algorithm", std::string(to_string(r.algorithm))},
          {"config", detail::to_json(r.config)}};
}

PipelineRecord pipeline_from_json(const Json& j) {
  return {j.at("pipeline_id").get<std::string>(), parse_algorithm(j.at("algorithm").get<std::string>()),
          detail::assignment_from_json(j.at("config"))};
}

Json experiment_to_json(const ExperimentRecord& r) {
  Json scores = Json::object();
  for (const auto& [m, s] : r.scores) {
    scores[std::string(to_string(m))] = {{"mean", s.mean}, {"std", s.std}, {"folds", s.folds}};
  }
  return {{"experiment_id", r.experiment_id},
          {"dataset_id", r.dataset_id},
          {"pipeline_id", r.pipeline_id},
          {"algorithm", std::string(to_string(r.algorithm))},
          {"config", detail::to_json(r.config)},
          {"seed", r.seed},
          {"k", r.k},
          {"repeats", r.repeats},
          {"failed", r.failed},
          {"failure", r.failure},
          {"scores", std::move(scores)},
          {"runtime_seconds", r.runtime_seconds},
          {"memory_bytes", r.memory_bytes},
          {"timestamp", r.timestamp},
          {"engine_version", r.engine_version}};
}

ExperimentRecord experiment_from_json(const Json& j) {
  ExperimentRecord r;
  r.experiment_id = j.at("experiment_id").get<std::uint64_t>();
  r.dataset_id = j.at("dataset_id").get<std::string>();
  r.pipeline_id = j.at("pipeline_id").get<std::string>();
  r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  r.config = detail::assignment_from_json(j.at("config"));
  r.seed = j.at("seed").get<std::uint64_t>();
  r.k = j.at("k").get<int>();
  r.repeats = j.at("repeats").get<int>();
  r.failed = j.at("failed").get<bool>();
  r.failure = j.at("failure").get<std::string>();
  for (const auto& [name, s] : j.at("scores").items()) {
    MetricSummary m;
    m.mean = s.at("mean").get<double>();
    m.std = s.at("std").get<double>();
    m.folds = s.at("folds").get<std::vector<double>>();
    r.scores[parse_metric(name)] = std::move(m);
  }
  r.runtime_seconds = j.at("runtime_seconds").get<double>();
  r.memory_bytes = j.at("memory_bytes").get<std::size_t>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.engine_version = j.at("engine_version").get<std::string>();
  return r;
}

KbManifest current_manifest() {
  KbManifest m;
  m.catalogue_version = std::string(kCatalogueVersion);
  for (const auto& e : catalogue()) m.catalogue.push_back(e.name);
  m.engine_version = std::string(engine_version());
  return m;
}

Json manifest_to_json(const KbManifest& m) {
  return {{"format", "metalearn-kb"},
          {"schema_version", m.schema_version},
          {"catalogue_version", m.catalogue_version},
          {"catalogue", m.catalogue},
          {"engine_version", m.engine_version},
          {"files", {kDatasetsFile, kPipelinesFile, kExperimentsFile}}};
}

std::string pair_key(const std::string& d, const std::string& p) { return d + '\x1f' + p; }

}  // namespace

struct KnowledgeBase::Impl {
  std::optional<fs::path> dir;
  KbManifest manifest = current_manifest();
  std::vector<DatasetRecord> datasets;
  std::vector<PipelineRecord> pipelines;
  std::vector<ExperimentRecord> experiments;
  std::unordered_map<std::string, std::size_t> dataset_index;
  std::unordered_map<std::string, std::size_t> pipeline_index;
  std::set<std::string> pairs;
  std::unique_ptr<DurableAppender> dataset_log, pipeline_log, experiment_log;

  void index_dataset(DatasetRecord r) {
    if (dataset_index.count(r.id)) {
      throw Error(ErrorCode::kInvalidArgument, "dataset '" + r.id + "' already in the knowledge base");
    }
    dataset_index[r.id] = datasets.size();
    datasets.push_back(std::move(r));
  }
  bool index_pipeline(PipelineRecord r) {
    if (pipeline_index.count(r.pipeline_id)) return false;
    pipeline_index[r.pipeline_id] = pipelines.size();
    pipelines.push_back(std::move(r));
    return true;
  }
  void check_refs(const ExperimentRecord& r) const {
    if (!dataset_index.count(r.dataset_id)) {
      throw Error(ErrorCode::kReferentialIntegrity,
                  "experiment references unknown dataset '" + r.dataset_id + "'");
    }
    if (!pipeline_index.count(r.pipeline_id)) {
      throw Error(ErrorCode::kReferentialIntegrity,
                  "experiment references unknown pipeline '" + r.pipeline_id + "'");
    }
  }
  void index_experiment(ExperimentRecord r) {
    check_refs(r);
    pairs.insert(pair_key(r.dataset_id, r.pipeline_id));
    experiments.push_back(std::move(r));
  }
};

std::string pipeline_id(AlgorithmId algorithm, const Assignment& config) {
  const auto h = stable_hash(std::string(to_string(algorithm)) + "|" + canonical(config));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

KnowledgeBase::KnowledgeBase() : impl_(std::make_unique<Impl>()) {}
KnowledgeBase::~KnowledgeBase() = default;
KnowledgeBase::KnowledgeBase(KnowledgeBase&&) noexcept = default;
KnowledgeBase& KnowledgeBase::operator=(KnowledgeBase&&) noexcept = default;

KnowledgeBase KnowledgeBase::open(const fs::path& dir, bool create) {
  KnowledgeBase kb;
  auto& s = *kb.impl_;
  s.dir = dir;
  const auto manifest_path = dir / kManifestFile;
  if (!fs::exists(manifest_path)) {
    if (!create) throw Error(ErrorCode::kFileNotFound, "no knowledge base at " + dir.string());
    fs::create_directories(dir);
    detail::write_text_atomic(manifest_path, manifest_to_json(s.manifest).dump(2) + "\n");
  } else {
    const Json m = detail::parse_json(detail::read_text(manifest_path), manifest_path.string());
    try {
      if (m.at("format").get<std::string>() != "metalearn-kb") {
        throw Error(ErrorCode::kParse, manifest_path.string() + " is not a knowledge-base manifest");
      }
      s.manifest.schema_version = m.at("schema_version").get<int>();
      s.manifest.catalogue_version = m.at("catalogue_version").get<std::string>();
      s.manifest.catalogue = m.at("catalogue").get<std::vector<std::string>>();
      s.manifest.engine_version = m.at("engine_version").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, "malformed manifest: " + std::string(e.what()));
    }
  }

  auto load = [&](const char* file, auto&& fn) {
    const auto path = dir / file;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
      ++line_no;
      const Json j = detail::parse_json(line, path.string() + " line " + std::to_string(line_no));
      try {
        fn(j);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::kParse,
                    path.string() + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  };
  load(kDatasetsFile, [&](const Json& j) { s.index_dataset(dataset_from_json(j, s.manifest.catalogue)); });
  load(kPipelinesFile, [&](const Json& j) { s.index_pipeline(pipeline_from_json(j)); });
  load(kExperimentsFile, [&](const Json& j) { s.index_experiment(experiment_from_json(j)); });
  s.dataset_log = std::make_unique<DurableAppender>(dir / kDatasetsFile);
  s.pipeline_log = std::make_unique<DurableAppender>(dir / kPipelinesFile);
  s.experiment_log = std::make_unique<DurableAppender>(dir / kExperimentsFile);
  return kb;
}

const std::optional<fs::path>& KnowledgeBase::directory() const { return impl_->dir; }
const KbManifest& KnowledgeBase::manifest() const { return impl_->manifest; }
const std::vector<DatasetRecord>& KnowledgeBase::datasets() const { return impl_->datasets; }
const std::vector<PipelineRecord>& KnowledgeBase::pipelines() const { return impl_->pipelines; }
const std::vector<ExperimentRecord>& KnowledgeBase::experiments() const { return impl_->experiments; }

const DatasetRecord* KnowledgeBase::find_dataset(const std::string& id) const {
  auto it = impl_->dataset_index.find(id);
  return it == impl_->dataset_index.end() ? nullptr : &impl_->datasets[it->second];
}

const PipelineRecord* KnowledgeBase::find_pipeline(const std::string& id) const {
  auto it = impl_->pipeline_index.find(id);
  return it == impl_->pipeline_index.end() ? nullptr : &impl_->pipelines[it->second];
}

bool KnowledgeBase::has_experiment(const std::string& dataset_id, const std::string& pid) const {
  return impl_->pairs.count(pair_key(dataset_id, pid)) > 0;
}

void KnowledgeBase::add_dataset(DatasetRecord record) {
  auto& s = *impl_;
  if (record.metafeatures.catalogue_version != s.manifest.catalogue_version ||
      record.metafeatures.names != s.manifest.catalogue) {
    throw Error(ErrorCode::kCatalogueMismatch, "meta-features of '" + record.id +
                                                   "' do not follow catalogue " +
                                                   s.manifest.catalogue_version);
  }
  if (s.dataset_index.count(record.id)) {
    throw Error(ErrorCode::kInvalidArgument, "dataset '" + record.id + "' already in the knowledge base");
  }
  if (s.dataset_log) s.dataset_log->append(dataset_to_json(record).dump());
  s.index_dataset(std::move(record));
}

void KnowledgeBase::add_pipeline(PipelineRecord record) {
  auto& s = *impl_;
  if (s.pipeline_index.count(record.pipeline_id)) return;
  if (s.pipeline_log) s.pipeline_log->append(pipeline_to_json(record).dump());
  s.index_pipeline(std::move(record));
}

std::uint64_t KnowledgeBase::append_experiment(ExperimentRecord record) {
  auto& s = *impl_;
  s.check_refs(record);
  record.experiment_id = s.experiments.empty() ? 1 : s.experiments.back().experiment_id + 1;
  if (s.experiment_log) s.experiment_log->append(experiment_to_json(record).dump());
  const auto id = record.experiment_id;
  s.index_experiment(std::move(record));
  return id;
}

// --- building -------------------------------------------------------------

std::vector<Assignment> build_configs(AlgorithmId algorithm, std::size_t count, std::uint64_t seed) {
  const auto& space = hp_space(algorithm);
  Rng rng(mix_seed(seed, 0x5EEDULL + static_cast<std::uint64_t>(algorithm)));
  std::vector<Assignment> out;
  std::set<std::string> seen;
  std::size_t attempts = 0;
  while (out.size() < count && attempts < count * 100) {
    ++attempts;
    auto cfg = space.sample(rng);
    if (seen.insert(canonical(cfg)).second) out.push_back(std::move(cfg));
  }
  return out;
}

std::uint64_t dataset_seed(std::uint64_t seed, const std::string& dataset_id) {
  return mix_seed(seed, stable_hash(dataset_id));
}

BuildSummary build_knowledge_base(KnowledgeBase& kb, const std::vector<ManifestEntry>& manifest,
                                  const BuildOptions& options) {
  if (manifest.empty()) throw Error(ErrorCode::kInvalidArgument, "dataset manifest is empty");
  if (options.configs_per_algo < 1) throw Error(ErrorCode::kInvalidArgument, "configs_per_algo must be >= 1");
  if (options.algorithms.empty()) throw Error(ErrorCode::kInvalidArgument, "no algorithm selected");
  BuildSummary summary;

  std::vector<PipelineRecord> pipelines;
  for (auto alg : options.algorithms) {
    for (auto& cfg : build_configs(alg, options.configs_per_algo, options.seed)) {
      pipelines.push_back({pipeline_id(alg, cfg), alg, std::move(cfg)});
    }
  }

  struct Task {
    const Dataset* ds;
    std::uint64_t seed;
    const FoldPlan* plan;  // null when the plan could not be built
    std::string plan_error;
    const PipelineRecord* pipeline;
  };

  for (const auto& entry : manifest) {
    const Dataset ds = load_dataset(entry.path, entry.target, entry.id);
    if (!kb.find_dataset(ds.id())) {
      DatasetRecord rec;
      rec.id = ds.id();
      rec.name = ds.name();
      rec.source = entry.path.string();
      rec.target = entry.target;
      rec.n = ds.n();
      rec.p = ds.p();
      rec.c = ds.c();
      rec.metafeatures = extract_all(ds, options.seed);
      kb.add_dataset(std::move(rec));
    }
    for (const auto& p : pipelines) kb.add_pipeline(p);

    const std::uint64_t seed = dataset_seed(options.seed, ds.id());
    std::optional<FoldPlan> plan;
    std::string plan_error;
    try {
      plan = stratified_kfold(ds, options.k, options.repeats, seed);
    } catch (const Error& e) {
      plan_error = e.what();
    }

    std::vector<Task> tasks;
    for (const auto& p : pipelines) {
      if (kb.has_experiment(ds.id(), p.pipeline_id)) {
        ++summary.skipped;
        continue;
      }
      tasks.push_back({&ds, seed, plan ? &*plan : nullptr, plan_error, &p});
    }

    auto run = [&](const Task& t) {
      ExperimentRecord r;
      r.dataset_id = t.ds->id();
      r.pipeline_id = t.pipeline->pipeline_id;
      r.algorithm = t.pipeline->algorithm;
      r.config = t.pipeline->config;
      r.seed = t.seed;
      r.k = options.k;
      r.repeats = options.repeats;
      r.engine_version = std::string(engine_version());
      if (!t.plan) {
        r.failed = true;
        r.failure = t.plan_error;
      } else {
        const auto start = std::chrono::steady_clock::now();
        try {
          const auto scores = evaluate_pipeline({r.algorithm, r.config, r.seed}, *t.ds, *t.plan, options.metrics);
          r.scores = scores.metrics;
          r.runtime_seconds = scores.runtime_seconds;
          r.memory_bytes = scores.memory_bytes;
        } catch (const Error& e) {
          r.failed = true;
          r.failure = e.what();
          r.runtime_seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
      }
      r.timestamp = utc_timestamp();
      return r;
    };

    const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
    std::size_t next = 0;
    while (next < tasks.size()) {
      std::size_t batch = std::min(tasks.size() - next, jobs * 4);
      if (options.stop_after) batch = std::min(batch, *options.stop_after - summary.added);
      std::vector<ExperimentRecord> results(batch);
      if (jobs == 1) {
        for (std::size_t b = 0; b < batch; ++b) results[b] = run(tasks[next + b]);
      } else {
        std::vector<std::thread> workers;
        std::vector<std::exception_ptr> errors(jobs);
        for (std::size_t w = 0; w < jobs; ++w) {
          workers.emplace_back([&, w] {
            try {
              for (std::size_t b = w; b < batch; b += jobs) results[b] = run(tasks[next + b]);
            } catch (...) {
              errors[w] = std::current_exception();
            }
          });
        }
        for (auto& th : workers) th.join();
        for (auto& e : errors) {
          if (e) std::rethrow_exception(e);
        }
      }
      // Single writer: commit in task order regardless of completion order.
      for (auto& r : results) {
        if (r.failed) ++summary.failed;
        kb.append_experiment(r);
        ++summary.added;
        if (options.on_record) options.on_record(kb.experiments().back());
      }
      next += batch;
      if (options.stop_after && summary.added >= *options.stop_after) {
        summary.interrupted = next < tasks.size() || &entry != &manifest.back();
        return summary;
      }
    }
  }
  return summary;
}

// --- queries --------------------------------------------------------------

std::vector<RankedPipeline> query_best(const KnowledgeBase& kb, const std::string& dataset_id,
                                       Metric metric, std::size_t top_n) {
  if (!kb.find_dataset(dataset_id)) {
    throw Error(ErrorCode::kUnknownDataset, "dataset '" + dataset_id + "' is not in the knowledge base");
  }
  std::unordered_map<std::string, const ExperimentRecord*> latest;
  bool any = false;
  for (const auto& r : kb.experiments()) {
    if (r.dataset_id != dataset_id) continue;
    any = true;
    if (r.failed || !r.scores.count(metric)) continue;
    auto& slot = latest[r.pipeline_id];
    if (!slot || r.experiment_id > slot->experiment_id) slot = &r;
  }
  if (latest.empty()) {
    throw Error(any ? ErrorCode::kUnknownMetric : ErrorCode::kNoExperiments,
                "no " + std::string(to_string(metric)) + " scores for dataset '" + dataset_id + "'");
  }
  std::vector<RankedPipeline> out;
  for (const auto& [pid, r] : latest) {
    out.push_back({pid, r->algorithm, r->config, r->scores.at(metric).mean, r->runtime_seconds});
  }
  std::sort(out.begin(), out.end(), [](const RankedPipeline& a, const RankedPipeline& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.runtime_seconds != b.runtime_seconds) return a.runtime_seconds < b.runtime_seconds;
    return a.pipeline_id < b.pipeline_id;
  });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

KbStats kb_stats(const KnowledgeBase& kb) {
  KbStats s;
  s.datasets = kb.datasets().size();
  s.pipelines = kb.pipelines().size();
  s.experiments = kb.experiments().size();
  for (const auto& r : kb.experiments()) s.failed += r.failed;
  bool first = true;
  for (const auto& d : kb.datasets()) {
    if (first) {
      s.classes_min = s.classes_max = d.c;
      s.attributes_min = s.attributes_max = d.p;
      s.instances_min = s.instances_max = d.n;
      first = false;
      continue;
    }
    s.classes_min = std::min(s.classes_min, d.c);
    s.classes_max = std::max(s.classes_max, d.c);
    s.attributes_min = std::min(s.attributes_min, d.p);
    s.attributes_max = std::max(s.attributes_max, d.p);
    s.instances_min = std::min(s.instances_min, d.n);
    s.instances_max = std::max(s.instances_max, d.n);
  }
  return s;
}

}  // namespace metalearn
