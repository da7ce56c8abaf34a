#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "metalearn/dataset.hpp"
#include "metalearn/error.hpp"
#include "metalearn/evaluation.hpp"
#include "metalearn/folds.hpp"
#include "metalearn/hpo.hpp"
#include "metalearn/knowledge_base.hpp"
#include "metalearn/learners.hpp"
#include "metalearn/metafeatures.hpp"
#include "metalearn/recommender.hpp"
#include "metalearn/synthetic.hpp"

namespace cli {

using namespace metalearn;
namespace fs = std::filesystem;

namespace {

// Flag values that fail to parse are usage errors, not data errors.
template <class F>
auto flag(F&& parse) -> decltype(parse()) {
  try {
    return parse();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  }
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<AlgorithmId> parse_algorithms(const std::string& text) {
  if (text == "all") return {kAllAlgorithms.begin(), kAllAlgorithms.end()};
  std::vector<AlgorithmId> out;
  for (const auto& name : split(text)) {
    const auto id = flag([&] { return parse_algorithm(name); });
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidArgument, "no algorithm given");
  return out;
}

void emit(const Report& report, const Output& out, const std::string& text) {
  if (!out.path.empty()) report.write(out.path);
  if (out.json) {
    std::cout << report.text();
  } else {
    std::cout << text;
  }
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

std::string dataset_id_of(const std::string& path) { return fs::path(path).stem().string(); }

}  // namespace

void run_extract_mf(const ExtractMfArgs& a, const Json& run_config) {
  const auto ds = load_dataset(a.dataset, a.target);
  const auto mf = extract_all(ds, a.seed);
  Report report(run_config);
  report.add(to_json(mf));

  std::ostringstream text;
  text << "dataset " << ds.id() << ": n=" << ds.n() << " p=" << ds.p() << " classes=" << ds.c() << "\n";
  text << "catalogue " << mf.catalogue_version << ", " << mf.size() << " meta-features\n";
  for (std::size_t i = 0; i < mf.size(); ++i) {
    text << "  " << std::left << std::setw(28) << mf.names[i]
         << (mf.values[i] ? fmt(*mf.values[i], 6) : std::string("missing")) << "\n";
  }
  for (const auto& [k, v] : mf.diagnostics) text << "  [diagnostic] " << k << " = " << v << "\n";
  emit(report, a.out, text.str());
}

void run_tune(const TuneArgs& a, const Json& run_config) {
  const auto algorithm = flag([&] { return parse_algorithm(a.algorithm); });
  const auto metric = flag([&] { return parse_metric(a.metric); });
  const auto ds = load_dataset(a.dataset, a.target);
  const auto& space = hp_space(algorithm);
  const auto plan = stratified_kfold(ds, a.folds, a.repeats, a.seed);

  std::size_t failures = 0;
  const Objective objective = [&](const Assignment& cfg) {
    try {
      return evaluate_pipeline({algorithm, cfg, a.seed}, ds, plan, {metric}).at(metric).mean;
    } catch (const Error& e) {
      if (!e.is_data_error()) throw;
      ++failures;  // a failing configuration scores the metric's minimum
      return 0.0;
    }
  };

  SearchResult result;
  if (a.strategy == "grid") {
    // The finest grid that fits the budget.
    std::optional<int> per_dim;
    for (int per = 1; per <= 50; ++per) {
      try {
        grid_points(space, per, a.budget);
        per_dim = per;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kGridTooLarge) throw;
        break;
      }
    }
    if (!per_dim) {
      throw Error(ErrorCode::kInvalidArgument,
                  "budget " + std::to_string(a.budget) + " is smaller than the coarsest grid of " +
                      std::string(to_string(algorithm)));
    }
    result = grid_search(space, objective, *per_dim, a.budget);
  } else if (a.strategy == "random") {
    result = random_search(space, objective, a.budget, a.seed);
  } else if (a.strategy == "bayes") {
    if (a.budget < 3) throw Error(ErrorCode::kInvalidArgument, "bayes needs a budget of at least 3");
    const auto init = std::clamp<std::size_t>(a.budget / 3, 2, 10);
    result = bayes_opt(space, objective, a.budget, init, a.seed);
  } else {
    GaOptions ga;
    ga.pop_size = std::clamp<std::size_t>(a.budget / 5, 2, 20);
    if (ga.pop_size > a.budget) ga.pop_size = a.budget;
    ga.generations = a.budget / ga.pop_size - 1;
    result = genetic_search(space, objective, ga, a.seed);
  }

  Report report(run_config);
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    report.add({{"record", "trial"},
                {"index", i + 1},
                {"config", to_json(result.history[i].config)},
                {"score", result.history[i].score}});
  }
  report.add({{"record", "tune_result"},
              {"dataset_id", ds.id()},
              {"algorithm", std::string(to_string(algorithm))},
              {"strategy", a.strategy},
              {"metric", std::string(to_string(metric))},
              {"best_config", to_json(result.best_config)},
              {"best_score", result.best_score},
              {"evaluations", result.evaluations_used},
              {"failed_evaluations", failures},
              {"surrogate_fallbacks", result.surrogate_fallbacks}});

  if (!a.model_out.empty()) {
    const auto model = fit({algorithm, result.best_config, a.seed}, ds);
    write_atomic(a.model_out, model.serialize());
  }

  std::ostringstream text;
  text << "tuned " << to_string(algorithm) << " on " << ds.id() << " with " << a.strategy << " search\n";
  text << "  evaluations: " << result.evaluations_used << " (" << failures << " failed)\n";
  text << "  best " << to_string(metric) << ": " << fmt(result.best_score) << "\n";
  text << "  best config: " << canonical(result.best_config) << "\n";
  if (!a.model_out.empty()) text << "  model written to " << a.model_out << "\n";
  emit(report, a.out, text.str());
}

void run_build_kb(const BuildKbArgs& a, const Json& run_config) {
  BuildOptions options;
  options.algorithms = parse_algorithms(a.algorithms);
  options.metrics = flag([&] { return parse_metric_list(a.metrics); });
  options.configs_per_algo = a.configs;
  options.k = a.folds;
  options.repeats = a.repeats;
  options.seed = a.seed;
  options.jobs = a.jobs;
  options.stop_after = a.stop_after;
  const auto manifest = read_manifest(a.manifest);

  auto kb = KnowledgeBase::open(a.kb, true);
  if (!kb.experiments().empty() && !a.resume) {
    throw Error(ErrorCode::kInvalidArgument, "knowledge base " + a.kb + " already holds " +
                                                 std::to_string(kb.experiments().size()) +
                                                 " experiments; pass --resume to continue it");
  }
  {
    std::ofstream runs(fs::path(a.kb) / "runs.ndjson", std::ios::app);
    runs << run_config.dump() << "\n";
  }

  const auto primary = options.metrics.front();
  if (!a.quiet) {
    options.on_record = [&](const ExperimentRecord& r) {
      std::cerr << "[" << r.experiment_id << "] " << r.dataset_id << " " << to_string(r.algorithm) << " "
                << r.pipeline_id << " ";
      if (r.failed) {
        std::cerr << "FAILED: " << r.failure << "\n";
      } else {
        std::cerr << to_string(primary) << "=" << fmt(r.scores.at(primary).mean) << "\n";
      }
    };
  }
  const auto summary = build_knowledge_base(kb, manifest, options);
  const auto stats = kb_stats(kb);
  std::cout << "knowledge base " << a.kb << ": " << summary.added << " experiments added, "
            << summary.skipped << " already present, " << summary.failed << " failed\n";
  std::cout << "  totals: " << stats.datasets << " datasets, " << stats.pipelines << " pipelines, "
            << stats.experiments << " experiments\n";
  if (summary.interrupted) std::cout << "  stopped early; rerun with --resume to finish\n";
}

void run_recommend(const RecommendArgs& a, const Json& run_config) {
  const auto metric = flag([&] { return parse_metric(a.metric); });
  const auto method = flag([&] { return parse_method(a.method); });
  const auto kb = KnowledgeBase::open(a.kb);
  const auto ds = load_dataset(a.dataset, a.target, dataset_id_of(a.dataset));
  const auto mf = extract_all(ds, a.seed);

  std::set<std::string> exclude;
  if (a.exclude_self) exclude.insert(ds.id());
  const auto start = std::chrono::steady_clock::now();
  Recommendation rec;
  if (method == RecommendMethod::kKnn) {
    KnnOptions o;
    o.k = a.k;
    o.top_n = a.top;
    o.exclude = exclude;
    rec = recommend_knn(mf, kb, metric, o);
  } else {
    MetaModelOptions o;
    o.promising_threshold = a.threshold;
    o.n_trees = a.trees;
    o.seed = a.seed;
    o.exclude = exclude;
    const auto model = train_rf_metamodel(kb, metric, o);
    rec = recommend_rf(mf, model, kb.pipelines(), a.top);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Report report(run_config);
  auto body = to_json(rec);
  body["dataset_id"] = ds.id();
  report.add(std::move(body));

  std::ostringstream text;
  text << "recommendations for " << ds.id() << " (" << to_string(method) << ", " << to_string(metric)
       << ", " << fmt(seconds * 1000.0, 1) << " ms)\n";
  if (!rec.neighbors.empty()) {
    text << "nearest datasets:\n";
    for (const auto& n : rec.neighbors) text << "  " << std::left << std::setw(24) << n.dataset_id << fmt(n.distance) << "\n";
  }
  text << "ranking:\n";
  std::size_t rank = 0;
  for (const auto& p : rec.pipelines) {
    text << "  " << std::setw(3) << std::right << ++rank << ". " << std::left << std::setw(5)
         << to_string(p.algorithm) << " " << fmt(p.predicted_score) << "  " << canonical(p.config) << "\n";
  }
  emit(report, a.out, text.str());
}

void run_loo_eval(const LooEvalArgs& a, const Json& run_config) {
  const auto metric = flag([&] { return parse_metric(a.metric); });
  std::vector<RecommendMethod> methods;
  for (const auto& m : split(a.methods)) methods.push_back(flag([&] { return parse_method(m); }));
  if (methods.empty()) throw Error(ErrorCode::kInvalidArgument, "no method given");
  const auto kb = KnowledgeBase::open(a.kb);

  std::vector<LooReport> reports;
  for (auto m : methods) {
    LooOptions o;
    o.method = m;
    o.k = a.k;
    o.tolerance = a.tolerance;
    o.baseline_resamples = a.resamples;
    o.seed = a.seed;
    o.rf.promising_threshold = a.threshold;
    o.rf.n_trees = a.trees;
    o.rf.seed = a.seed;
    reports.push_back(loo_evaluate(kb, metric, o));
  }

  Report report(run_config);
  for (const auto& r : reports) report.add(to_json(r));

  std::ostringstream text;
  text << "leave-one-dataset-out, " << to_string(metric) << ", hit within " << fmt(a.tolerance * 100, 1)
       << "% of best\n";
  text << std::left << std::setw(24) << "dataset" << std::setw(9) << "best";
  for (const auto& r : reports) text << std::setw(16) << to_string(r.method);
  text << "\n";
  for (std::size_t i = 0; i < reports.front().datasets.size(); ++i) {
    const auto& d = reports.front().datasets[i];
    text << std::setw(24) << d.dataset_id << std::setw(9) << fmt(d.best_score);
    for (const auto& r : reports) {
      const auto& x = r.datasets[i];
      text << std::setw(16) << (fmt(x.recommended_score) + (x.hit ? " hit" : ""));
    }
    text << "\n";
  }
  for (const auto& r : reports) {
    text << to_string(r.method) << ": hit rate " << fmt(r.hit_rate, 3) << ", regret mean "
         << fmt(r.regret_mean) << " median " << fmt(r.regret_median) << " max " << fmt(r.regret_max)
         << "; random baseline " << fmt(r.baseline_mean, 3) << " (p=" << fmt(r.p_value, 3) << ")\n";
  }
  emit(report, a.out, text.str());
}

void run_kb_stats(const KbStatsArgs& a, const Json& run_config) {
  const auto kb = KnowledgeBase::open(a.kb);
  const auto s = kb_stats(kb);
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_algorithm;
  for (const auto& r : kb.experiments()) {
    auto& slot = per_algorithm[std::string(to_string(r.algorithm))];
    ++slot.first;
    slot.second += r.failed;
  }
  Json algos = Json::object();
  for (const auto& [name, c] : per_algorithm) algos[name] = {{"experiments", c.first}, {"failed", c.second}};

  Report report(run_config);
  report.add({{"record", "kb_stats"},
              {"catalogue_version", kb.manifest().catalogue_version},
              {"engine_version", kb.manifest().engine_version},
              {"datasets", s.datasets},
              {"pipelines", s.pipelines},
              {"experiments", s.experiments},
              {"failed", s.failed},
              {"classes", {s.classes_min, s.classes_max}},
              {"attributes", {s.attributes_min, s.attributes_max}},
              {"instances", {s.instances_min, s.instances_max}},
              {"algorithms", std::move(algos)}});

  std::ostringstream text;
  text << "knowledge base " << a.kb << " (catalogue " << kb.manifest().catalogue_version << ")\n";
  text << "  datasets:    " << s.datasets << "\n  pipelines:   " << s.pipelines << "\n  experiments: "
       << s.experiments << " (" << s.failed << " failed)\n";
  if (s.datasets > 0) {
    text << "  classes " << s.classes_min << ".." << s.classes_max << ", attributes " << s.attributes_min
         << ".." << s.attributes_max << ", instances " << s.instances_min << ".." << s.instances_max << "\n";
  }
  for (const auto& [name, c] : per_algorithm) {
    text << "  " << std::left << std::setw(5) << name << " " << c.first << " experiments, " << c.second
         << " failed\n";
  }
  emit(report, a.out, text.str());
}

void run_gen_corpus(const GenCorpusArgs& a, const Json& run_config) {
  const auto files = write_desk_corpus(a.dir, a.seed);
  write_atomic(fs::path(a.dir) / "run_config.json", run_config.dump(2) + "\n");
  std::cout << "wrote " << files.all.size() << " datasets to " << a.dir << " (manifest.csv, "
            << files.kb.size() << " in kb_manifest.csv)\n";
}

}  // namespace cli
