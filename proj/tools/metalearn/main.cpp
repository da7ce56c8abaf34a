#include <cstdlib>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "metalearn/error.hpp"
#include "metalearn/version.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Every option of the subcommand with its resolved value.
cli::Json run_config(const CLI::App& sub) {
  cli::Json flags = cli::Json::object();
  for (const auto* opt : sub.get_options()) {
    if (opt->get_name() == "--help" || opt->get_name().empty()) continue;
    std::string name = opt->get_name();
    if (!opt->get_lnames().empty()) {
      name = opt->get_lnames().front();
    } else if (!opt->get_snames().empty()) {
      name = opt->get_snames().front();
    }
    if (opt->get_items_expected_max() == 0) {
      flags[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      flags[name] = opt->as<std::string>();
    } else {
      flags[name] = opt->get_default_str();
    }
  }
  return {{"record", "run_config"},
          {"subcommand", sub.get_name()},
          {"engine_version", std::string(metalearn::engine_version())},
          {"flags", std::move(flags)}};
}

void add_output(CLI::App* sub, cli::Output& out) {
  sub->add_option("-o,--output", out.path, "Write the structured (NDJSON) report here");
  sub->add_flag("--json", out.json, "Print the structured report instead of text");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metalearn: meta-learning engine for classifier and hyperparameter recommendation"};
  app.set_version_flag("--version", std::string(metalearn::engine_version()));
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  std::function<void()> action;

  cli::ExtractMfArgs mf;
  auto* s_mf = app.add_subcommand("extract-mf", "Compute the meta-feature vector of a dataset");
  s_mf->add_option("dataset", mf.dataset, "CSV file")->required();
  s_mf->add_option("-t,--target", mf.target, "Target column");
  s_mf->add_option("--seed", mf.seed, "Seed for landmarking and model-based features");
  add_output(s_mf, mf.out);
  s_mf->callback([&] { action = [&] { cli::run_extract_mf(mf, run_config(*s_mf)); }; });

  cli::TuneArgs tune;
  auto* s_tune = app.add_subcommand("tune", "Search the hyperparameters of one algorithm");
  s_tune->add_option("dataset", tune.dataset, "CSV file")->required();
  s_tune->add_option("-t,--target", tune.target, "Target column");
  s_tune->add_option("-a,--algorithm", tune.algorithm, "Algorithm (e.g. RF, SVM, lr)")->required();
  s_tune->add_option("-s,--strategy", tune.strategy, "Search strategy")
      ->check(CLI::IsMember({"grid", "random", "bayes", "ga"}));
  s_tune->add_option("-b,--budget", tune.budget, "Maximum number of evaluated configurations")
      ->check(CLI::PositiveNumber);
  s_tune->add_option("--seed", tune.seed, "Seed");
  s_tune->add_option("-m,--metric", tune.metric, "Metric to maximize");
  s_tune->add_option("--folds", tune.folds, "Cross-validation folds")->check(CLI::Range(2, 100));
  s_tune->add_option("--repeats", tune.repeats, "Cross-validation repeats")->check(CLI::Range(1, 100));
  s_tune->add_option("--model-out", tune.model_out, "Fit the best configuration on all rows and save it");
  add_output(s_tune, tune.out);
  s_tune->callback([&] { action = [&] { cli::run_tune(tune, run_config(*s_tune)); }; });

  cli::BuildKbArgs build;
  auto* s_build = app.add_subcommand("build-kb", "Evaluate sampled pipelines on a dataset manifest");
  s_build->add_option("manifest", build.manifest, "Manifest CSV (id,path,target)")->required();
  s_build->add_option("--kb", build.kb, "Knowledge-base directory")->envname("METALEARN_KB");
  s_build->add_option("--algorithms", build.algorithms, "Comma-separated algorithms or 'all'");
  s_build->add_option("--metrics", build.metrics, "Comma-separated metrics");
  s_build->add_option("--configs", build.configs, "Sampled configurations per algorithm")
      ->check(CLI::PositiveNumber);
  s_build->add_option("--folds", build.folds, "Cross-validation folds")->check(CLI::Range(2, 100));
  s_build->add_option("--repeats", build.repeats, "Cross-validation repeats")->check(CLI::Range(1, 100));
  s_build->add_option("--seed", build.seed, "Seed");
  s_build->add_option("-j,--jobs", build.jobs, "Concurrent pipeline evaluations")->check(CLI::Range(1, 256));
  s_build->add_flag("--resume", build.resume, "Continue a partially built knowledge base");
  s_build->add_option("--stop-after", build.stop_after, "Stop after this many new experiments");
  s_build->add_flag("-q,--quiet", build.quiet, "No per-experiment progress");
  s_build->callback([&] { action = [&] { cli::run_build_kb(build, run_config(*s_build)); }; });

  cli::RecommendArgs rec;
  auto* s_rec = app.add_subcommand("recommend", "Recommend pipelines for a new dataset");
  s_rec->add_option("dataset", rec.dataset, "CSV file")->required();
  s_rec->add_option("-t,--target", rec.target, "Target column");
  s_rec->add_option("--kb", rec.kb, "Knowledge-base directory")->envname("METALEARN_KB");
  s_rec->add_option("-m,--metric", rec.metric, "Metric");
  s_rec->add_option("-k,--k", rec.k, "Neighbor datasets")->check(CLI::PositiveNumber);
  s_rec->add_option("--top", rec.top, "Pipelines to report")->check(CLI::PositiveNumber);
  s_rec->add_option("--method", rec.method, "Recommender")->check(CLI::IsMember({"knn", "rf"}));
  s_rec->add_flag("--exclude-self", rec.exclude_self, "Ignore the KB entry with the dataset's id");
  s_rec->add_option("--threshold", rec.threshold, "Promising threshold of the rf meta-model")
      ->check(CLI::Range(0.0, 1.0));
  s_rec->add_option("--trees", rec.trees, "Trees of the rf meta-model")->check(CLI::PositiveNumber);
  s_rec->add_option("--seed", rec.seed, "Seed");
  add_output(s_rec, rec.out);
  s_rec->callback([&] { action = [&] { cli::run_recommend(rec, run_config(*s_rec)); }; });

  cli::LooEvalArgs loo;
  auto* s_loo = app.add_subcommand("loo-eval", "Leave-one-dataset-out evaluation of the recommenders");
  s_loo->add_option("--kb", loo.kb, "Knowledge-base directory")->envname("METALEARN_KB");
  s_loo->add_option("-m,--metric", loo.metric, "Metric");
  s_loo->add_option("--methods", loo.methods, "Comma-separated recommenders (knn,rf)");
  s_loo->add_option("-k,--k", loo.k, "Neighbor datasets")->check(CLI::PositiveNumber);
  s_loo->add_option("--tolerance", loo.tolerance, "Hit when within this fraction of the best")
      ->check(CLI::Range(0.0, 1.0));
  s_loo->add_option("--threshold", loo.threshold, "Promising threshold of the rf meta-model")
      ->check(CLI::Range(0.0, 1.0));
  s_loo->add_option("--trees", loo.trees, "Trees of the rf meta-model")->check(CLI::PositiveNumber);
  s_loo->add_option("--resamples", loo.resamples, "Random-baseline resamples")->check(CLI::PositiveNumber);
  s_loo->add_option("--seed", loo.seed, "Seed");
  add_output(s_loo, loo.out);
  s_loo->callback([&] { action = [&] { cli::run_loo_eval(loo, run_config(*s_loo)); }; });

  cli::KbStatsArgs stats;
  auto* s_stats = app.add_subcommand("kb-stats", "Summarize a knowledge base");
  s_stats->add_option("--kb", stats.kb, "Knowledge-base directory")->envname("METALEARN_KB");
  add_output(s_stats, stats.out);
  s_stats->callback([&] { action = [&] { cli::run_kb_stats(stats, run_config(*s_stats)); }; });

  cli::GenCorpusArgs corpus;
  auto* s_corpus = app.add_subcommand("gen-corpus", "Write the synthetic desk corpus");
  s_corpus->add_option("-d,--dir", corpus.dir, "Output directory");
  s_corpus->add_option("--seed", corpus.seed, "Seed");
  s_corpus->callback([&] { action = [&] { cli::run_gen_corpus(corpus, run_config(*s_corpus)); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    action();
  } catch (const metalearn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.is_data_error()) return kExitData;
    return e.code() == metalearn::ErrorCode::kInternal ? kExitInternal : kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return 0;
}
