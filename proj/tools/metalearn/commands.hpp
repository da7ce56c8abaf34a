#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "report.hpp"

namespace cli {

struct Output {
  std::string path;  // structured report destination; empty for none
  bool json = false;  // print the structured report instead of text
};

struct ExtractMfArgs {
  std::string dataset;
  std::string target = "class";
  std::uint64_t seed = 0;
  Output out;
};

struct TuneArgs {
  std::string dataset;
  std::string target = "class";
  std::string algorithm;
  std::string strategy = "random";
  std::size_t budget = 30;
  std::uint64_t seed = 0;
  std::string metric = "accuracy";
  int folds = 5;
  int repeats = 1;
  std::string model_out;
  Output out;
};

struct BuildKbArgs {
  std::string manifest;
  std::string kb = "kb";
  std::string algorithms = "all";
  std::string metrics = "accuracy,precision,recall,f1";
  std::size_t configs = 50;
  int folds = 5;
  int repeats = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool resume = false;
  std::optional<std::size_t> stop_after;
  bool quiet = false;
};

struct RecommendArgs {
  std::string dataset;
  std::string target = "class";
  std::string kb = "kb";
  std::string metric = "accuracy";
  std::size_t k = 5;
  std::size_t top = 10;
  std::string method = "knn";
  bool exclude_self = false;
  double threshold = 0.01;
  int trees = 500;
  std::uint64_t seed = 0;
  Output out;
};

struct LooEvalArgs {
  std::string kb = "kb";
  std::string metric = "accuracy";
  std::string methods = "knn,rf";
  std::size_t k = 5;
  double tolerance = 0.05;
  double threshold = 0.01;
  int trees = 500;
  int resamples = 20;
  std::uint64_t seed = 0;
  Output out;
};

struct KbStatsArgs {
  std::string kb = "kb";
  Output out;
};

struct GenCorpusArgs {
  std::string dir = "data/desk";
  std::uint64_t seed = 2024;
};

void run_extract_mf(const ExtractMfArgs& a, const Json& run_config);
void run_tune(const TuneArgs& a, const Json& run_config);
void run_build_kb(const BuildKbArgs& a, const Json& run_config);
void run_recommend(const RecommendArgs& a, const Json& run_config);
void run_loo_eval(const LooEvalArgs& a, const Json& run_config);
void run_kb_stats(const KbStatsArgs& a, const Json& run_config);
void run_gen_corpus(const GenCorpusArgs& a, const Json& run_config);

}  // namespace cli
